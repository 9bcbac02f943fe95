#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "splatkit/parallel.hpp"
#include "splatkit/raster.hpp"

namespace splatkit {

void SoftRenderConfig::validate() const {
    if (!(sigma_edge > 0.0)) throw ValidationError("sigma_edge must be positive");
    if (!(alpha_cutoff > 0.0 && alpha_cutoff < 1.0))
        throw ValidationError("alpha_cutoff must lie in (0,1)");
    if (tile_size < 1) throw ValidationError("tile_size must be positive");
}

namespace {

struct SplatFootprint {
    Eigen::Vector2d mean_px;   // continuous pixel coordinates
    Eigen::Matrix2d inv_cov;   // inverse 2D covariance in camera-plane units
    Eigen::Vector2d px_per_unit; // pixel pitch scaling per axis
    double depth = 0.0;
    double opacity = 0.0;
    Eigen::Vector3d payload = Eigen::Vector3d::Zero(); // color or decoded normal
    int x0 = 0, x1 = -1, y0 = 0, y1 = -1; // inclusive pixel bounds

    bool covers_tile(int tx0, int ty0, int tx1, int ty1) const {
        return x0 <= tx1 && x1 >= tx0 && y0 <= ty1 && y1 >= ty0;
    }
};

} // namespace

RenderOutput render_gaussians(const GaussianSet& set, const OrthoCamera& camera, RenderMode mode,
                              const SoftRenderConfig& config) {
    if (set.empty()) throw ValidationError("render_gaussians: empty gaussian set");
    set.validate();
    camera.validate();
    config.validate();

    const int h = camera.height, w = camera.width;
    const double sx = camera.pixels_per_unit_x();
    const double sy = camera.pixels_per_unit_y();

    // project every gaussian to a 2D footprint
    std::vector<SplatFootprint> splats;
    splats.reserve(set.size());
    size_t clamped_cov = 0;
    for (size_t i = 0; i < set.size(); ++i) {
        const Gaussian& g = set.gaussians[i];
        const Eigen::Vector3d center_cam = camera.to_camera(g.center);
        const double depth = -center_cam.z();
        if (depth < camera.near || depth > camera.far) continue;

        const Eigen::Matrix3d cov_cam =
            camera.rotation * covariance(g) * camera.rotation.transpose();
        Eigen::Matrix2d cov2d = cov_cam.topLeftCorner<2, 2>();
        double det = cov2d.determinant();
        if (det < 1e-12 * std::max(1.0, cov2d.trace() * cov2d.trace())) {
            cov2d += 1e-6 * Eigen::Matrix2d::Identity();
            det = cov2d.determinant();
            ++clamped_cov;
        }

        SplatFootprint s;
        s.inv_cov << cov2d(1, 1), -cov2d(0, 1), -cov2d(1, 0), cov2d(0, 0);
        s.inv_cov /= det;
        s.mean_px = camera.cam_to_pixel(center_cam);
        s.px_per_unit = {sx, sy};
        s.depth = depth;
        s.opacity = g.opacity;
        // normal mode composites camera-space normals, matching the mesh
        // renderer's frame (and keeping renders invariant under rigid
        // scene+camera rotations)
        s.payload = mode == RenderMode::Normal
                        ? (camera.rotation * (2.0 * g.color - Eigen::Vector3d::Ones())).eval()
                        : g.color;

        // 3-sigma extent, conservatively isotropic in camera units
        const double max_eig =
            0.5 * (cov2d.trace() + std::sqrt(std::max(0.0, cov2d.trace() * cov2d.trace() -
                                                               4.0 * det)));
        const double radius_units = 3.0 * std::sqrt(std::max(max_eig, 0.0));
        const double rx = radius_units * sx, ry = radius_units * sy;
        s.x0 = std::max(0, static_cast<int>(std::floor(s.mean_px.x() - rx)));
        s.x1 = std::min(w - 1, static_cast<int>(std::ceil(s.mean_px.x() + rx)));
        s.y0 = std::max(0, static_cast<int>(std::floor(s.mean_px.y() - ry)));
        s.y1 = std::min(h - 1, static_cast<int>(std::ceil(s.mean_px.y() + ry)));
        if (s.x0 > s.x1 || s.y0 > s.y1) continue;
        splats.push_back(s);
    }

    // front to back; equal depths keep input order
    std::stable_sort(splats.begin(), splats.end(),
                     [](const SplatFootprint& a, const SplatFootprint& b) {
                         return a.depth < b.depth;
                     });

    RenderOutput out;
    out.image = FeatureMap(3, h, w);
    out.alpha = FeatureMap(1, h, w);
    out.depth = FeatureMap(1, h, w, std::numeric_limits<double>::infinity());
    out.clamped_covariances = clamped_cov;

    std::vector<double> depth_accum(static_cast<size_t>(h) * w, 0.0);

    const int tile = config.tile_size;
    const int tiles_x = (w + tile - 1) / tile;
    const int tiles_y = (h + tile - 1) / tile;

    parallel_for(0, static_cast<size_t>(tiles_x) * tiles_y, [&](size_t lo, size_t hi) {
        std::vector<double> transmittance(static_cast<size_t>(tile) * tile);
        for (size_t t = lo; t < hi; ++t) {
            const int ty = static_cast<int>(t) / tiles_x;
            const int tx = static_cast<int>(t) % tiles_x;
            const int px0 = tx * tile, py0 = ty * tile;
            const int px1 = std::min(w - 1, px0 + tile - 1);
            const int py1 = std::min(h - 1, py0 + tile - 1);
            std::fill(transmittance.begin(), transmittance.end(), 1.0);

            for (const SplatFootprint& s : splats) {
                if (!s.covers_tile(px0, py0, px1, py1)) continue;
                const int gx0 = std::max(px0, s.x0), gx1 = std::min(px1, s.x1);
                const int gy0 = std::max(py0, s.y0), gy1 = std::min(py1, s.y1);
                for (int y = gy0; y <= gy1; ++y) {
                    for (int x = gx0; x <= gx1; ++x) {
                        double& tr = transmittance[static_cast<size_t>(y - py0) * tile + (x - px0)];
                        if (tr < 1e-4) continue;
                        const Eigen::Vector2d d((x - s.mean_px.x()) / s.px_per_unit.x(),
                                                (y - s.mean_px.y()) / s.px_per_unit.y());
                        const double quad = d.dot(s.inv_cov * d);
                        const double falloff = std::exp(-0.5 * quad);
                        const double a = s.opacity * falloff;
                        if (a < config.alpha_cutoff) continue;
                        const double weight = a * tr;
                        const size_t px = static_cast<size_t>(y) * w + x;
                        for (int c = 0; c < 3; ++c)
                            out.image.data()[static_cast<size_t>(c) * h * w + px] +=
                                s.payload[c] * weight;
                        out.alpha.data()[px] += weight;
                        depth_accum[px] += s.depth * weight;
                        tr *= (1.0 - a);
                    }
                }
            }
        }
    });

    // finalize depth and the normal-mode encoding
    for (size_t px = 0; px < static_cast<size_t>(h) * w; ++px) {
        const double a = out.alpha.data()[px];
        if (a > 0.0) out.depth.data()[px] = depth_accum[px] / a;
        if (mode == RenderMode::Normal) {
            Eigen::Vector3d n(out.image.data()[px], out.image.data()[h * static_cast<size_t>(w) + px],
                              out.image.data()[2 * static_cast<size_t>(h) * w + px]);
            if (config.renormalize_normals && a > config.renormalize_min_alpha &&
                n.norm() > 1e-12)
                n.normalize();
            for (int c = 0; c < 3; ++c)
                out.image.data()[static_cast<size_t>(c) * h * w + px] =
                    a > 0.0 ? 0.5 * (n[c] + 1.0) : 0.0;
        }
    }
    return out;
}

} // namespace splatkit
