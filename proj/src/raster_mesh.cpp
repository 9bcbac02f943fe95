#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "splatkit/parallel.hpp"
#include "splatkit/raster.hpp"

namespace splatkit {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct ProjectedMesh {
    std::vector<Eigen::Vector2d> pixel;  // continuous pixel coords per vertex
    std::vector<double> depth;           // camera-space depth per vertex
    std::vector<Eigen::Vector3d> normal_world;
    std::vector<Eigen::Vector3d> normal_cam;
    std::vector<double> area2d;          // signed pixel-space area per face
};

ProjectedMesh project_mesh(const TriMesh& mesh, const OrthoCamera& camera) {
    ProjectedMesh pm;
    pm.pixel.resize(mesh.vertices.size());
    pm.depth.resize(mesh.vertices.size());
    for (size_t v = 0; v < mesh.vertices.size(); ++v) {
        const Eigen::Vector3d p_cam = camera.to_camera(mesh.vertices[v]);
        pm.pixel[v] = camera.cam_to_pixel(p_cam);
        pm.depth[v] = -p_cam.z();
    }
    pm.normal_world = mesh.face_normals();
    pm.normal_cam.resize(mesh.faces.size());
    pm.area2d.resize(mesh.faces.size());
    for (size_t f = 0; f < mesh.faces.size(); ++f) {
        pm.normal_cam[f] = camera.rotation * pm.normal_world[f];
        const Eigen::Vector2d& a = pm.pixel[mesh.faces[f][0]];
        const Eigen::Vector2d& b = pm.pixel[mesh.faces[f][1]];
        const Eigen::Vector2d& c = pm.pixel[mesh.faces[f][2]];
        pm.area2d[f] = 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) -
                              (b.y() - a.y()) * (c.x() - a.x()));
    }
    return pm;
}

// per-pixel result of the soft silhouette pass
struct SilhouetteHit {
    int edge = -1;   // index into the contour edge list, -1 when beyond the band
    double t = 0.0;  // clamped segment parameter of the closest point
    double dist = 0.0;
    double signed_dist = 0.0; // clamped to +-band, positive inside
};

struct ContourEdge {
    int a = 0, b = 0; // vertex ids
};

struct MeshRaster {
    std::vector<int> face_id;     // covering face per pixel, -1 when empty
    std::vector<double> depth;    // camera depth per pixel (+inf when empty)
    std::vector<ContourEdge> contour;
    std::vector<SilhouetteHit> hits;
    double band = 0.0;
    ProjectedMesh pm;
};

// hard z-buffer coverage: nearest covering face per pixel center
void rasterize_hard(const TriMesh& mesh, const OrthoCamera& camera, const ProjectedMesh& pm,
                    MeshRaster& out) {
    const int h = camera.height, w = camera.width;
    out.face_id.assign(static_cast<size_t>(h) * w, -1);
    out.depth.assign(static_cast<size_t>(h) * w, std::numeric_limits<double>::infinity());
    for (size_t f = 0; f < mesh.faces.size(); ++f) {
        if (std::abs(pm.area2d[f]) < 1e-12) continue; // edge-on
        const Eigen::Vector2d& a = pm.pixel[mesh.faces[f][0]];
        const Eigen::Vector2d& b = pm.pixel[mesh.faces[f][1]];
        const Eigen::Vector2d& c = pm.pixel[mesh.faces[f][2]];
        const int x0 = std::max(0, static_cast<int>(std::ceil(std::min({a.x(), b.x(), c.x()}))));
        const int x1 = std::min(w - 1, static_cast<int>(std::floor(std::max({a.x(), b.x(), c.x()}))));
        const int y0 = std::max(0, static_cast<int>(std::ceil(std::min({a.y(), b.y(), c.y()}))));
        const int y1 = std::min(h - 1, static_cast<int>(std::floor(std::max({a.y(), b.y(), c.y()}))));
        if (x0 > x1 || y0 > y1) continue;
        const double inv_area = 1.0 / (2.0 * pm.area2d[f]);
        const double d0 = pm.depth[mesh.faces[f][0]];
        const double d1 = pm.depth[mesh.faces[f][1]];
        const double d2 = pm.depth[mesh.faces[f][2]];
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const Eigen::Vector2d p(x, y);
                const double w0 = ((b.x() - p.x()) * (c.y() - p.y()) -
                                   (b.y() - p.y()) * (c.x() - p.x())) * inv_area;
                const double w1 = ((c.x() - p.x()) * (a.y() - p.y()) -
                                   (c.y() - p.y()) * (a.x() - p.x())) * inv_area;
                const double w2 = 1.0 - w0 - w1;
                if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
                const double depth = w0 * d0 + w1 * d1 + w2 * d2;
                if (depth < camera.near || depth > camera.far) continue;
                const size_t px = static_cast<size_t>(y) * w + x;
                if (depth < out.depth[px]) {
                    out.depth[px] = depth;
                    out.face_id[px] = static_cast<int>(f);
                }
            }
        }
    }
}

// occluding-contour edges: boundary edges and edges whose adjacent faces
// flip 2D orientation under this view
std::vector<ContourEdge> contour_edges(const TriMesh& mesh, const ProjectedMesh& pm) {
    // flat sorted (edge key, face) records instead of a map
    std::vector<std::pair<uint64_t, int>> records;
    records.reserve(mesh.faces.size() * 3);
    for (size_t f = 0; f < mesh.faces.size(); ++f) {
        for (int k = 0; k < 3; ++k) {
            uint32_t a = static_cast<uint32_t>(mesh.faces[f][k]);
            uint32_t b = static_cast<uint32_t>(mesh.faces[f][(k + 1) % 3]);
            if (a > b) std::swap(a, b);
            records.emplace_back((static_cast<uint64_t>(a) << 32) | b, static_cast<int>(f));
        }
    }
    std::sort(records.begin(), records.end());

    std::vector<ContourEdge> contour;
    for (size_t i = 0; i < records.size();) {
        const uint64_t key = records[i].first;
        const int f1 = records[i].second;
        int f2 = -1;
        size_t j = i + 1;
        if (j < records.size() && records[j].first == key) {
            f2 = records[j].second;
            ++j;
        }
        i = j;
        const double s1 = pm.area2d[f1];
        const double s2 = f2 >= 0 ? pm.area2d[f2] : 0.0;
        if (f2 >= 0 && s1 * s2 > 0.0) continue;
        const int va = static_cast<int>(key >> 32);
        const int vb = static_cast<int>(key & 0xffffffffu);
        if ((pm.pixel[vb] - pm.pixel[va]).norm() < 1e-9) continue;
        contour.push_back({va, vb});
    }
    return contour;
}

double point_segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                              const Eigen::Vector2d& b, double* t_out) {
    const Eigen::Vector2d ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    if (t_out) *t_out = t;
    return (p - (a + t * ab)).norm();
}

// nearest contour edge per pixel: uniform grid over the edges, searched in
// outward cell rings with early termination at the saturation band
void silhouette_distance(const MeshRaster& raster, const ProjectedMesh& pm, int h, int w,
                         double band, std::vector<SilhouetteHit>& hits) {
    hits.assign(static_cast<size_t>(h) * w, SilhouetteHit{});
    const double cell = 4.0; // pixels
    const int gx = std::max(1, static_cast<int>(std::ceil(w / cell)));
    const int gy = std::max(1, static_cast<int>(std::ceil(h / cell)));
    std::vector<std::vector<int>> grid(static_cast<size_t>(gx) * gy);
    for (size_t e = 0; e < raster.contour.size(); ++e) {
        const Eigen::Vector2d a = pm.pixel[raster.contour[e].a];
        const Eigen::Vector2d b = pm.pixel[raster.contour[e].b];
        const int cx0 = std::clamp(static_cast<int>(std::floor(std::min(a.x(), b.x()) / cell)), 0, gx - 1);
        const int cx1 = std::clamp(static_cast<int>(std::floor(std::max(a.x(), b.x()) / cell)), 0, gx - 1);
        const int cy0 = std::clamp(static_cast<int>(std::floor(std::min(a.y(), b.y()) / cell)), 0, gy - 1);
        const int cy1 = std::clamp(static_cast<int>(std::floor(std::max(a.y(), b.y()) / cell)), 0, gy - 1);
        for (int cy = cy0; cy <= cy1; ++cy)
            for (int cx = cx0; cx <= cx1; ++cx)
                grid[static_cast<size_t>(cy) * gx + cx].push_back(static_cast<int>(e));
    }

    const int max_ring = static_cast<int>(std::ceil(band / cell)) + 1;
    parallel_for(0, static_cast<size_t>(h), [&](size_t rlo, size_t rhi) {
        for (size_t y = rlo; y < rhi; ++y) {
            for (int x = 0; x < w; ++x) {
                const size_t px = y * w + x;
                const Eigen::Vector2d p(static_cast<double>(x), static_cast<double>(y));
                const int cx = std::clamp(static_cast<int>(x / cell), 0, gx - 1);
                const int cy = std::clamp(static_cast<int>(y / cell), 0, gy - 1);
                SilhouetteHit best;
                best.dist = std::numeric_limits<double>::infinity();
                for (int ring = 0; ring <= max_ring; ++ring) {
                    // cells at L-inf ring distance `ring` contain no point
                    // closer than (ring - 1) * cell
                    const double ring_floor = (ring - 1) * cell;
                    if (ring_floor >= band || ring_floor * ring_floor >= best.dist * best.dist)
                        break;
                    for (int ny = cy - ring; ny <= cy + ring; ++ny) {
                        if (ny < 0 || ny >= gy) continue;
                        for (int nx = cx - ring; nx <= cx + ring; ++nx) {
                            if (nx < 0 || nx >= gx) continue;
                            if (std::max(std::abs(ny - cy), std::abs(nx - cx)) != ring) continue;
                            for (int e : grid[static_cast<size_t>(ny) * gx + nx]) {
                                double t = 0.0;
                                const double d = point_segment_distance(
                                    p, pm.pixel[raster.contour[e].a],
                                    pm.pixel[raster.contour[e].b], &t);
                                if (d < best.dist) {
                                    best.dist = d;
                                    best.t = t;
                                    best.edge = e;
                                }
                            }
                        }
                    }
                }
                const bool inside = raster.face_id[px] >= 0;
                if (best.edge < 0 || best.dist >= band) {
                    best.edge = -1;
                    best.dist = band;
                }
                best.signed_dist = inside ? best.dist : -best.dist;
                hits[px] = best;
            }
        }
    });
}

MeshRaster rasterize_mesh(const TriMesh& mesh, const OrthoCamera& camera,
                          const SoftRenderConfig& config) {
    mesh.validate();
    camera.validate();
    config.validate();
    int zero_area = 0;
    mesh.face_normals(&zero_area);
    if (zero_area > 0) throw ValidationError("render_mesh: mesh has zero-area faces");

    MeshRaster raster;
    raster.pm = project_mesh(mesh, camera);
    rasterize_hard(mesh, camera, raster.pm, raster);
    raster.contour = contour_edges(mesh, raster.pm);
    raster.band = std::max(6.0, 12.0 * config.sigma_edge);
    silhouette_distance(raster, raster.pm, camera.height, camera.width, raster.band, raster.hits);
    return raster;
}

RenderOutput raster_to_output(const MeshRaster& raster, const OrthoCamera& camera,
                              const SoftRenderConfig& config) {
    const int h = camera.height, w = camera.width;
    RenderOutput out;
    out.image = FeatureMap(3, h, w);
    out.alpha = FeatureMap(1, h, w);
    out.depth = FeatureMap(1, h, w, std::numeric_limits<double>::infinity());
    for (size_t px = 0; px < static_cast<size_t>(h) * w; ++px) {
        const int f = raster.face_id[px];
        if (f >= 0) {
            out.depth.data()[px] = raster.depth[px];
            for (int c = 0; c < 3; ++c)
                out.image.data()[static_cast<size_t>(c) * h * w + px] =
                    0.5 * (raster.pm.normal_cam[f][c] + 1.0);
        }
        out.alpha.data()[px] = sigmoid(raster.hits[px].signed_dist / config.sigma_edge);
    }
    return out;
}

} // namespace

RenderOutput render_mesh(const TriMesh& mesh, const OrthoCamera& camera,
                         const SoftRenderConfig& config) {
    const MeshRaster raster = rasterize_mesh(mesh, camera, config);
    return raster_to_output(raster, camera, config);
}

MeshLossGrad render_mesh_with_grads(const TriMesh& mesh, const OrthoCamera& camera,
                                    const SoftRenderConfig& config,
                                    const FeatureMap& target_normal,
                                    const FeatureMap& target_mask) {
    if (target_normal.height() != camera.height || target_normal.width() != camera.width ||
        target_mask.height() != camera.height || target_mask.width() != camera.width)
        throw ValidationError("render_mesh_with_grads: target resolution mismatch");
    if (target_normal.channels() != 3 || target_mask.channels() != 1)
        throw ValidationError("render_mesh_with_grads: target channel mismatch");

    const MeshRaster raster = rasterize_mesh(mesh, camera, config);

    MeshLossGrad result;
    result.render = raster_to_output(raster, camera, config);
    result.grad_normal.assign(mesh.vertices.size(), Eigen::Vector3d::Zero());
    result.grad_mask.assign(mesh.vertices.size(), Eigen::Vector3d::Zero());

    const int h = camera.height, w = camera.width;
    const size_t n_px = static_cast<size_t>(h) * w;
    const double sx = camera.pixels_per_unit_x();
    const double sy = camera.pixels_per_unit_y();

    // ---- normal term: mean over pixels covered by both masks
    size_t support = 0;
    for (size_t px = 0; px < n_px; ++px)
        if (result.render.alpha.data()[px] > 0.5 && target_mask.data()[px] > 0.5 &&
            raster.face_id[px] >= 0)
            ++support;

    // d image / d n_cam is 1/2, n_cam = R n_world; accumulate per-face
    // cotangent first, then push through the normalized cross product
    std::vector<Eigen::Vector3d> face_grad(mesh.faces.size(), Eigen::Vector3d::Zero());
    std::vector<char> face_touched(mesh.faces.size(), 0);
    double loss_normal = 0.0;
    if (support > 0) {
        for (size_t px = 0; px < n_px; ++px) {
            const int f = raster.face_id[px];
            if (f < 0 || result.render.alpha.data()[px] <= 0.5 || target_mask.data()[px] <= 0.5)
                continue;
            Eigen::Vector3d diff;
            for (int c = 0; c < 3; ++c)
                diff[c] = result.render.image.data()[static_cast<size_t>(c) * n_px + px] -
                          target_normal.data()[static_cast<size_t>(c) * n_px + px];
            loss_normal += diff.squaredNorm();
            // dL/dn_world = R^T * (2 diff / support) * 0.5
            face_grad[f] += camera.rotation.transpose() * diff / static_cast<double>(support);
            face_touched[f] = 1;
        }
        loss_normal /= static_cast<double>(support);
    }
    result.loss_normal = loss_normal;

    for (size_t f = 0; f < mesh.faces.size(); ++f) {
        if (!face_touched[f]) continue;
        const auto& face = mesh.faces[f];
        const Eigen::Vector3d a = mesh.vertices[face[1]] - mesh.vertices[face[0]];
        const Eigen::Vector3d b = mesh.vertices[face[2]] - mesh.vertices[face[0]];
        const Eigen::Vector3d cross = a.cross(b);
        const double len = cross.norm();
        if (len < 1e-12) continue;
        const Eigen::Vector3d n = cross / len;
        // dn/dcross = (I - n n^T) / |cross|
        const Eigen::Vector3d g_cross = (face_grad[f] - n * n.dot(face_grad[f])) / len;
        const Eigen::Vector3d gv1 = b.cross(g_cross);
        const Eigen::Vector3d gv2 = -a.cross(g_cross);
        result.grad_normal[face[1]] += gv1;
        result.grad_normal[face[2]] += gv2;
        result.grad_normal[face[0]] += -gv1 - gv2;
    }

    // ---- mask term: mean over all pixels, gradient through the sigmoid and
    // the nearest contour edge's endpoints
    double loss_mask = 0.0;
    for (size_t px = 0; px < n_px; ++px) {
        const double alpha = result.render.alpha.data()[px];
        const double diff = alpha - target_mask.data()[px];
        loss_mask += diff * diff;
        const auto& hit = raster.hits[px];
        if (hit.edge < 0 || hit.dist >= raster.band || hit.dist < 1e-9) continue;
        const double dalpha = 2.0 * diff / static_cast<double>(n_px);
        const double dsig = alpha * (1.0 - alpha) / config.sigma_edge;
        const double sign = hit.signed_dist >= 0.0 ? 1.0 : -1.0;

        const int va = raster.contour[hit.edge].a;
        const int vb = raster.contour[hit.edge].b;
        const Eigen::Vector2d a2 = raster.pm.pixel[va];
        const Eigen::Vector2d b2 = raster.pm.pixel[vb];
        const Eigen::Vector2d p(static_cast<double>(px % w), static_cast<double>(px / w));
        const Eigen::Vector2d closest = a2 + hit.t * (b2 - a2);
        const Eigen::Vector2d u = (p - closest) / hit.dist;

        const Eigen::Vector2d dD_da = -sign * (1.0 - hit.t) * u;
        const Eigen::Vector2d dD_db = -sign * hit.t * u;
        const double scale = dalpha * dsig;
        // pixel-coord jacobian rows: du/dv = sx * R.row(0), dv/dv = -sy * R.row(1)
        const Eigen::Vector3d ju = sx * camera.rotation.row(0).transpose();
        const Eigen::Vector3d jv = -sy * camera.rotation.row(1).transpose();
        result.grad_mask[va] += scale * (dD_da.x() * ju + dD_da.y() * jv);
        result.grad_mask[vb] += scale * (dD_db.x() * ju + dD_db.y() * jv);
    }
    result.loss_mask = loss_mask / static_cast<double>(n_px);
    return result;
}

} // namespace splatkit
