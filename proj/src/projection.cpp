#include "splatkit/projection.hpp"

#include <cmath>
#include <limits>

#include "splatkit/parallel.hpp"

namespace splatkit {

FeatureMap project_features(const FourierCloud& cloud, const OrthoCamera& camera,
                            ProjectionStats* stats) {
    if (cloud.points.empty()) throw ValidationError("project_features: empty cloud");
    camera.validate();
    const int len = FourierCloud::feature_length(cloud.order);
    const int h = camera.height, w = camera.width;
    const size_t n_px = static_cast<size_t>(h) * w;

    // z-buffer over point chunks; per-chunk buffers merge by (depth, index),
    // which reproduces the sequential first-wins-on-ties result bit for bit
    const size_t n_points = cloud.points.size();
    const size_t chunk = 16384;
    const size_t n_chunks = (n_points + chunk - 1) / chunk;
    std::vector<std::vector<double>> chunk_depth(n_chunks);
    std::vector<std::vector<long>> chunk_winner(n_chunks);
    std::vector<size_t> chunk_offscreen(n_chunks, 0), chunk_hits(n_chunks, 0);

    parallel_for(0, n_chunks, [&](size_t lo, size_t hi) {
        for (size_t c = lo; c < hi; ++c) {
            auto& depth_buf = chunk_depth[c];
            auto& winner_buf = chunk_winner[c];
            depth_buf.assign(n_px, std::numeric_limits<double>::infinity());
            winner_buf.assign(n_px, -1);
            const size_t begin = c * chunk;
            const size_t end = std::min(n_points, begin + chunk);
            for (size_t i = begin; i < end; ++i) {
                const Eigen::Vector3d p_cam = camera.to_camera(cloud.points[i]);
                const double depth = -p_cam.z();
                if (depth < camera.near || depth > camera.far) {
                    ++chunk_offscreen[c];
                    continue;
                }
                const Eigen::Vector2d uv = camera.cam_to_pixel(p_cam);
                const int col = static_cast<int>(std::lround(uv.x()));
                const int row = static_cast<int>(std::lround(uv.y()));
                if (col < 0 || col >= w || row < 0 || row >= h) {
                    ++chunk_offscreen[c];
                    continue;
                }
                ++chunk_hits[c];
                const size_t px = static_cast<size_t>(row) * w + col;
                if (depth < depth_buf[px]) { // ties keep the lower index
                    depth_buf[px] = depth;
                    winner_buf[px] = static_cast<long>(i);
                }
            }
        }
    });

    std::vector<double> best_depth(n_px, std::numeric_limits<double>::infinity());
    std::vector<long> winner(n_px, -1);
    ProjectionStats local;
    for (size_t c = 0; c < n_chunks; ++c) { // chunk order preserves index ties
        local.offscreen += chunk_offscreen[c];
        for (size_t px = 0; px < n_px; ++px) {
            if (chunk_winner[c][px] < 0) continue;
            if (chunk_depth[c][px] < best_depth[px]) {
                best_depth[px] = chunk_depth[c][px];
                winner[px] = chunk_winner[c][px];
            }
        }
    }
    size_t total_hits = 0, winners = 0;
    for (size_t c = 0; c < n_chunks; ++c) total_hits += chunk_hits[c];
    for (size_t px = 0; px < n_px; ++px)
        if (winner[px] >= 0) ++winners;
    local.occluded = total_hits - winners;

    FeatureMap out(len, h, w);
    parallel_for(0, static_cast<size_t>(h) * w, [&](size_t lo, size_t hi) {
        for (size_t px = lo; px < hi; ++px) {
            const long i = winner[px];
            if (i < 0) continue;
            const Eigen::VectorXd& f = cloud.features[static_cast<size_t>(i)];
            for (int c = 0; c < len; ++c) out.data()[static_cast<size_t>(c) * h * w + px] = f[c];
        }
    }, 1024);

    if (stats) *stats = local;
    return out;
}

FourierStack build_fourier_stack(const FourierCloud& cloud,
                                 const std::vector<OrthoCamera>& cameras) {
    if (cameras.size() != 3)
        throw ValidationError("build_fourier_stack: exactly 3 cameras required");
    for (const auto& cam : cameras) {
        if (cam.height != cameras[0].height || cam.width != cameras[0].width)
            throw ValidationError("build_fourier_stack: cameras must share resolution");
    }
    FourierStack stack;
    for (int v = 0; v < 3; ++v) {
        stack.cameras[v] = cameras[v];
        stack.views[v] = project_features(cloud, cameras[v]);
    }
    return stack;
}

FeatureMap plucker_map(const OrthoCamera& camera) {
    camera.validate();
    FeatureMap map(6, camera.height, camera.width);
    const Eigen::Vector3d dir = camera.view_direction(); // shared by all ortho rays
    for (int row = 0; row < camera.height; ++row) {
        for (int col = 0; col < camera.width; ++col) {
            const Eigen::Vector3d origin = camera.pixel_ray_origin(row, col);
            const Eigen::Vector3d moment = origin.cross(dir);
            for (int k = 0; k < 3; ++k) {
                map.at(k, row, col) = dir[k];
                map.at(3 + k, row, col) = moment[k];
            }
        }
    }
    return map;
}

FeatureMap conv2d_3x3(const FeatureMap& input, const Conv2dWeights& weights) {
    weights.validate();
    if (weights.in_channels != input.channels())
        throw ValidationError("conv2d: input channel count mismatch");
    const int h = input.height(), w = input.width();
    const int k = weights.kernel, pad = k / 2;
    FeatureMap out(weights.out_channels, h, w);
    parallel_for(0, static_cast<size_t>(weights.out_channels), [&](size_t lo, size_t hi) {
        for (size_t o = lo; o < hi; ++o) {
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    double acc = weights.bias[o];
                    for (int c = 0; c < weights.in_channels; ++c) {
                        for (int ky = 0; ky < k; ++ky) {
                            const int yy = y + ky - pad;
                            if (yy < 0 || yy >= h) continue; // zero padding
                            for (int kx = 0; kx < k; ++kx) {
                                const int xx = x + kx - pad;
                                if (xx < 0 || xx >= w) continue;
                                acc += weights.w(static_cast<int>(o), c, ky, kx) *
                                       input.at(c, yy, xx);
                            }
                        }
                    }
                    out.at(static_cast<int>(o), y, x) = acc;
                }
            }
        }
    });
    return out;
}

std::array<FeatureMap, 3> encode_stack(const FourierStack& stack, const Conv2dWeights& weights) {
    std::array<FeatureMap, 3> encoded;
    for (int v = 0; v < 3; ++v) {
        const FeatureMap with_rays = concat_channels(stack.views[v], plucker_map(stack.cameras[v]));
        if (weights.in_channels != with_rays.channels())
            throw ValidationError("encode_stack: weights expect " +
                                  std::to_string(weights.in_channels) + " channels, input has " +
                                  std::to_string(with_rays.channels()));
        encoded[v] = conv2d_3x3(with_rays, weights);
    }
    return encoded;
}

} // namespace splatkit
