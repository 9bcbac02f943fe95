#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "splatkit/mesh.hpp"

namespace splatkit {

/// Points paired with per-point Fourier feature vectors of length 3(2q+1).
/// Layout per point: [x, y, z, cos(2^1 p), sin(2^1 p), ..., cos(2^q p), sin(2^q p)]
/// where each cos/sin block holds the three coordinates in x, y, z order.
/// The order-0 block (the first three entries) always equals the point
/// coordinates exactly.
struct FourierCloud {
    std::vector<Eigen::Vector3d> points;
    std::vector<Eigen::VectorXd> features;
    int order = 0;

    size_t size() const { return points.size(); }
    static int feature_length(int order) { return 3 * (2 * order + 1); }

    /// Checks the length contract and the exact order-0 identity.
    void validate() const;
};

/// q-order Fourier expansion of raw points (no densification).
FourierCloud fourier_expand(const std::vector<Eigen::Vector3d>& points, int order);

struct DensifyOptions {
    /// When set, every interior sample sits at its triangle centroid and its
    /// feature is the plain mean of the three vertex features.
    bool centroid_barycentric = false;
};

/// Densifies per-vertex features over the mesh surface: the original
/// vertices come first, then (target_count - V) extra samples allocated to
/// triangles proportionally to area, each a barycentric combination of the
/// triangle's vertex positions and features. Deterministic for a fixed seed.
FourierCloud densify_surface(const TriMesh& mesh,
                             const std::vector<Eigen::VectorXd>& per_vertex_features,
                             size_t target_count, uint64_t seed,
                             const DensifyOptions& options = {});

} // namespace splatkit
