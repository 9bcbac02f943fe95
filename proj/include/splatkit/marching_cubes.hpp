#pragma once

#include <vector>

#include <Eigen/Dense>

#include "splatkit/mesh.hpp"

namespace splatkit {

/// Regular scalar grid of node values over an axis-aligned box.
/// Node (ix, iy, iz) sits at min + (ix/(nx-1), iy/(ny-1), iz/(nz-1)) * (max - min).
struct ScalarGrid {
    Eigen::Vector3d min_corner = Eigen::Vector3d::Zero();
    Eigen::Vector3d max_corner = Eigen::Vector3d::Ones();
    int nx = 2, ny = 2, nz = 2; // node counts per axis, >= 2
    std::vector<double> values; // index ((iz * ny) + iy) * nx + ix

    double& at(int ix, int iy, int iz) {
        return values[(static_cast<size_t>(iz) * ny + iy) * nx + ix];
    }
    double at(int ix, int iy, int iz) const {
        return values[(static_cast<size_t>(iz) * ny + iy) * nx + ix];
    }
    Eigen::Vector3d node_position(int ix, int iy, int iz) const;
    double max_value() const;

    void validate() const;
};

/// Standard marching-cubes triangulation of the iso_level surface. Vertices
/// on shared cell edges are welded; vertex order is deterministic (cells
/// visited in x-fastest order). Degenerate output faces are dropped.
TriMesh marching_cubes(const ScalarGrid& grid, double iso_level);

/// Keeps the largest face-connected component (by face count).
TriMesh largest_component(const TriMesh& mesh);

} // namespace splatkit
