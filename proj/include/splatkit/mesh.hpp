#pragma once

#include <array>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "splatkit/errors.hpp"

namespace splatkit {

/// Indexed triangle mesh. Faces are triples of vertex indices; degenerate
/// faces (repeated indices) are rejected by validate().
struct TriMesh {
    std::vector<Eigen::Vector3d> vertices;
    std::vector<std::array<int, 3>> faces;
    std::optional<std::vector<Eigen::Vector3d>> vertex_colors;

    size_t vertex_count() const { return vertices.size(); }
    size_t face_count() const { return faces.size(); }

    /// Throws ValidationError on out-of-range indices, degenerate faces,
    /// non-finite coordinates, or a color array of the wrong length.
    void validate() const;

    /// Unit face normals from cross(v1-v0, v2-v0). Zero-area faces yield a
    /// zero vector (never NaN); `zero_area_count` reports how many, if asked.
    std::vector<Eigen::Vector3d> face_normals(int* zero_area_count = nullptr) const;

    /// Area-weighted average of incident face normals, renormalized.
    std::vector<Eigen::Vector3d> vertex_normals() const;

    double face_area(size_t f) const;
    double total_area() const;

    /// One-ring vertex adjacency from the face list (each undirected edge once).
    std::vector<std::vector<int>> vertex_adjacency() const;

    /// Number of unique undirected edges.
    size_t edge_count() const;
};

/// Point + unit normal samples drawn area-weighted from the surface.
struct SurfaceSamples {
    std::vector<Eigen::Vector3d> points;
    std::vector<Eigen::Vector3d> normals;
};

/// Deterministic area-weighted surface sampling (uniform barycentric
/// placement inside each selected face, face normal attached).
SurfaceSamples sample_surface(const TriMesh& mesh, size_t count, uint64_t seed);

} // namespace splatkit
