#include "splatkit/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>

namespace splatkit {

void TriMesh::validate() const {
    const long n = static_cast<long>(vertices.size());
    for (size_t i = 0; i < vertices.size(); ++i)
        if (!vertices[i].allFinite())
            throw ValidationError("mesh vertex " + std::to_string(i) + " is non-finite");
    for (size_t f = 0; f < faces.size(); ++f) {
        const auto& face = faces[f];
        for (int k = 0; k < 3; ++k)
            if (face[k] < 0 || face[k] >= n)
                throw ValidationError("face " + std::to_string(f) + " index out of range");
        if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2])
            throw ValidationError("face " + std::to_string(f) + " is degenerate");
    }
    if (vertex_colors && vertex_colors->size() != vertices.size())
        throw ValidationError("vertex color count does not match vertex count");
}

std::vector<Eigen::Vector3d> TriMesh::face_normals(int* zero_area_count) const {
    std::vector<Eigen::Vector3d> normals(faces.size(), Eigen::Vector3d::Zero());
    int zeros = 0;
    for (size_t f = 0; f < faces.size(); ++f) {
        const Eigen::Vector3d a = vertices[faces[f][1]] - vertices[faces[f][0]];
        const Eigen::Vector3d b = vertices[faces[f][2]] - vertices[faces[f][0]];
        Eigen::Vector3d c = a.cross(b);
        const double len = c.norm();
        if (len > 0.0)
            normals[f] = c / len;
        else
            ++zeros;
    }
    if (zero_area_count) *zero_area_count = zeros;
    return normals;
}

std::vector<Eigen::Vector3d> TriMesh::vertex_normals() const {
    std::vector<Eigen::Vector3d> out(vertices.size(), Eigen::Vector3d::Zero());
    for (const auto& face : faces) {
        const Eigen::Vector3d a = vertices[face[1]] - vertices[face[0]];
        const Eigen::Vector3d b = vertices[face[2]] - vertices[face[0]];
        const Eigen::Vector3d weighted = a.cross(b); // area-weighted normal
        for (int k = 0; k < 3; ++k) out[face[k]] += weighted;
    }
    for (auto& n : out) {
        const double len = n.norm();
        if (len > 0.0) n /= len;
    }
    return out;
}

double TriMesh::face_area(size_t f) const {
    const Eigen::Vector3d a = vertices[faces[f][1]] - vertices[faces[f][0]];
    const Eigen::Vector3d b = vertices[faces[f][2]] - vertices[faces[f][0]];
    return 0.5 * a.cross(b).norm();
}

double TriMesh::total_area() const {
    double sum = 0.0;
    for (size_t f = 0; f < faces.size(); ++f) sum += face_area(f);
    return sum;
}

std::vector<std::vector<int>> TriMesh::vertex_adjacency() const {
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(faces.size() * 6);
    for (const auto& face : faces) {
        for (int k = 0; k < 3; ++k) {
            const int a = face[k], b = face[(k + 1) % 3];
            pairs.emplace_back(a, b);
            pairs.emplace_back(b, a);
        }
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    std::vector<std::vector<int>> out(vertices.size());
    for (const auto& [a, b] : pairs) out[a].push_back(b);
    return out;
}

size_t TriMesh::edge_count() const {
    std::set<std::pair<int, int>> edges;
    for (const auto& face : faces) {
        for (int k = 0; k < 3; ++k) {
            int a = face[k], b = face[(k + 1) % 3];
            if (a > b) std::swap(a, b);
            edges.insert({a, b});
        }
    }
    return edges.size();
}

SurfaceSamples sample_surface(const TriMesh& mesh, size_t count, uint64_t seed) {
    if (mesh.faces.empty()) throw ValidationError("sample_surface: mesh has no faces");
    std::vector<double> cumulative(mesh.faces.size());
    double total = 0.0;
    for (size_t f = 0; f < mesh.faces.size(); ++f) {
        total += mesh.face_area(f);
        cumulative[f] = total;
    }
    if (total <= 0.0) throw ValidationError("sample_surface: mesh has zero total area");

    const auto normals = mesh.face_normals();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    SurfaceSamples out;
    out.points.reserve(count);
    out.normals.reserve(count);
    for (size_t i = 0; i < count; ++i) {
        const double pick = uni(rng) * total;
        const size_t f = std::lower_bound(cumulative.begin(), cumulative.end(), pick) -
                         cumulative.begin();
        const size_t fi = std::min(f, mesh.faces.size() - 1);
        const double su = std::sqrt(uni(rng));
        const double v = uni(rng);
        const double b0 = 1.0 - su, b1 = su * (1.0 - v), b2 = su * v;
        const auto& face = mesh.faces[fi];
        out.points.push_back(b0 * mesh.vertices[face[0]] + b1 * mesh.vertices[face[1]] +
                             b2 * mesh.vertices[face[2]]);
        out.normals.push_back(normals[fi]);
    }
    return out;
}

} // namespace splatkit
