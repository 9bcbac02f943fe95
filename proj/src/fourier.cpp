#include "splatkit/fourier.hpp"

#include <cmath>
#include <random>
#include <string>

namespace splatkit {

void FourierCloud::validate() const {
    if (points.size() != features.size())
        throw ValidationError("fourier cloud: point/feature count mismatch");
    const int len = feature_length(order);
    for (size_t i = 0; i < points.size(); ++i) {
        if (features[i].size() != len)
            throw ValidationError("fourier cloud: feature " + std::to_string(i) +
                                  " has wrong length");
        for (int k = 0; k < 3; ++k)
            if (features[i][k] != points[i][k])
                throw ValidationError("fourier cloud: order-0 block of feature " +
                                      std::to_string(i) + " does not equal the point");
    }
}

FourierCloud fourier_expand(const std::vector<Eigen::Vector3d>& points, int order) {
    if (order < 0) throw ValidationError("fourier order must be non-negative");
    FourierCloud cloud;
    cloud.order = order;
    cloud.points = points;
    cloud.features.resize(points.size());
    const int len = FourierCloud::feature_length(order);
    for (size_t i = 0; i < points.size(); ++i) {
        const Eigen::Vector3d& p = points[i];
        if (!p.allFinite())
            throw ValidationError("fourier_expand: non-finite point " + std::to_string(i));
        Eigen::VectorXd f(len);
        f[0] = p.x();
        f[1] = p.y();
        f[2] = p.z();
        double freq = 2.0;
        for (int n = 1; n <= order; ++n, freq *= 2.0) {
            const int base = 3 + (n - 1) * 6;
            for (int k = 0; k < 3; ++k) f[base + k] = std::cos(freq * p[k]);
            for (int k = 0; k < 3; ++k) f[base + 3 + k] = std::sin(freq * p[k]);
        }
        cloud.features[i] = std::move(f);
    }
    return cloud;
}

FourierCloud densify_surface(const TriMesh& mesh,
                             const std::vector<Eigen::VectorXd>& per_vertex_features,
                             size_t target_count, uint64_t seed,
                             const DensifyOptions& options) {
    mesh.validate();
    if (per_vertex_features.size() != mesh.vertices.size())
        throw ValidationError("densify_surface: feature count must match vertex count");
    if (target_count < mesh.vertices.size())
        throw ValidationError("densify_surface: target count below vertex count");
    if (mesh.faces.empty()) throw ValidationError("densify_surface: mesh has no faces");

    const Eigen::Index feat_len = per_vertex_features.empty() ? 0 : per_vertex_features[0].size();
    for (const auto& f : per_vertex_features)
        if (f.size() != feat_len)
            throw ValidationError("densify_surface: inconsistent feature lengths");
    if (feat_len < 3 || (feat_len - 3) % 6 != 0)
        throw ValidationError("densify_surface: feature length is not 3(2q+1)");

    std::vector<double> areas(mesh.faces.size());
    double total_area = 0.0;
    for (size_t f = 0; f < mesh.faces.size(); ++f) {
        areas[f] = mesh.face_area(f);
        if (areas[f] <= 0.0)
            throw ValidationError("densify_surface: degenerate triangle " + std::to_string(f));
        total_area += areas[f];
    }

    FourierCloud cloud;
    cloud.order = static_cast<int>((feat_len - 3) / 6);
    cloud.points.reserve(target_count);
    cloud.features.reserve(target_count);
    for (size_t v = 0; v < mesh.vertices.size(); ++v) {
        cloud.points.push_back(mesh.vertices[v]);
        cloud.features.push_back(per_vertex_features[v]);
    }

    // stratified area-weighted allocation: every triangle gets floor of its
    // expected share, the remainder is drawn from the residual weights
    const size_t extra = target_count - mesh.vertices.size();
    std::vector<size_t> counts(mesh.faces.size(), 0);
    std::vector<double> residual_cum(mesh.faces.size());
    size_t assigned = 0;
    double residual_total = 0.0;
    for (size_t f = 0; f < mesh.faces.size(); ++f) {
        const double expected = static_cast<double>(extra) * areas[f] / total_area;
        counts[f] = static_cast<size_t>(std::floor(expected));
        assigned += counts[f];
        residual_total += expected - std::floor(expected);
        residual_cum[f] = residual_total;
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (size_t k = assigned; k < extra; ++k) {
        const double pick = uni(rng) * residual_total;
        size_t f = std::lower_bound(residual_cum.begin(), residual_cum.end(), pick) -
                   residual_cum.begin();
        counts[std::min(f, counts.size() - 1)] += 1;
    }

    for (size_t f = 0; f < mesh.faces.size(); ++f) {
        const auto& face = mesh.faces[f];
        const Eigen::Vector3d& v0 = mesh.vertices[face[0]];
        const Eigen::Vector3d& v1 = mesh.vertices[face[1]];
        const Eigen::Vector3d& v2 = mesh.vertices[face[2]];
        const Eigen::VectorXd& f0 = per_vertex_features[face[0]];
        const Eigen::VectorXd& f1 = per_vertex_features[face[1]];
        const Eigen::VectorXd& f2 = per_vertex_features[face[2]];
        for (size_t s = 0; s < counts[f]; ++s) {
            double b0, b1, b2;
            if (options.centroid_barycentric) {
                b0 = b1 = b2 = 1.0 / 3.0;
            } else {
                const double su = std::sqrt(uni(rng));
                const double v = uni(rng);
                b0 = 1.0 - su;
                b1 = su * (1.0 - v);
                b2 = su * v;
            }
            // position and order-0 feature block use the same expression so
            // the order-0 identity holds bitwise
            Eigen::VectorXd feat(feat_len);
            for (Eigen::Index j = 0; j < feat_len; ++j)
                feat[j] = b0 * f0[j] + b1 * f1[j] + b2 * f2[j];
            Eigen::Vector3d pos;
            for (int j = 0; j < 3; ++j) pos[j] = b0 * v0[j] + b1 * v1[j] + b2 * v2[j];
            cloud.points.push_back(pos);
            cloud.features.push_back(std::move(feat));
        }
    }
    return cloud;
}

} // namespace splatkit
