#include "splatkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "splatkit/parallel.hpp"

namespace splatkit {

// ------------------------------------------------------------------ kd-tree

KdTree::KdTree(const std::vector<Eigen::Vector3d>& points) : points_(points) {
    if (points.empty()) throw ValidationError("kd-tree: empty point set");
    std::vector<size_t> order(points.size());
    std::iota(order.begin(), order.end(), 0);
    nodes_.reserve(points.size());
    root_ = build(order, 0, points.size(), 0);
}

int KdTree::build(std::vector<size_t>& order, size_t begin, size_t end, int depth) {
    if (begin >= end) return -1;
    const int axis = depth % 3;
    const size_t mid = begin + (end - begin) / 2;
    std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                     [&](size_t a, size_t b) { return points_[a][axis] < points_[b][axis]; });
    const int node_index = static_cast<int>(nodes_.size());
    nodes_.push_back({axis, order[mid], -1, -1});
    const int left = build(order, begin, mid, depth + 1);
    const int right = build(order, mid + 1, end, depth + 1);
    nodes_[node_index].left = left;
    nodes_[node_index].right = right;
    return node_index;
}

void KdTree::search(int node, const Eigen::Vector3d& query, size_t& best, double& best_d2) const {
    if (node < 0) return;
    const Node& n = nodes_[node];
    const double d2 = (points_[n.point] - query).squaredNorm();
    if (d2 < best_d2) {
        best_d2 = d2;
        best = n.point;
    }
    const double delta = query[n.axis] - points_[n.point][n.axis];
    const int near = delta < 0.0 ? n.left : n.right;
    const int far = delta < 0.0 ? n.right : n.left;
    search(near, query, best, best_d2);
    if (delta * delta < best_d2) search(far, query, best, best_d2);
}

std::pair<size_t, double> KdTree::nearest(const Eigen::Vector3d& query) const {
    size_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    search(root_, query, best, best_d2);
    return {best, best_d2};
}

// ------------------------------------------------------------------ chamfer

namespace {

double mean_nearest_distance(const std::vector<Eigen::Vector3d>& from, const KdTree& to_tree) {
    std::vector<double> dist(from.size());
    parallel_for(0, from.size(), [&](size_t lo, size_t hi) {
        for (size_t i = lo; i < hi; ++i)
            dist[i] = std::sqrt(to_tree.nearest(from[i]).second);
    }, 256);
    double sum = 0.0;
    for (double d : dist) sum += d; // fixed-order reduction
    return sum / static_cast<double>(from.size());
}

} // namespace

std::pair<double, double> chamfer(const std::vector<Eigen::Vector3d>& pred,
                                  const std::vector<Eigen::Vector3d>& gt) {
    if (pred.empty() || gt.empty()) throw ValidationError("chamfer: empty point set");
    const KdTree gt_tree(gt);
    const KdTree pred_tree(pred);
    return {mean_nearest_distance(pred, gt_tree), mean_nearest_distance(gt, pred_tree)};
}

std::pair<double, double> chamfer_bruteforce(const std::vector<Eigen::Vector3d>& pred,
                                             const std::vector<Eigen::Vector3d>& gt) {
    if (pred.empty() || gt.empty()) throw ValidationError("chamfer: empty point set");
    auto one_way = [](const std::vector<Eigen::Vector3d>& from,
                      const std::vector<Eigen::Vector3d>& to) {
        double sum = 0.0;
        for (const auto& p : from) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& q : to) best = std::min(best, (q - p).squaredNorm());
            sum += std::sqrt(best);
        }
        return sum / static_cast<double>(from.size());
    };
    return {one_way(pred, gt), one_way(gt, pred)};
}

// ------------------------------------------------------ normal consistency

double normal_consistency(const TriMesh& pred, const TriMesh& gt, size_t samples, uint64_t seed) {
    if (samples == 0) throw ValidationError("normal_consistency: sample count must be positive");
    const SurfaceSamples a = sample_surface(pred, samples, seed);
    const SurfaceSamples b = sample_surface(gt, samples, seed + 1);
    const KdTree tree_a(a.points);
    const KdTree tree_b(b.points);

    auto one_way = [](const SurfaceSamples& from, const SurfaceSamples& to, const KdTree& tree) {
        double sum = 0.0;
        for (size_t i = 0; i < from.points.size(); ++i) {
            const size_t j = tree.nearest(from.points[i]).first;
            sum += std::abs(from.normals[i].dot(to.normals[j]));
        }
        return sum / static_cast<double>(from.points.size());
    };
    return 0.5 * (one_way(a, b, tree_b) + one_way(b, a, tree_a));
}

// ------------------------------------------------------------------ f-score

double f_score(const std::vector<Eigen::Vector3d>& pred, const std::vector<Eigen::Vector3d>& gt,
               double tau) {
    if (pred.empty() || gt.empty()) throw ValidationError("f_score: empty point set");
    if (!(tau > 0.0)) throw ValidationError("f_score: tau must be positive");
    auto fraction_within = [tau](const std::vector<Eigen::Vector3d>& from, const KdTree& tree) {
        size_t hits = 0;
        for (const auto& p : from)
            if (std::sqrt(tree.nearest(p).second) <= tau) ++hits;
        return static_cast<double>(hits) / static_cast<double>(from.size());
    };
    const KdTree gt_tree(gt);
    const KdTree pred_tree(pred);
    const double precision = fraction_within(pred, gt_tree);
    const double recall = fraction_within(gt, pred_tree);
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

// ------------------------------------------------------------------- images

double psnr(const FeatureMap& a, const FeatureMap& b, double peak) {
    if (!a.same_shape(b)) throw ValidationError("psnr: shape mismatch");
    if (!(peak > 0.0)) throw ValidationError("psnr: peak must be positive");
    double mse = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a.data()[i] - b.data()[i];
        mse += d * d;
    }
    mse /= static_cast<double>(a.size());
    if (mse < 1e-12) return 99.0;
    return std::min(99.0, 10.0 * std::log10(peak * peak / mse));
}

double ssim(const FeatureMap& a, const FeatureMap& b, int window, double k1, double k2,
            double peak) {
    if (!a.same_shape(b)) throw ValidationError("ssim: shape mismatch");
    if (window < 1 || window % 2 == 0) throw ValidationError("ssim: window must be odd");
    if (a.height() < window || a.width() < window)
        throw ValidationError("ssim: image smaller than the window");

    // gaussian window, sigma 1.5
    std::vector<double> weights(static_cast<size_t>(window) * window);
    const double sigma = 1.5;
    const int half = window / 2;
    double wsum = 0.0;
    for (int y = 0; y < window; ++y)
        for (int x = 0; x < window; ++x) {
            const double d2 = (y - half) * (y - half) + (x - half) * (x - half);
            weights[static_cast<size_t>(y) * window + x] = std::exp(-d2 / (2.0 * sigma * sigma));
            wsum += weights[static_cast<size_t>(y) * window + x];
        }
    for (double& w : weights) w /= wsum;

    const double c1 = (k1 * peak) * (k1 * peak);
    const double c2 = (k2 * peak) * (k2 * peak);
    const int oh = a.height() - window + 1;
    const int ow = a.width() - window + 1;

    double total = 0.0;
    for (int c = 0; c < a.channels(); ++c) {
        double channel_sum = 0.0;
        for (int y = 0; y < oh; ++y) {
            for (int x = 0; x < ow; ++x) {
                double mu_a = 0.0, mu_b = 0.0, aa = 0.0, bb = 0.0, ab = 0.0;
                for (int wy = 0; wy < window; ++wy)
                    for (int wx = 0; wx < window; ++wx) {
                        const double w = weights[static_cast<size_t>(wy) * window + wx];
                        const double va = a.at(c, y + wy, x + wx);
                        const double vb = b.at(c, y + wy, x + wx);
                        mu_a += w * va;
                        mu_b += w * vb;
                        aa += w * va * va;
                        bb += w * vb * vb;
                        ab += w * va * vb;
                    }
                const double var_a = aa - mu_a * mu_a;
                const double var_b = bb - mu_b * mu_b;
                const double cov = ab - mu_a * mu_b;
                const double num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
                const double den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
                channel_sum += num / den;
            }
        }
        total += channel_sum / (static_cast<double>(oh) * ow);
    }
    return total / a.channels();
}

// ------------------------------------------------------------------ reports

GeomReport evaluate_geometry(const TriMesh& pred, const TriMesh& gt, double tau, size_t samples,
                             uint64_t seed) {
    const SurfaceSamples sp = sample_surface(pred, samples, seed);
    const SurfaceSamples sg = sample_surface(gt, samples, seed + 1);
    GeomReport report;
    std::tie(report.cd_p_to_s, report.cd_s_to_p) = chamfer(sp.points, sg.points);
    report.fscore = f_score(sp.points, sg.points, tau);
    report.tau = tau;
    report.nc = normal_consistency(pred, gt, samples, seed + 2);
    report.pred_samples = sp.points.size();
    report.gt_samples = sg.points.size();
    return report;
}

ImageReport evaluate_image(const FeatureMap& pred, const FeatureMap& gt,
                           const std::string& view) {
    ImageReport report;
    report.psnr_db = psnr(pred, gt);
    report.ssim = ssim(pred, gt);
    report.view = view;
    return report;
}

} // namespace splatkit
