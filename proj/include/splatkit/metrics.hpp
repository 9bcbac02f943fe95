#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "splatkit/feature_map.hpp"
#include "splatkit/mesh.hpp"

namespace splatkit {

struct GeomReport {
    double cd_p_to_s = 0.0; // pred -> scan mean nearest distance
    double cd_s_to_p = 0.0;
    double nc = 0.0;        // normal consistency in [-1, 1]
    double fscore = 0.0;
    double tau = 0.0;       // f-score threshold, same units as the inputs
    size_t pred_samples = 0;
    size_t gt_samples = 0;
    std::string units = "cm";
};

struct ImageReport {
    double psnr_db = 0.0; // capped at 99 for identical images
    double ssim = 0.0;
    std::string view;     // e.g. front / back
};

/// Mean nearest-neighbor distance in both directions. The kd-tree result is
/// bit-identical to the O(n^2) scan.
std::pair<double, double> chamfer(const std::vector<Eigen::Vector3d>& pred,
                                  const std::vector<Eigen::Vector3d>& gt);

/// Reference quadratic-scan implementation used as the oracle.
std::pair<double, double> chamfer_bruteforce(const std::vector<Eigen::Vector3d>& pred,
                                             const std::vector<Eigen::Vector3d>& gt);

/// Mean |n_a . n_b| at nearest-neighbor surface matches, averaged over both
/// directions; area-weighted seeded sampling on each mesh.
double normal_consistency(const TriMesh& pred, const TriMesh& gt, size_t samples, uint64_t seed);

/// Precision/recall of points within tau, combined as 2PR/(P+R).
double f_score(const std::vector<Eigen::Vector3d>& pred, const std::vector<Eigen::Vector3d>& gt,
               double tau);

/// 10 log10(peak^2 / MSE), capped at 99 dB when MSE < 1e-12.
double psnr(const FeatureMap& a, const FeatureMap& b, double peak = 1.0);

/// Mean local SSIM, Gaussian 11x11 window with sigma 1.5, per channel then
/// averaged; valid-region convolution.
double ssim(const FeatureMap& a, const FeatureMap& b, int window = 11, double k1 = 0.01,
            double k2 = 0.03, double peak = 1.0);

/// Full geometry report for two meshes: both are sampled with `samples`
/// area-weighted points (seeded) and compared point-to-point.
GeomReport evaluate_geometry(const TriMesh& pred, const TriMesh& gt, double tau,
                             size_t samples = 100000, uint64_t seed = 0);

ImageReport evaluate_image(const FeatureMap& pred, const FeatureMap& gt,
                           const std::string& view = "front");

/// Nearest-neighbor index/squared-distance queries over a fixed point set.
class KdTree {
public:
    explicit KdTree(const std::vector<Eigen::Vector3d>& points);
    /// Index of the nearest point and its squared distance.
    std::pair<size_t, double> nearest(const Eigen::Vector3d& query) const;

private:
    struct Node {
        int axis = 0;
        size_t point = 0;
        int left = -1, right = -1;
    };
    int build(std::vector<size_t>& order, size_t begin, size_t end, int depth);
    void search(int node, const Eigen::Vector3d& query, size_t& best, double& best_d2) const;

    const std::vector<Eigen::Vector3d>& points_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

} // namespace splatkit
