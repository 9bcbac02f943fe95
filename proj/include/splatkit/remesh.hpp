#pragma once

#include <vector>

#include "splatkit/camera.hpp"
#include "splatkit/gaussian.hpp"
#include "splatkit/marching_cubes.hpp"
#include "splatkit/mesh.hpp"
#include "splatkit/raster.hpp"

namespace splatkit {

struct RemeshConfig {
    std::vector<OrthoCamera> views; // empty -> 8-view ring built from the gaussian bounds
    int iterations = 200;
    double step_size = 1.0;
    double lambda_normal = 1.0;
    double lambda_mask = 1.0;
    double lambda_lap = 1.0;
    int grid_res = 64;        // marching-cubes cells per axis
    double iso_level = -1.0;  // < 0 -> 0.3 * grid max
    double stop_tol = 0.0;    // plateau stop threshold; 0 disables
    double momentum = 0.9;
    /// Per-iteration cap on any vertex displacement, in pixels of the first
    /// view (tames sliver-face gradient spikes); <= 0 disables.
    double max_step_px = 1.0;
    /// Rejected steps retry with a halved step up to this many times before
    /// the iteration is recorded as rejected.
    int backtracks = 6;
    SoftRenderConfig render;

    void validate() const;
};

struct RemeshIterationRecord {
    double normal = 0.0;
    double mask = 0.0;
    double lap = 0.0;
    double total = 0.0;
    bool accepted = false;
};

struct RemeshReport {
    std::vector<RemeshIterationRecord> iterations; // accepted-state loss per iteration
    double final_normal = 0.0;
    double final_mask = 0.0;
    double final_lap = 0.0;
    double final_total = 0.0;
    int iteration_count = 0;
    double wall_ms = 0.0;
    size_t verts_before = 0, faces_before = 0;
    size_t verts_after = 0, faces_after = 0;
};

/// Opacity-weighted density sum with per-gaussian 3-sigma support:
/// value(x) = sum_i opacity_i * exp(-1/2 (x-mu_i)^T Sigma_i^-1 (x-mu_i)).
ScalarGrid density_field(const GaussianSet& set, int grid_res, const Eigen::Vector3d& bound_min,
                         const Eigen::Vector3d& bound_max);

/// Axis-aligned bounds covering every gaussian's 3-sigma box plus a margin.
void gaussian_bounds(const GaussianSet& set, Eigen::Vector3d& bound_min,
                     Eigen::Vector3d& bound_max, double margin_fraction = 0.1);

/// Marching cubes on the density field, largest component kept.
TriMesh init_coarse_mesh(const GaussianSet& set, const RemeshConfig& config);

/// Uniform (umbrella) Laplacian energy: mean over vertices of
/// |mean(neighbors) - v|^2, with its analytic gradient. Isolated vertices
/// are excluded and counted. per_vertex, when given, receives each
/// vertex's |delta|^2 contribution.
double laplacian_energy(const TriMesh& mesh, std::vector<Eigen::Vector3d>* gradient = nullptr,
                        int* isolated_count = nullptr,
                        std::vector<double>* per_vertex = nullptr);

/// Gradient-based refinement of the coarse mesh against normal/mask targets
/// rendered from the gaussians: first-order steps with momentum, rejected
/// (loss-increasing) steps roll back and halve the step size.
std::pair<TriMesh, RemeshReport> remesh(const GaussianSet& set, const RemeshConfig& config);

/// The optimizer core behind remesh(): refines `mesh` against caller-made
/// per-view targets. config.views, target_normals and target_masks must
/// align index-wise.
std::pair<TriMesh, RemeshReport> refine_mesh(TriMesh mesh,
                                             const std::vector<FeatureMap>& target_normals,
                                             const std::vector<FeatureMap>& target_masks,
                                             const RemeshConfig& config);

/// One view's loss terms and gradients against precomputed targets; exposed
/// so multi-view assembly stays testably additive.
struct ViewLoss {
    double normal = 0.0;
    double mask = 0.0;
    std::vector<Eigen::Vector3d> grad; // lambda-weighted normal+mask gradient
};

ViewLoss evaluate_view(const TriMesh& mesh, const OrthoCamera& view,
                       const FeatureMap& target_normal, const FeatureMap& target_mask,
                       const RemeshConfig& config);

/// Full objective over config.views plus the Laplacian term; the gradient
/// is the ordered sum of per-view gradients plus lambda_lap times the
/// Laplacian gradient.
struct ObjectiveEval {
    double normal = 0.0;
    double mask = 0.0;
    double lap = 0.0;
    double total = 0.0;
    std::vector<Eigen::Vector3d> grad;
};

ObjectiveEval remesh_objective(const TriMesh& mesh,
                               const std::vector<FeatureMap>& target_normals,
                               const std::vector<FeatureMap>& target_masks,
                               const RemeshConfig& config);

} // namespace splatkit
