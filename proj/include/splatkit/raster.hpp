#pragma once

#include <vector>

#include "splatkit/camera.hpp"
#include "splatkit/feature_map.hpp"
#include "splatkit/gaussian.hpp"
#include "splatkit/mesh.hpp"

namespace splatkit {

/// Image (3xHxW), accumulated alpha (1xHxW) and camera-space depth (1xHxW,
/// +inf where nothing rendered).
struct RenderOutput {
    FeatureMap image;
    FeatureMap alpha;
    FeatureMap depth;
    /// Gaussians whose projected 2D covariance needed the epsilon clamp.
    size_t clamped_covariances = 0;
};

enum class RenderMode { Color, Normal };

struct SoftRenderConfig {
    double sigma_edge = 1.0;     // silhouette falloff, in pixels
    double alpha_cutoff = 1.0 / 255.0; // gaussian contributions below this are dropped
    int tile_size = 32;          // pixels per rasterization tile
    /// In normal mode, renormalize the composited vector where alpha exceeds
    /// this threshold.
    bool renormalize_normals = true;
    double renormalize_min_alpha = 0.05;

    void validate() const;
};

/// Depth-sorted front-to-back alpha compositing of 2D Gaussian footprints
/// under orthographic projection. In normal mode colors are decoded as
/// n = 2c - 1, composited, optionally renormalized, and re-encoded.
RenderOutput render_gaussians(const GaussianSet& set, const OrthoCamera& camera,
                              RenderMode mode = RenderMode::Color,
                              const SoftRenderConfig& config = {});

/// Hard z-buffer normal rasterization plus a soft sigmoid silhouette:
/// image holds camera-space face normals mapped to (n+1)/2, alpha is
/// sigmoid(D/sigma_edge) of the signed pixel distance to the projected
/// silhouette (positive inside).
RenderOutput render_mesh(const TriMesh& mesh, const OrthoCamera& camera,
                         const SoftRenderConfig& config = {});

/// Losses and analytic vertex gradients for mesh refinement. The normal
/// term is averaged over pixels covered by both the rendered and target
/// masks (alpha > 0.5 each); the mask term over all pixels. Pixel-to-face
/// assignment and the nearest-silhouette-edge choice are treated as locally
/// constant, so no gradient flows through visibility changes.
struct MeshLossGrad {
    double loss_normal = 0.0;
    double loss_mask = 0.0;
    std::vector<Eigen::Vector3d> grad_normal; // per vertex, dL_normal/dv
    std::vector<Eigen::Vector3d> grad_mask;   // per vertex, dL_mask/dv
    RenderOutput render;                      // the forward render, for reuse
};

MeshLossGrad render_mesh_with_grads(const TriMesh& mesh, const OrthoCamera& camera,
                                    const SoftRenderConfig& config,
                                    const FeatureMap& target_normal,
                                    const FeatureMap& target_mask);

} // namespace splatkit
