#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "splatkit/camera.hpp"
#include "splatkit/feature_map.hpp"
#include "splatkit/gaussian.hpp"
#include "splatkit/weights.hpp"

namespace splatkit {

// ------------------------------------------------------------ attention

/// One scaled dot-product attention layer (single head, row-vector tokens).
struct AttnLayerWeights {
    Eigen::MatrixXd w_q, w_k, w_v, w_o; // each d x d

    void validate() const;
    static AttnLayerWeights seeded_uniform(int width, uint64_t seed);
    void store(WeightManifest& manifest, const std::string& prefix) const;
    static AttnLayerWeights from_manifest(const WeightManifest& manifest,
                                          const std::string& prefix);
};

struct MlpWeights {
    Eigen::MatrixXd w1; // d x hidden
    Eigen::VectorXd b1;
    Eigen::MatrixXd w2; // hidden x d
    Eigen::VectorXd b2;

    void validate() const;
    static MlpWeights seeded_uniform(int width, int hidden, uint64_t seed);
    void store(WeightManifest& manifest, const std::string& prefix) const;
    static MlpWeights from_manifest(const WeightManifest& manifest, const std::string& prefix);
};

/// Weights of the region-aware interaction block: a stack of self-attention
/// layers over the query tokens, one cross-attention against the body
/// tokens, then an MLP.
struct RsemBlockWeights {
    std::vector<AttnLayerWeights> self_layers;
    AttnLayerWeights cross;
    MlpWeights mlp;
    bool use_residual = false; // the block formula is residual-free as written
    int width = 0;

    void validate() const;
    static RsemBlockWeights seeded_uniform(int width, int self_layer_count, uint64_t seed);
    void store(WeightManifest& manifest, const std::string& prefix) const;
    static RsemBlockWeights from_manifest(const WeightManifest& manifest,
                                          const std::string& prefix);
};

/// softmax((Q Wq)(K Wk)^T / sqrt(d)) (V Wv) Wo. Rows of Q are query tokens.
Eigen::MatrixXd attention(const Eigen::MatrixXd& queries, const Eigen::MatrixXd& keys,
                          const Eigen::MatrixXd& values, const AttnLayerWeights& weights);

/// Self-attention over the head tokens, cross-attention against the body
/// tokens (keys and values alike), then the MLP, in that order.
Eigen::MatrixXd rsem_block(const Eigen::MatrixXd& head_tokens,
                           const Eigen::MatrixXd& body_tokens, const RsemBlockWeights& weights);

// ------------------------------------------------------------ region crops

/// One square crop per nonempty mask: the tight bounding box grown to a
/// square, zero-padded where it leaves the image, bilinearly resized to
/// out_size. Empty masks are skipped and counted in skipped_empty.
std::vector<FeatureMap> crop_regions(const FeatureMap& image,
                                     const std::vector<FeatureMap>& masks, int out_size,
                                     int* skipped_empty = nullptr);

// ------------------------------------------------------------ texture path

struct TextureEncoderWeights {
    Conv2dWeights conv; // 9 input channels (RGB + Plucker) -> o
    Conv2dWeights gate; // o -> 1, sigmoid spatial attention

    void validate() const;
    static TextureEncoderWeights seeded_uniform(int out_channels, uint64_t seed);
    void store(WeightManifest& manifest, const std::string& prefix) const;
    static TextureEncoderWeights from_manifest(const WeightManifest& manifest,
                                               const std::string& prefix);
};

/// conv over [image; plucker], then a one-channel sigmoid gate multiplied
/// into every output channel.
FeatureMap texture_encode(const FeatureMap& image, const FeatureMap& plucker,
                          const TextureEncoderWeights& weights);

// ------------------------------------------------------------ dual U-Net

/// One encoder-decoder branch: five stride-2 down convs, a mid conv, five
/// up blocks (nearest upsample + conv over the concatenated skip).
struct UNetBranchWeights {
    static constexpr int kStages = 5;
    std::array<Conv2dWeights, kStages> down;
    Conv2dWeights mid;
    std::array<Conv2dWeights, kStages> up;

    int input_channels() const { return down[0].in_channels; }
    int output_channels() const { return up[kStages - 1].out_channels; }
    void validate() const;
    static UNetBranchWeights seeded_uniform(int in_channels, int base_channels, int out_channels,
                                            uint64_t seed);
    void store(WeightManifest& manifest, const std::string& prefix) const;
    static UNetBranchWeights from_manifest(const WeightManifest& manifest,
                                           const std::string& prefix);
};

struct DualUNetWeights {
    UNetBranchWeights texture;
    UNetBranchWeights normal;

    void validate() const;
    static DualUNetWeights seeded_uniform(int in_channels, int base_channels, int out_channels,
                                          uint64_t seed);
    void store(WeightManifest& manifest) const;
    static DualUNetWeights from_manifest(const WeightManifest& manifest);
};

struct DualUNetResult {
    FeatureMap texture_map; // 14 x H x W
    FeatureMap normal_map;  // 14 x H x W
    /// (channels, height, width) of each cross-branch fusion sum, mid first.
    std::vector<std::array<int, 3>> fusion_shapes;
};

/// Plain forward pass of one branch, no cross-branch fusion.
FeatureMap unet_branch_forward(const FeatureMap& input, const UNetBranchWeights& weights);

/// Both branches consume [F_g; F_c]; mid-block outputs are summed and the
/// sum replaces both decoder inputs, and the same additive exchange repeats
/// after up-blocks 1 through 4. Up-block-5 outputs stay separate.
DualUNetResult dual_unet_forward(const FeatureMap& geometry_features,
                                 const FeatureMap& texture_features,
                                 const DualUNetWeights& weights);

// ------------------------------------------------------------ decoding

/// Pixel-aligned Gaussian decoding: channels 0-2 tanh-bounded center offset,
/// 3-5 softplus scales, 6-9 identity-biased quaternion, 10 sigmoid opacity,
/// 11-13 sigmoid color. Centers anchor to the pixel ray at
/// default_depth + offset_z along the view direction.
struct GaussianMapDecodeSpec {
    double offset_scale = 0.5;  // scene units bounding each tanh offset axis
    double default_depth = -1.0; // < 0 -> (near + far) / 2 of the camera
    double scale_gain = 1.0;    // multiplies softplus(raw) scales
    double opacity_floor = 0.01; // pixels below this opacity are dropped

    void validate() const;
};

GaussianSet decode_gaussian_map(const FeatureMap& map, const OrthoCamera& camera,
                                const GaussianMapDecodeSpec& spec = {});

} // namespace splatkit
