#include "splatkit/netshell.hpp"

#include <cmath>
#include <random>

#include "splatkit/projection.hpp"

namespace splatkit {

namespace {

Eigen::MatrixXd seeded_matrix(int rows, int cols, std::mt19937_64& rng) {
    const double bound = std::sqrt(1.0 / rows);
    std::uniform_real_distribution<double> uni(-bound, bound);
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = uni(rng);
    return m;
}

void store_matrix(WeightManifest& manifest, const std::string& name, const Eigen::MatrixXd& m) {
    WeightTensor t;
    t.dims = {static_cast<uint32_t>(m.rows()), static_cast<uint32_t>(m.cols())};
    t.values.resize(static_cast<size_t>(m.rows()) * m.cols());
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            t.values[static_cast<size_t>(r) * m.cols() + c] = m(r, c);
    manifest.set(name, std::move(t));
}

Eigen::MatrixXd load_matrix(const WeightManifest& manifest, const std::string& name) {
    const WeightTensor& t = manifest.get(name);
    if (t.dims.size() != 2) throw FormatError("weight '" + name + "' is not a matrix");
    Eigen::MatrixXd m(t.dims[0], t.dims[1]);
    for (uint32_t r = 0; r < t.dims[0]; ++r)
        for (uint32_t c = 0; c < t.dims[1]; ++c)
            m(r, c) = t.values[static_cast<size_t>(r) * t.dims[1] + c];
    return m;
}

void store_vector(WeightManifest& manifest, const std::string& name, const Eigen::VectorXd& v) {
    WeightTensor t;
    t.dims = {static_cast<uint32_t>(v.size())};
    t.values.assign(v.data(), v.data() + v.size());
    manifest.set(name, std::move(t));
}

Eigen::VectorXd load_vector(const WeightManifest& manifest, const std::string& name) {
    const WeightTensor& t = manifest.get(name);
    if (t.dims.size() != 1) throw FormatError("weight '" + name + "' is not a vector");
    return Eigen::Map<const Eigen::VectorXd>(t.values.data(),
                                             static_cast<Eigen::Index>(t.values.size()));
}

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

} // namespace

// ------------------------------------------------------------ attention

void AttnLayerWeights::validate() const {
    const Eigen::Index d = w_q.rows();
    if (d == 0 || w_q.cols() != d || w_k.rows() != d || w_k.cols() != d || w_v.rows() != d ||
        w_v.cols() != d || w_o.rows() != d || w_o.cols() != d)
        throw ValidationError("attention weights: inconsistent widths");
}

AttnLayerWeights AttnLayerWeights::seeded_uniform(int width, uint64_t seed) {
    std::mt19937_64 rng(seed);
    AttnLayerWeights w;
    w.w_q = seeded_matrix(width, width, rng);
    w.w_k = seeded_matrix(width, width, rng);
    w.w_v = seeded_matrix(width, width, rng);
    w.w_o = seeded_matrix(width, width, rng);
    return w;
}

void AttnLayerWeights::store(WeightManifest& manifest, const std::string& prefix) const {
    store_matrix(manifest, prefix + ".wq", w_q);
    store_matrix(manifest, prefix + ".wk", w_k);
    store_matrix(manifest, prefix + ".wv", w_v);
    store_matrix(manifest, prefix + ".wo", w_o);
}

AttnLayerWeights AttnLayerWeights::from_manifest(const WeightManifest& manifest,
                                                 const std::string& prefix) {
    AttnLayerWeights w;
    w.w_q = load_matrix(manifest, prefix + ".wq");
    w.w_k = load_matrix(manifest, prefix + ".wk");
    w.w_v = load_matrix(manifest, prefix + ".wv");
    w.w_o = load_matrix(manifest, prefix + ".wo");
    w.validate();
    return w;
}

void MlpWeights::validate() const {
    if (w1.rows() == 0 || w1.cols() != b1.size() || w2.rows() != w1.cols() ||
        w2.cols() != b2.size() || w2.cols() != w1.rows())
        throw ValidationError("mlp weights: inconsistent widths");
}

MlpWeights MlpWeights::seeded_uniform(int width, int hidden, uint64_t seed) {
    std::mt19937_64 rng(seed);
    MlpWeights w;
    w.w1 = seeded_matrix(width, hidden, rng);
    w.b1 = Eigen::VectorXd::Zero(hidden);
    w.w2 = seeded_matrix(hidden, width, rng);
    w.b2 = Eigen::VectorXd::Zero(width);
    return w;
}

void MlpWeights::store(WeightManifest& manifest, const std::string& prefix) const {
    store_matrix(manifest, prefix + ".w1", w1);
    store_vector(manifest, prefix + ".b1", b1);
    store_matrix(manifest, prefix + ".w2", w2);
    store_vector(manifest, prefix + ".b2", b2);
}

MlpWeights MlpWeights::from_manifest(const WeightManifest& manifest, const std::string& prefix) {
    MlpWeights w;
    w.w1 = load_matrix(manifest, prefix + ".w1");
    w.b1 = load_vector(manifest, prefix + ".b1");
    w.w2 = load_matrix(manifest, prefix + ".w2");
    w.b2 = load_vector(manifest, prefix + ".b2");
    w.validate();
    return w;
}

void RsemBlockWeights::validate() const {
    if (width < 1) throw ValidationError("rsem weights: width must be positive");
    for (const auto& layer : self_layers) {
        layer.validate();
        if (layer.w_q.rows() != width) throw ValidationError("rsem weights: width mismatch");
    }
    cross.validate();
    if (cross.w_q.rows() != width) throw ValidationError("rsem weights: width mismatch");
    mlp.validate();
    if (mlp.w1.rows() != width) throw ValidationError("rsem weights: width mismatch");
}

RsemBlockWeights RsemBlockWeights::seeded_uniform(int width, int self_layer_count,
                                                  uint64_t seed) {
    RsemBlockWeights w;
    w.width = width;
    for (int i = 0; i < self_layer_count; ++i)
        w.self_layers.push_back(AttnLayerWeights::seeded_uniform(width, seed + 1 + i));
    w.cross = AttnLayerWeights::seeded_uniform(width, seed + 101);
    w.mlp = MlpWeights::seeded_uniform(width, 2 * width, seed + 201);
    return w;
}

void RsemBlockWeights::store(WeightManifest& manifest, const std::string& prefix) const {
    for (size_t i = 0; i < self_layers.size(); ++i)
        self_layers[i].store(manifest, prefix + ".self" + std::to_string(i));
    cross.store(manifest, prefix + ".cross");
    mlp.store(manifest, prefix + ".mlp");
    WeightTensor meta;
    meta.dims = {3};
    meta.values = {static_cast<double>(width), static_cast<double>(self_layers.size()),
                   use_residual ? 1.0 : 0.0};
    manifest.set(prefix + ".meta", std::move(meta));
}

RsemBlockWeights RsemBlockWeights::from_manifest(const WeightManifest& manifest,
                                                 const std::string& prefix) {
    const WeightTensor& meta = manifest.get(prefix + ".meta", {3});
    RsemBlockWeights w;
    w.width = static_cast<int>(meta.values[0]);
    const int layers = static_cast<int>(meta.values[1]);
    w.use_residual = meta.values[2] != 0.0;
    for (int i = 0; i < layers; ++i)
        w.self_layers.push_back(
            AttnLayerWeights::from_manifest(manifest, prefix + ".self" + std::to_string(i)));
    w.cross = AttnLayerWeights::from_manifest(manifest, prefix + ".cross");
    w.mlp = MlpWeights::from_manifest(manifest, prefix + ".mlp");
    w.validate();
    return w;
}

Eigen::MatrixXd attention(const Eigen::MatrixXd& queries, const Eigen::MatrixXd& keys,
                          const Eigen::MatrixXd& values, const AttnLayerWeights& weights) {
    weights.validate();
    const Eigen::Index d = weights.w_q.rows();
    if (queries.cols() != d || keys.cols() != d || values.cols() != d)
        throw ValidationError("attention: token width mismatch");
    if (keys.rows() != values.rows())
        throw ValidationError("attention: key/value count mismatch");

    const Eigen::MatrixXd q = queries * weights.w_q;
    const Eigen::MatrixXd k = keys * weights.w_k;
    Eigen::MatrixXd scores = q * k.transpose() / std::sqrt(static_cast<double>(d));
    for (Eigen::Index r = 0; r < scores.rows(); ++r) { // stable row softmax
        const double row_max = scores.row(r).maxCoeff();
        scores.row(r) = (scores.row(r).array() - row_max).exp();
        scores.row(r) /= scores.row(r).sum();
    }
    return scores * (values * weights.w_v) * weights.w_o;
}

Eigen::MatrixXd rsem_block(const Eigen::MatrixXd& head_tokens,
                           const Eigen::MatrixXd& body_tokens,
                           const RsemBlockWeights& weights) {
    weights.validate();
    Eigen::MatrixXd q = head_tokens;
    for (const auto& layer : weights.self_layers) {
        const Eigen::MatrixXd a = attention(q, q, q, layer);
        q = weights.use_residual ? (q + a).eval() : a;
    }
    const Eigen::MatrixXd c = attention(q, body_tokens, body_tokens, weights.cross);
    q = weights.use_residual ? (q + c).eval() : c;
    Eigen::MatrixXd hidden = (q * weights.mlp.w1).rowwise() + weights.mlp.b1.transpose();
    hidden = hidden.cwiseMax(0.0);
    Eigen::MatrixXd m = (hidden * weights.mlp.w2).rowwise() + weights.mlp.b2.transpose();
    return weights.use_residual ? (q + m).eval() : m;
}

// ------------------------------------------------------------ region crops

std::vector<FeatureMap> crop_regions(const FeatureMap& image,
                                     const std::vector<FeatureMap>& masks, int out_size,
                                     int* skipped_empty) {
    if (out_size < 1) throw ValidationError("crop_regions: out_size must be positive");
    const int h = image.height(), w = image.width(), ch = image.channels();
    int skipped = 0;
    std::vector<FeatureMap> crops;
    for (const FeatureMap& mask : masks) {
        if (mask.height() != h || mask.width() != w || mask.channels() != 1)
            throw ValidationError("crop_regions: mask shape mismatch");
        int r0 = h, r1 = -1, c0 = w, c1 = -1;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if (mask.at(0, y, x) != 0.0) {
                    r0 = std::min(r0, y);
                    r1 = std::max(r1, y);
                    c0 = std::min(c0, x);
                    c1 = std::max(c1, x);
                }
        if (r1 < 0) {
            ++skipped;
            continue;
        }
        const int bh = r1 - r0 + 1, bw = c1 - c0 + 1;
        const int side = std::max(bh, bw);
        const int sq_r0 = r0 - (side - bh) / 2;
        const int sq_c0 = c0 - (side - bw) / 2;

        // materialize the square window, zero where it leaves the image
        FeatureMap square(ch, side, side);
        for (int c = 0; c < ch; ++c)
            for (int y = 0; y < side; ++y)
                for (int x = 0; x < side; ++x) {
                    const int sy = sq_r0 + y, sx = sq_c0 + x;
                    if (sy < 0 || sy >= h || sx < 0 || sx >= w) continue;
                    square.at(c, y, x) = image.at(c, sy, sx);
                }

        FeatureMap resized(ch, out_size, out_size);
        const double scale = static_cast<double>(side) / out_size;
        for (int c = 0; c < ch; ++c)
            for (int y = 0; y < out_size; ++y)
                for (int x = 0; x < out_size; ++x) {
                    const double sy = (y + 0.5) * scale - 0.5;
                    const double sx = (x + 0.5) * scale - 0.5;
                    const int y0 = std::clamp(static_cast<int>(std::floor(sy)), 0, side - 1);
                    const int x0 = std::clamp(static_cast<int>(std::floor(sx)), 0, side - 1);
                    const int y1 = std::min(y0 + 1, side - 1);
                    const int x1 = std::min(x0 + 1, side - 1);
                    const double fy = std::clamp(sy - y0, 0.0, 1.0);
                    const double fx = std::clamp(sx - x0, 0.0, 1.0);
                    resized.at(c, y, x) =
                        (1 - fy) * ((1 - fx) * square.at(c, y0, x0) + fx * square.at(c, y0, x1)) +
                        fy * ((1 - fx) * square.at(c, y1, x0) + fx * square.at(c, y1, x1));
                }
        crops.push_back(std::move(resized));
    }
    if (skipped_empty) *skipped_empty = skipped;
    if (crops.empty()) throw ValidationError("crop_regions: every mask is empty");
    return crops;
}

// ------------------------------------------------------------ texture path

void TextureEncoderWeights::validate() const {
    conv.validate();
    gate.validate();
    if (conv.in_channels != 9) throw ValidationError("texture encoder expects 9 input channels");
    if (gate.in_channels != conv.out_channels || gate.out_channels != 1)
        throw ValidationError("texture encoder gate must map conv output to one channel");
}

TextureEncoderWeights TextureEncoderWeights::seeded_uniform(int out_channels, uint64_t seed) {
    TextureEncoderWeights w;
    w.conv = Conv2dWeights::seeded_uniform(out_channels, 9, 3, seed + 1);
    w.gate = Conv2dWeights::seeded_uniform(1, out_channels, 3, seed + 2);
    return w;
}

void TextureEncoderWeights::store(WeightManifest& manifest, const std::string& prefix) const {
    conv.store(manifest, prefix + ".conv");
    gate.store(manifest, prefix + ".gate");
}

TextureEncoderWeights TextureEncoderWeights::from_manifest(const WeightManifest& manifest,
                                                           const std::string& prefix) {
    TextureEncoderWeights w;
    w.conv = Conv2dWeights::from_manifest(manifest, prefix + ".conv");
    w.gate = Conv2dWeights::from_manifest(manifest, prefix + ".gate");
    w.validate();
    return w;
}

FeatureMap texture_encode(const FeatureMap& image, const FeatureMap& plucker,
                          const TextureEncoderWeights& weights) {
    weights.validate();
    if (image.channels() != 3 || plucker.channels() != 6)
        throw ValidationError("texture_encode: expected 3-channel image and 6-channel rays");
    const FeatureMap features = conv2d_3x3(concat_channels(image, plucker), weights.conv);
    const FeatureMap gate_logits = conv2d_3x3(features, weights.gate);
    FeatureMap out = features;
    for (int c = 0; c < out.channels(); ++c)
        for (int y = 0; y < out.height(); ++y)
            for (int x = 0; x < out.width(); ++x)
                out.at(c, y, x) *= sigmoid(gate_logits.at(0, y, x));
    return out;
}

// ------------------------------------------------------------ dual U-Net

namespace {

FeatureMap conv2d_strided(const FeatureMap& input, const Conv2dWeights& weights, int stride) {
    weights.validate();
    if (weights.in_channels != input.channels())
        throw ValidationError("conv2d: input channel count mismatch");
    const int h = input.height(), w = input.width();
    const int oh = (h + stride - 1) / stride, ow = (w + stride - 1) / stride;
    const int k = weights.kernel, pad = k / 2;
    FeatureMap out(weights.out_channels, oh, ow);
    for (int o = 0; o < weights.out_channels; ++o)
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x) {
                double acc = weights.bias[o];
                for (int c = 0; c < weights.in_channels; ++c)
                    for (int ky = 0; ky < k; ++ky) {
                        const int yy = y * stride + ky - pad;
                        if (yy < 0 || yy >= h) continue;
                        for (int kx = 0; kx < k; ++kx) {
                            const int xx = x * stride + kx - pad;
                            if (xx < 0 || xx >= w) continue;
                            acc += weights.w(o, c, ky, kx) * input.at(c, yy, xx);
                        }
                    }
                out.at(o, y, x) = acc;
            }
    return out;
}

FeatureMap relu(FeatureMap map) {
    for (double& v : map.data()) v = std::max(v, 0.0);
    return map;
}

FeatureMap upsample_nearest_x2(const FeatureMap& input) {
    FeatureMap out(input.channels(), input.height() * 2, input.width() * 2);
    for (int c = 0; c < input.channels(); ++c)
        for (int y = 0; y < out.height(); ++y)
            for (int x = 0; x < out.width(); ++x)
                out.at(c, y, x) = input.at(c, y / 2, x / 2);
    return out;
}

struct BranchState {
    std::vector<FeatureMap> skips; // input plus each down-block output
    FeatureMap mid;
};

BranchState branch_encode(const FeatureMap& input, const UNetBranchWeights& w) {
    BranchState state;
    state.skips.push_back(input);
    FeatureMap x = input;
    for (int s = 0; s < UNetBranchWeights::kStages; ++s) {
        x = relu(conv2d_strided(x, w.down[s], 2));
        state.skips.push_back(x);
    }
    state.mid = relu(conv2d_3x3(x, w.mid));
    return state;
}

/// One up block: upsample, concat the matching skip, conv; the final block
/// emits the raw output map without activation.
FeatureMap branch_up_step(const FeatureMap& x, const BranchState& state, int stage,
                          const UNetBranchWeights& w) {
    const FeatureMap upsampled = upsample_nearest_x2(x);
    const FeatureMap& skip = state.skips[UNetBranchWeights::kStages - 1 - stage];
    const FeatureMap together = concat_channels(upsampled, skip);
    FeatureMap out = conv2d_strided(together, w.up[stage], 1);
    if (stage + 1 < UNetBranchWeights::kStages) out = relu(std::move(out));
    return out;
}

} // namespace

void UNetBranchWeights::validate() const {
    for (const auto& c : down) c.validate();
    mid.validate();
    for (const auto& c : up) c.validate();
    for (int s = 1; s < kStages; ++s)
        if (down[s].in_channels != down[s - 1].out_channels)
            throw ValidationError("unet weights: down-path channel mismatch");
    if (mid.in_channels != down[kStages - 1].out_channels)
        throw ValidationError("unet weights: mid-block channel mismatch");
    int carried = mid.out_channels;
    for (int s = 0; s < kStages; ++s) {
        const int skip_channels =
            s + 1 < kStages ? down[kStages - 2 - s].out_channels : down[0].in_channels;
        if (up[s].in_channels != carried + skip_channels)
            throw ValidationError("unet weights: up-path channel mismatch at stage " +
                                  std::to_string(s));
        carried = up[s].out_channels;
    }
}

UNetBranchWeights UNetBranchWeights::seeded_uniform(int in_channels, int base_channels,
                                                    int out_channels, uint64_t seed) {
    UNetBranchWeights w;
    int c = in_channels;
    for (int s = 0; s < kStages; ++s) {
        w.down[s] = Conv2dWeights::seeded_uniform(base_channels, c, 3, seed + s);
        c = base_channels;
    }
    w.mid = Conv2dWeights::seeded_uniform(base_channels, base_channels, 3, seed + 10);
    int carried = base_channels;
    for (int s = 0; s < kStages; ++s) {
        const int skip_channels = s + 1 < kStages ? base_channels : in_channels;
        const int out_c = s + 1 < kStages ? base_channels : out_channels;
        w.up[s] = Conv2dWeights::seeded_uniform(out_c, carried + skip_channels, 3, seed + 20 + s);
        carried = out_c;
    }
    return w;
}

void UNetBranchWeights::store(WeightManifest& manifest, const std::string& prefix) const {
    for (int s = 0; s < kStages; ++s) down[s].store(manifest, prefix + ".down" + std::to_string(s));
    mid.store(manifest, prefix + ".mid");
    for (int s = 0; s < kStages; ++s) up[s].store(manifest, prefix + ".up" + std::to_string(s));
}

UNetBranchWeights UNetBranchWeights::from_manifest(const WeightManifest& manifest,
                                                   const std::string& prefix) {
    UNetBranchWeights w;
    for (int s = 0; s < kStages; ++s)
        w.down[s] = Conv2dWeights::from_manifest(manifest, prefix + ".down" + std::to_string(s));
    w.mid = Conv2dWeights::from_manifest(manifest, prefix + ".mid");
    for (int s = 0; s < kStages; ++s)
        w.up[s] = Conv2dWeights::from_manifest(manifest, prefix + ".up" + std::to_string(s));
    w.validate();
    return w;
}

void DualUNetWeights::validate() const {
    texture.validate();
    normal.validate();
    if (texture.input_channels() != normal.input_channels())
        throw ValidationError("dual unet: branch input widths differ");
    if (texture.output_channels() != normal.output_channels())
        throw ValidationError("dual unet: branch output widths differ");
}

DualUNetWeights DualUNetWeights::seeded_uniform(int in_channels, int base_channels,
                                                int out_channels, uint64_t seed) {
    DualUNetWeights w;
    w.texture = UNetBranchWeights::seeded_uniform(in_channels, base_channels, out_channels, seed);
    w.normal =
        UNetBranchWeights::seeded_uniform(in_channels, base_channels, out_channels, seed + 1000);
    return w;
}

void DualUNetWeights::store(WeightManifest& manifest) const {
    texture.store(manifest, "unet.texture");
    normal.store(manifest, "unet.normal");
}

DualUNetWeights DualUNetWeights::from_manifest(const WeightManifest& manifest) {
    DualUNetWeights w;
    w.texture = UNetBranchWeights::from_manifest(manifest, "unet.texture");
    w.normal = UNetBranchWeights::from_manifest(manifest, "unet.normal");
    w.validate();
    return w;
}

FeatureMap unet_branch_forward(const FeatureMap& input, const UNetBranchWeights& weights) {
    weights.validate();
    const BranchState state = branch_encode(input, weights);
    FeatureMap x = state.mid;
    for (int s = 0; s < UNetBranchWeights::kStages; ++s) x = branch_up_step(x, state, s, weights);
    return x;
}

DualUNetResult dual_unet_forward(const FeatureMap& geometry_features,
                                 const FeatureMap& texture_features,
                                 const DualUNetWeights& weights) {
    weights.validate();
    if (geometry_features.height() != texture_features.height() ||
        geometry_features.width() != texture_features.width())
        throw ValidationError("dual_unet_forward: feature maps are not spatially aligned");
    const FeatureMap input = concat_channels(geometry_features, texture_features);
    if (input.channels() != weights.texture.input_channels())
        throw ValidationError("dual_unet_forward: weights expect " +
                              std::to_string(weights.texture.input_channels()) +
                              " input channels, got " + std::to_string(input.channels()));

    const BranchState tex_state = branch_encode(input, weights.texture);
    const BranchState nrm_state = branch_encode(input, weights.normal);

    DualUNetResult result;
    auto fuse = [&result](const FeatureMap& a, const FeatureMap& b) {
        if (!a.same_shape(b)) throw ValidationError("dual_unet_forward: fusion shape mismatch");
        FeatureMap sum = a;
        for (size_t i = 0; i < sum.data().size(); ++i) sum.data()[i] += b.data()[i];
        result.fusion_shapes.push_back({sum.channels(), sum.height(), sum.width()});
        return sum;
    };

    // mid-block exchange, then again after up blocks 1..4
    FeatureMap fused = fuse(tex_state.mid, nrm_state.mid);
    FeatureMap tex_x, nrm_x;
    for (int s = 0; s < UNetBranchWeights::kStages; ++s) {
        tex_x = branch_up_step(fused, tex_state, s, weights.texture);
        nrm_x = branch_up_step(fused, nrm_state, s, weights.normal);
        if (s + 1 < UNetBranchWeights::kStages) fused = fuse(tex_x, nrm_x);
    }
    result.texture_map = std::move(tex_x);
    result.normal_map = std::move(nrm_x);
    return result;
}

// ------------------------------------------------------------ decoding

void GaussianMapDecodeSpec::validate() const {
    if (!(offset_scale > 0.0)) throw ValidationError("decode spec: offset_scale must be positive");
    if (!(scale_gain > 0.0)) throw ValidationError("decode spec: scale_gain must be positive");
    if (opacity_floor < 0.0 || opacity_floor >= 1.0)
        throw ValidationError("decode spec: opacity_floor outside [0,1)");
}

GaussianSet decode_gaussian_map(const FeatureMap& map, const OrthoCamera& camera,
                                const GaussianMapDecodeSpec& spec) {
    spec.validate();
    camera.validate();
    if (map.channels() != Gaussian::kAttributeCount)
        throw ValidationError("decode_gaussian_map: expected 14 channels");
    if (map.height() != camera.height || map.width() != camera.width)
        throw ValidationError("decode_gaussian_map: map resolution does not match camera");
    map.validate_finite("gaussian map");

    const double depth0 =
        spec.default_depth >= 0.0 ? spec.default_depth : 0.5 * (camera.near + camera.far);
    const Eigen::Vector3d forward = camera.view_direction();
    const Eigen::Vector3d right = camera.rotation.row(0).transpose();
    const Eigen::Vector3d up = camera.rotation.row(1).transpose();

    GaussianSet set;
    for (int y = 0; y < map.height(); ++y) {
        for (int x = 0; x < map.width(); ++x) {
            const double opacity = sigmoid(map.at(10, y, x));
            if (opacity <= spec.opacity_floor) continue;
            Gaussian g;
            const Eigen::Vector3d offset(std::tanh(map.at(0, y, x)) * spec.offset_scale,
                                         std::tanh(map.at(1, y, x)) * spec.offset_scale,
                                         std::tanh(map.at(2, y, x)) * spec.offset_scale);
            g.center = camera.pixel_ray_origin(y, x) + (depth0 + offset.z()) * forward +
                       offset.x() * right + offset.y() * up;
            for (int k = 0; k < 3; ++k)
                g.scale[k] = spec.scale_gain * softplus(map.at(3 + k, y, x));
            Eigen::Vector4d q(map.at(6, y, x) + 1.0, map.at(7, y, x), map.at(8, y, x),
                              map.at(9, y, x));
            const double norm = q.norm();
            g.rotation = norm > 1e-12 ? (q / norm).eval() : Eigen::Vector4d(1, 0, 0, 0);
            g.opacity = opacity;
            for (int k = 0; k < 3; ++k) g.color[k] = sigmoid(map.at(11 + k, y, x));
            set.gaussians.push_back(g);
        }
    }
    set.validate();
    return set;
}

} // namespace splatkit
