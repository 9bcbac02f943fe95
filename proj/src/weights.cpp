#include "splatkit/weights.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

namespace splatkit {

namespace {

constexpr char kMagic[4] = {'N', 'S', 'W', '1'};

template <typename T>
void write_le(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw FormatError("weight manifest: unexpected end of file");
    return v;
}

} // namespace

void WeightManifest::set(const std::string& name, WeightTensor tensor) {
    if (tensor.values.size() != tensor.element_count())
        throw ValidationError("weight tensor '" + name + "': value count does not match dims");
    entries_[name] = std::move(tensor);
}

const WeightTensor& WeightManifest::get(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw FormatError("weight manifest: missing entry '" + name + "'");
    return it->second;
}

const WeightTensor& WeightManifest::get(const std::string& name,
                                        const std::vector<uint32_t>& dims) const {
    const WeightTensor& t = get(name);
    if (t.dims != dims) throw FormatError("weight manifest: entry '" + name + "' has wrong shape");
    return t;
}

void WeightManifest::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out.write(kMagic, 4);
    write_le<uint32_t>(out, static_cast<uint32_t>(entries_.size()));
    for (const auto& [name, tensor] : entries_) {
        write_le<uint32_t>(out, static_cast<uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_le<uint32_t>(out, static_cast<uint32_t>(tensor.dims.size()));
        for (uint32_t d : tensor.dims) write_le<uint32_t>(out, d);
        for (double v : tensor.values) write_le<float>(out, static_cast<float>(v));
    }
    if (!out) throw IoError("write failed: " + path);
}

WeightManifest WeightManifest::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw FormatError(path + ": bad weight manifest magic");
    const uint32_t count = read_le<uint32_t>(in);
    WeightManifest manifest;
    for (uint32_t i = 0; i < count; ++i) {
        const uint32_t name_len = read_le<uint32_t>(in);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        if (!in) throw FormatError(path + ": truncated entry name");
        const uint32_t rank = read_le<uint32_t>(in);
        WeightTensor tensor;
        tensor.dims.resize(rank);
        for (uint32_t r = 0; r < rank; ++r) tensor.dims[r] = read_le<uint32_t>(in);
        tensor.values.resize(tensor.element_count());
        for (auto& v : tensor.values) v = read_le<float>(in);
        manifest.entries_[name] = std::move(tensor);
    }
    return manifest;
}

void Conv2dWeights::validate() const {
    if (out_channels < 1 || in_channels < 1 || kernel < 1 || kernel % 2 == 0)
        throw ValidationError("conv weights: bad channel or kernel config");
    if (weight.size() != static_cast<size_t>(out_channels) * in_channels * kernel * kernel)
        throw ValidationError("conv weights: weight size mismatch");
    if (bias.size() != static_cast<size_t>(out_channels))
        throw ValidationError("conv weights: bias size mismatch");
}

Conv2dWeights Conv2dWeights::seeded_uniform(int out_channels, int in_channels, int kernel,
                                            uint64_t seed) {
    Conv2dWeights w;
    w.out_channels = out_channels;
    w.in_channels = in_channels;
    w.kernel = kernel;
    w.weight.resize(static_cast<size_t>(out_channels) * in_channels * kernel * kernel);
    w.bias.assign(out_channels, 0.0);
    const double bound = std::sqrt(1.0 / (static_cast<double>(in_channels) * kernel * kernel));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-bound, bound);
    for (auto& v : w.weight) v = uni(rng);
    return w;
}

void Conv2dWeights::store(WeightManifest& manifest, const std::string& prefix) const {
    validate();
    WeightTensor wt;
    wt.dims = {static_cast<uint32_t>(out_channels), static_cast<uint32_t>(in_channels),
               static_cast<uint32_t>(kernel), static_cast<uint32_t>(kernel)};
    wt.values = weight;
    manifest.set(prefix + ".weight", std::move(wt));
    WeightTensor bt;
    bt.dims = {static_cast<uint32_t>(out_channels)};
    bt.values = bias;
    manifest.set(prefix + ".bias", std::move(bt));
}

Conv2dWeights Conv2dWeights::from_manifest(const WeightManifest& manifest,
                                           const std::string& prefix) {
    const WeightTensor& wt = manifest.get(prefix + ".weight");
    if (wt.dims.size() != 4 || wt.dims[2] != wt.dims[3])
        throw FormatError("weight manifest: '" + prefix + ".weight' is not a conv tensor");
    Conv2dWeights w;
    w.out_channels = static_cast<int>(wt.dims[0]);
    w.in_channels = static_cast<int>(wt.dims[1]);
    w.kernel = static_cast<int>(wt.dims[2]);
    w.weight = wt.values;
    w.bias = manifest.get(prefix + ".bias", {wt.dims[0]}).values;
    w.validate();
    return w;
}

} // namespace splatkit
