#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "splatkit/errors.hpp"

namespace splatkit {

/// Named tensor in a weight manifest. Values are held as double in memory
/// and stored as little-endian float32 on disk.
struct WeightTensor {
    std::vector<uint32_t> dims;
    std::vector<double> values;

    size_t element_count() const {
        size_t n = 1;
        for (uint32_t d : dims) n *= d;
        return n;
    }
};

/// Flat binary weight manifest. Layout: magic "NSW1", uint32 entry count,
/// then per entry: uint32 name length, name bytes, uint32 rank,
/// rank x uint32 dims, raw little-endian float32 data.
class WeightManifest {
public:
    void set(const std::string& name, WeightTensor tensor);
    bool contains(const std::string& name) const { return entries_.count(name) > 0; }
    const WeightTensor& get(const std::string& name) const;
    /// get() with a shape check; dims must match exactly.
    const WeightTensor& get(const std::string& name, const std::vector<uint32_t>& dims) const;

    const std::map<std::string, WeightTensor>& entries() const { return entries_; }

    void save(const std::string& path) const;
    static WeightManifest load(const std::string& path);

private:
    std::map<std::string, WeightTensor> entries_;
};

/// 2D convolution weights (odd square kernel). Flat layout
/// [out][in][ky][kx]; bias has one entry per output channel.
struct Conv2dWeights {
    int out_channels = 0;
    int in_channels = 0;
    int kernel = 3;
    std::vector<double> weight;
    std::vector<double> bias;

    double w(int o, int c, int ky, int kx) const {
        return weight[((static_cast<size_t>(o) * in_channels + c) * kernel + ky) * kernel + kx];
    }
    void validate() const;

    /// Fan-in scaled uniform init, deterministic for a fixed seed.
    static Conv2dWeights seeded_uniform(int out_channels, int in_channels, int kernel,
                                        uint64_t seed);

    /// Manifest round-trip under `<prefix>.weight` / `<prefix>.bias`.
    void store(WeightManifest& manifest, const std::string& prefix) const;
    static Conv2dWeights from_manifest(const WeightManifest& manifest, const std::string& prefix);
};

} // namespace splatkit
