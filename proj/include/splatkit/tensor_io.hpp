#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "splatkit/errors.hpp"
#include "splatkit/feature_map.hpp"

namespace splatkit {

/// Flat binary tensor: magic "SKT1", uint32 dtype (0 = float32), uint32
/// rank, rank x uint32 dims, then little-endian payload.
struct Tensor {
    std::vector<uint32_t> shape;
    std::vector<double> values; // stored as float32 on disk

    size_t element_count() const {
        size_t n = 1;
        for (uint32_t d : shape) n *= d;
        return n;
    }
};

void save_tensor(const Tensor& tensor, const std::string& path);
Tensor load_tensor(const std::string& path);

/// [C, H, W] tensor from a feature map and back.
Tensor to_tensor(const FeatureMap& map);
FeatureMap to_feature_map(const Tensor& tensor);

/// [V, C, H, W] tensor from per-view maps of equal shape, and the reverse.
Tensor stack_to_tensor(const std::vector<FeatureMap>& views);
std::vector<FeatureMap> tensor_to_stack(const Tensor& tensor);

} // namespace splatkit
