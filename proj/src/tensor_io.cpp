#include "splatkit/tensor_io.hpp"

#include <cstring>
#include <fstream>

namespace splatkit {

namespace {
constexpr char kMagic[4] = {'S', 'K', 'T', '1'};
}

void save_tensor(const Tensor& tensor, const std::string& path) {
    if (tensor.values.size() != tensor.element_count())
        throw ValidationError("tensor: value count does not match shape");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out.write(kMagic, 4);
    const uint32_t dtype = 0; // float32
    out.write(reinterpret_cast<const char*>(&dtype), 4);
    const uint32_t rank = static_cast<uint32_t>(tensor.shape.size());
    out.write(reinterpret_cast<const char*>(&rank), 4);
    for (uint32_t d : tensor.shape) out.write(reinterpret_cast<const char*>(&d), 4);
    for (double v : tensor.values) {
        const float f = static_cast<float>(v);
        out.write(reinterpret_cast<const char*>(&f), 4);
    }
    if (!out) throw IoError("write failed: " + path);
}

Tensor load_tensor(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw FormatError(path + ": bad tensor magic");
    uint32_t dtype = 0, rank = 0;
    in.read(reinterpret_cast<char*>(&dtype), 4);
    in.read(reinterpret_cast<char*>(&rank), 4);
    if (!in || dtype != 0) throw FormatError(path + ": unsupported tensor dtype");
    Tensor tensor;
    tensor.shape.resize(rank);
    for (uint32_t r = 0; r < rank; ++r)
        in.read(reinterpret_cast<char*>(&tensor.shape[r]), 4);
    tensor.values.resize(tensor.element_count());
    for (auto& v : tensor.values) {
        float f = 0.0f;
        in.read(reinterpret_cast<char*>(&f), 4);
        v = f;
    }
    if (!in) throw FormatError(path + ": truncated tensor payload");
    return tensor;
}

Tensor to_tensor(const FeatureMap& map) {
    Tensor t;
    t.shape = {static_cast<uint32_t>(map.channels()), static_cast<uint32_t>(map.height()),
               static_cast<uint32_t>(map.width())};
    t.values = map.data();
    return t;
}

FeatureMap to_feature_map(const Tensor& tensor) {
    if (tensor.shape.size() != 3) throw FormatError("tensor is not [C, H, W]");
    FeatureMap map(static_cast<int>(tensor.shape[0]), static_cast<int>(tensor.shape[1]),
                   static_cast<int>(tensor.shape[2]));
    map.data() = tensor.values;
    return map;
}

Tensor stack_to_tensor(const std::vector<FeatureMap>& views) {
    if (views.empty()) throw ValidationError("stack_to_tensor: no views");
    Tensor t;
    t.shape = {static_cast<uint32_t>(views.size()), static_cast<uint32_t>(views[0].channels()),
               static_cast<uint32_t>(views[0].height()), static_cast<uint32_t>(views[0].width())};
    t.values.reserve(views.size() * views[0].size());
    for (const auto& v : views) {
        if (!v.same_shape(views[0]))
            throw ValidationError("stack_to_tensor: views differ in shape");
        t.values.insert(t.values.end(), v.data().begin(), v.data().end());
    }
    return t;
}

std::vector<FeatureMap> tensor_to_stack(const Tensor& tensor) {
    if (tensor.shape.size() != 4) throw FormatError("tensor is not [V, C, H, W]");
    std::vector<FeatureMap> views;
    const size_t per_view = static_cast<size_t>(tensor.shape[1]) * tensor.shape[2] * tensor.shape[3];
    for (uint32_t v = 0; v < tensor.shape[0]; ++v) {
        FeatureMap map(static_cast<int>(tensor.shape[1]), static_cast<int>(tensor.shape[2]),
                       static_cast<int>(tensor.shape[3]));
        std::copy(tensor.values.begin() + v * per_view,
                  tensor.values.begin() + (v + 1) * per_view, map.data().begin());
        views.push_back(std::move(map));
    }
    return views;
}

} // namespace splatkit
