#include "splatkit/feature_map.hpp"

#include <cmath>
#include <string>

namespace splatkit {

void FeatureMap::validate_finite(const char* what) const {
    for (size_t i = 0; i < data_.size(); ++i) {
        if (!std::isfinite(data_[i]))
            throw ValidationError(std::string(what) + ": non-finite entry at flat index " +
                                  std::to_string(i));
    }
}

FeatureMap concat_channels(const FeatureMap& a, const FeatureMap& b) {
    if (a.height() != b.height() || a.width() != b.width())
        throw ValidationError("concat_channels: spatial dims differ");
    FeatureMap out(a.channels() + b.channels(), a.height(), a.width());
    std::copy(a.data().begin(), a.data().end(), out.data().begin());
    std::copy(b.data().begin(), b.data().end(), out.data().begin() + a.data().size());
    return out;
}

} // namespace splatkit
