#pragma once

#include <cstddef>
#include <vector>

#include "splatkit/errors.hpp"

namespace splatkit {

/// Dense C x H x W grid of scalars, channel-major. Carrier for Fourier
/// stacks, Plucker maps, renders, and network activations.
class FeatureMap {
public:
    FeatureMap() = default;

    FeatureMap(int channels, int height, int width, double fill = 0.0)
        : channels_(channels), height_(height), width_(width),
          data_(static_cast<size_t>(channels) * height * width, fill) {
        if (channels < 1 || height < 1 || width < 1)
            throw ValidationError("feature map dims must be positive");
    }

    int channels() const { return channels_; }
    int height() const { return height_; }
    int width() const { return width_; }
    size_t size() const { return data_.size(); }

    double& at(int c, int y, int x) {
        return data_[(static_cast<size_t>(c) * height_ + y) * width_ + x];
    }
    double at(int c, int y, int x) const {
        return data_[(static_cast<size_t>(c) * height_ + y) * width_ + x];
    }

    /// Pointer to the start of one channel plane (H*W scalars).
    double* channel(int c) { return data_.data() + static_cast<size_t>(c) * height_ * width_; }
    const double* channel(int c) const {
        return data_.data() + static_cast<size_t>(c) * height_ * width_;
    }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool same_shape(const FeatureMap& o) const {
        return channels_ == o.channels_ && height_ == o.height_ && width_ == o.width_;
    }

    /// Throws unless every entry is finite.
    void validate_finite(const char* what = "feature map") const;

private:
    int channels_ = 0;
    int height_ = 0;
    int width_ = 0;
    std::vector<double> data_;
};

/// Channel-wise concatenation of two maps with equal spatial dims.
FeatureMap concat_channels(const FeatureMap& a, const FeatureMap& b);

} // namespace splatkit
