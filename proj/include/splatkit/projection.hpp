#pragma once

#include <array>
#include <vector>

#include "splatkit/camera.hpp"
#include "splatkit/feature_map.hpp"
#include "splatkit/fourier.hpp"
#include "splatkit/weights.hpp"

namespace splatkit {

struct ProjectionStats {
    size_t offscreen = 0; // outside the image rectangle or the near/far range
    size_t occluded = 0;  // lost a z-buffer contest
};

/// Splats every cloud point to its nearest pixel; the smallest camera-space
/// depth wins per pixel, empty pixels stay exactly zero. Output shape is
/// feature_length x H x W.
FeatureMap project_features(const FourierCloud& cloud, const OrthoCamera& camera,
                            ProjectionStats* stats = nullptr);

/// Three per-view projected maps plus the cameras that produced them.
struct FourierStack {
    std::array<FeatureMap, 3> views;
    std::array<OrthoCamera, 3> cameras;
};

FourierStack build_fourier_stack(const FourierCloud& cloud,
                                 const std::vector<OrthoCamera>& cameras);

/// 6 x H x W Plucker ray map: channels 0-2 the unit world-space ray
/// direction, channels 3-5 the moment origin x direction.
FeatureMap plucker_map(const OrthoCamera& camera);

/// 3x3 / stride 1 / pad 1 convolution; spatial dims preserved.
FeatureMap conv2d_3x3(const FeatureMap& input, const Conv2dWeights& weights);

/// Encodes all three views with one shared weight set; each view's input is
/// its Fourier map concatenated with its Plucker map, so the weights must
/// expect feature_length + 6 input channels. Returns one o x H x W map per view.
std::array<FeatureMap, 3> encode_stack(const FourierStack& stack, const Conv2dWeights& weights);

} // namespace splatkit
