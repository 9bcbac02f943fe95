#pragma once

#include <string>

#include "splatkit/feature_map.hpp"
#include "splatkit/raster.hpp"

namespace splatkit {

/// 8-bit PNG I/O. Maps with 1 channel write grayscale, 3 channels RGB;
/// values are clamped to [0,1] and quantized. Loading returns values in
/// [0,1] (RGB as 3 channels, grayscale as 1, alpha dropped).
void save_png(const FeatureMap& map, const std::string& path);
FeatureMap load_png(const std::string& path);

/// Image + alpha PNGs plus a normalized depth PNG with a min/max sidecar
/// JSON (written to <prefix>_image.png, _alpha.png, _depth.png,
/// _depth.json).
void save_render(const RenderOutput& render, const std::string& prefix);

/// Per-channel PNG previews of an arbitrary feature map, each channel
/// normalized to its own [min, max].
void save_channel_previews(const FeatureMap& map, const std::string& prefix);

} // namespace splatkit
