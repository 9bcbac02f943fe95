#include "splatkit/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <vector>

#include <png.h>

namespace splatkit {

namespace {

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

uint8_t quantize(double v) {
    return static_cast<uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

} // namespace

void save_png(const FeatureMap& map, const std::string& path) {
    if (map.channels() != 1 && map.channels() != 3)
        throw ValidationError("save_png: only 1- or 3-channel maps are supported");
    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) throw IoError("cannot write " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (!png || !info) throw IoError("png writer allocation failed");
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("png write failed: " + path);
    }
    png_init_io(png, file.get());
    const int color_type = map.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
    png_set_IHDR(png, info, map.width(), map.height(), 8, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<uint8_t> row(static_cast<size_t>(map.width()) * map.channels());
    for (int y = 0; y < map.height(); ++y) {
        for (int x = 0; x < map.width(); ++x)
            for (int c = 0; c < map.channels(); ++c)
                row[static_cast<size_t>(x) * map.channels() + c] = quantize(map.at(c, y, x));
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

FeatureMap load_png(const std::string& path) {
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) throw IoError("cannot open " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (!png || !info) throw IoError("png reader allocation failed");
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("png read failed: " + path);
    }
    png_init_io(png, file.get());
    png_read_info(png, info);

    // normalize everything to 8-bit gray or rgb
    png_set_strip_16(png);
    png_set_packing(png);
    const png_byte color_type = png_get_color_type(png, info);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const int width = static_cast<int>(png_get_image_width(png, info));
    const int height = static_cast<int>(png_get_image_height(png, info));
    const int channels = static_cast<int>(png_get_channels(png, info));
    if (channels != 1 && channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError(path + ": unsupported png channel count");
    }

    FeatureMap map(channels, height, width);
    std::vector<uint8_t> row(static_cast<size_t>(width) * channels);
    for (int y = 0; y < height; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (int x = 0; x < width; ++x)
            for (int c = 0; c < channels; ++c)
                map.at(c, y, x) = row[static_cast<size_t>(x) * channels + c] / 255.0;
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return map;
}

void save_render(const RenderOutput& render, const std::string& prefix) {
    save_png(render.image, prefix + "_image.png");
    save_png(render.alpha, prefix + "_alpha.png");

    // normalize depth over the finite region; write the range as a sidecar
    double dmin = std::numeric_limits<double>::infinity(), dmax = -dmin;
    for (double d : render.depth.data()) {
        if (std::isfinite(d)) {
            dmin = std::min(dmin, d);
            dmax = std::max(dmax, d);
        }
    }
    const bool any = std::isfinite(dmin);
    FeatureMap depth_vis(1, render.depth.height(), render.depth.width());
    if (any && dmax > dmin) {
        for (size_t i = 0; i < depth_vis.size(); ++i) {
            const double d = render.depth.data()[i];
            depth_vis.data()[i] = std::isfinite(d) ? (d - dmin) / (dmax - dmin) : 1.0;
        }
    }
    save_png(depth_vis, prefix + "_depth.png");
    std::ofstream sidecar(prefix + "_depth.json");
    sidecar << "{\"depth_min\": " << (any ? dmin : 0.0) << ", \"depth_max\": "
            << (any ? dmax : 0.0) << "}\n";
}

void save_channel_previews(const FeatureMap& map, const std::string& prefix) {
    for (int c = 0; c < map.channels(); ++c) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (int y = 0; y < map.height(); ++y)
            for (int x = 0; x < map.width(); ++x) {
                lo = std::min(lo, map.at(c, y, x));
                hi = std::max(hi, map.at(c, y, x));
            }
        FeatureMap channel(1, map.height(), map.width());
        const double range = hi > lo ? hi - lo : 1.0;
        for (int y = 0; y < map.height(); ++y)
            for (int x = 0; x < map.width(); ++x)
                channel.at(0, y, x) = (map.at(c, y, x) - lo) / range;
        save_png(channel, prefix + "_c" + std::to_string(c) + ".png");
    }
}

} // namespace splatkit
