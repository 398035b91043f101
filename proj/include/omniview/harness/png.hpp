#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "omniview/common.hpp"

namespace ov::harness {

struct ImageU8 {
    int height = 0, width = 0;
    std::vector<std::uint8_t> rgb;  // [H,W,3]
};

struct ImageU16 {
    int height = 0, width = 0;
    std::vector<std::uint16_t> gray;  // [H,W]
};

// 8-bit RGB PNG from unit-range floats (rounded to the nearest level).
void write_png_rgb8(const std::string& path, std::span<const float> rgb, int height, int width);
ImageU8 read_png_rgb8(const std::string& path);

// 16-bit grayscale PNG; the reader returns the stored values untouched.
void write_png_gray16(const std::string& path, const std::vector<std::uint16_t>& gray, int height,
                      int width);
ImageU16 read_png_gray16(const std::string& path);

// Depth maps travel as millimeter-scaled 16-bit PNGs (clamped at the u16
// ceiling) plus a raw little-endian f32 sidecar that keeps them lossless.
void write_depth_png16(const std::string& path, std::span<const float> depth_m, int height,
                       int width);

void write_f32_sidecar(const std::string& path, std::span<const float> values);
std::vector<float> read_f32_sidecar(const std::string& path);

}  // namespace ov::harness
