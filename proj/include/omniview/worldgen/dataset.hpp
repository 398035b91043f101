#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "omniview/worldgen/qa.hpp"

namespace ov::world {

struct QaRecord {
    std::uint8_t category = 0;
    std::vector<std::uint16_t> question;
    std::vector<std::uint16_t> answer;
};

// One scene: F rendered frames with depth, per-frame cameras stored as the
// raw f32 9-vectors (unit quaternion wxyz, translation, fx, fy) so file
// round trips are byte-exact, a token caption, and QA pairs.
struct MultiviewSample {
    std::uint64_t seed = 0;
    int frames = 0, height = 0, width = 0;
    std::vector<float> rgb;    // [F,H,W,3]
    std::vector<float> depth;  // [F,H,W]
    std::vector<std::array<float, 9>> cameras;
    std::vector<std::uint16_t> caption;
    std::vector<QaRecord> qas;

    std::size_t pixels() const { return static_cast<std::size_t>(height) * width; }
    const float* frame_rgb(int f) const { return rgb.data() + static_cast<std::size_t>(f) * pixels() * 3; }
    const float* frame_depth(int f) const { return depth.data() + static_cast<std::size_t>(f) * pixels(); }
};

// Renders one sample end to end. Retries derived scene seeds until QA
// generation succeeds for all categories; throws GenerationError after 100
// attempts.
MultiviewSample make_sample(std::uint64_t seed, int frames, int height, int width);

// Binary container, little-endian: magic "OMVW", u32 version 1, u64 count,
// then per sample: u64 seed, u16 frames/height/width/pad, rgb f32s,
// depth f32s, cameras f32[frames*9], caption (u16 len + ids), u16 qa count,
// per QA: u8 category, question (u16 len + ids), answer (u16 len + ids).
// Readers throw FormatError with the byte offset of the first bad field.
void write_dataset(const std::string& path, const std::vector<MultiviewSample>& samples);
std::vector<MultiviewSample> read_dataset(const std::string& path);

}  // namespace ov::world
