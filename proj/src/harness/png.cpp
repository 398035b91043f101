#include "omniview/harness/png.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <span>

namespace ov::harness {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw Error("cannot open " + path);
    return f;
}

// libpng reports errors through longjmp; wrap each call site in setjmp and
// convert to exceptions once control returns here.
struct PngWriter {
    png_structp png = nullptr;
    png_infop info = nullptr;
    PngWriter() {
        png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        if (png) info = png_create_info_struct(png);
        if (!png || !info) {
            png_destroy_write_struct(&png, &info);
            throw Error("png writer allocation failed");
        }
    }
    ~PngWriter() { png_destroy_write_struct(&png, &info); }
};

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    PngReader() {
        png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        if (png) info = png_create_info_struct(png);
        if (!png || !info) {
            png_destroy_read_struct(&png, &info, nullptr);
            throw Error("png reader allocation failed");
        }
    }
    ~PngReader() { png_destroy_read_struct(&png, &info, nullptr); }
};

void check_dims(int height, int width) {
    if (height <= 0 || width <= 0) throw ContractError("png: dimensions must be positive");
}

}  // namespace

void write_png_rgb8(const std::string& path, std::span<const float> rgb, int height, int width) {
    check_dims(height, width);
    if (rgb.size() != std::size_t(height) * width * 3)
        throw ContractError("write_png_rgb8: buffer size does not match dimensions");

    std::vector<std::uint8_t> bytes(rgb.size());
    for (std::size_t i = 0; i < rgb.size(); ++i) {
        float v = std::clamp(rgb[i], 0.0f, 1.0f);
        bytes[i] = std::uint8_t(std::lround(v * 255.0f));
    }

    auto file = open_file(path, "wb");
    PngWriter w;
    if (setjmp(png_jmpbuf(w.png))) throw Error("png write failed: " + path);
    png_init_io(w.png, file.get());
    png_set_IHDR(w.png, w.info, png_uint_32(width), png_uint_32(height), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(w.png, w.info);
    for (int y = 0; y < height; ++y)
        png_write_row(w.png, reinterpret_cast<png_bytep>(bytes.data() + std::size_t(y) * width * 3));
    png_write_end(w.png, nullptr);
}

ImageU8 read_png_rgb8(const std::string& path) {
    auto file = open_file(path, "rb");
    PngReader r;
    if (setjmp(png_jmpbuf(r.png))) throw FormatError("png read failed: " + path, 0);
    png_init_io(r.png, file.get());
    png_read_info(r.png, r.info);

    png_uint_32 w = png_get_image_width(r.png, r.info);
    png_uint_32 h = png_get_image_height(r.png, r.info);
    int depth = png_get_bit_depth(r.png, r.info);
    int color = png_get_color_type(r.png, r.info);
    if (depth != 8 || color != PNG_COLOR_TYPE_RGB)
        throw FormatError("read_png_rgb8: expected 8-bit RGB in " + path, 0);

    ImageU8 out;
    out.height = int(h);
    out.width = int(w);
    out.rgb.resize(std::size_t(h) * w * 3);
    for (png_uint_32 y = 0; y < h; ++y)
        png_read_row(r.png, reinterpret_cast<png_bytep>(out.rgb.data() + std::size_t(y) * w * 3),
                     nullptr);
    png_read_end(r.png, nullptr);
    return out;
}

void write_png_gray16(const std::string& path, const std::vector<std::uint16_t>& gray, int height,
                      int width) {
    check_dims(height, width);
    if (gray.size() != std::size_t(height) * width)
        throw ContractError("write_png_gray16: buffer size does not match dimensions");

    auto file = open_file(path, "wb");
    PngWriter w;
    if (setjmp(png_jmpbuf(w.png))) throw Error("png write failed: " + path);
    png_init_io(w.png, file.get());
    png_set_IHDR(w.png, w.info, png_uint_32(width), png_uint_32(height), 16, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(w.png, w.info);
    // PNG stores 16-bit samples big-endian; swap on little-endian hosts.
    if constexpr (std::endian::native == std::endian::little) png_set_swap(w.png);
    for (int y = 0; y < height; ++y) {
        auto* row = const_cast<std::uint16_t*>(gray.data() + std::size_t(y) * width);
        png_write_row(w.png, reinterpret_cast<png_bytep>(row));
    }
    png_write_end(w.png, nullptr);
}

ImageU16 read_png_gray16(const std::string& path) {
    auto file = open_file(path, "rb");
    PngReader r;
    if (setjmp(png_jmpbuf(r.png))) throw FormatError("png read failed: " + path, 0);
    png_init_io(r.png, file.get());
    png_read_info(r.png, r.info);

    png_uint_32 w = png_get_image_width(r.png, r.info);
    png_uint_32 h = png_get_image_height(r.png, r.info);
    int depth = png_get_bit_depth(r.png, r.info);
    int color = png_get_color_type(r.png, r.info);
    if (depth != 16 || color != PNG_COLOR_TYPE_GRAY)
        throw FormatError("read_png_gray16: expected 16-bit grayscale in " + path, 0);
    if constexpr (std::endian::native == std::endian::little) png_set_swap(r.png);

    ImageU16 out;
    out.height = int(h);
    out.width = int(w);
    out.gray.resize(std::size_t(h) * w);
    for (png_uint_32 y = 0; y < h; ++y)
        png_read_row(r.png, reinterpret_cast<png_bytep>(out.gray.data() + std::size_t(y) * w),
                     nullptr);
    png_read_end(r.png, nullptr);
    return out;
}

void write_depth_png16(const std::string& path, std::span<const float> depth_m, int height,
                       int width) {
    check_dims(height, width);
    if (depth_m.size() != std::size_t(height) * width)
        throw ContractError("write_depth_png16: buffer size does not match dimensions");
    std::vector<std::uint16_t> mm(depth_m.size());
    for (std::size_t i = 0; i < depth_m.size(); ++i) {
        double v = std::max(0.0, double(depth_m[i]) * 1000.0);
        mm[i] = std::uint16_t(std::min(65535.0, std::round(v)));
    }
    write_png_gray16(path, mm, height, width);
}

void write_f32_sidecar(const std::string& path, std::span<const float> values) {
    static_assert(sizeof(float) == 4);
    std::string bytes(values.size() * 4, '\0');
    std::memcpy(bytes.data(), values.data(), bytes.size());
    atomic_write_file(path, bytes);
}

std::vector<float> read_f32_sidecar(const std::string& path) {
    std::string bytes = read_file(path);
    if (bytes.size() % 4 != 0)
        throw FormatError("f32 sidecar length is not a multiple of 4: " + path, bytes.size());
    std::vector<float> out(bytes.size() / 4);
    std::memcpy(out.data(), bytes.data(), bytes.size());
    return out;
}

}  // namespace ov::harness
