#include "omniview/worldgen/dataset.hpp"

#include <cstring>

#include "omniview/common.hpp"
#include "omniview/vocab.hpp"
#include "omniview/worldgen/trajectory.hpp"

namespace ov::world {

MultiviewSample make_sample(std::uint64_t seed, int frames, int height, int width) {
    if (frames < 1 || height < 1 || width < 1)
        throw InvalidInputError("make_sample: bad dimensions");
    for (std::uint64_t attempt = 0; attempt < 100; ++attempt) {
        std::uint64_t scene_seed = mix_seed(seed, attempt, 0x5a3e);
        Scene scene = sample_scene(scene_seed);
        auto cameras = sample_trajectory(scene, frames, mix_seed(scene_seed, 0x77));
        std::vector<RenderedView> views;
        views.reserve(cameras.size());
        for (const auto& cam : cameras) views.push_back(render_view(scene, cam, height, width));
        Rng qa_rng(mix_seed(scene_seed, 0x9a));
        auto qas = make_qa(scene, cameras, views, qa_rng);
        if (!qas) continue;

        MultiviewSample s;
        s.seed = seed;
        s.frames = frames;
        s.height = height;
        s.width = width;
        s.rgb.reserve(static_cast<std::size_t>(frames) * height * width * 3);
        s.depth.reserve(static_cast<std::size_t>(frames) * height * width);
        for (const auto& v : views) {
            s.rgb.insert(s.rgb.end(), v.rgb.begin(), v.rgb.end());
            s.depth.insert(s.depth.end(), v.depth.begin(), v.depth.end());
        }
        for (const auto& cam : cameras) s.cameras.push_back(geo::camera_to_f32(cam));
        s.caption = vocab().encode(make_caption(scene));
        for (const auto& qa : *qas) {
            QaRecord rec;
            rec.category = static_cast<std::uint8_t>(qa.category);
            rec.question = vocab().encode(qa.question);
            rec.answer = vocab().encode(qa.answer);
            s.qas.push_back(std::move(rec));
        }
        return s;
    }
    throw GenerationError("make_sample: no scene satisfied all QA categories");
}

namespace {

class Writer {
  public:
    void u8(std::uint8_t v) { bytes_.push_back(static_cast<char>(v)); }
    void magic(const char* m) { bytes_.append(m, 4); }
    void u16(std::uint16_t v) { raw(&v, 2); }
    void u32(std::uint32_t v) { raw(&v, 4); }
    void u64(std::uint64_t v) { raw(&v, 8); }
    void f32s(const float* p, std::size_t n) { raw(p, n * 4); }
    void ids(const std::vector<std::uint16_t>& v) {
        if (v.size() > 0xffff) throw InvalidInputError("write_dataset: token run too long");
        u16(static_cast<std::uint16_t>(v.size()));
        raw(v.data(), v.size() * 2);
    }
    const std::string& bytes() const { return bytes_; }

  private:
    void raw(const void* p, std::size_t n) {
        bytes_.append(static_cast<const char*>(p), n);
    }
    std::string bytes_;
};

class Reader {
  public:
    Reader(std::string bytes, const std::string& path) : bytes_(std::move(bytes)), path_(path) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
    void magic(char* out) { std::memcpy(out, take(4), 4); }
    std::uint16_t u16() { std::uint16_t v; std::memcpy(&v, take(2), 2); return v; }
    std::uint32_t u32() { std::uint32_t v; std::memcpy(&v, take(4), 4); return v; }
    std::uint64_t u64() { std::uint64_t v; std::memcpy(&v, take(8), 8); return v; }
    void f32s(float* out, std::size_t n) { std::memcpy(out, take(n * 4), n * 4); }
    std::vector<std::uint16_t> ids() {
        std::size_t n = u16();
        std::vector<std::uint16_t> v(n);
        std::memcpy(v.data(), take(n * 2), n * 2);
        return v;
    }
    std::size_t offset() const { return offset_; }
    bool at_end() const { return offset_ == bytes_.size(); }
    [[noreturn]] void fail(const std::string& what) const { fail_at(offset_, what); }
    // For a value check after the field was read: point at the field start.
    [[noreturn]] void fail_at(std::size_t offset, const std::string& what) const {
        throw FormatError(path_ + ": " + what, offset);
    }

  private:
    const char* take(std::size_t n) {
        if (offset_ + n > bytes_.size()) fail("truncated file");
        const char* p = bytes_.data() + offset_;
        offset_ += n;
        return p;
    }
    std::string bytes_;
    std::string path_;
    std::size_t offset_ = 0;
};

}  // namespace

void write_dataset(const std::string& path, const std::vector<MultiviewSample>& samples) {
    Writer w;
    w.magic("OMVW");
    w.u32(1);
    w.u64(samples.size());
    for (const auto& s : samples) {
        std::size_t px = s.pixels();
        if (s.rgb.size() != static_cast<std::size_t>(s.frames) * px * 3 ||
            s.depth.size() != static_cast<std::size_t>(s.frames) * px ||
            s.cameras.size() != static_cast<std::size_t>(s.frames))
            throw InvalidInputError("write_dataset: inconsistent sample buffers");
        w.u64(s.seed);
        w.u16(static_cast<std::uint16_t>(s.frames));
        w.u16(static_cast<std::uint16_t>(s.height));
        w.u16(static_cast<std::uint16_t>(s.width));
        w.u16(0);
        w.f32s(s.rgb.data(), s.rgb.size());
        w.f32s(s.depth.data(), s.depth.size());
        for (const auto& cam : s.cameras) w.f32s(cam.data(), 9);
        w.ids(s.caption);
        if (s.qas.size() > 0xffff) throw InvalidInputError("write_dataset: too many qa pairs");
        w.u16(static_cast<std::uint16_t>(s.qas.size()));
        for (const auto& qa : s.qas) {
            w.u8(qa.category);
            w.ids(qa.question);
            w.ids(qa.answer);
        }
    }
    atomic_write_file(path, w.bytes());
}

std::vector<MultiviewSample> read_dataset(const std::string& path) {
    Reader r(read_file(path), path);
    char magic[4];
    r.magic(magic);
    if (std::memcmp(magic, "OMVW", 4) != 0) r.fail_at(0, "bad magic");
    std::uint32_t version = r.u32();
    if (version != 1) r.fail_at(4, "unsupported version " + std::to_string(version));
    std::uint64_t count = r.u64();
    std::vector<MultiviewSample> out;
    out.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        MultiviewSample s;
        s.seed = r.u64();
        std::size_t dims_at = r.offset();
        s.frames = r.u16();
        s.height = r.u16();
        s.width = r.u16();
        r.u16();
        if (s.frames < 1 || s.height < 1 || s.width < 1) r.fail_at(dims_at, "bad sample dimensions");
        std::size_t px = s.pixels();
        s.rgb.resize(static_cast<std::size_t>(s.frames) * px * 3);
        s.depth.resize(static_cast<std::size_t>(s.frames) * px);
        r.f32s(s.rgb.data(), s.rgb.size());
        r.f32s(s.depth.data(), s.depth.size());
        s.cameras.resize(static_cast<std::size_t>(s.frames));
        for (auto& cam : s.cameras) r.f32s(cam.data(), 9);
        s.caption = r.ids();
        std::uint16_t qa_count = r.u16();
        for (std::uint16_t q = 0; q < qa_count; ++q) {
            QaRecord rec;
            std::size_t cat_at = r.offset();
            rec.category = r.u8();
            if (rec.category > 3) r.fail_at(cat_at, "bad qa category");
            rec.question = r.ids();
            rec.answer = r.ids();
            s.qas.push_back(std::move(rec));
        }
        out.push_back(std::move(s));
    }
    if (!r.at_end()) r.fail("trailing bytes");
    return out;
}

}  // namespace ov::world
