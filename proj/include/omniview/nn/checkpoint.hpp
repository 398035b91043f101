#pragma once

#include <cstring>
#include <map>
#include <string>

#include "omniview/nn/params.hpp"

namespace ov::nn {

// Checkpoint container, little-endian: magic "OMVC", u32 version 1,
// config text (u32 len + key=value lines), u64 iteration, u64 param count,
// then per parameter: name (u16 len + bytes), u8 group, u32 rows, u32 cols,
// f32 payload in row-major order. Values are stored as f32 regardless of
// the in-memory scalar type.

struct CheckpointMeta {
    std::string config_text;
    std::uint64_t iteration = 0;
};

template <typename T>
void save_checkpoint(const std::string& path, const ParamStore<T>& store,
                     const CheckpointMeta& meta) {
    std::string out;
    auto raw = [&out](const void* p, std::size_t n) { out.append(static_cast<const char*>(p), n); };
    out.append("OMVC", 4);
    std::uint32_t version = 1;
    raw(&version, 4);
    auto cfg_len = static_cast<std::uint32_t>(meta.config_text.size());
    raw(&cfg_len, 4);
    out.append(meta.config_text);
    raw(&meta.iteration, 8);
    std::uint64_t count = store.count();
    raw(&count, 8);
    for (std::size_t i = 0; i < store.count(); ++i) {
        const auto& e = store.at(static_cast<int>(i));
        auto name_len = static_cast<std::uint16_t>(e.name.size());
        raw(&name_len, 2);
        out.append(e.name);
        auto group = static_cast<std::uint8_t>(e.group);
        raw(&group, 1);
        auto rows = static_cast<std::uint32_t>(e.value.rows());
        auto cols = static_cast<std::uint32_t>(e.value.cols());
        raw(&rows, 4);
        raw(&cols, 4);
        for (Eigen::Index k = 0; k < e.value.size(); ++k) {
            float f = static_cast<float>(e.value.data()[k]);
            raw(&f, 4);
        }
    }
    atomic_write_file(path, out);
}

// Reads only the header (config text + iteration); used to rebuild a model
// of the right shape before loading the parameters proper.
inline CheckpointMeta peek_checkpoint_meta(const std::string& path) {
    std::string bytes = read_file(path);
    std::size_t off = 0;
    auto need = [&](std::size_t n) {
        if (off + n > bytes.size()) throw FormatError(path + ": truncated checkpoint", off);
        const char* p = bytes.data() + off;
        off += n;
        return p;
    };
    if (std::memcmp(need(4), "OMVC", 4) != 0) throw FormatError(path + ": bad magic", 0);
    std::uint32_t version;
    std::memcpy(&version, need(4), 4);
    if (version != 1) throw FormatError(path + ": unsupported version", 4);
    std::uint32_t cfg_len;
    std::memcpy(&cfg_len, need(4), 4);
    CheckpointMeta meta;
    meta.config_text.assign(need(cfg_len), cfg_len);
    std::memcpy(&meta.iteration, need(8), 8);
    return meta;
}

// Loads values into an already-built store; every stored parameter must
// match an existing entry's name, group, and shape exactly, and every store
// entry must be present in the file.
template <typename T>
CheckpointMeta load_checkpoint(const std::string& path, ParamStore<T>& store) {
    std::string bytes = read_file(path);
    std::size_t off = 0;
    auto need = [&](std::size_t n) {
        if (off + n > bytes.size()) throw FormatError(path + ": truncated checkpoint", off);
        const char* p = bytes.data() + off;
        off += n;
        return p;
    };
    if (std::memcmp(need(4), "OMVC", 4) != 0) throw FormatError(path + ": bad magic", 0);
    std::uint32_t version;
    std::memcpy(&version, need(4), 4);
    if (version != 1) throw FormatError(path + ": unsupported version", 4);
    std::uint32_t cfg_len;
    std::memcpy(&cfg_len, need(4), 4);
    CheckpointMeta meta;
    meta.config_text.assign(need(cfg_len), cfg_len);
    std::memcpy(&meta.iteration, need(8), 8);
    std::uint64_t count;
    std::memcpy(&count, need(8), 8);
    if (count != store.count()) throw FormatError(path + ": parameter count mismatch", off - 8);
    std::vector<bool> seen(store.count(), false);
    for (std::uint64_t i = 0; i < count; ++i) {
        std::uint16_t name_len;
        std::memcpy(&name_len, need(2), 2);
        std::string name(need(name_len), name_len);
        std::uint8_t group;
        std::memcpy(&group, need(1), 1);
        std::uint32_t rows, cols;
        std::memcpy(&rows, need(4), 4);
        std::memcpy(&cols, need(4), 4);
        int idx = store.find(name);
        if (idx < 0) throw FormatError(path + ": unknown parameter " + name, off);
        auto& e = store.at(idx);
        if (seen[static_cast<std::size_t>(idx)])
            throw FormatError(path + ": duplicate parameter " + name, off);
        if (static_cast<std::uint8_t>(e.group) != group || e.value.rows() != rows ||
            e.value.cols() != cols)
            throw FormatError(path + ": shape or group mismatch for " + name, off);
        seen[static_cast<std::size_t>(idx)] = true;
        const char* payload = need(static_cast<std::size_t>(rows) * cols * 4);
        for (std::size_t k = 0; k < static_cast<std::size_t>(rows) * cols; ++k) {
            float f;
            std::memcpy(&f, payload + k * 4, 4);
            e.value.data()[k] = static_cast<T>(f);
        }
    }
    if (off != bytes.size()) throw FormatError(path + ": trailing bytes", off);
    return meta;
}

}  // namespace ov::nn
