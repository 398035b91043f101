#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace ov {

// Error taxonomy. Everything user-facing derives from Error so the CLI can
// catch one type; the subclasses keep contract violations distinguishable
// from bad data in tests.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller passed values outside an operation's documented domain.
class InvalidInputError : public Error {
public:
    using Error::Error;
};

// Internal contract broken (shape mismatch, missing required argument).
class ContractError : public Error {
public:
    using Error::Error;
};

// On-disk format problems; carries the byte offset where parsing failed.
class FormatError : public Error {
public:
    FormatError(const std::string& msg, std::uint64_t offset)
        : Error(msg + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}
    std::uint64_t offset() const { return offset_; }

private:
    std::uint64_t offset_ = 0;
};

class OptimizerError : public Error {
public:
    using Error::Error;
};

class GenerationError : public Error {
public:
    using Error::Error;
};

// Deterministic counter-based RNG. We do not use std::*_distribution because
// their output is implementation-defined; these streams must replay exactly
// for a given seed on any platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

    std::uint64_t next_u64() {
        // splitmix64
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    std::uint64_t uniform_int(std::uint64_t n) {
        // rejection sampling to avoid modulo bias
        if (n == 0) throw InvalidInputError("uniform_int: n must be > 0");
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

    // standard normal via Box-Muller (no cached spare: keeps the stream
    // position a pure function of the number of calls)
    double normal() {
        double u1, u2;
        do {
            u1 = uniform();
        } while (u1 <= 1e-300);
        u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    template <typename It>
    void shuffle(It first, It last) {
        auto n = std::distance(first, last);
        for (auto i = n - 1; i > 0; --i) {
            auto j = static_cast<decltype(i)>(uniform_int(static_cast<std::uint64_t>(i) + 1));
            std::swap(*(first + i), *(first + j));
        }
    }

private:
    std::uint64_t state_;
};

// Mixes independent stream identifiers into one seed (per-sample, per-iter
// substreams stay decorrelated and order-independent).
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 0x632be59bd9b4e019ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix_seed(mix_seed(a, b), c);
}

// FNV-1a over raw bytes; used for checkpoint/report fingerprints.
inline std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t hash_file(const std::filesystem::path& path);

// Runs fn(i) for i in [0, n). Work is partitioned statically so results are
// a function of the index only, never of scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, unsigned max_threads = 0);

// write-temp-then-rename
void atomic_write_file(const std::filesystem::path& path, const std::string& bytes);

std::string read_file(const std::filesystem::path& path);

}  // namespace ov
