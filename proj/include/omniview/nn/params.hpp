#pragma once

#include <string>
#include <vector>

#include "omniview/nn/tape.hpp"

namespace ov::nn {

enum class ParamGroup : std::uint8_t { kUnd = 0, kTex = 1, kGeo = 2 };

inline const char* param_group_name(ParamGroup g) {
    switch (g) {
        case ParamGroup::kUnd: return "und";
        case ParamGroup::kTex: return "tex";
        case ParamGroup::kGeo: return "geo";
    }
    throw InvalidInputError("param_group_name: bad group");
}

// Named parameter registry. Indices are stable and ordered by registration,
// which fixes the (deterministic) order of gradient reduction, optimizer
// updates, and checkpoint layout.
template <typename T>
class ParamStore {
  public:
    struct Entry {
        std::string name;
        MatT<T> value;
        ParamGroup group;
    };

    int add(std::string name, MatT<T> value, ParamGroup group) {
        if (find(name) >= 0) throw InvalidInputError("ParamStore: duplicate name " + name);
        entries_.push_back(Entry{std::move(name), std::move(value), group});
        return static_cast<int>(entries_.size()) - 1;
    }

    int find(const std::string& name) const {
        for (std::size_t i = 0; i < entries_.size(); ++i)
            if (entries_[i].name == name) return static_cast<int>(i);
        return -1;
    }

    std::size_t count() const { return entries_.size(); }
    Entry& at(int i) { return entries_[check(i)]; }
    const Entry& at(int i) const { return entries_[check(i)]; }

    std::size_t scalar_count() const {
        std::size_t n = 0;
        for (const auto& e : entries_) n += static_cast<std::size_t>(e.value.size());
        return n;
    }

    // Pushes every parameter as a leaf node; result[i] is the tape id of
    // parameter i.
    std::vector<int> push_all(Tape<T>& tape) const {
        std::vector<int> ids(entries_.size());
        for (std::size_t i = 0; i < entries_.size(); ++i)
            ids[i] = tape.push(entries_[i].value);
        return ids;
    }

    // FNV-1a over the little-endian f32 payloads in registration order; used
    // to verify a parameter group did not move.
    std::uint64_t fingerprint(ParamGroup group) const {
        std::uint64_t h = 14695981039346656037ull;
        for (const auto& e : entries_) {
            if (e.group != group) continue;
            for (Eigen::Index i = 0; i < e.value.size(); ++i) {
                float f = static_cast<float>(e.value.data()[i]);
                h = fnv1a(&f, sizeof(f), h);
            }
        }
        return h;
    }

  private:
    std::size_t check(int i) const {
        if (i < 0 || static_cast<std::size_t>(i) >= entries_.size())
            throw ContractError("ParamStore: bad index");
        return static_cast<std::size_t>(i);
    }

    std::vector<Entry> entries_;
};

// Per-parameter gradient accumulator matching a store's layout.
template <typename T>
class GradBuffer {
  public:
    explicit GradBuffer(const ParamStore<T>& store) {
        grads_.reserve(store.count());
        for (std::size_t i = 0; i < store.count(); ++i)
            grads_.push_back(MatT<T>::Zero(store.at(static_cast<int>(i)).value.rows(),
                                           store.at(static_cast<int>(i)).value.cols()));
    }

    void zero() {
        for (auto& g : grads_) g.setZero();
    }

    // Adds the tape gradients of leaf ids produced by ParamStore::push_all.
    // Call once per sample in sample-index order so accumulation order (and
    // thus floating-point rounding) is independent of thread scheduling.
    void accumulate(Tape<T>& tape, const std::vector<int>& param_ids, double weight = 1.0) {
        if (param_ids.size() != grads_.size()) throw ContractError("GradBuffer: id count mismatch");
        for (std::size_t i = 0; i < grads_.size(); ++i)
            if (tape.grad_touched(param_ids[i]))
                grads_[i] += tape.grad(param_ids[i]) * static_cast<T>(weight);
    }

    MatT<T>& at(int i) { return grads_[static_cast<std::size_t>(i)]; }
    const MatT<T>& at(int i) const { return grads_[static_cast<std::size_t>(i)]; }
    std::size_t count() const { return grads_.size(); }

  private:
    std::vector<MatT<T>> grads_;
};

}  // namespace ov::nn
