#pragma once

#include <cmath>
#include <optional>

#include "omniview/nn/params.hpp"

namespace ov::nn {

struct AdamWConfig {
    double lr = 1e-5;  // peak learning rate
    double beta1 = 0.9;
    double beta2 = 0.95;
    double eps = 1e-8;
    double weight_decay = 0.01;
    double clip_norm = 1.0;  // global gradient norm cap; <= 0 disables
    double warmup_frac = 0.05;
};

// Linear warmup to the peak rate over ceil(frac * total) steps, flat after.
inline double warmup_lr(double peak, std::uint64_t iter, std::uint64_t total, double frac) {
    if (total == 0) throw InvalidInputError("warmup_lr: total must be positive");
    auto warmup = static_cast<std::uint64_t>(std::ceil(frac * static_cast<double>(total)));
    if (warmup == 0) return peak;
    double r = static_cast<double>(iter) / static_cast<double>(warmup);
    return peak * std::min(1.0, r);
}

struct StepResult {
    bool applied = false;  // false when gradients were non-finite
    double lr = 0.0;
    double grad_norm = 0.0;  // pre-clip global norm
};

// Which parameter groups an update may touch. Frozen groups keep their
// values, moments, and are excluded from the global norm.
struct GroupMask {
    bool und = true, tex = true, geo = true;

    static GroupMask all() { return {}; }
    static GroupMask generation_only() { return {false, true, true}; }

    bool allows(ParamGroup g) const {
        switch (g) {
            case ParamGroup::kUnd: return und;
            case ParamGroup::kTex: return tex;
            case ParamGroup::kGeo: return geo;
        }
        throw InvalidInputError("GroupMask: bad group");
    }
};

// AdamW with bias correction and decoupled weight decay. Gradients are
// clipped by global norm before the moment update; a non-finite global norm
// rejects the step without touching parameters or moments.
template <typename T>
class AdamW {
  public:
    AdamW(const ParamStore<T>& store, AdamWConfig cfg) : cfg_(cfg) {
        if (cfg.lr <= 0 || cfg.beta1 < 0 || cfg.beta1 >= 1 || cfg.beta2 < 0 || cfg.beta2 >= 1 ||
            cfg.eps <= 0 || cfg.weight_decay < 0)
            throw InvalidInputError("AdamW: bad config");
        m_.reserve(store.count());
        v_.reserve(store.count());
        for (std::size_t i = 0; i < store.count(); ++i) {
            const auto& e = store.at(static_cast<int>(i));
            m_.push_back(MatT<T>::Zero(e.value.rows(), e.value.cols()));
            v_.push_back(MatT<T>::Zero(e.value.rows(), e.value.cols()));
        }
    }

    StepResult step(ParamStore<T>& store, const GradBuffer<T>& grads, double lr,
                    GroupMask mask = GroupMask::all()) {
        if (grads.count() != m_.size()) throw ContractError("AdamW: grad layout mismatch");
        StepResult res;
        res.lr = lr;

        double sq = 0.0;
        for (std::size_t i = 0; i < m_.size(); ++i) {
            if (!mask.allows(store.at(static_cast<int>(i)).group)) continue;
            sq += static_cast<double>(grads.at(static_cast<int>(i)).template cast<double>().squaredNorm());
        }
        double norm = std::sqrt(sq);
        res.grad_norm = norm;
        if (!std::isfinite(norm)) return res;  // rejected, no state change

        double gscale = 1.0;
        if (cfg_.clip_norm > 0 && norm > cfg_.clip_norm) gscale = cfg_.clip_norm / norm;

        ++steps_;
        double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(steps_));
        double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(steps_));
        const T b1 = static_cast<T>(cfg_.beta1), b2 = static_cast<T>(cfg_.beta2);
        for (std::size_t i = 0; i < m_.size(); ++i) {
            if (!mask.allows(store.at(static_cast<int>(i)).group)) continue;
            MatT<T> g = grads.at(static_cast<int>(i)) * static_cast<T>(gscale);
            m_[i] = m_[i] * b1 + g * static_cast<T>(1.0 - cfg_.beta1);
            v_[i] = v_[i] * b2 + g.cwiseProduct(g) * static_cast<T>(1.0 - cfg_.beta2);
            MatT<T>& p = store.at(static_cast<int>(i)).value;
            MatT<T> mhat = m_[i] / static_cast<T>(bc1);
            MatT<T> vhat = v_[i] / static_cast<T>(bc2);
            p.array() -= static_cast<T>(lr) *
                         (mhat.array() / (vhat.array().sqrt() + static_cast<T>(cfg_.eps)) +
                          static_cast<T>(cfg_.weight_decay) * p.array());
        }
        res.applied = true;
        return res;
    }

    std::uint64_t steps() const { return steps_; }
    const AdamWConfig& config() const { return cfg_; }

  private:
    AdamWConfig cfg_;
    std::vector<MatT<T>> m_, v_;
    std::uint64_t steps_ = 0;
};

}  // namespace ov::nn
