#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "omniview/common.hpp"
#include "omniview/nn/blocks.hpp"
#include "omniview/nn/mat.hpp"

namespace ov::model {

// Frozen orthonormal change of basis between patch pixel rows and flow
// latents. Square and seeded, so encode/decode is an exact inverse pair and
// every checkpoint of a given config shares the same latent space.
template <typename T>
class LatentCodec {
  public:
    static LatentCodec seeded(int dim, std::uint64_t seed) {
        Rng rng(seed);
        LatentCodec c;
        c.basis_ = nn::orthonormal<T>(dim, dim, rng);
        return c;
    }

    int dim() const { return static_cast<int>(basis_.rows()); }

    nn::MatT<T> encode(const nn::MatT<T>& rows) const {
        if (rows.cols() != basis_.rows()) throw ContractError("LatentCodec: row width mismatch");
        return rows * basis_;
    }

    nn::MatT<T> decode(const nn::MatT<T>& latents) const {
        if (latents.cols() != basis_.rows()) throw ContractError("LatentCodec: latent width mismatch");
        return latents * basis_.transpose();
    }

  private:
    nn::MatT<T> basis_;
};

// Depth is flowed in an inverse-depth parameterization: u = 2/(1+d) - 1 maps
// (0, inf) onto (-1, 1) with u decreasing in d, so far geometry compresses
// toward -1 instead of overflowing.
inline double depth_to_unit(double depth) {
    if (!(depth > 0.0)) throw ContractError("depth_to_unit: depth must be positive");
    return 2.0 / (1.0 + depth) - 1.0;
}

inline double unit_to_depth(double u) {
    double c = std::clamp(u, -1.0 + 1e-6, 1.0 - 1e-6);
    return 2.0 / (1.0 + c) - 1.0;
}

// Pixel rows in [0,1] are centered to [-1,1] before the basis so latents are
// roughly zero-mean at noise scale.
template <typename T>
nn::MatT<T> encode_image_patches(const LatentCodec<T>& codec, const nn::MatT<T>& patch_rows) {
    nn::MatT<T> centered = patch_rows * static_cast<T>(2) -
                           nn::MatT<T>::Ones(patch_rows.rows(), patch_rows.cols());
    return codec.encode(centered);
}

template <typename T>
nn::MatT<T> decode_image_patches(const LatentCodec<T>& codec, const nn::MatT<T>& latents) {
    nn::MatT<T> rows = codec.decode(latents);
    rows = (rows + nn::MatT<T>::Ones(rows.rows(), rows.cols())) * static_cast<T>(0.5);
    return rows.cwiseMax(static_cast<T>(0)).cwiseMin(static_cast<T>(1));
}

// depth map [H,W] row-major -> latent token rows [(H/p)(W/p), p*p].
template <typename T>
nn::MatT<T> encode_depth(const LatentCodec<T>& codec, const std::vector<float>& depth, int height,
                         int width, int patch) {
    std::vector<float> unit(depth.size());
    for (std::size_t i = 0; i < depth.size(); ++i)
        unit[i] = static_cast<float>(depth_to_unit(static_cast<double>(depth[i])));
    return codec.encode(nn::patchify<T>(unit.data(), height, width, 1, patch));
}

template <typename T>
std::vector<float> decode_depth(const LatentCodec<T>& codec, const nn::MatT<T>& latents, int height,
                                int width, int patch) {
    nn::MatT<T> unit = codec.decode(latents);
    std::vector<float> rows = nn::unpatchify<T>(unit, height, width, 1, patch);
    for (auto& v : rows) v = static_cast<float>(unit_to_depth(static_cast<double>(v)));
    return rows;
}

// One frame of a flow-matching batch: straight interpolation between the
// clean latent and unit Gaussian noise at level t. References are pinned to
// t = 0 so x_t is bit-equal to x0; noise and level are still drawn so the
// RNG stream is identical across curriculum settings.
template <typename T>
struct FlowFrame {
    nn::MatT<T> x0;
    nn::MatT<T> eps;
    nn::MatT<T> xt;
    T t = 0;
    bool is_reference = false;
};

template <typename T>
FlowFrame<T> make_flow_frame(nn::MatT<T> x0, bool is_reference, Rng& rng) {
    FlowFrame<T> f;
    f.eps = nn::randn<T>(static_cast<int>(x0.rows()), static_cast<int>(x0.cols()), rng, 1.0);
    T level = static_cast<T>(rng.uniform());
    f.t = is_reference ? static_cast<T>(0) : level;
    f.is_reference = is_reference;
    f.xt = (static_cast<T>(1) - f.t) * x0 + f.t * f.eps;
    f.x0 = std::move(x0);
    return f;
}

}  // namespace ov::model
