#pragma once

#include <string>
#include <vector>

#include "omniview/nn/ops.hpp"
#include "omniview/nn/params.hpp"

namespace ov::nn {

// Per-forward context: one tape plus the tape ids of every parameter
// (aligned with ParamStore indices, from ParamStore::push_all).
template <typename T>
struct Ctx {
    Tape<T>& tape;
    const std::vector<int>& param_ids;

    int p(int store_index) const {
        if (store_index < 0 || static_cast<std::size_t>(store_index) >= param_ids.size())
            throw ContractError("Ctx: bad parameter index");
        return param_ids[static_cast<std::size_t>(store_index)];
    }
};

template <typename T>
struct Linear {
    int w = -1, b = -1;  // store indices; b = -1 means no bias
    int in = 0, out = 0;

    static Linear create(ParamStore<T>& store, const std::string& name, int in, int out,
                         ParamGroup group, Rng& rng, bool bias = true) {
        Linear lin;
        lin.in = in;
        lin.out = out;
        lin.w = store.add(name + ".w", randn<T>(in, out, rng, 1.0 / std::sqrt(static_cast<double>(in))),
                          group);
        if (bias) lin.b = store.add(name + ".b", MatT<T>::Zero(1, out), group);
        return lin;
    }

    int apply(const Ctx<T>& ctx, int x) const {
        int y = matmul(ctx.tape, x, ctx.p(w));
        if (b >= 0) y = add_rowvec(ctx.tape, y, ctx.p(b));
        return y;
    }
};

template <typename T>
struct LayerNormBlock {
    int gamma = -1, beta = -1;

    static LayerNormBlock create(ParamStore<T>& store, const std::string& name, int dim,
                                 ParamGroup group) {
        LayerNormBlock ln;
        ln.gamma = store.add(name + ".gamma", MatT<T>::Ones(1, dim), group);
        ln.beta = store.add(name + ".beta", MatT<T>::Zero(1, dim), group);
        return ln;
    }

    int apply(const Ctx<T>& ctx, int x) const {
        return layernorm(ctx.tape, x, ctx.p(gamma), ctx.p(beta));
    }
};

template <typename T>
struct Mlp {
    Linear<T> fc1, fc2;

    static Mlp create(ParamStore<T>& store, const std::string& name, int dim, ParamGroup group,
                      Rng& rng, int hidden_mult = 4) {
        Mlp m;
        m.fc1 = Linear<T>::create(store, name + ".fc1", dim, dim * hidden_mult, group, rng);
        m.fc2 = Linear<T>::create(store, name + ".fc2", dim * hidden_mult, dim, group, rng);
        return m;
    }

    int apply(const Ctx<T>& ctx, int x) const {
        return fc2.apply(ctx, gelu(ctx.tape, fc1.apply(ctx, x)));
    }
};

// Multi-head attention; queries may come from a different sequence than
// keys/values (cross-attention).
template <typename T>
struct Mha {
    Linear<T> q, k, v, o;
    int heads = 0, dim = 0;

    static Mha create(ParamStore<T>& store, const std::string& name, int dim, int heads,
                      ParamGroup group, Rng& rng) {
        if (heads < 1 || dim % heads != 0) throw InvalidInputError("Mha: dim not divisible by heads");
        Mha a;
        a.heads = heads;
        a.dim = dim;
        a.q = Linear<T>::create(store, name + ".q", dim, dim, group, rng);
        a.k = Linear<T>::create(store, name + ".k", dim, dim, group, rng);
        a.v = Linear<T>::create(store, name + ".v", dim, dim, group, rng);
        a.o = Linear<T>::create(store, name + ".o", dim, dim, group, rng);
        return a;
    }

    int apply(const Ctx<T>& ctx, int x_q, int x_kv, const AttentionMask* mask) const {
        Tape<T>& tp = ctx.tape;
        int qm = q.apply(ctx, x_q);
        int km = k.apply(ctx, x_kv);
        int vm = v.apply(ctx, x_kv);
        int hd = dim / heads;
        std::vector<int> head_outs;
        head_outs.reserve(static_cast<std::size_t>(heads));
        for (int h = 0; h < heads; ++h) {
            int qh = slice_cols(tp, qm, h * hd, hd);
            int kh = slice_cols(tp, km, h * hd, hd);
            int vh = slice_cols(tp, vm, h * hd, hd);
            int scores = scale(tp, matmul_nt(tp, qh, kh), 1.0 / std::sqrt(static_cast<double>(hd)));
            int probs = softmax_masked(tp, scores, mask);
            head_outs.push_back(matmul(tp, probs, vh));
        }
        return o.apply(ctx, concat_cols(tp, head_outs));
    }
};

// Pre-norm transformer block with optional cross-attention after the
// self-attention sublayer.
template <typename T>
struct TransformerBlock {
    LayerNormBlock<T> ln1, ln2, ln_cross;
    Mha<T> attn, cross;
    Mlp<T> mlp;
    bool has_cross = false;

    static TransformerBlock create(ParamStore<T>& store, const std::string& name, int dim, int heads,
                                   ParamGroup group, Rng& rng, bool with_cross = false) {
        TransformerBlock b;
        b.ln1 = LayerNormBlock<T>::create(store, name + ".ln1", dim, group);
        b.attn = Mha<T>::create(store, name + ".attn", dim, heads, group, rng);
        b.has_cross = with_cross;
        if (with_cross) {
            b.ln_cross = LayerNormBlock<T>::create(store, name + ".lnc", dim, group);
            b.cross = Mha<T>::create(store, name + ".cross", dim, heads, group, rng);
        }
        b.ln2 = LayerNormBlock<T>::create(store, name + ".ln2", dim, group);
        b.mlp = Mlp<T>::create(store, name + ".mlp", dim, group, rng);
        return b;
    }

    // memory < 0 or use_cross false skips the cross sublayer entirely.
    int apply(const Ctx<T>& ctx, int x, const AttentionMask* self_mask, int memory = -1,
              bool use_cross = true) const {
        Tape<T>& tp = ctx.tape;
        int normed = ln1.apply(ctx, x);
        int h = add(tp, x, attn.apply(ctx, normed, normed, self_mask));
        if (has_cross && use_cross && memory >= 0)
            h = add(tp, h, cross.apply(ctx, ln_cross.apply(ctx, h), memory, nullptr));
        return add(tp, h, mlp.apply(ctx, ln2.apply(ctx, h)));
    }
};

// [H,W,C] row-major image to [(H/p)*(W/p), p*p*C] patch rows; patches scan
// the patch grid row-major, and within a patch values are (pi, pj, c)
// row-major. H and W must be divisible by p.
template <typename T>
MatT<T> patchify(const float* img, int height, int width, int channels, int p) {
    if (p < 1 || height % p != 0 || width % p != 0)
        throw InvalidInputError("patchify: size not divisible by patch");
    int gh = height / p, gw = width / p;
    MatT<T> out(static_cast<Eigen::Index>(gh) * gw, static_cast<Eigen::Index>(p) * p * channels);
    for (int gi = 0; gi < gh; ++gi)
        for (int gj = 0; gj < gw; ++gj) {
            Eigen::Index row = static_cast<Eigen::Index>(gi) * gw + gj;
            Eigen::Index col = 0;
            for (int pi = 0; pi < p; ++pi)
                for (int pj = 0; pj < p; ++pj)
                    for (int c = 0; c < channels; ++c)
                        out(row, col++) = static_cast<T>(
                            img[((static_cast<std::size_t>(gi * p + pi) * width) + (gj * p + pj)) *
                                    channels +
                                c]);
        }
    return out;
}

template <typename T>
std::vector<float> unpatchify(const MatT<T>& patches, int height, int width, int channels, int p) {
    if (p < 1 || height % p != 0 || width % p != 0)
        throw InvalidInputError("unpatchify: size not divisible by patch");
    int gh = height / p, gw = width / p;
    if (patches.rows() != static_cast<Eigen::Index>(gh) * gw ||
        patches.cols() != static_cast<Eigen::Index>(p) * p * channels)
        throw InvalidInputError("unpatchify: shape mismatch");
    std::vector<float> img(static_cast<std::size_t>(height) * width * channels);
    for (int gi = 0; gi < gh; ++gi)
        for (int gj = 0; gj < gw; ++gj) {
            Eigen::Index row = static_cast<Eigen::Index>(gi) * gw + gj;
            Eigen::Index col = 0;
            for (int pi = 0; pi < p; ++pi)
                for (int pj = 0; pj < p; ++pj)
                    for (int c = 0; c < channels; ++c)
                        img[((static_cast<std::size_t>(gi * p + pi) * width) + (gj * p + pj)) *
                                channels +
                            c] = static_cast<float>(patches(row, col++));
        }
    return img;
}

// Standard sin/cos embedding of a scalar in [0,1]; scaled by 1000 so nearby
// noise levels stay distinguishable. dim must be even.
template <typename T>
MatT<T> sinusoidal_embedding(double t, int dim) {
    if (dim < 2 || dim % 2 != 0) throw InvalidInputError("sinusoidal_embedding: dim must be even");
    MatT<T> out(1, dim);
    double pos = t * 1000.0;
    int half = dim / 2;
    for (int k = 0; k < half; ++k) {
        double omega = std::pow(10000.0, -2.0 * k / static_cast<double>(dim));
        out(0, 2 * k) = static_cast<T>(std::sin(pos * omega));
        out(0, 2 * k + 1) = static_cast<T>(std::cos(pos * omega));
    }
    return out;
}

}  // namespace ov::nn
