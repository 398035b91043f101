#pragma once

#include <string>
#include <vector>

#include "omniview/model/config.hpp"
#include "omniview/model/latent.hpp"
#include "omniview/model/understanding.hpp"
#include "omniview/nn/blocks.hpp"

namespace ov::model {

// Flow-matching novel-view generator. Caption tokens ride in through the
// understanding model's token table (the LM-head pathway), reference frames
// enter clean at t=0, and every visual token carries its frame's Plucker
// rays as the absolute position encoding.
template <typename T>
struct Texture {
    nn::Linear<T> latent_in;   // tex_latent -> D
    nn::Linear<T> caption_in;  // D -> D, applied to und.embed rows
    nn::Linear<T> plucker_in;  // p*p*6 -> D
    nn::Linear<T> warp_in;     // p*p*4 -> D, zero-init point-cloud conditioning
    nn::Linear<T> time_in;     // D -> D, applied to sinusoidal t embedding
    int text_pos = -1;         // [max_text, D]
    int frame_pos = -1;        // [frames, D]
    std::vector<nn::TransformerBlock<T>> blocks;
    nn::LayerNormBlock<T> ln_f;
    nn::Linear<T> head;  // D -> tex_latent

    void create(nn::ParamStore<T>& store, const ModelConfig& cfg, Rng& rng) {
        auto g = nn::ParamGroup::kTex;
        latent_in = nn::Linear<T>::create(store, "tex.latent_in", cfg.tex_latent(), cfg.dim, g, rng);
        caption_in = nn::Linear<T>::create(store, "tex.caption_in", cfg.dim, cfg.dim, g, rng);
        plucker_in =
            nn::Linear<T>::create(store, "tex.plucker_in", cfg.patch * cfg.patch * 6, cfg.dim, g, rng);
        warp_in =
            nn::Linear<T>::create(store, "tex.warp_in", cfg.patch * cfg.patch * 4, cfg.dim, g, rng);
        store.at(warp_in.w).value.setZero();  // inert until stage 2 trains it
        time_in = nn::Linear<T>::create(store, "tex.time_in", cfg.dim, cfg.dim, g, rng);
        text_pos = store.add("tex.text_pos", nn::randn<T>(cfg.max_text, cfg.dim, rng, 0.02), g);
        frame_pos = store.add("tex.frame_pos", nn::randn<T>(cfg.frames, cfg.dim, rng, 0.02), g);
        blocks.clear();
        for (int i = 0; i < cfg.tex_layers; ++i)
            blocks.push_back(nn::TransformerBlock<T>::create(
                store, "tex.block" + std::to_string(i), cfg.dim, cfg.heads, g, rng));
        ln_f = nn::LayerNormBlock<T>::create(store, "tex.ln_f", cfg.dim, g);
        head = nn::Linear<T>::create(store, "tex.head", cfg.dim, cfg.tex_latent(), g, rng);
    }
};

// Text rows attend among themselves; frame f's rows attend to text plus
// frames up to f (all frames when frame_causal is off). Full attention
// within a frame either way.
inline nn::AttentionMask frame_causal_mask(int frame_count, int tokens_per_frame, int text_len,
                                           bool frame_causal = true) {
    if (frame_count < 1 || tokens_per_frame < 1 || text_len < 0)
        throw InvalidInputError("frame_causal_mask: bad sizes");
    int n = text_len + frame_count * tokens_per_frame;
    auto frame_of = [&](int i) { return i < text_len ? -1 : (i - text_len) / tokens_per_frame; };
    std::vector<std::uint8_t> allow(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0);
    for (int q = 0; q < n; ++q) {
        int fq = frame_of(q);
        for (int k = 0; k < n; ++k) {
            int fk = frame_of(k);
            bool ok;
            if (fq < 0)
                ok = fk < 0;
            else
                ok = fk < 0 || !frame_causal || fk <= fq;
            allow[static_cast<std::size_t>(q) * static_cast<std::size_t>(n) + static_cast<std::size_t>(k)] =
                ok ? 1 : 0;
        }
    }
    return nn::AttentionMask(n, n, std::move(allow));
}

// One frame's inputs to the texture module. slot is the frame's position in
// the trajectory (selects frame_pos); warp may be 0x0 when the point-cloud
// condition is absent.
template <typename T>
struct TexFrameInput {
    FlowFrame<T> flow;
    nn::MatT<T> plucker;  // [N_tok, p*p*6]
    nn::MatT<T> warp;     // [N_tok, p*p*4] or empty
    int slot = 0;
};

template <typename T>
struct TexOut {
    int pred = -1;         // [n_frames*N_tok, tex_latent]
    int last_hidden = -1;  // [n_frames*N_tok, D]
    int n_frames = 0;
};

template <typename T>
TexOut<T> tex_forward(const nn::Ctx<T>& ctx, const Texture<T>& tex, const Understanding<T>& und,
                      const ModelConfig& cfg, const std::vector<int>& caption_ids,
                      const std::vector<TexFrameInput<T>>& frames, bool ar_mask) {
    if (frames.empty()) throw ContractError("tex_forward: no frames");
    if (static_cast<int>(caption_ids.size()) > cfg.max_text)
        throw ContractError("tex_forward: caption exceeds max_text");
    int n_tok = cfg.tokens_per_frame();
    int n_cap = static_cast<int>(caption_ids.size());
    nn::Tape<T>& tp = ctx.tape;

    std::vector<int> rows;
    rows.reserve(frames.size() + 1);
    if (n_cap > 0) {
        int text = nn::gather_rows(tp, ctx.p(und.embed), caption_ids);
        text = tex.caption_in.apply(ctx, text);
        std::vector<int> pos_idx(caption_ids.size());
        for (std::size_t i = 0; i < caption_ids.size(); ++i) pos_idx[i] = static_cast<int>(i);
        rows.push_back(nn::add(tp, text, nn::gather_rows(tp, ctx.p(tex.text_pos), pos_idx)));
    }

    int prev_slot = -1;
    for (const auto& fr : frames) {
        if (fr.slot < 0 || fr.slot >= cfg.frames || fr.slot <= prev_slot)
            throw ContractError("tex_forward: frame slots must be increasing and in range");
        prev_slot = fr.slot;
        if (fr.flow.xt.rows() != n_tok || fr.flow.xt.cols() != cfg.tex_latent())
            throw ContractError("tex_forward: bad latent shape");
        if (fr.plucker.rows() != n_tok || fr.plucker.cols() != cfg.patch * cfg.patch * 6)
            throw ContractError("tex_forward: bad plucker shape");
        int x = tex.latent_in.apply(ctx, nn::constant(tp, fr.flow.xt));
        x = nn::add(tp, x, tex.plucker_in.apply(ctx, nn::constant(tp, fr.plucker)));
        if (fr.warp.size() > 0) {
            if (fr.warp.rows() != n_tok || fr.warp.cols() != cfg.patch * cfg.patch * 4)
                throw ContractError("tex_forward: bad warp shape");
            x = nn::add(tp, x, tex.warp_in.apply(ctx, nn::constant(tp, fr.warp)));
        }
        x = nn::add_rowvec(tp, x, nn::slice_rows(tp, ctx.p(tex.frame_pos), fr.slot, 1));
        int temb = tex.time_in.apply(
            ctx, nn::constant(tp, nn::sinusoidal_embedding<T>(static_cast<double>(fr.flow.t), cfg.dim)));
        x = nn::add_rowvec(tp, x, temb);
        rows.push_back(x);
    }

    int x = nn::concat_rows(tp, rows);
    nn::AttentionMask mask =
        frame_causal_mask(static_cast<int>(frames.size()), n_tok, n_cap, ar_mask);
    for (const auto& b : tex.blocks) x = b.apply(ctx, x, &mask);

    TexOut<T> out;
    out.n_frames = static_cast<int>(frames.size());
    int n_frame_rows = out.n_frames * n_tok;
    out.last_hidden = nn::slice_rows(tp, x, n_cap, n_frame_rows);
    int h = tex.head.apply(ctx, tex.ln_f.apply(ctx, x));
    out.pred = nn::slice_rows(tp, h, n_cap, n_frame_rows);
    return out;
}

// MSE between predicted and drawn noise over non-reference frames only.
template <typename T>
int tex_loss(const nn::Ctx<T>& ctx, const TexOut<T>& out, const std::vector<TexFrameInput<T>>& frames,
             const ModelConfig& cfg) {
    if (static_cast<int>(frames.size()) != out.n_frames)
        throw ContractError("tex_loss: frame count mismatch");
    int n_tok = cfg.tokens_per_frame();
    nn::Tape<T>& tp = ctx.tape;
    std::vector<int> pred_parts;
    std::vector<nn::MatT<T>> eps_parts;
    for (std::size_t f = 0; f < frames.size(); ++f) {
        if (frames[f].flow.is_reference) continue;
        pred_parts.push_back(nn::slice_rows(tp, out.pred, static_cast<int>(f) * n_tok, n_tok));
        eps_parts.push_back(frames[f].flow.eps);
    }
    if (pred_parts.empty()) throw ContractError("tex_loss: no target frames");
    nn::MatT<T> eps(static_cast<Eigen::Index>(eps_parts.size()) * n_tok, cfg.tex_latent());
    for (std::size_t i = 0; i < eps_parts.size(); ++i)
        eps.middleRows(static_cast<Eigen::Index>(i) * n_tok, n_tok) = eps_parts[i];
    return nn::mse_all(tp, nn::concat_rows(tp, pred_parts), nn::constant(tp, std::move(eps)));
}

}  // namespace ov::model
