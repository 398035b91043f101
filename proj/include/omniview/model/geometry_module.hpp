#pragma once

#include <string>
#include <vector>

#include "omniview/model/config.hpp"
#include "omniview/model/latent.hpp"
#include "omniview/nn/blocks.hpp"

namespace ov::model {

// Depth denoiser and pose regressor. Self-attends over the concatenation
// [texture latents; noised depth; camera queries] with full attention, and
// cross-attends into the understanding features after every layer when the
// fusion flag is on.
template <typename T>
struct Geometry {
    nn::Linear<T> tex_in;   // D -> D, texture last-layer latents
    nn::Linear<T> dep_in;   // dep_latent -> D
    nn::Linear<T> time_in;  // D -> D
    int cam_query = -1;     // [1, D] shared query vector
    int frame_pos = -1;     // [frames, D]
    int pos2d = -1;         // [tokens_per_frame, D]
    int seg = -1;           // [3, D] block tags: texture / depth / camera
    std::vector<nn::TransformerBlock<T>> blocks;
    nn::LayerNormBlock<T> ln_f;
    nn::Linear<T> dep_head;  // D -> dep_latent
    nn::Linear<T> pose_fc1;  // D -> D
    nn::Linear<T> pose_fc2;  // D -> 9

    void create(nn::ParamStore<T>& store, const ModelConfig& cfg, Rng& rng) {
        auto g = nn::ParamGroup::kGeo;
        tex_in = nn::Linear<T>::create(store, "geo.tex_in", cfg.dim, cfg.dim, g, rng);
        dep_in = nn::Linear<T>::create(store, "geo.dep_in", cfg.dep_latent(), cfg.dim, g, rng);
        time_in = nn::Linear<T>::create(store, "geo.time_in", cfg.dim, cfg.dim, g, rng);
        cam_query = store.add("geo.cam_query", nn::randn<T>(1, cfg.dim, rng, 0.02), g);
        frame_pos = store.add("geo.frame_pos", nn::randn<T>(cfg.frames, cfg.dim, rng, 0.02), g);
        pos2d = store.add("geo.pos2d", nn::randn<T>(cfg.tokens_per_frame(), cfg.dim, rng, 0.02), g);
        seg = store.add("geo.seg", nn::randn<T>(3, cfg.dim, rng, 0.02), g);
        blocks.clear();
        for (int i = 0; i < cfg.geo_layers; ++i)
            blocks.push_back(nn::TransformerBlock<T>::create(
                store, "geo.block" + std::to_string(i), cfg.dim, cfg.heads, g, rng, true));
        ln_f = nn::LayerNormBlock<T>::create(store, "geo.ln_f", cfg.dim, g);
        dep_head = nn::Linear<T>::create(store, "geo.dep_head", cfg.dim, cfg.dep_latent(), g, rng);
        pose_fc1 = nn::Linear<T>::create(store, "geo.pose_fc1", cfg.dim, cfg.dim, g, rng);
        pose_fc2 = nn::Linear<T>::create(store, "geo.pose_fc2", cfg.dim, 9, g, rng);
        // identity rotation, zero translation, unit focals
        auto& b = store.at(pose_fc2.b).value;
        b(0, 0) = static_cast<T>(1);
        b(0, 7) = static_cast<T>(1);
        b(0, 8) = static_cast<T>(1);
    }
};

template <typename T>
struct GeoOut {
    int dep_pred = -1;  // [F*N_tok, dep_latent]
    int pose = -1;      // [F, 9], quaternion part normalized
    int n_frames = 0;
};

// tex_latents: tape id of [F*N_tok, D] texture last-layer hidden states.
// depth: one FlowFrame per frame (every frame is noised; depth has no
// reference frames). f_und: tape id of the understanding features, required
// iff use_cross.
template <typename T>
GeoOut<T> geo_forward(const nn::Ctx<T>& ctx, const Geometry<T>& geo, const ModelConfig& cfg,
                      int tex_latents, const std::vector<FlowFrame<T>>& depth, int f_und,
                      bool use_cross) {
    if (depth.empty()) throw ContractError("geo_forward: no depth frames");
    int n_frames = static_cast<int>(depth.size());
    if (n_frames > cfg.frames) throw ContractError("geo_forward: frame count exceeds config");
    if (use_cross && f_und < 0)
        throw ContractError("geo_forward: cross-attention requires understanding features");
    int n_tok = cfg.tokens_per_frame();
    nn::Tape<T>& tp = ctx.tape;
    if (tp.val(tex_latents).rows() != static_cast<Eigen::Index>(n_frames) * n_tok ||
        tp.val(tex_latents).cols() != cfg.dim)
        throw ContractError("geo_forward: bad texture latent shape");

    std::vector<int> frame_idx(static_cast<std::size_t>(n_frames) * n_tok);
    std::vector<int> tile_idx(static_cast<std::size_t>(n_frames) * n_tok);
    for (int f = 0; f < n_frames; ++f)
        for (int i = 0; i < n_tok; ++i) {
            frame_idx[static_cast<std::size_t>(f) * n_tok + i] = f;
            tile_idx[static_cast<std::size_t>(f) * n_tok + i] = i;
        }
    int frame_rows = nn::gather_rows(tp, ctx.p(geo.frame_pos), frame_idx);
    int pos_rows = nn::gather_rows(tp, ctx.p(geo.pos2d), tile_idx);

    int xt = geo.tex_in.apply(ctx, tex_latents);
    xt = nn::add(tp, xt, frame_rows);
    xt = nn::add(tp, xt, pos_rows);
    xt = nn::add_rowvec(tp, xt, nn::slice_rows(tp, ctx.p(geo.seg), 0, 1));

    std::vector<int> dep_parts;
    dep_parts.reserve(depth.size());
    for (const auto& fr : depth) {
        if (fr.xt.rows() != n_tok || fr.xt.cols() != cfg.dep_latent())
            throw ContractError("geo_forward: bad depth latent shape");
        int d = geo.dep_in.apply(ctx, nn::constant(tp, fr.xt));
        int temb = geo.time_in.apply(
            ctx, nn::constant(tp, nn::sinusoidal_embedding<T>(static_cast<double>(fr.t), cfg.dim)));
        dep_parts.push_back(nn::add_rowvec(tp, d, temb));
    }
    int xd = nn::concat_rows(tp, dep_parts);
    xd = nn::add(tp, xd, frame_rows);
    xd = nn::add(tp, xd, pos_rows);
    xd = nn::add_rowvec(tp, xd, nn::slice_rows(tp, ctx.p(geo.seg), 1, 1));

    std::vector<int> cam_idx(static_cast<std::size_t>(n_frames), 0);
    std::vector<int> cam_frames(static_cast<std::size_t>(n_frames));
    for (int f = 0; f < n_frames; ++f) cam_frames[static_cast<std::size_t>(f)] = f;
    int xc = nn::gather_rows(tp, ctx.p(geo.cam_query), cam_idx);
    xc = nn::add(tp, xc, nn::gather_rows(tp, ctx.p(geo.frame_pos), cam_frames));
    xc = nn::add_rowvec(tp, xc, nn::slice_rows(tp, ctx.p(geo.seg), 2, 1));

    int x = nn::concat_rows(tp, {xt, xd, xc});
    int n_seq = 2 * n_frames * n_tok + n_frames;
    nn::AttentionMask mask = nn::AttentionMask::full(n_seq, n_seq);
    int memory = use_cross ? f_und : -1;
    for (const auto& b : geo.blocks) x = b.apply(ctx, x, &mask, memory, use_cross);

    int h = geo.ln_f.apply(ctx, x);
    GeoOut<T> out;
    out.n_frames = n_frames;
    out.dep_pred =
        geo.dep_head.apply(ctx, nn::slice_rows(tp, h, n_frames * n_tok, n_frames * n_tok));
    int cam_h = nn::slice_rows(tp, h, 2 * n_frames * n_tok, n_frames);
    int pose = geo.pose_fc2.apply(ctx, nn::gelu(tp, geo.pose_fc1.apply(ctx, cam_h)));
    int quat = nn::normalize_rows_smooth(tp, nn::slice_cols(tp, pose, 0, 4));
    out.pose = nn::concat_cols(tp, {quat, nn::slice_cols(tp, pose, 4, 5)});
    return out;
}

template <typename T>
struct GeoLoss {
    int total = -1;
    int depth_mse = -1;
    int pose_huber = -1;  // mean over frames of the 9-component Huber sum
};

template <typename T>
GeoLoss<T> geo_loss(const nn::Ctx<T>& ctx, const GeoOut<T>& out,
                    const std::vector<FlowFrame<T>>& depth, const nn::MatT<T>& pose_gt,
                    const ModelConfig& cfg) {
    if (static_cast<int>(depth.size()) != out.n_frames)
        throw ContractError("geo_loss: frame count mismatch");
    if (pose_gt.rows() != out.n_frames || pose_gt.cols() != 9)
        throw ContractError("geo_loss: bad pose target shape");
    int n_tok = cfg.tokens_per_frame();
    nn::Tape<T>& tp = ctx.tape;
    nn::MatT<T> eps(static_cast<Eigen::Index>(out.n_frames) * n_tok, cfg.dep_latent());
    for (int f = 0; f < out.n_frames; ++f)
        eps.middleRows(static_cast<Eigen::Index>(f) * n_tok, n_tok) = depth[static_cast<std::size_t>(f)].eps;
    GeoLoss<T> loss;
    loss.depth_mse = nn::mse_all(tp, out.dep_pred, nn::constant(tp, std::move(eps)));
    int hub = nn::huber_sum(tp, out.pose, nn::constant(tp, pose_gt), cfg.huber_delta);
    loss.pose_huber = nn::scale(tp, hub, 1.0 / static_cast<double>(out.n_frames));
    loss.total = nn::add(tp, loss.depth_mse, loss.pose_huber);
    return loss;
}

}  // namespace ov::model
