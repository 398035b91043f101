#pragma once

#include <string>
#include <vector>

#include "omniview/geometry/plucker.hpp"
#include "omniview/geometry/warp.hpp"
#include "omniview/model/geometry_module.hpp"
#include "omniview/model/texture.hpp"
#include "omniview/model/understanding.hpp"
#include "omniview/worldgen/dataset.hpp"

namespace ov::model {

// The three modules over one parameter store, plus the frozen latent bases.
// Construction order fixes parameter indices, optimizer state layout, and
// checkpoint layout; both training stages build the identical store.
template <typename T>
struct OmniModel {
    ModelConfig cfg;
    nn::ParamStore<T> store;
    Understanding<T> und;
    Texture<T> tex;
    Geometry<T> geo;
    LatentCodec<T> tex_codec;
    LatentCodec<T> dep_codec;

    OmniModel(const ModelConfig& c, std::uint64_t init_seed)
        : cfg(c),
          tex_codec(LatentCodec<T>::seeded(c.tex_latent(), mix_seed(c.codec_seed, 1))),
          dep_codec(LatentCodec<T>::seeded(c.dep_latent(), mix_seed(c.codec_seed, 2))) {
        cfg.validate();
        Rng rng(init_seed);
        und.create(store, cfg, rng);
        tex.create(store, cfg, rng);
        geo.create(store, cfg, rng);
    }
};

// ---- per-sample input assembly ----

inline std::vector<int> caption_ids(const world::MultiviewSample& s) {
    std::vector<int> out;
    out.reserve(s.caption.size());
    for (auto id : s.caption) out.push_back(static_cast<int>(id));
    return out;
}

inline std::vector<int> token_ids(const std::vector<std::uint16_t>& ids) {
    std::vector<int> out;
    out.reserve(ids.size());
    for (auto id : ids) out.push_back(static_cast<int>(id));
    return out;
}

// Pixel patch rows in [0,1], one matrix per frame.
template <typename T>
std::vector<nn::MatT<T>> sample_frame_patches(const world::MultiviewSample& s, int patch) {
    std::vector<nn::MatT<T>> out;
    out.reserve(static_cast<std::size_t>(s.frames));
    for (int f = 0; f < s.frames; ++f)
        out.push_back(nn::patchify<T>(s.frame_rgb(f), s.height, s.width, 3, patch));
    return out;
}

template <typename T>
nn::MatT<T> plucker_rows(const geo::Camera& cam, int height, int width, int patch) {
    geo::PluckerMap map = geo::plucker_map(cam, height, width);
    std::vector<float> buf(map.values.size());
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<float>(map.values[i]);
    return nn::patchify<T>(buf.data(), height, width, 6, patch);
}

// Point-cloud warp condition: reference pixels unprojected through the
// reference depth, splatted into the target view. Channels RGB + validity.
template <typename T>
nn::MatT<T> warp_rows(const world::MultiviewSample& s, int ref_frame, const geo::Camera& target_cam,
                      int patch) {
    if (ref_frame < 0 || ref_frame >= s.frames) throw ContractError("warp_rows: bad reference frame");
    std::size_t n = s.pixels();
    std::vector<float> depth(s.frame_depth(ref_frame), s.frame_depth(ref_frame) + n);
    std::vector<float> colors(s.frame_rgb(ref_frame), s.frame_rgb(ref_frame) + n * 3);
    geo::Camera ref_cam = geo::camera_from_f32(s.cameras[static_cast<std::size_t>(ref_frame)]);
    geo::PointSet pts = geo::unproject(depth, s.height, s.width, ref_cam);
    geo::Projected proj = geo::reproject(pts.points, target_cam, s.height, s.width);
    geo::WarpedImage img = geo::rasterize_points(proj, colors, pts.pixel_index, s.height, s.width);
    std::vector<float> buf(n * 4);
    for (std::size_t i = 0; i < n; ++i) {
        buf[i * 4 + 0] = img.rgb[i * 3 + 0];
        buf[i * 4 + 1] = img.rgb[i * 3 + 1];
        buf[i * 4 + 2] = img.rgb[i * 3 + 2];
        buf[i * 4 + 3] = img.mask[i];
    }
    return nn::patchify<T>(buf.data(), s.height, s.width, 4, patch);
}

template <typename T>
nn::MatT<T> pose_targets(const world::MultiviewSample& s) {
    nn::MatT<T> out(s.frames, 9);
    for (int f = 0; f < s.frames; ++f)
        for (int c = 0; c < 9; ++c)
            out(f, c) = static_cast<T>(s.cameras[static_cast<std::size_t>(f)][static_cast<std::size_t>(c)]);
    return out;
}

template <typename T>
std::string answer_text(const OmniModel<T>& m, const world::MultiviewSample& s,
                        const std::vector<std::uint16_t>& question, int max_tokens = 8) {
    auto frames = sample_frame_patches<T>(s, m.cfg.patch);
    std::vector<int> ids = greedy_answer(m.store, m.und, m.cfg, frames, token_ids(question), max_tokens);
    std::vector<std::uint16_t> u16;
    u16.reserve(ids.size());
    for (int id : ids) u16.push_back(static_cast<std::uint16_t>(id));
    return vocab().decode(u16);
}

// ---- sampling ----

template <typename T>
struct ViewSampleResult {
    std::vector<std::vector<float>> rgb;  // one [H*W*3] image in [0,1] per target
    nn::MatT<T> tex_hidden;               // [F*N_tok, D] last-layer states, all frames clean
};

// Generates the sample's non-reference frames autoregressively from its
// first n_refs frames, then runs one all-clean pass whose hidden states feed
// depth/pose sampling. with_warp attaches frame-0 point-cloud conditions to
// every target (the stage-2 regime).
template <typename T>
ViewSampleResult<T> sample_views(const OmniModel<T>& m, const world::MultiviewSample& s, int n_refs,
                                 int steps, std::uint64_t seed, bool ar_mask = true,
                                 bool with_warp = false) {
    const ModelConfig& cfg = m.cfg;
    if (s.frames != cfg.frames || s.height != cfg.image_size || s.width != cfg.image_size)
        throw ContractError("sample_views: sample does not match config");
    if (n_refs < 1 || n_refs >= cfg.frames) throw ContractError("sample_views: bad reference count");
    if (steps < 1) throw ContractError("sample_views: steps must be >= 1");
    int n_tok = cfg.tokens_per_frame();
    auto cap = caption_ids(s);

    std::vector<TexFrameInput<T>> state;
    state.reserve(static_cast<std::size_t>(cfg.frames));
    for (int f = 0; f < cfg.frames; ++f) {
        TexFrameInput<T> fr;
        fr.slot = f;
        geo::Camera cam = geo::camera_from_f32(s.cameras[static_cast<std::size_t>(f)]);
        fr.plucker = plucker_rows<T>(cam, s.height, s.width, cfg.patch);
        if (f < n_refs) {
            fr.flow.xt = encode_image_patches(
                m.tex_codec, nn::patchify<T>(s.frame_rgb(f), s.height, s.width, 3, cfg.patch));
            fr.flow.t = 0;
            fr.flow.is_reference = true;
        } else if (with_warp) {
            fr.warp = warp_rows<T>(s, 0, cam, cfg.patch);
        }
        state.push_back(std::move(fr));
    }

    Rng rng(mix_seed(seed, 0x5a3317));
    ViewSampleResult<T> result;
    double dt = 1.0 / static_cast<double>(steps);
    for (int target = n_refs; target < cfg.frames; ++target) {
        nn::MatT<T> x = nn::randn<T>(n_tok, cfg.tex_latent(), rng, 1.0);
        for (int k = 0; k < steps; ++k) {
            double t = 1.0 - static_cast<double>(k) * dt;
            double t_div = std::min(t, 0.98);
            state[static_cast<std::size_t>(target)].flow.xt = x;
            state[static_cast<std::size_t>(target)].flow.t = static_cast<T>(t);

            nn::Tape<T> tape(false);
            auto ids = m.store.push_all(tape);
            nn::Ctx<T> ctx{tape, ids};
            std::vector<TexFrameInput<T>> visible(state.begin(),
                                                  state.begin() + target + 1);
            TexOut<T> out = tex_forward(ctx, m.tex, m.und, cfg, cap, visible, ar_mask);
            nn::MatT<T> eps_hat =
                tape.val(out.pred).middleRows(static_cast<Eigen::Index>(target) * n_tok, n_tok);
            x -= static_cast<T>(dt) * (eps_hat - x) / static_cast<T>(1.0 - t_div);
        }
        nn::MatT<T> pixels = decode_image_patches(m.tex_codec, x);
        result.rgb.push_back(nn::unpatchify<T>(pixels, s.height, s.width, 3, cfg.patch));
        auto& fr = state[static_cast<std::size_t>(target)];
        fr.flow.xt = encode_image_patches(m.tex_codec, pixels);
        fr.flow.t = 0;
    }

    nn::Tape<T> tape(false);
    auto ids = m.store.push_all(tape);
    nn::Ctx<T> ctx{tape, ids};
    TexOut<T> out = tex_forward(ctx, m.tex, m.und, cfg, cap, state, ar_mask);
    result.tex_hidden = tape.val(out.last_hidden);
    return result;
}

template <typename T>
struct DepthSampleResult {
    std::vector<std::vector<float>> depth;  // one [H*W] map per frame, strictly positive
    nn::MatT<T> pose;                       // [F, 9]
};

// Euler flow over depth latents for all frames jointly, conditioned on the
// texture hidden states; the pose is read at the final step. Pass f_und to
// run with cross-attention (stage-1 style), null for stage 2.
template <typename T>
DepthSampleResult<T> sample_depth(const OmniModel<T>& m, const nn::MatT<T>& tex_hidden, int steps,
                                  std::uint64_t seed, const nn::MatT<T>* f_und = nullptr) {
    const ModelConfig& cfg = m.cfg;
    if (steps < 1) throw ContractError("sample_depth: steps must be >= 1");
    int n_tok = cfg.tokens_per_frame();
    if (tex_hidden.cols() != cfg.dim || tex_hidden.rows() % n_tok != 0)
        throw ContractError("sample_depth: bad hidden shape");
    int n_frames = static_cast<int>(tex_hidden.rows()) / n_tok;

    Rng rng(mix_seed(seed, 0xdee9));
    std::vector<nn::MatT<T>> xs;
    xs.reserve(static_cast<std::size_t>(n_frames));
    for (int f = 0; f < n_frames; ++f) xs.push_back(nn::randn<T>(n_tok, cfg.dep_latent(), rng, 1.0));

    DepthSampleResult<T> result;
    double dt = 1.0 / static_cast<double>(steps);
    for (int k = 0; k < steps; ++k) {
        double t = 1.0 - static_cast<double>(k) * dt;
        double t_div = std::min(t, 0.98);

        nn::Tape<T> tape(false);
        auto ids = m.store.push_all(tape);
        nn::Ctx<T> ctx{tape, ids};
        int tex_id = nn::constant(tape, tex_hidden);
        int fund_id = f_und ? nn::constant(tape, *f_und) : -1;
        std::vector<FlowFrame<T>> dep(static_cast<std::size_t>(n_frames));
        for (int f = 0; f < n_frames; ++f) {
            dep[static_cast<std::size_t>(f)].xt = xs[static_cast<std::size_t>(f)];
            dep[static_cast<std::size_t>(f)].t = static_cast<T>(t);
        }
        GeoOut<T> out = geo_forward(ctx, m.geo, cfg, tex_id, dep, fund_id, f_und != nullptr);
        for (int f = 0; f < n_frames; ++f) {
            nn::MatT<T> eps_hat =
                tape.val(out.dep_pred).middleRows(static_cast<Eigen::Index>(f) * n_tok, n_tok);
            xs[static_cast<std::size_t>(f)] -=
                static_cast<T>(dt) * (eps_hat - xs[static_cast<std::size_t>(f)]) /
                static_cast<T>(1.0 - t_div);
        }
        if (k + 1 == steps) result.pose = tape.val(out.pose);
    }
    for (int f = 0; f < n_frames; ++f)
        result.depth.push_back(decode_depth(m.dep_codec, xs[static_cast<std::size_t>(f)],
                                            cfg.image_size, cfg.image_size, cfg.patch));
    return result;
}

}  // namespace ov::model
