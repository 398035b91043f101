#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "omniview/model/omni.hpp"
#include "omniview/nn/adamw.hpp"
#include "omniview/nn/checkpoint.hpp"
#include "omniview/train/config.hpp"
#include "omniview/train/curriculum.hpp"

namespace ov::train {

struct StepStats {
    double l_und = 0.0;
    double l_tex = 0.0;
    double l_geo = 0.0;
    double total = 0.0;  // weighted objective as reported
    double lr = 0.0;
    double grad_norm = 0.0;
    bool applied = false;
    int n_ref = 1;
};

// Owns the optimizer state for one run. Stage 1 sums the QA, texture-flow,
// and geometry losses per batch and updates every group; stage 2 drops the
// QA loss, turns cross-attention off, conditions targets on the frame-0
// point-cloud warp, and freezes the understanding group.
template <typename T>
class Trainer {
  public:
    Trainer(model::OmniModel<T>& m, const TrainConfig& tc)
        : model_(m), tc_(tc), grads_(m.store), opt_(m.store, make_opt_config(tc)) {
        tc_.validate();
        if (tc_.frames != m.cfg.frames || tc_.size != m.cfg.image_size)
            throw ContractError("Trainer: config does not match model");
    }

    // One optimizer step over a batch. Per-sample tapes run independently and
    // gradients reduce in sample order, so results do not depend on timing.
    StepStats step(const std::vector<const world::MultiviewSample*>& batch, int iter, double lr,
                   int n_ref) {
        if (batch.empty()) throw InvalidInputError("Trainer: empty batch");
        const ModelLosses losses = forward_backward(batch, iter, n_ref);

        StepStats st;
        st.l_und = losses.und;
        st.l_tex = losses.tex;
        st.l_geo = losses.geo;
        st.total = reported_total(losses);
        st.lr = lr;
        st.n_ref = n_ref;
        if (std::isfinite(losses.raw_total)) {
            nn::GroupMask mask =
                tc_.stage == 2 ? nn::GroupMask::generation_only() : nn::GroupMask::all();
            nn::StepResult r = opt_.step(model_.store, grads_, lr, mask);
            st.applied = r.applied;
            st.grad_norm = r.grad_norm;
        }
        return st;
    }

    nn::AdamW<T>& optimizer() { return opt_; }

  private:
    struct ModelLosses {
        double und = 0.0, tex = 0.0, geo = 0.0;
        double raw_total = 0.0;  // batch-mean of the tape objective
    };

    static nn::AdamWConfig make_opt_config(const TrainConfig& tc) {
        nn::AdamWConfig oc;
        oc.lr = tc.lr;
        oc.weight_decay = tc.weight_decay;
        oc.clip_norm = tc.clip_norm;
        oc.warmup_frac = tc.warmup_frac;
        return oc;
    }

    double reported_total(const ModelLosses& l) const {
        if (tc_.stage == 2) return tc_.lambda_tex * l.tex + tc_.lambda_geo * l.geo;
        return tc_.lambda_und * l.und + tc_.lambda_tex * l.tex + tc_.lambda_geo * l.geo;
    }

    ModelLosses forward_backward(const std::vector<const world::MultiviewSample*>& batch, int iter,
                                 int n_ref) {
        grads_.zero();
        ModelLosses acc;
        double inv = 1.0 / static_cast<double>(batch.size());
        for (std::size_t i = 0; i < batch.size(); ++i) {
            SampleLosses s = sample_pass(*batch[i], iter, static_cast<int>(i), n_ref);
            acc.und += s.und * inv;
            acc.tex += s.tex * inv;
            acc.geo += s.geo * inv;
            acc.raw_total += s.total * inv;
        }
        return acc;
    }

    struct SampleLosses {
        double und = 0.0, tex = 0.0, geo = 0.0, total = 0.0;
    };

    SampleLosses sample_pass(const world::MultiviewSample& s, int iter, int slot, int n_ref) {
        const model::ModelConfig& cfg = model_.cfg;
        if (s.frames != cfg.frames || s.height != cfg.image_size || s.width != cfg.image_size)
            throw ContractError("Trainer: sample does not match config");
        Rng rng(mix_seed(mix_seed(tc_.seed, 0x57e9), static_cast<std::uint64_t>(iter),
                         static_cast<std::uint64_t>(slot)));

        nn::Tape<T> tape(true);
        auto ids = model_.store.push_all(tape);
        nn::Ctx<T> ctx{tape, ids};

        auto frames_px = model::sample_frame_patches<T>(s, cfg.patch);

        // understanding pass on one of the sample's QA pairs
        int l_und = -1;
        model::UndOut<T> und_out;
        bool need_und = tc_.stage == 1;
        if (need_und) {
            if (s.qas.empty()) throw ContractError("Trainer: sample has no QA pairs");
            const auto& qa = s.qas[rng.uniform_int(s.qas.size())];
            model::QaTail tail =
                model::build_qa_tail(model::token_ids(qa.question), model::token_ids(qa.answer));
            und_out = model::und_forward(ctx, model_.und, cfg, frames_px, tail.ids);
            l_und = model::und_loss(ctx, und_out, tail.targets);
        }

        // texture pass with per-frame diffusion forcing
        std::vector<model::TexFrameInput<T>> tex_in;
        tex_in.reserve(static_cast<std::size_t>(cfg.frames));
        for (int f = 0; f < cfg.frames; ++f) {
            model::TexFrameInput<T> fr;
            fr.slot = f;
            geo::Camera cam = geo::camera_from_f32(s.cameras[static_cast<std::size_t>(f)]);
            fr.plucker = model::plucker_rows<T>(cam, s.height, s.width, cfg.patch);
            nn::MatT<T> clean = model::encode_image_patches(
                model_.tex_codec, frames_px[static_cast<std::size_t>(f)]);
            fr.flow = model::make_flow_frame(std::move(clean), f < n_ref, rng);
            if (tc_.stage == 2 && f >= n_ref)
                fr.warp = model::warp_rows<T>(s, 0, cam, cfg.patch);
            tex_in.push_back(std::move(fr));
        }
        model::TexOut<T> tex_out = model::tex_forward(ctx, model_.tex, model_.und, cfg,
                                                      model::caption_ids(s), tex_in, tc_.ar_mask);
        int l_tex = model::tex_loss(ctx, tex_out, tex_in, cfg);

        // geometry pass: every frame's depth is noised, poses regressed
        std::vector<model::FlowFrame<T>> dep;
        dep.reserve(static_cast<std::size_t>(cfg.frames));
        for (int f = 0; f < cfg.frames; ++f) {
            std::vector<float> d(s.frame_depth(f), s.frame_depth(f) + s.pixels());
            dep.push_back(model::make_flow_frame(
                model::encode_depth(model_.dep_codec, d, s.height, s.width, cfg.patch), false, rng));
        }
        bool cross = tc_.stage == 1 && tc_.cross_attn;
        model::GeoOut<T> geo_out = model::geo_forward(ctx, model_.geo, cfg, tex_out.last_hidden, dep,
                                                      cross ? und_out.f_und : -1, cross);
        model::GeoLoss<T> l_geo = model::geo_loss(ctx, geo_out, dep, model::pose_targets<T>(s), cfg);

        int total;
        if (tc_.stage == 2)
            total = nn::weighted_sum(tape, {l_tex, l_geo.total}, {tc_.lambda_tex, tc_.lambda_geo});
        else
            total = nn::weighted_sum(tape, {l_und, l_tex, l_geo.total},
                                     {tc_.lambda_und, tc_.lambda_tex, tc_.lambda_geo});
        tape.backward(total);
        grads_.accumulate(tape, ids, 1.0 / static_cast<double>(tc_.batch));

        SampleLosses out;
        if (need_und) out.und = static_cast<double>(tape.val(l_und)(0, 0));
        out.tex = static_cast<double>(tape.val(l_tex)(0, 0));
        out.geo = static_cast<double>(tape.val(l_geo.total)(0, 0));
        out.total = static_cast<double>(tape.val(total)(0, 0));
        return out;
    }

    model::OmniModel<T>& model_;
    TrainConfig tc_;
    nn::GradBuffer<T> grads_;
    nn::AdamW<T> opt_;
};

struct TrainResult {
    std::string checkpoint_path;
    std::string metrics_path;
    int iterations = 0;
};

inline std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

// Full training loop: deterministic batches from the run seed, JSONL metrics,
// periodic + final checkpoints. init_ckpt loads a starting parameter set
// (stage 2 resumes from the stage-1 checkpoint).
template <typename T>
TrainResult run_training(const TrainConfig& tc, const std::vector<world::MultiviewSample>& train_set,
                         const std::string& init_ckpt = "") {
    tc.validate();
    if (train_set.empty()) throw InvalidInputError("run_training: empty training set");
    namespace fs = std::filesystem;
    fs::create_directories(tc.out);

    model::OmniModel<T> m(tc.model_config(), mix_seed(tc.seed, 0x1417));
    if (!init_ckpt.empty()) nn::load_checkpoint(init_ckpt, m.store);
    if (tc.stage == 2 && init_ckpt.empty())
        throw InvalidInputError("run_training: stage 2 requires an initial checkpoint");

    Trainer<T> trainer(m, tc);
    std::string cfg_text = serialize_config(tc);
    atomic_write_file(fs::path(tc.out) / "config.txt", cfg_text);

    std::string metrics_path = (fs::path(tc.out) / "metrics.jsonl").string();
    std::ofstream metrics(metrics_path, std::ios::trunc);
    if (!metrics) throw InvalidInputError("run_training: cannot write " + metrics_path);
    metrics.precision(17);  // doubles survive the round trip exactly

    std::string ckpt_path = (fs::path(tc.out) / "ckpt_final.omvc").string();
    for (int iter = 0; iter < tc.iters; ++iter) {
        CurriculumState cur = tc.stage == 2
                                  ? CurriculumState{iter, tc.iters, 1}
                                  : curriculum_at(iter, tc.iters, tc.frames, tc.d2s, tc.refs == "dense");
        double lr = nn::warmup_lr(tc.lr, static_cast<std::uint64_t>(iter),
                                  static_cast<std::uint64_t>(tc.iters), tc.warmup_frac);

        Rng pick(mix_seed(tc.seed, 0xba7c4, static_cast<std::uint64_t>(iter)));
        std::vector<const world::MultiviewSample*> batch;
        batch.reserve(static_cast<std::size_t>(tc.batch));
        for (int b = 0; b < tc.batch; ++b)
            batch.push_back(&train_set[pick.uniform_int(train_set.size())]);

        StepStats st = trainer.step(batch, iter, lr, cur.n_ref);

        if (iter % tc.log_every == 0 || iter + 1 == tc.iters) {
            metrics << "{\"iteration\":" << iter << ",\"lr\":" << st.lr;
            if (tc.stage == 1) metrics << ",\"l_und\":" << st.l_und;
            metrics << ",\"l_tex\":" << st.l_tex << ",\"l_geo\":" << st.l_geo
                    << (tc.stage == 1 ? ",\"l_s1\":" : ",\"l_s2\":") << st.total
                    << ",\"n_ref\":" << st.n_ref << ",\"grad_norm\":" << st.grad_norm
                    << ",\"applied\":" << (st.applied ? "true" : "false") << "}\n";
            metrics.flush();
        }
        if (tc.ckpt_every > 0 && (iter + 1) % tc.ckpt_every == 0 && iter + 1 < tc.iters) {
            std::string p = (fs::path(tc.out) / ("ckpt_" + std::to_string(iter + 1) + ".omvc")).string();
            nn::save_checkpoint(p, m.store, nn::CheckpointMeta{cfg_text, static_cast<std::uint64_t>(iter + 1)});
        }
    }
    nn::save_checkpoint(ckpt_path, m.store,
                        nn::CheckpointMeta{cfg_text, static_cast<std::uint64_t>(tc.iters)});

    TrainResult res;
    res.checkpoint_path = ckpt_path;
    res.metrics_path = metrics_path;
    res.iterations = tc.iters;
    return res;
}

}  // namespace ov::train
