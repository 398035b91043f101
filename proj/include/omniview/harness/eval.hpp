#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "omniview/harness/metrics.hpp"
#include "omniview/model/omni.hpp"
#include "omniview/nn/checkpoint.hpp"
#include "omniview/train/config.hpp"
#include "omniview/worldgen/dataset.hpp"
#include "omniview/worldgen/qa.hpp"

namespace ov::harness {

// One evaluated run. Metrics keep insertion order so emitted files are
// byte-stable; every model score is stored next to its trivial baseline so
// downstream claims stay relative.
struct EvalReport {
    std::string run_id;
    std::uint64_t seed = 0;
    std::string config_fingerprint;
    std::vector<std::pair<std::string, double>> values;

    void set(const std::string& key, double v) {
        if (!std::isfinite(v)) throw ContractError("EvalReport: non-finite value for " + key);
        for (auto& kv : values)
            if (kv.first == key) throw ContractError("EvalReport: duplicate key " + key);
        values.emplace_back(key, v);
    }

    bool has(const std::string& key) const {
        for (const auto& kv : values)
            if (kv.first == key) return true;
        return false;
    }

    double get(const std::string& key) const {
        for (const auto& kv : values)
            if (kv.first == key) return kv.second;
        throw InvalidInputError("EvalReport: no metric " + key);
    }
};

inline std::string fingerprint_hex(const std::string& config_text) {
    std::ostringstream out;
    out << std::hex << std::setfill('0') << std::setw(16)
        << fnv1a(config_text.data(), config_text.size());
    return out.str();
}

// Fingerprint of the semantic configuration. The output directory and the
// seed are normalized away before hashing: reports carry the seed in its own
// column, so replicates of one experiment share a fingerprint no matter
// where their artifacts land.
inline std::string config_fingerprint_of(train::TrainConfig tc) {
    tc.out.clear();
    tc.seed = 0;
    return fingerprint_hex(train::serialize_config(tc));
}

namespace detail {

inline void append_number(std::ostream& out, double v) {
    std::ostringstream tmp;
    tmp.precision(17);
    tmp << v;
    out << tmp.str();
}

inline std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

// Pose error straight off the raw 9-vector head output. Unlike
// geo::pose_error it is total: a degenerate predicted quaternion scores the
// 180-degree worst case instead of throwing, so eval never dies on an
// untrained model.
inline geo::PoseError pose_error_raw(const std::array<double, 9>& pred, const geo::Camera& gt) {
    geo::PoseError e;
    double n2 = pred[0] * pred[0] + pred[1] * pred[1] + pred[2] * pred[2] + pred[3] * pred[3];
    if (!std::isfinite(n2) || n2 <= 0) {
        e.rotation_deg = 180.0;
    } else {
        double n = std::sqrt(n2);
        double dot = std::abs(pred[0] * gt.rotation.w + pred[1] * gt.rotation.x +
                              pred[2] * gt.rotation.y + pred[3] * gt.rotation.z) /
                     n;
        e.rotation_deg = 2.0 * std::acos(std::clamp(dot, 0.0, 1.0)) * 180.0 / 3.14159265358979323846;
    }
    double dx = pred[4] - gt.translation.x;
    double dy = pred[5] - gt.translation.y;
    double dz = pred[6] - gt.translation.z;
    e.translation = std::sqrt(dx * dx + dy * dy + dz * dz);
    e.focal = std::abs(pred[7] - gt.fx) + std::abs(pred[8] - gt.fy);
    return e;
}

}  // namespace detail

// Greedy-decoded answers scored by exact match, per category and overall.
// The baseline answers every question in a category with that category's
// most common ground-truth answer in this same eval set (ties break
// lexicographically), so a model must beat label priors to show anything.
template <typename T>
void qa_eval(const model::OmniModel<T>& m, const std::vector<world::MultiviewSample>& eval_set,
             EvalReport& r) {
    if (eval_set.empty()) throw InvalidInputError("qa_eval: empty eval set");
    EmTally model_tally;
    std::map<std::string, std::map<std::string, int>> answer_counts;  // category -> answer -> n
    std::vector<std::pair<std::string, std::string>> gt_pairs;        // (category, gt answer)

    for (const auto& s : eval_set) {
        for (const auto& qa : s.qas) {
            std::string cat = world::qa_category_name(static_cast<world::QaCategory>(qa.category));
            std::string gt = vocab().decode(qa.answer);
            std::string pred = model::answer_text(m, s, qa.question);
            model_tally.add(cat, model::exact_match(pred, gt));
            answer_counts[cat][model::normalize_answer(gt)] += 1;
            gt_pairs.emplace_back(cat, model::normalize_answer(gt));
        }
    }

    std::map<std::string, std::string> majority;
    for (const auto& [cat, counts] : answer_counts) {
        std::string best;
        int best_n = -1;
        for (const auto& [ans, n] : counts)
            if (n > best_n || (n == best_n && ans < best)) {
                best = ans;
                best_n = n;
            }
        majority[cat] = best;
    }
    EmTally base_tally;
    for (const auto& [cat, gt] : gt_pairs) base_tally.add(cat, majority[cat] == gt ? 1 : 0);

    r.set("qa_count", double(model_tally.count()));
    r.set("qa_em", model_tally.overall());
    r.set("baseline_majority_em", base_tally.overall());
    for (const auto& [cat, counts] : answer_counts) {
        (void)counts;
        r.set("qa_em_" + cat, model_tally.category_accuracy(cat));
        r.set("baseline_majority_em_" + cat, base_tally.category_accuracy(cat));
    }
}

// Novel-view synthesis plus depth/pose readout in one pass per scene: the
// depth head consumes the hidden states the view sampler already produced.
// Baselines: copy the last reference frame (RGB and depth) to every target,
// and report the first reference camera as every frame's pose.
template <typename T>
void generation_eval(const model::OmniModel<T>& m, const std::vector<world::MultiviewSample>& eval_set,
                     int n_refs, int steps, std::uint64_t seed, bool ar_mask, bool with_warp,
                     EvalReport& r) {
    if (eval_set.empty()) throw InvalidInputError("generation_eval: empty eval set");
    double psnr_sum = 0, ssim_sum = 0, base_psnr_sum = 0, base_ssim_sum = 0;
    double dep_sum = 0, base_dep_sum = 0;
    double rot_sum = 0, trans_sum = 0, focal_sum = 0;
    double base_rot_sum = 0, base_trans_sum = 0, base_focal_sum = 0;
    std::size_t n_targets = 0, n_frames = 0;

    for (std::size_t i = 0; i < eval_set.size(); ++i) {
        const auto& s = eval_set[i];
        auto views = model::sample_views(m, s, n_refs, steps, mix_seed(seed, i), ar_mask, with_warp);
        auto geo_out = model::sample_depth(m, views.tex_hidden, steps, mix_seed(seed, i));

        std::span<const float> ref_rgb(s.frame_rgb(n_refs - 1), s.pixels() * 3);
        std::span<const float> ref_dep(s.frame_depth(n_refs - 1), s.pixels());
        for (int f = n_refs; f < s.frames; ++f) {
            std::span<const float> gt(s.frame_rgb(f), s.pixels() * 3);
            const auto& pred = views.rgb[static_cast<std::size_t>(f - n_refs)];
            psnr_sum += psnr(pred, gt);
            ssim_sum += ssim(pred, gt, s.height, s.width, 3);
            base_psnr_sum += psnr(ref_rgb, gt);
            base_ssim_sum += ssim(ref_rgb, gt, s.height, s.width, 3);

            std::span<const float> gt_dep(s.frame_depth(f), s.pixels());
            dep_sum += depth_abs_rel(geo_out.depth[static_cast<std::size_t>(f)], gt_dep);
            base_dep_sum += depth_abs_rel(ref_dep, gt_dep);
            ++n_targets;
        }

        geo::Camera ref_cam = geo::camera_from_f32(s.cameras[0]);
        for (int f = 0; f < s.frames; ++f) {
            std::array<double, 9> pv;
            for (int k = 0; k < 9; ++k)
                pv[static_cast<std::size_t>(k)] = double(geo_out.pose(f, k));
            geo::Camera gt_cam = geo::camera_from_f32(s.cameras[static_cast<std::size_t>(f)]);
            geo::PoseError e = detail::pose_error_raw(pv, gt_cam);
            rot_sum += e.rotation_deg;
            trans_sum += e.translation;
            focal_sum += e.focal;
            geo::PoseError b = geo::pose_error(ref_cam, gt_cam);
            base_rot_sum += b.rotation_deg;
            base_trans_sum += b.translation;
            base_focal_sum += b.focal;
            ++n_frames;
        }
    }

    double nt = double(n_targets), nf = double(n_frames);
    r.set("nvs_psnr", psnr_sum / nt);
    r.set("baseline_copy_ref_psnr", base_psnr_sum / nt);
    r.set("nvs_ssim", ssim_sum / nt);
    r.set("baseline_copy_ref_ssim", base_ssim_sum / nt);
    r.set("depth_abs_rel", dep_sum / nt);
    r.set("baseline_copy_ref_depth_abs_rel", base_dep_sum / nt);
    r.set("pose_rot_deg", rot_sum / nf);
    r.set("baseline_copy_ref_pose_rot_deg", base_rot_sum / nf);
    r.set("pose_trans", trans_sum / nf);
    r.set("baseline_copy_ref_pose_trans", base_trans_sum / nf);
    r.set("pose_focal", focal_sum / nf);
    r.set("baseline_copy_ref_pose_focal", base_focal_sum / nf);
}

inline std::string report_to_json(const EvalReport& r) {
    std::ostringstream out;
    out << "{\"run_id\":\"" << detail::json_escape(r.run_id) << "\",\"seed\":" << r.seed
        << ",\"config_fingerprint\":\"" << detail::json_escape(r.config_fingerprint)
        << "\",\"metrics\":{";
    for (std::size_t i = 0; i < r.values.size(); ++i) {
        if (i) out << ",";
        out << "\"" << detail::json_escape(r.values[i].first) << "\":";
        detail::append_number(out, r.values[i].second);
    }
    out << "}}\n";
    return out.str();
}

// One line per metric: {"run_id":..., "seed":..., "metric":..., "value":...}
inline std::string report_metric_lines(const EvalReport& r) {
    std::ostringstream out;
    for (const auto& [key, v] : r.values) {
        out << "{\"run_id\":\"" << detail::json_escape(r.run_id) << "\",\"seed\":" << r.seed
            << ",\"metric\":\"" << detail::json_escape(key) << "\",\"value\":";
        detail::append_number(out, v);
        out << "}\n";
    }
    return out.str();
}

// Rebuilds the model a checkpoint was trained with: parse the embedded
// config, size the model from it, then load the weights.
template <typename T>
struct LoadedRun {
    train::TrainConfig tc;
    nn::CheckpointMeta meta;
    model::OmniModel<T> model;
};

template <typename T>
LoadedRun<T> load_run(const std::string& ckpt_path) {
    nn::CheckpointMeta meta = nn::peek_checkpoint_meta(ckpt_path);
    train::TrainConfig tc = train::parse_config(meta.config_text);
    LoadedRun<T> run{tc, meta, model::OmniModel<T>(tc.model_config(), mix_seed(tc.seed, 0x1417))};
    nn::load_checkpoint(ckpt_path, run.model.store);
    return run;
}

// Views plus the depth/pose readout for one scene. Warp conditioning follows
// the checkpoint's stage; depth always runs without understanding features
// (the generation-only regime).
template <typename T>
std::pair<model::ViewSampleResult<T>, model::DepthSampleResult<T>> model_views(
    const LoadedRun<T>& run, const world::MultiviewSample& s, int n_refs, int steps,
    std::uint64_t seed) {
    auto views = model::sample_views(run.model, s, n_refs, steps, seed, run.tc.ar_mask,
                                     run.tc.stage == 2);
    auto dep = model::sample_depth(run.model, views.tex_hidden, steps, seed);
    return {std::move(views), std::move(dep)};
}

}  // namespace ov::harness
