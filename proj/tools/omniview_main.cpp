// Command-line front end: data generation, training, evaluation, sampling,
// ablation sweeps, and report emission over one model family.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "omniview/harness/ablate.hpp"
#include "omniview/harness/eval.hpp"
#include "omniview/harness/png.hpp"
#include "omniview/harness/report.hpp"
#include "omniview/train/trainer.hpp"
#include "omniview/worldgen/dataset.hpp"

namespace fs = std::filesystem;
using Scalar = float;

namespace {

std::pair<int, int> parse_size(const std::string& s) {
    std::size_t x = s.find('x');
    if (x == std::string::npos || x == 0 || x + 1 >= s.size())
        throw ov::InvalidInputError("--size expects HxW, e.g. 32x32");
    int h = ov::train::detail::parse_int("size", s.substr(0, x));
    int w = ov::train::detail::parse_int("size", s.substr(x + 1));
    if (h < 1 || w < 1) throw ov::InvalidInputError("--size dimensions must be positive");
    return {h, w};
}

int cmd_gen_data(std::uint64_t seed, int samples, int frames, const std::string& size,
                 const std::string& out) {
    auto [h, w] = parse_size(size);
    std::vector<ov::world::MultiviewSample> set;
    set.reserve(std::size_t(samples));
    for (int i = 0; i < samples; ++i)
        set.push_back(ov::world::make_sample(seed + std::uint64_t(i), frames, h, w));
    ov::world::write_dataset(out, set);
    std::cout << "wrote " << set.size() << " scenes (" << frames << "x" << h << "x" << w << ") to "
              << out << "\n";
    return 0;
}

int cmd_train(const std::string& config_path, const std::string& init, int stage) {
    ov::train::TrainConfig tc = ov::train::load_config(config_path);
    if (tc.stage != stage)
        throw ov::InvalidInputError("config sets stage " + std::to_string(tc.stage) +
                                    ", expected stage " + std::to_string(stage));
    if (tc.data.empty()) throw ov::InvalidInputError("config must set data");
    auto train_set = ov::world::read_dataset(tc.data);
    std::cout << "training stage " << stage << ": " << train_set.size() << " scenes, " << tc.iters
              << " iters, out " << tc.out << "\n";
    ov::train::TrainResult res = ov::train::run_training<Scalar>(tc, train_set, init);
    std::cout << "checkpoint: " << res.checkpoint_path << "\nmetrics: " << res.metrics_path << "\n";
    return 0;
}

int cmd_eval(const std::string& task, const std::string& data, const std::string& ckpt,
             const std::string& report_path, int refs, int steps, int limit, std::uint64_t seed) {
    auto run = ov::harness::load_run<Scalar>(ckpt);
    auto eval_set = ov::world::read_dataset(data);
    if (limit > 0 && std::size_t(limit) < eval_set.size()) eval_set.resize(std::size_t(limit));

    ov::harness::EvalReport r;
    r.run_id = fs::path(ckpt).stem().string();
    r.seed = run.tc.seed;
    r.config_fingerprint = ov::harness::config_fingerprint_of(run.tc);
    if (task == "qa" || task == "all") ov::harness::qa_eval(run.model, eval_set, r);
    if (task == "gen" || task == "all") {
        int s = steps > 0 ? steps : run.tc.flow_steps;
        ov::harness::generation_eval(run.model, eval_set, refs, s, ov::mix_seed(seed, 0xe7a1),
                                     run.tc.ar_mask, run.tc.stage == 2, r);
    }
    if (task != "qa" && task != "gen" && task != "all")
        throw ov::InvalidInputError("--task must be qa, gen or all");

    ov::atomic_write_file(report_path, ov::harness::report_to_json(r));
    fs::path lines_path = fs::path(report_path).replace_extension(".jsonl");
    std::string lines = ov::harness::report_metric_lines(r);
    ov::atomic_write_file(lines_path, lines);
    std::cout << lines;
    std::cout << "report: " << report_path << "\n";
    return 0;
}

int cmd_sample(const std::string& ckpt, std::uint64_t scene_seed, int refs, int targets, int steps,
               const std::string& out) {
    auto run = ov::harness::load_run<Scalar>(ckpt);
    const auto& cfg = run.model.cfg;
    if (refs + targets != cfg.frames)
        throw ov::InvalidInputError("refs + targets must equal the model's frame count (" +
                                    std::to_string(cfg.frames) + ")");
    auto scene = ov::world::make_sample(scene_seed, cfg.frames, cfg.image_size, cfg.image_size);

    fs::create_directories(out);
    auto views = ov::harness::model_views(run, scene, refs, steps, scene_seed);
    for (int f = 0; f < cfg.frames; ++f) {
        char name[32];
        std::snprintf(name, sizeof name, "frame_%02d.png", f);
        std::span<const float> rgb =
            f < refs ? std::span<const float>(scene.frame_rgb(f), scene.pixels() * 3)
                     : std::span<const float>(views.first.rgb[std::size_t(f - refs)]);
        ov::harness::write_png_rgb8((fs::path(out) / name).string(), rgb, scene.height, scene.width);

        std::snprintf(name, sizeof name, "depth_%02d.png", f);
        const auto& dep = views.second.depth[std::size_t(f)];
        ov::harness::write_depth_png16((fs::path(out) / name).string(), dep, scene.height,
                                       scene.width);
        std::snprintf(name, sizeof name, "depth_%02d.f32", f);
        ov::harness::write_f32_sidecar((fs::path(out) / name).string(), dep);
    }

    // scene cameras, then the model's predicted poses, both F x 9 f32
    std::vector<float> cams;
    for (const auto& c : scene.cameras) cams.insert(cams.end(), c.begin(), c.end());
    ov::harness::write_f32_sidecar((fs::path(out) / "cameras.f32").string(), cams);
    std::vector<float> pred;
    for (int f = 0; f < cfg.frames; ++f)
        for (int k = 0; k < 9; ++k) pred.push_back(float(views.second.pose(f, k)));
    ov::harness::write_f32_sidecar((fs::path(out) / "cameras_pred.f32").string(), pred);

    std::cout << "sampled " << targets << " views into " << out << "\n";
    return 0;
}

int cmd_ablate(const std::string& matrix_path, const std::string& out, unsigned jobs) {
    std::string text = ov::read_file(matrix_path);
    auto mx = ov::harness::parse_matrix(text, fs::path(matrix_path).parent_path().string());
    std::cout << "ablation: " << mx.rows.size() << " rows x " << mx.seeds.size() << " seeds\n";
    auto result = ov::harness::run_ablation<Scalar>(mx, out, jobs);
    ov::harness::emit_ablation(result, out);
    for (const auto& f : result.failures) std::cerr << "cell failed: " << f.cell << ": " << f.error << "\n";
    std::cout << result.reports.size() << " cells ok, " << result.failures.size() << " failed; table in "
              << (fs::path(out) / "aggregate.csv").string() << "\n";
    return result.failures.empty() ? 0 : 1;
}

std::string sanitize(const std::string& s) {
    std::string out;
    for (char c : s) out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
    return out;
}

int cmd_report(const std::string& in_dir, const std::string& out_dir) {
    fs::create_directories(out_dir);
    std::vector<fs::path> metric_logs, cell_reports;
    for (const auto& e : fs::recursive_directory_iterator(in_dir)) {
        if (!e.is_regular_file()) continue;
        if (e.path().filename() == "metrics.jsonl" &&
            fs::exists(e.path().parent_path() / "config.txt"))
            metric_logs.push_back(e.path());
        if (e.path().filename() == "cell_report.json") cell_reports.push_back(e.path());
    }
    std::sort(metric_logs.begin(), metric_logs.end());
    std::sort(cell_reports.begin(), cell_reports.end());

    for (const auto& log : metric_logs) {
        auto tc = ov::train::parse_config(ov::read_file(log.parent_path() / "config.txt"));
        std::string text = ov::read_file(log);
        std::vector<ov::harness::LossSeries> series;
        for (const char* key : {tc.stage == 1 ? "l_s1" : "l_s2", "l_und", "l_tex", "l_geo"}) {
            auto s = ov::harness::read_loss_series(text, key);
            if (!s.points.empty()) series.push_back(std::move(s));
        }
        std::string rel = fs::relative(log.parent_path(), in_dir).string();
        if (rel == ".") rel = fs::path(in_dir).filename().string();
        fs::path svg = fs::path(out_dir) / ("loss_" + sanitize(rel) + ".svg");
        ov::atomic_write_file(svg, ov::harness::svg_loss_curves(series, tc.iters));
        std::cout << "loss curve: " << svg.string() << "\n";
    }

    std::vector<ov::harness::EvalReport> reports;
    for (const auto& p : cell_reports) {
        auto j = nlohmann::json::parse(ov::read_file(p));
        ov::harness::EvalReport r;
        r.run_id = j.at("run_id").get<std::string>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.config_fingerprint = j.at("config_fingerprint").get<std::string>();
        for (const auto& [key, v] : j.at("metrics").items()) r.set(key, v.get<double>());
        reports.push_back(std::move(r));
    }
    ov::harness::emit_report(reports, out_dir);
    std::cout << "report: " << (fs::path(out_dir) / "report.csv").string() << " (" << reports.size()
              << " runs)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"desk-scale unified 3D understanding and generation"};
    app.require_subcommand(1);

    std::uint64_t seed = 1, scene_seed = 1;
    int samples = 16, frames = 8, refs = 1, targets = 7, steps = 20, limit = 0;
    unsigned jobs = 1;
    std::string size = "32x32", out, config, init, data, ckpt, report_path = "report.json";
    std::string task = "qa", matrix, in_dir;

    auto* gen = app.add_subcommand("gen-data", "generate a multiview scene dataset");
    gen->add_option("--seed", seed, "base seed; scene i uses seed+i")->required();
    gen->add_option("--samples", samples, "number of scenes")->required()->check(CLI::PositiveNumber);
    gen->add_option("--frames", frames, "views per scene")->check(CLI::PositiveNumber);
    gen->add_option("--size", size, "image size as HxW");
    gen->add_option("--out", out, "output dataset path")->required();

    auto* t1 = app.add_subcommand("train-stage1", "joint understanding + generation training");
    t1->add_option("--config", config, "key = value config file")->required();

    auto* t2 = app.add_subcommand("train-stage2", "generation-only training from a stage-1 checkpoint");
    t2->add_option("--config", config, "key = value config file")->required();
    t2->add_option("--init", init, "stage-1 checkpoint")->required();

    auto* ev = app.add_subcommand("eval", "score a checkpoint on a dataset");
    ev->add_option("--task", task, "qa, gen or all");
    ev->add_option("--data", data, "eval dataset")->required();
    ev->add_option("--ckpt", ckpt, "checkpoint path")->required();
    ev->add_option("--report", report_path, "output JSON path");
    ev->add_option("--refs", refs, "reference frames for gen eval");
    ev->add_option("--steps", steps, "flow steps (0 = from config)")->default_val(0);
    ev->add_option("--limit", limit, "cap on eval scenes (0 = all)");
    ev->add_option("--seed", seed, "sampling seed for gen eval");

    auto* sm = app.add_subcommand("sample", "generate novel views of a procedural scene");
    sm->add_option("--ckpt", ckpt, "checkpoint path")->required();
    sm->add_option("--scene-seed", scene_seed, "scene to synthesize")->required();
    sm->add_option("--refs", refs, "clean reference frames")->default_val(1);
    sm->add_option("--targets", targets, "frames to generate")->default_val(7);
    sm->add_option("--steps", steps, "flow integration steps")->default_val(20);
    sm->add_option("--out", out, "output directory")->required();

    auto* ab = app.add_subcommand("ablate", "train + eval a matrix of config diffs");
    ab->add_option("--matrix", matrix, "matrix file")->required();
    ab->add_option("--out", out, "output directory")->required();
    ab->add_option("--jobs", jobs, "parallel cells")->check(CLI::PositiveNumber);

    auto* rp = app.add_subcommand("report", "aggregate run artifacts into tables and plots");
    rp->add_option("--in", in_dir, "directory holding run outputs")->required();
    rp->add_option("--out", out, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen_data(seed, samples, frames, size, out);
        if (t1->parsed()) return cmd_train(config, "", 1);
        if (t2->parsed()) return cmd_train(config, init, 2);
        if (ev->parsed()) return cmd_eval(task, data, ckpt, report_path, refs, steps, limit, seed);
        if (sm->parsed()) return cmd_sample(ckpt, scene_seed, refs, targets, steps, out);
        if (ab->parsed()) return cmd_ablate(matrix, out, jobs);
        if (rp->parsed()) return cmd_report(in_dir, out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
