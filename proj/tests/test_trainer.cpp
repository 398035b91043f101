#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "omniview/train/trainer.hpp"

using namespace ov;
using namespace ov::train;

namespace {

TrainConfig micro_tc() {
    TrainConfig tc;
    tc.stage = 1;
    tc.seed = 7;
    tc.iters = 4;
    tc.batch = 2;
    tc.frames = 3;
    tc.size = 4;
    tc.dim = 8;
    tc.heads = 2;
    tc.und_layers = 2;
    tc.tex_layers = 2;
    tc.geo_layers = 2;
    tc.patch = 2;
    tc.lr = 1e-3;
    return tc;
}

std::vector<world::MultiviewSample> micro_set(int count, std::uint64_t seed0, int frames = 3,
                                              int size = 4) {
    std::vector<world::MultiviewSample> out;
    for (int i = 0; i < count; ++i)
        out.push_back(world::make_sample(seed0 + static_cast<std::uint64_t>(i), frames, size, size));
    return out;
}

std::vector<const world::MultiviewSample*> ptrs(const std::vector<world::MultiviewSample>& v) {
    std::vector<const world::MultiviewSample*> out;
    for (const auto& s : v) out.push_back(&s);
    return out;
}

// bit-exact snapshot of one parameter group
template <typename T>
std::vector<nn::MatT<T>> group_snapshot(const nn::ParamStore<T>& store, nn::ParamGroup g) {
    std::vector<nn::MatT<T>> out;
    for (std::size_t i = 0; i < store.count(); ++i)
        if (store.at(static_cast<int>(i)).group == g) out.push_back(store.at(static_cast<int>(i)).value);
    return out;
}

template <typename T>
bool group_equals(const nn::ParamStore<T>& store, nn::ParamGroup g,
                  const std::vector<nn::MatT<T>>& snap) {
    std::size_t k = 0;
    for (std::size_t i = 0; i < store.count(); ++i) {
        if (store.at(static_cast<int>(i)).group != g) continue;
        const auto& v = store.at(static_cast<int>(i)).value;
        if (std::memcmp(v.data(), snap[k].data(), sizeof(T) * static_cast<std::size_t>(v.size())) != 0)
            return false;
        ++k;
    }
    return true;
}

double json_num(const std::string& line, const std::string& key) {
    std::size_t at = line.find("\"" + key + "\":");
    REQUIRE(at != std::string::npos);
    return std::strtod(line.c_str() + at + key.size() + 3, nullptr);
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) lines.push_back(line);
    return lines;
}

std::string slurp(const std::string& path) { return read_file(path); }

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name) {
        path = std::filesystem::temp_directory_path() / name;
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string str() const { return path.string(); }
};

}  // namespace

TEST_CASE("reference schedule walks equal phases from F-1 down to 1") {
    // 700 iterations over 8 frames: seven 100-iteration phases
    for (int iter = 0; iter < 700; ++iter) {
        int want = 7 - iter / 100;
        CHECK(d2s_refs(iter, 700, 8) == want);
    }
    CHECK(d2s_refs(0, 10, 2) == 1);
    CHECK(d2s_refs(9, 10, 2) == 1);
    // never leaves [1, F-1] even past the end
    CHECK(d2s_refs(100000, 700, 8) == 1);
    CHECK_THROWS_AS(d2s_refs(-1, 10, 8), InvalidInputError);
    CHECK_THROWS_AS(d2s_refs(0, 0, 8), InvalidInputError);
    CHECK_THROWS_AS(d2s_refs(0, 10, 1), InvalidInputError);

    CHECK(curriculum_at(0, 100, 8, false, true).n_ref == 7);
    CHECK(curriculum_at(0, 100, 8, false, false).n_ref == 1);
    CHECK(curriculum_at(0, 100, 8, true, false).n_ref == 7);
}

TEST_CASE("warmup ramps linearly and hits the peak at the warmup boundary") {
    double peak = 3e-4;
    // ceil(0.05 * 1000) = 50 warmup steps
    CHECK(nn::warmup_lr(peak, 0, 1000, 0.05) == 0.0);
    CHECK(std::abs(nn::warmup_lr(peak, 25, 1000, 0.05) - 0.5 * peak) < 1e-18);
    CHECK(std::abs(nn::warmup_lr(peak, 50, 1000, 0.05) - peak) < 1e-5 * peak);
    CHECK(nn::warmup_lr(peak, 999, 1000, 0.05) == peak);
    CHECK(nn::warmup_lr(peak, 0, 1000, 0.0) == peak);
}

TEST_CASE("config text: round trip, comments, and rejection of malformed input") {
    TrainConfig c;
    c.stage = 2;
    c.seed = 99;
    c.iters = 123;
    c.lambda_geo = 0.25;
    c.d2s = false;
    c.refs = "sparse";
    c.data = "some/path.omvw";
    TrainConfig back = parse_config(serialize_config(c));
    CHECK(serialize_config(back) == serialize_config(c));

    TrainConfig parsed = parse_config("stage = 1\n# comment\n  iters = 9   # trailing\n\nbatch=3\n");
    CHECK(parsed.stage == 1);
    CHECK(parsed.iters == 9);
    CHECK(parsed.batch == 3);

    CHECK_THROWS_AS(parse_config("bogus_key = 1\n"), InvalidInputError);
    CHECK_THROWS_AS(parse_config("d2s = yes\n"), InvalidInputError);
    CHECK_THROWS_AS(parse_config("iters = 12x\n"), InvalidInputError);
    CHECK_THROWS_AS(parse_config("stage 1\n"), InvalidInputError);
    CHECK_THROWS_AS(parse_config("stage = 3\n"), InvalidInputError);
    CHECK_THROWS_AS(parse_config("lr = -1\n"), InvalidInputError);
}

TEST_CASE("trainer rejects a model that does not match the run config") {
    TrainConfig tc = micro_tc();
    model::ModelConfig mc = tc.model_config();
    mc.frames = 4;
    model::OmniModel<float> m(mc, 1);
    CHECK_THROWS_AS(Trainer<float>(m, tc), ContractError);
}

TEST_CASE("reported stage-1 objective equals the weighted sum of reported losses") {
    TrainConfig tc = micro_tc();
    tc.lambda_und = 1.0;
    tc.lambda_tex = 1.0;
    tc.lambda_geo = 0.1;
    model::OmniModel<float> m(tc.model_config(), mix_seed(tc.seed, 0x1417));
    Trainer<float> trainer(m, tc);
    auto set = micro_set(3, 500);
    auto batch = ptrs(set);
    for (int iter = 0; iter < 3; ++iter) {
        StepStats st = trainer.step(batch, iter, 1e-4, 2);
        double want = tc.lambda_und * st.l_und + tc.lambda_tex * st.l_tex + tc.lambda_geo * st.l_geo;
        CHECK(std::abs(st.total - want) <= 1e-12 * std::max(1.0, std::abs(want)));
        CHECK(st.applied);
        CHECK(st.grad_norm > 0.0);
    }
}

TEST_CASE("zero loss weights leave the unweighted modules bit-identical when decay is off") {
    TrainConfig tc = micro_tc();
    tc.lambda_und = 1.0;
    tc.lambda_tex = 0.0;
    tc.lambda_geo = 0.0;
    tc.weight_decay = 0.0;
    model::OmniModel<float> m(tc.model_config(), 31);
    Trainer<float> trainer(m, tc);
    auto set = micro_set(2, 600);
    auto und0 = group_snapshot(m.store, nn::ParamGroup::kUnd);
    auto tex0 = group_snapshot(m.store, nn::ParamGroup::kTex);
    auto geo0 = group_snapshot(m.store, nn::ParamGroup::kGeo);
    trainer.step(ptrs(set), 0, 1e-3, 1);
    CHECK_FALSE(group_equals(m.store, nn::ParamGroup::kUnd, und0));
    CHECK(group_equals(m.store, nn::ParamGroup::kTex, tex0));
    CHECK(group_equals(m.store, nn::ParamGroup::kGeo, geo0));
}

TEST_CASE("geometry loss alone reaches understanding parameters through cross-attention") {
    TrainConfig tc = micro_tc();
    tc.lambda_und = 0.0;
    tc.lambda_tex = 0.0;
    tc.lambda_geo = 1.0;
    tc.weight_decay = 0.0;
    tc.cross_attn = true;
    model::OmniModel<float> m(tc.model_config(), 37);
    Trainer<float> trainer(m, tc);
    auto set = micro_set(2, 700);
    auto und0 = group_snapshot(m.store, nn::ParamGroup::kUnd);
    trainer.step(ptrs(set), 0, 1e-3, 1);
    CHECK_FALSE(group_equals(m.store, nn::ParamGroup::kUnd, und0));
}

TEST_CASE("stage 2 freezes the understanding module exactly and trains the rest") {
    TempDir dir("ov_stage2_freeze");
    TrainConfig tc1 = micro_tc();
    tc1.iters = 2;
    tc1.out = (std::filesystem::path(dir.str()) / "s1").string();
    auto set = micro_set(3, 800);
    TrainResult r1 = run_training<float>(tc1, set);

    TrainConfig tc2 = tc1;
    tc2.stage = 2;
    tc2.iters = 5;
    tc2.out = (std::filesystem::path(dir.str()) / "s2").string();

    model::OmniModel<float> probe(tc2.model_config(), 1);
    nn::load_checkpoint(r1.checkpoint_path, probe.store);
    auto und0 = group_snapshot(probe.store, nn::ParamGroup::kUnd);
    auto tex0 = group_snapshot(probe.store, nn::ParamGroup::kTex);

    TrainResult r2 = run_training<float>(tc2, set, r1.checkpoint_path);
    model::OmniModel<float> after(tc2.model_config(), 2);
    nn::load_checkpoint(r2.checkpoint_path, after.store);
    CHECK(group_equals(after.store, nn::ParamGroup::kUnd, und0));
    CHECK_FALSE(group_equals(after.store, nn::ParamGroup::kTex, tex0));
}

TEST_CASE("stage 2 requires an initial checkpoint") {
    TempDir dir("ov_stage2_noinit");
    TrainConfig tc = micro_tc();
    tc.stage = 2;
    tc.out = dir.str();
    auto set = micro_set(1, 900);
    CHECK_THROWS_AS(run_training<float>(tc, set), InvalidInputError);
}

TEST_CASE("training runs are deterministic given the seed") {
    TempDir dir("ov_determinism");
    auto set = micro_set(3, 1000);
    TrainConfig tc = micro_tc();
    tc.iters = 5;

    tc.out = (std::filesystem::path(dir.str()) / "a").string();
    TrainResult ra = run_training<float>(tc, set);
    std::string metrics_a = slurp(ra.metrics_path);

    tc.out = (std::filesystem::path(dir.str()) / "b").string();
    TrainResult rb = run_training<float>(tc, set);
    CHECK(metrics_a == slurp(rb.metrics_path));
    CHECK(!metrics_a.empty());

    // parameter bytes agree even though the embedded config text differs in `out`
    model::OmniModel<float> ma(tc.model_config(), 1), mb(tc.model_config(), 2);
    nn::load_checkpoint(ra.checkpoint_path, ma.store);
    nn::load_checkpoint(rb.checkpoint_path, mb.store);
    for (std::size_t i = 0; i < ma.store.count(); ++i) {
        const auto& va = ma.store.at(static_cast<int>(i)).value;
        const auto& vb = mb.store.at(static_cast<int>(i)).value;
        REQUIRE(va.size() == vb.size());
        CHECK(std::memcmp(va.data(), vb.data(), sizeof(float) * static_cast<std::size_t>(va.size())) == 0);
    }
}

TEST_CASE("metrics rows are ordered, complete, and reproduce the objective identity") {
    TempDir dir("ov_metrics");
    TrainConfig tc = micro_tc();
    tc.iters = 6;
    tc.lambda_geo = 0.1;
    tc.out = dir.str();
    auto set = micro_set(2, 1100);
    TrainResult r = run_training<float>(tc, set);
    auto lines = read_lines(r.metrics_path);
    REQUIRE(static_cast<int>(lines.size()) == tc.iters);
    int prev = -1;
    for (const auto& line : lines) {
        int iter = static_cast<int>(json_num(line, "iteration"));
        CHECK(iter == prev + 1);
        prev = iter;
        double lu = json_num(line, "l_und");
        double lt = json_num(line, "l_tex");
        double lg = json_num(line, "l_geo");
        double ls1 = json_num(line, "l_s1");
        double want = tc.lambda_und * lu + tc.lambda_tex * lt + tc.lambda_geo * lg;
        CHECK(std::abs(ls1 - want) <= 1e-12 * std::max(1.0, std::abs(want)));
        CHECK(json_num(line, "n_ref") >= 1);
        CHECK(line.find("\"applied\":true") != std::string::npos);
    }
    // stage-1 rows carry the QA loss key; the n_ref staircase starts dense
    CHECK(lines[0].find("\"l_und\"") != std::string::npos);
    CHECK(static_cast<int>(json_num(lines[0], "n_ref")) == 2);
    CHECK(static_cast<int>(json_num(lines.back(), "n_ref")) == 1);
}

TEST_CASE("stage 1 on 16 scenes cuts the objective by 30% within 300 steps") {
    TempDir dir("ov_smoke1");
    TrainConfig tc = micro_tc();
    tc.iters = 300;
    tc.batch = 2;
    tc.lr = 2e-3;
    tc.out = dir.str();
    auto set = micro_set(16, 1200);
    TrainResult r = run_training<float>(tc, set);
    auto lines = read_lines(r.metrics_path);
    REQUIRE(lines.size() == 300);
    double head = 0, tail = 0;
    for (int i = 0; i < 20; ++i) head += json_num(lines[static_cast<std::size_t>(i)], "l_s1");
    for (int i = 280; i < 300; ++i) tail += json_num(lines[static_cast<std::size_t>(i)], "l_s1");
    CHECK(tail <= 0.7 * head);
}

TEST_CASE("a short stage-2 run reduces the generation objective") {
    TempDir dir("ov_smoke2");
    TrainConfig tc1 = micro_tc();
    tc1.iters = 10;
    tc1.out = (std::filesystem::path(dir.str()) / "s1").string();
    auto set = micro_set(2, 1300);
    TrainResult r1 = run_training<float>(tc1, set);

    TrainConfig tc2 = tc1;
    tc2.stage = 2;
    tc2.iters = 80;
    tc2.lr = 2e-3;
    tc2.out = (std::filesystem::path(dir.str()) / "s2").string();
    TrainResult r2 = run_training<float>(tc2, set, r1.checkpoint_path);
    auto lines = read_lines(r2.metrics_path);
    REQUIRE(lines.size() == 80);
    CHECK(lines[0].find("\"l_und\"") == std::string::npos);  // no QA loss in stage 2
    CHECK(lines[0].find("\"l_s2\"") != std::string::npos);
    double head = 0, tail = 0;
    for (int i = 0; i < 10; ++i) head += json_num(lines[static_cast<std::size_t>(i)], "l_s2");
    for (int i = 70; i < 80; ++i) tail += json_num(lines[static_cast<std::size_t>(i)], "l_s2");
    CHECK(tail < head * 0.9);
    // stage 2 pins the curriculum to one reference
    for (const auto& line : lines) CHECK(static_cast<int>(json_num(line, "n_ref")) == 1);
}

TEST_CASE("overfitting one scene halves the texture flow loss within 300 steps") {
    TempDir dir("ov_tex_overfit");
    TrainConfig tc = micro_tc();
    tc.dim = 16;
    tc.iters = 300;
    tc.batch = 1;
    tc.lr = 4e-3;
    tc.lambda_und = 0.0;
    tc.lambda_geo = 0.0;
    tc.out = dir.str();
    auto set = micro_set(1, 1500);
    TrainResult r = run_training<float>(tc, set);
    auto lines = read_lines(r.metrics_path);
    REQUIRE(lines.size() == 300);
    double head = 0, tail = 0;
    for (int i = 0; i < 20; ++i) head += json_num(lines[static_cast<std::size_t>(i)], "l_tex");
    for (int i = 280; i < 300; ++i) tail += json_num(lines[static_cast<std::size_t>(i)], "l_tex");
    CHECK(tail <= 0.5 * head);
}

TEST_CASE("stage 2 on 16 scenes cuts the texture loss by 30% within 300 steps") {
    TempDir dir("ov_s2_16");
    TrainConfig tc1 = micro_tc();
    tc1.iters = 20;
    tc1.out = (std::filesystem::path(dir.str()) / "s1").string();
    auto set = micro_set(16, 1600);
    TrainResult r1 = run_training<float>(tc1, set);

    TrainConfig tc2 = tc1;
    tc2.stage = 2;
    tc2.iters = 300;
    tc2.lr = 2e-3;
    tc2.out = (std::filesystem::path(dir.str()) / "s2").string();
    TrainResult r2 = run_training<float>(tc2, set, r1.checkpoint_path);
    auto lines = read_lines(r2.metrics_path);
    double head = 0, tail = 0;
    for (int i = 0; i < 20; ++i) head += json_num(lines[static_cast<std::size_t>(i)], "l_tex");
    for (int i = 280; i < 300; ++i) tail += json_num(lines[static_cast<std::size_t>(i)], "l_tex");
    CHECK(tail <= 0.7 * head);
}

TEST_CASE("the QA head can memorize one scene") {
    TempDir dir("ov_overfit");
    TrainConfig tc = micro_tc();
    tc.dim = 16;
    tc.iters = 300;
    tc.batch = 1;
    tc.lr = 2e-3;
    tc.lambda_tex = 0.0;
    tc.lambda_geo = 0.0;
    tc.out = dir.str();
    auto set = micro_set(1, 1400);
    TrainResult r = run_training<float>(tc, set);

    model::OmniModel<float> m(tc.model_config(), 1);
    nn::load_checkpoint(r.checkpoint_path, m.store);
    int hits = 0;
    for (const auto& qa : set[0].qas) {
        std::string pred = model::answer_text(m, set[0], qa.question);
        std::vector<std::uint16_t> gt(qa.answer.begin(), qa.answer.end());
        hits += model::exact_match(pred, vocab().decode(gt));
    }
    CHECK(hits == static_cast<int>(set[0].qas.size()));
}
