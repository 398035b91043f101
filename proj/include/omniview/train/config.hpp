#pragma once

#include <cstdint>
#include <map>
#include <sstream>
#include <string>

#include "omniview/common.hpp"
#include "omniview/model/config.hpp"

namespace ov::train {

// Flat key = value run configuration. Every ablation axis is one key, so an
// ablation row is a config diff.
struct TrainConfig {
    int stage = 1;
    std::uint64_t seed = 1;
    int iters = 2000;
    int batch = 4;
    int frames = 8;
    int size = 32;
    double lambda_und = 1.0;
    double lambda_tex = 1.0;
    double lambda_geo = 0.1;
    double lr = 1e-5;
    double warmup_frac = 0.05;
    bool d2s = true;
    bool ar_mask = true;
    bool cross_attn = true;
    std::string refs = "dense";  // fixed regime when d2s is off: dense | sparse

    int dim = 64;
    int heads = 4;
    int und_layers = 4;
    int tex_layers = 4;
    int geo_layers = 4;
    int patch = 8;
    double weight_decay = 0.01;
    double clip_norm = 1.0;
    int flow_steps = 20;

    std::string data;  // training dataset (required by run_training)
    std::string out = "run_out";
    int ckpt_every = 0;  // 0 = final checkpoint only
    int log_every = 1;

    void validate() const {
        if (stage != 1 && stage != 2) throw InvalidInputError("config: stage must be 1 or 2");
        if (iters < 1) throw InvalidInputError("config: iters must be positive");
        if (batch < 1) throw InvalidInputError("config: batch must be positive");
        if (lambda_und < 0 || lambda_tex < 0 || lambda_geo < 0)
            throw InvalidInputError("config: loss weights must be nonnegative");
        if (lr <= 0) throw InvalidInputError("config: lr must be positive");
        if (warmup_frac < 0 || warmup_frac > 1)
            throw InvalidInputError("config: warmup_frac must be in [0,1]");
        if (refs != "dense" && refs != "sparse")
            throw InvalidInputError("config: refs must be dense or sparse");
        if (ckpt_every < 0 || log_every < 1) throw InvalidInputError("config: bad logging cadence");
        if (flow_steps < 1) throw InvalidInputError("config: flow_steps must be positive");
        model_config().validate();
    }

    model::ModelConfig model_config() const {
        model::ModelConfig mc;
        mc.dim = dim;
        mc.heads = heads;
        mc.und_layers = und_layers;
        mc.tex_layers = tex_layers;
        mc.geo_layers = geo_layers;
        mc.patch = patch;
        mc.image_size = size;
        mc.frames = frames;
        return mc;
    }
};

namespace detail {

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "on") return true;
    if (v == "off") return false;
    throw InvalidInputError("config: " + key + " must be on or off");
}

inline int parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        int out = std::stoi(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw InvalidInputError("config: " + key + " expects an integer, got '" + v + "'");
    }
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        std::uint64_t out = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw InvalidInputError("config: " + key + " expects an unsigned integer, got '" + v + "'");
    }
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        double out = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw InvalidInputError("config: " + key + " expects a number, got '" + v + "'");
    }
}

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace detail

// key = value lines; '#' starts a comment; unknown keys are errors.
inline TrainConfig parse_config(const std::string& text) {
    TrainConfig c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidInputError("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = detail::trim(line.substr(0, eq));
        std::string val = detail::trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw InvalidInputError("config line " + std::to_string(lineno) + ": empty key or value");

        if (key == "stage") c.stage = detail::parse_int(key, val);
        else if (key == "seed") c.seed = detail::parse_u64(key, val);
        else if (key == "iters") c.iters = detail::parse_int(key, val);
        else if (key == "batch") c.batch = detail::parse_int(key, val);
        else if (key == "frames") c.frames = detail::parse_int(key, val);
        else if (key == "size") c.size = detail::parse_int(key, val);
        else if (key == "lambda_und") c.lambda_und = detail::parse_double(key, val);
        else if (key == "lambda_tex") c.lambda_tex = detail::parse_double(key, val);
        else if (key == "lambda_geo") c.lambda_geo = detail::parse_double(key, val);
        else if (key == "lr") c.lr = detail::parse_double(key, val);
        else if (key == "warmup_frac") c.warmup_frac = detail::parse_double(key, val);
        else if (key == "d2s") c.d2s = detail::parse_bool(key, val);
        else if (key == "ar_mask") c.ar_mask = detail::parse_bool(key, val);
        else if (key == "cross_attn") c.cross_attn = detail::parse_bool(key, val);
        else if (key == "refs") c.refs = val;
        else if (key == "dim") c.dim = detail::parse_int(key, val);
        else if (key == "heads") c.heads = detail::parse_int(key, val);
        else if (key == "und_layers") c.und_layers = detail::parse_int(key, val);
        else if (key == "tex_layers") c.tex_layers = detail::parse_int(key, val);
        else if (key == "geo_layers") c.geo_layers = detail::parse_int(key, val);
        else if (key == "patch") c.patch = detail::parse_int(key, val);
        else if (key == "weight_decay") c.weight_decay = detail::parse_double(key, val);
        else if (key == "clip_norm") c.clip_norm = detail::parse_double(key, val);
        else if (key == "flow_steps") c.flow_steps = detail::parse_int(key, val);
        else if (key == "data") c.data = val;
        else if (key == "out") c.out = val;
        else if (key == "ckpt_every") c.ckpt_every = detail::parse_int(key, val);
        else if (key == "log_every") c.log_every = detail::parse_int(key, val);
        else throw InvalidInputError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    c.validate();
    return c;
}

inline TrainConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

// Canonical serialization; embedded in checkpoints and reports so a run's
// settings travel with its artifacts.
inline std::string serialize_config(const TrainConfig& c) {
    std::ostringstream out;
    auto onoff = [](bool b) { return b ? "on" : "off"; };
    out << "stage = " << c.stage << "\n";
    out << "seed = " << c.seed << "\n";
    out << "iters = " << c.iters << "\n";
    out << "batch = " << c.batch << "\n";
    out << "frames = " << c.frames << "\n";
    out << "size = " << c.size << "\n";
    out << "lambda_und = " << c.lambda_und << "\n";
    out << "lambda_tex = " << c.lambda_tex << "\n";
    out << "lambda_geo = " << c.lambda_geo << "\n";
    out << "lr = " << c.lr << "\n";
    out << "warmup_frac = " << c.warmup_frac << "\n";
    out << "d2s = " << onoff(c.d2s) << "\n";
    out << "ar_mask = " << onoff(c.ar_mask) << "\n";
    out << "cross_attn = " << onoff(c.cross_attn) << "\n";
    out << "refs = " << c.refs << "\n";
    out << "dim = " << c.dim << "\n";
    out << "heads = " << c.heads << "\n";
    out << "und_layers = " << c.und_layers << "\n";
    out << "tex_layers = " << c.tex_layers << "\n";
    out << "geo_layers = " << c.geo_layers << "\n";
    out << "patch = " << c.patch << "\n";
    out << "weight_decay = " << c.weight_decay << "\n";
    out << "clip_norm = " << c.clip_norm << "\n";
    out << "flow_steps = " << c.flow_steps << "\n";
    if (!c.data.empty()) out << "data = " << c.data << "\n";
    out << "out = " << c.out << "\n";
    out << "ckpt_every = " << c.ckpt_every << "\n";
    out << "log_every = " << c.log_every << "\n";
    return out.str();
}

}  // namespace ov::train
