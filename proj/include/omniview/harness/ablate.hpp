#pragma once

#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "omniview/harness/report.hpp"
#include "omniview/train/trainer.hpp"

namespace ov::harness {

// One ablation row: a name plus config lines appended after the base text,
// so later assignments win and any switch the config knows is ablatable.
struct AblationRow {
    std::string name;
    std::string diff_text;
};

struct AblationMatrix {
    std::string base_text;
    std::string eval_data;
    std::string init;       // starting checkpoint for stage-2 rows
    std::string eval_mode = "both";  // qa | gen | both
    int eval_refs = 1;
    int eval_steps = 0;  // 0 = the cell's flow_steps
    int eval_limit = 0;  // 0 = whole eval set
    std::vector<std::uint64_t> seeds{1, 2, 3};
    std::vector<AblationRow> rows;
};

namespace detail {

inline std::string resolve_path(const std::string& p, const std::string& base_dir) {
    if (p.empty() || base_dir.empty()) return p;
    std::filesystem::path fp(p);
    if (fp.is_absolute()) return p;
    return (std::filesystem::path(base_dir) / fp).string();
}

inline bool valid_row_name(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
    return true;
}

}  // namespace detail

// Matrix file: top-level `key = value` lines (base, eval_data, seeds, init,
// eval_mode, eval_refs, eval_steps, eval_limit), then one [name] section per
// row whose body is config-diff lines. '#' comments throughout. Relative
// paths resolve against base_dir (the matrix file's directory).
inline AblationMatrix parse_matrix(const std::string& text, const std::string& base_dir = "") {
    AblationMatrix mx;
    mx.seeds.clear();
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    AblationRow* current = nullptr;
    std::string base_path;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = train::detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw InvalidInputError("matrix line " + std::to_string(lineno) + ": unclosed [row]");
            std::string name = train::detail::trim(line.substr(1, line.size() - 2));
            if (!detail::valid_row_name(name))
                throw InvalidInputError("matrix line " + std::to_string(lineno) +
                                        ": row names use letters, digits, _ or -");
            for (const auto& r : mx.rows)
                if (r.name == name)
                    throw InvalidInputError("matrix: duplicate row '" + name + "'");
            mx.rows.push_back({name, ""});
            current = &mx.rows.back();
            continue;
        }
        if (current) {
            current->diff_text += line + "\n";
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidInputError("matrix line " + std::to_string(lineno) + ": expected key = value");
        std::string key = train::detail::trim(line.substr(0, eq));
        std::string val = train::detail::trim(line.substr(eq + 1));
        if (key == "base") base_path = detail::resolve_path(val, base_dir);
        else if (key == "eval_data") mx.eval_data = detail::resolve_path(val, base_dir);
        else if (key == "init") mx.init = detail::resolve_path(val, base_dir);
        else if (key == "eval_mode") mx.eval_mode = val;
        else if (key == "eval_refs") mx.eval_refs = train::detail::parse_int(key, val);
        else if (key == "eval_steps") mx.eval_steps = train::detail::parse_int(key, val);
        else if (key == "eval_limit") mx.eval_limit = train::detail::parse_int(key, val);
        else if (key == "seeds") {
            std::istringstream sv(val);
            std::string tok;
            while (sv >> tok) mx.seeds.push_back(train::detail::parse_u64("seeds", tok));
        } else
            throw InvalidInputError("matrix line " + std::to_string(lineno) + ": unknown key '" + key +
                                    "'");
    }
    if (base_path.empty()) throw InvalidInputError("matrix: missing base config path");
    mx.base_text = read_file(base_path);
    if (mx.eval_data.empty()) throw InvalidInputError("matrix: missing eval_data");
    if (mx.seeds.empty()) throw InvalidInputError("matrix: missing seeds");
    if (mx.rows.empty()) throw InvalidInputError("matrix: no rows");
    if (mx.eval_mode != "qa" && mx.eval_mode != "gen" && mx.eval_mode != "both")
        throw InvalidInputError("matrix: eval_mode must be qa, gen or both");
    return mx;
}

struct CellFailure {
    std::string cell;  // row/seedN
    std::string error;
};

struct AblationResult {
    std::vector<EvalReport> reports;  // successful cells in row-major (row, seed) order
    std::vector<CellFailure> failures;
};

// Trains and evaluates one cell; everything it touches lives under cell_dir.
template <typename T>
EvalReport run_cell(const train::TrainConfig& tc, const AblationMatrix& mx,
                    const std::vector<world::MultiviewSample>& train_set,
                    const std::vector<world::MultiviewSample>& eval_set, const std::string& run_id) {
    train::TrainResult tr = train::run_training<T>(tc, train_set, mx.init);
    LoadedRun<T> run = load_run<T>(tr.checkpoint_path);

    EvalReport r;
    r.run_id = run_id;
    r.seed = tc.seed;
    r.config_fingerprint = config_fingerprint_of(tc);
    if (mx.eval_mode == "qa" || mx.eval_mode == "both") qa_eval(run.model, eval_set, r);
    if (mx.eval_mode == "gen" || mx.eval_mode == "both") {
        int steps = mx.eval_steps > 0 ? mx.eval_steps : tc.flow_steps;
        generation_eval(run.model, eval_set, mx.eval_refs, steps, mix_seed(tc.seed, 0xe7a1),
                        tc.ar_mask, tc.stage == 2, r);
    }
    atomic_write_file(std::filesystem::path(tc.out) / "cell_report.json", report_to_json(r));
    return r;
}

// Every (row, seed) cell trains and evaluates independently under
// out_dir/row/seedN. A failing cell is recorded and skipped, the rest run.
// max_parallel > 1 spreads cells over that many threads; results keep
// row-major order regardless.
template <typename T>
AblationResult run_ablation(const AblationMatrix& mx, const std::string& out_dir,
                            unsigned max_parallel = 1) {
    namespace fs = std::filesystem;
    std::vector<world::MultiviewSample> eval_set = world::read_dataset(mx.eval_data);
    if (mx.eval_limit > 0 && std::size_t(mx.eval_limit) < eval_set.size())
        eval_set.resize(std::size_t(mx.eval_limit));

    // A cell whose diff does not even parse is a failed cell, not a failed
    // sweep, so configs resolve inside per-cell error scopes too.
    std::map<std::string, std::vector<world::MultiviewSample>> train_sets;
    struct Cell {
        train::TrainConfig tc;
        std::string run_id;
        std::string cell_id;
        std::string error;  // non-empty = already failed
    };
    std::vector<Cell> cells;
    for (const auto& row : mx.rows) {
        for (std::uint64_t seed : mx.seeds) {
            Cell cell;
            cell.run_id = row.name;
            cell.cell_id = row.name + "/seed" + std::to_string(seed);
            try {
                std::ostringstream cfg;
                cfg << mx.base_text << "\n"
                    << row.diff_text << "\nseed = " << seed << "\nout = "
                    << (fs::path(out_dir) / row.name / ("seed" + std::to_string(seed))).string()
                    << "\n";
                cell.tc = train::parse_config(cfg.str());
                if (cell.tc.data.empty())
                    throw InvalidInputError("matrix: base config must set data");
                train_sets.emplace(cell.tc.data, std::vector<world::MultiviewSample>{});
            } catch (const std::exception& e) {
                cell.error = e.what();
            }
            cells.push_back(std::move(cell));
        }
    }
    for (auto& [path, set] : train_sets) set = world::read_dataset(path);

    std::vector<EvalReport> ok(cells.size());
    std::vector<std::string> err(cells.size());
    parallel_for(
        cells.size(),
        [&](std::size_t i) {
            if (!cells[i].error.empty()) {
                err[i] = cells[i].error;
                return;
            }
            try {
                ok[i] = run_cell<T>(cells[i].tc, mx, train_sets.at(cells[i].tc.data), eval_set,
                                    cells[i].run_id);
            } catch (const std::exception& e) {
                err[i] = e.what();
                if (err[i].empty()) err[i] = "unknown error";
            }
        },
        max_parallel);

    AblationResult result;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (err[i].empty()) result.reports.push_back(std::move(ok[i]));
        else result.failures.push_back({cells[i].cell_id, err[i]});
    }
    return result;
}

struct AggregateEntry {
    std::string row;
    std::string metric;
    double mean = 0;
    double stddev = 0;  // sample stddev; 0 when n = 1
    int n = 0;
};

// Mean and stddev per (row, metric) over seeds, rows in report order.
inline std::vector<AggregateEntry> aggregate(const std::vector<EvalReport>& reports) {
    std::vector<AggregateEntry> out;
    std::vector<std::string> row_order;
    for (const auto& r : reports)
        if (std::find(row_order.begin(), row_order.end(), r.run_id) == row_order.end())
            row_order.push_back(r.run_id);
    for (const auto& row : row_order) {
        std::vector<const EvalReport*> in_row;
        for (const auto& r : reports)
            if (r.run_id == row) in_row.push_back(&r);
        for (const auto& [key, v0] : in_row.front()->values) {
            (void)v0;
            std::vector<double> vals;
            for (const auto* r : in_row)
                if (r->has(key)) vals.push_back(r->get(key));
            double mean = 0;
            for (double v : vals) mean += v;
            mean /= double(vals.size());
            double var = 0;
            for (double v : vals) var += (v - mean) * (v - mean);
            double stddev = vals.size() > 1 ? std::sqrt(var / double(vals.size() - 1)) : 0.0;
            out.push_back({row, key, mean, stddev, int(vals.size())});
        }
    }
    return out;
}

inline std::string aggregate_to_csv(const std::vector<AggregateEntry>& rows) {
    std::ostringstream out;
    out << "row,metric,mean,stddev,n\n";
    for (const auto& a : rows) {
        detail::check_csv_field(a.row);
        detail::check_csv_field(a.metric);
        out << a.row << "," << a.metric << ",";
        detail::append_number(out, a.mean);
        out << ",";
        detail::append_number(out, a.stddev);
        out << "," << a.n << "\n";
    }
    return out.str();
}

inline std::string aggregate_to_json(const std::vector<AggregateEntry>& rows) {
    std::ostringstream out;
    out << "[";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& a = rows[i];
        out << (i ? ",\n" : "\n");
        out << "{\"row\":\"" << detail::json_escape(a.row) << "\",\"metric\":\""
            << detail::json_escape(a.metric) << "\",\"mean\":";
        detail::append_number(out, a.mean);
        out << ",\"stddev\":";
        detail::append_number(out, a.stddev);
        out << ",\"n\":" << a.n << "}";
    }
    out << "\n]\n";
    return out.str();
}

// Per-cell reports (emit_report) plus the over-seeds aggregate and the
// failure list.
inline void emit_ablation(const AblationResult& result, const std::string& out_dir) {
    namespace fs = std::filesystem;
    emit_report(result.reports, out_dir);
    auto agg = aggregate(result.reports);
    atomic_write_file(fs::path(out_dir) / "aggregate.csv", aggregate_to_csv(agg));
    atomic_write_file(fs::path(out_dir) / "aggregate.json", aggregate_to_json(agg));
    std::string failures;
    for (const auto& f : result.failures) failures += f.cell + ": " + f.error + "\n";
    atomic_write_file(fs::path(out_dir) / "failures.txt", failures);
}

}  // namespace ov::harness
