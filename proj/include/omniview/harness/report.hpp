#pragma once

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "omniview/harness/eval.hpp"

namespace ov::harness {

namespace detail {

// CSV fields stay unquoted, so the characters that would need quoting are
// rejected at the source instead.
inline void check_csv_field(const std::string& s) {
    for (char c : s)
        if (c == ',' || c == '"' || c == '\n' || c == '\r')
            throw ContractError("csv field contains a delimiter: " + s);
}

inline double parse_number(const std::string& s) {
    const char* p = s.c_str();
    char* end = nullptr;
    double v = std::strtod(p, &end);
    if (end == p || *end != '\0') throw FormatError("csv: bad number '" + s + "'", 0);
    return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

}  // namespace detail

inline constexpr const char* kReportCsvHeader = "run_id,seed,config_fingerprint,metric,value";

// Long form, one row per metric; doubles printed at precision 17 so the
// parse below reproduces the table bit-for-bit.
inline std::string reports_to_csv(const std::vector<EvalReport>& reports) {
    std::ostringstream out;
    out << kReportCsvHeader << "\n";
    for (const auto& r : reports) {
        detail::check_csv_field(r.run_id);
        detail::check_csv_field(r.config_fingerprint);
        for (const auto& [key, v] : r.values) {
            detail::check_csv_field(key);
            out << r.run_id << "," << r.seed << "," << r.config_fingerprint << "," << key << ",";
            detail::append_number(out, v);
            out << "\n";
        }
    }
    return out.str();
}

// Consecutive rows sharing (run_id, seed, fingerprint) fold back into one
// report, preserving metric order.
inline std::vector<EvalReport> reports_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kReportCsvHeader)
        throw FormatError("csv: missing or wrong header", 0);
    std::vector<EvalReport> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = detail::split_csv_line(line);
        if (f.size() != 5) throw FormatError("csv: expected 5 fields, got " + line, 0);
        std::uint64_t seed = std::strtoull(f[1].c_str(), nullptr, 10);
        if (out.empty() || out.back().run_id != f[0] || out.back().seed != seed ||
            out.back().config_fingerprint != f[2]) {
            EvalReport r;
            r.run_id = f[0];
            r.seed = seed;
            r.config_fingerprint = f[2];
            out.push_back(std::move(r));
        }
        out.back().set(f[3], detail::parse_number(f[4]));
    }
    return out;
}

// ---- training-log plotting ----

struct LossPoint {
    int iteration = 0;
    double value = 0;
};

struct LossSeries {
    std::string label;
    std::vector<LossPoint> points;
};

// Pulls one numeric key out of a training metrics.jsonl text. Lines missing
// the key are skipped (stage 2 logs have no l_und).
inline LossSeries read_loss_series(const std::string& jsonl_text, const std::string& key) {
    LossSeries s;
    s.label = key;
    std::istringstream in(jsonl_text);
    std::string line;
    auto num_at = [](const std::string& l, const std::string& k, double* v) {
        std::string needle = "\"" + k + "\":";
        std::size_t pos = l.find(needle);
        if (pos == std::string::npos) return false;
        *v = std::strtod(l.c_str() + pos + needle.size(), nullptr);
        return true;
    };
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double iter = 0, value = 0;
        if (!num_at(line, "iteration", &iter)) continue;
        if (!num_at(line, key, &value)) continue;
        s.points.push_back({int(iter), value});
    }
    return s;
}

namespace detail {

inline const char* series_color(std::size_t i) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    return palette[i % 6];
}

inline std::string fmt(double v, int precision = 4) {
    std::ostringstream out;
    out.precision(precision);
    out << v;
    return out.str();
}

}  // namespace detail

// Plain SVG line chart; all geometry derives from the inputs, so identical
// inputs give identical bytes. The x axis always spans [0, total_iters].
inline std::string svg_loss_curves(const std::vector<LossSeries>& series, int total_iters) {
    if (total_iters < 1) throw InvalidInputError("svg_loss_curves: total_iters must be positive");
    const double W = 640, H = 400, L = 60, R = 20, T = 24, B = 40;
    const double pw = W - L - R, ph = H - T - B;

    double lo = 0, hi = 1;
    bool any = false;
    for (const auto& s : series)
        for (const auto& p : s.points) {
            if (!any) {
                lo = hi = p.value;
                any = true;
            }
            lo = std::min(lo, p.value);
            hi = std::max(hi, p.value);
        }
    if (!any) {
        lo = 0;
        hi = 1;
    }
    if (hi - lo < 1e-12) hi = lo + 1;
    double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;

    auto xs = [&](double iter) { return L + pw * iter / double(total_iters); };
    auto ys = [&](double v) { return T + ph * (1.0 - (v - lo) / (hi - lo)); };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    out << "<line x1=\"" << L << "\" y1=\"" << T + ph << "\" x2=\"" << L + pw << "\" y2=\"" << T + ph
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << T + ph
        << "\" stroke=\"black\"/>\n";

    for (int k = 0; k <= 4; ++k) {
        double iter = total_iters * k / 4.0;
        double x = xs(iter);
        out << "<line x1=\"" << x << "\" y1=\"" << T + ph << "\" x2=\"" << x << "\" y2=\"" << T + ph + 4
            << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << x << "\" y=\"" << T + ph + 18
            << "\" font-size=\"11\" text-anchor=\"middle\">" << detail::fmt(iter, 10) << "</text>\n";
        double v = lo + (hi - lo) * k / 4.0;
        double y = ys(v);
        out << "<line x1=\"" << L - 4 << "\" y1=\"" << y << "\" x2=\"" << L << "\" y2=\"" << y
            << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << L - 8 << "\" y=\"" << y + 4
            << "\" font-size=\"11\" text-anchor=\"end\">" << detail::fmt(v, 3) << "</text>\n";
    }

    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        if (s.points.empty()) continue;
        out << "<polyline fill=\"none\" stroke=\"" << detail::series_color(i)
            << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& p : s.points) out << detail::fmt(xs(p.iteration), 8) << "," << detail::fmt(ys(p.value), 8) << " ";
        out << "\"/>\n";
        out << "<text x=\"" << L + pw - 4 << "\" y=\"" << T + 14 + 14 * double(i)
            << "\" font-size=\"12\" text-anchor=\"end\" fill=\"" << detail::series_color(i) << "\">"
            << s.label << "</text>\n";
    }
    out << "<text x=\"" << L + pw / 2 << "\" y=\"" << H - 6
        << "\" font-size=\"12\" text-anchor=\"middle\">iteration</text>\n";
    out << "</svg>\n";
    return out.str();
}

// Grouped bars, one group per metric and one bar per report within it; bars
// normalize against the group's largest magnitude so unlike scales coexist,
// with the true value printed above each bar.
inline std::string svg_metric_bars(const std::vector<EvalReport>& reports,
                                   const std::vector<std::string>& keys) {
    const double bar_w = 26, gap = 10, group_gap = 34, H = 360, T = 30, B = 96, L = 20;
    const double ph = H - T - B;
    std::size_t runs = reports.size();
    double group_w = runs > 0 ? double(runs) * (bar_w + gap) : bar_w;
    double W = L + 20 + double(keys.size()) * (group_w + group_gap);
    if (W < 320) W = 320;

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    out << "<line x1=\"" << L << "\" y1=\"" << T + ph << "\" x2=\"" << W - 10 << "\" y2=\"" << T + ph
        << "\" stroke=\"black\"/>\n";

    for (std::size_t k = 0; k < keys.size(); ++k) {
        double gx = L + 10 + double(k) * (group_w + group_gap);
        double top = 0;
        for (const auto& r : reports)
            if (r.has(keys[k])) top = std::max(top, std::abs(r.get(keys[k])));
        if (top <= 0) top = 1;
        for (std::size_t i = 0; i < runs; ++i) {
            if (!reports[i].has(keys[k])) continue;
            double v = reports[i].get(keys[k]);
            double h = ph * std::abs(v) / top;
            double x = gx + double(i) * (bar_w + gap);
            out << "<rect x=\"" << x << "\" y=\"" << detail::fmt(T + ph - h, 8) << "\" width=\"" << bar_w
                << "\" height=\"" << detail::fmt(h, 8) << "\" fill=\"" << detail::series_color(i)
                << "\"/>\n";
            out << "<text x=\"" << x + bar_w / 2 << "\" y=\"" << detail::fmt(T + ph - h - 4, 8)
                << "\" font-size=\"9\" text-anchor=\"middle\">" << detail::fmt(v, 3) << "</text>\n";
        }
        out << "<text x=\"" << gx + group_w / 2 << "\" y=\"" << T + ph + 12
            << "\" font-size=\"10\" text-anchor=\"middle\" transform=\"rotate(30 "
            << detail::fmt(gx + group_w / 2, 8) << " " << T + ph + 12 << ")\">" << keys[k]
            << "</text>\n";
    }
    for (std::size_t i = 0; i < runs; ++i) {
        out << "<rect x=\"" << L + double(i) * 150 << "\" y=\"6\" width=\"10\" height=\"10\" fill=\""
            << detail::series_color(i) << "\"/>\n";
        out << "<text x=\"" << L + double(i) * 150 + 14
            << "\" y=\"15\" font-size=\"11\">" << reports[i].run_id << " s" << reports[i].seed
            << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

// Union of metric keys in first-seen order.
inline std::vector<std::string> collect_keys(const std::vector<EvalReport>& reports) {
    std::vector<std::string> keys;
    for (const auto& r : reports)
        for (const auto& [key, v] : r.values) {
            (void)v;
            if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
        }
    return keys;
}

// report.csv + metrics.jsonl + report.json + metric_bars.svg, all derived
// purely from `reports` so reruns are byte-identical.
inline void emit_report(const std::vector<EvalReport>& reports, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    atomic_write_file(fs::path(out_dir) / "report.csv", reports_to_csv(reports));

    std::string jsonl;
    for (const auto& r : reports) jsonl += report_metric_lines(r);
    atomic_write_file(fs::path(out_dir) / "metrics.jsonl", jsonl);

    std::string json = "[";
    for (std::size_t i = 0; i < reports.size(); ++i) {
        std::string one = report_to_json(reports[i]);
        one.pop_back();  // trailing newline
        json += (i ? ",\n" : "\n") + one;
    }
    json += "\n]\n";
    atomic_write_file(fs::path(out_dir) / "report.json", json);

    atomic_write_file(fs::path(out_dir) / "metric_bars.svg",
                      svg_metric_bars(reports, collect_keys(reports)));
}

}  // namespace ov::harness
