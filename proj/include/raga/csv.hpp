#ifndef RAGA_CSV_HPP
#define RAGA_CSV_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "raga/server.hpp"

namespace raga {

// 12 significant digits, shortest form.
inline std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline constexpr const char* kMetricsHeader =
    "round,train_loss,test_loss,test_acc,z_norm,gap_to_opt,weiszfeld_iters,wall_ms";

// Fixed column order, absent fields written empty, '\n' line endings.
inline void emit_csv(const std::vector<RoundRecord>& records, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("emit_csv: cannot write " + path.string());
    out << kMetricsHeader << '\n';
    for (const auto& r : records) {
        out << r.t << ',' << format_value(r.train_loss) << ',';
        if (r.test_loss) out << format_value(*r.test_loss);
        out << ',';
        if (r.test_accuracy) out << format_value(*r.test_accuracy);
        out << ',' << format_value(r.z_norm) << ',';
        if (r.gap_to_opt) out << format_value(*r.gap_to_opt);
        out << ',';
        if (r.weiszfeld_iters) out << *r.weiszfeld_iters;
        out << ',';
        if (r.wall_ms) out << format_value(*r.wall_ms);
        out << '\n';
    }
    if (!out) throw std::runtime_error("emit_csv: write failed for " + path.string());
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

} // namespace detail

// Re-reads metrics files written by emit_csv. Missing values come back as nullopt.
struct MetricsRow {
    int round = 0;
    std::optional<double> train_loss, test_loss, test_acc, z_norm, gap_to_opt, wall_ms;
    std::optional<int> weiszfeld_iters;
};

inline std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_metrics_csv: cannot open " + path.string());
    std::string line;
    int lineno = 0;
    std::vector<MetricsRow> rows;
    const auto fail = [&](const std::string& why) {
        throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": " + why);
    };
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        ++lineno;
        if (lineno == 1) {
            if (line != kMetricsHeader) fail("unexpected metrics header");
            continue;
        }
        if (line.empty()) continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() != 8) fail("expected 8 fields, got " + std::to_string(f.size()));
        MetricsRow row;
        const auto opt_double = [&](const std::string& s) -> std::optional<double> {
            if (s.empty()) return std::nullopt;
            try {
                return std::stod(s);
            } catch (const std::exception&) {
                fail("malformed numeric field '" + s + "'");
                return std::nullopt;
            }
        };
        try {
            row.round = std::stoi(f[0]);
        } catch (const std::exception&) {
            fail("malformed round field '" + f[0] + "'");
        }
        row.train_loss = opt_double(f[1]);
        row.test_loss = opt_double(f[2]);
        row.test_acc = opt_double(f[3]);
        row.z_norm = opt_double(f[4]);
        row.gap_to_opt = opt_double(f[5]);
        if (!f[6].empty()) row.weiszfeld_iters = std::stoi(f[6]);
        row.wall_ms = opt_double(f[7]);
        rows.push_back(row);
    }
    return rows;
}

// Long-format table "series,round,value" for plotting, one series per input file.
// metric picks the column: test_acc (default), test_loss or train_loss.
inline void emit_plot_data(const std::vector<std::pair<std::string, std::filesystem::path>>& metrics_files,
                           const std::filesystem::path& out_path,
                           const std::string& metric = "test_acc") {
    if (metrics_files.empty()) throw std::invalid_argument("emit_plot_data: need at least one metrics file");
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("emit_plot_data: cannot write " + out_path.string());
    out << "series,round,value\n";
    for (const auto& [series, path] : metrics_files) {
        for (const auto& row : read_metrics_csv(path)) {
            std::optional<double> v;
            if (metric == "test_acc") v = row.test_acc;
            else if (metric == "test_loss") v = row.test_loss;
            else if (metric == "train_loss") v = row.train_loss;
            else if (metric == "z_norm") v = row.z_norm;
            else throw std::invalid_argument("emit_plot_data: unknown metric '" + metric + "'");
            if (!v) continue;
            out << series << ',' << row.round << ',' << format_value(*v) << '\n';
        }
    }
    if (!out) throw std::runtime_error("emit_plot_data: write failed for " + out_path.string());
}

} // namespace raga

#endif // RAGA_CSV_HPP
