// Machine-readable run artifacts: JSON reports with a stable schema and
// CSV tables with header rows.  Reports are deterministic for a fixed
// config and seed except for the wall_time_seconds field, which callers can
// erase before comparing runs byte for byte.
#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"

namespace gfbm {

inline constexpr const char* kToolName = "gfbm";
inline constexpr const char* kToolVersion = "1.0.0";

/// One verifier outcome: what was targeted, what came out, how much noise
/// and tolerance surrounded it, and whether it passed.
struct CheckResult {
    std::string name;
    double target = 0.0;
    double estimate = 0.0;
    double stderr_ = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string detail;
};

inline nlohmann::json to_json(const CheckResult& c) {
    return nlohmann::json{{"name", c.name},           {"target", c.target},
                          {"estimate", c.estimate},   {"stderr", c.stderr_},
                          {"tolerance", c.tolerance}, {"pass", c.pass},
                          {"detail", c.detail}};
}

inline nlohmann::json to_json(const ExperimentConfig& cfg) {
    nlohmann::json vertices = nlohmann::json::array();
    for (const auto& v : cfg.vertices) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index i = 0; i < v.size(); ++i)
            row.push_back(v(i / v.cols(), i % v.cols()));
        vertices.push_back(row);
    }
    nlohmann::json policies = nlohmann::json::array();
    for (const auto& p : cfg.policies)
        policies.push_back(p.description);
    return nlohmann::json{{"name", cfg.name},
                          {"h", cfg.h},
                          {"dim", cfg.dim},
                          {"grid_n", cfg.grid_n},
                          {"grid_t", cfg.grid_t},
                          {"vertices", vertices},
                          {"policies", policies},
                          {"replicates", cfg.replicates},
                          {"seed", cfg.seed},
                          {"jobs", cfg.jobs},
                          {"tolerance", cfg.tolerance},
                          {"out", cfg.out_dir}};
}

/// Report skeleton shared by every subcommand: tool identity, config echo,
/// per-check records, conjunction pass flag.  Wall time is added by the
/// writer so the rest of the document stays reproducible.
inline nlohmann::json
make_report(const std::string& subcommand, const ExperimentConfig& cfg,
            const std::vector<CheckResult>& checks,
            const std::vector<std::string>& outputs = {}) {
    nlohmann::json jc = nlohmann::json::array();
    bool all = true;
    for (const auto& c : checks) {
        jc.push_back(to_json(c));
        all = all && c.pass;
    }
    return nlohmann::json{{"tool", {{"name", kToolName}, {"version", kToolVersion}}},
                          {"subcommand", subcommand},
                          {"experiment", cfg.name},
                          {"config", to_json(cfg)},
                          {"checks", jc},
                          {"pass", all},
                          {"outputs", outputs}};
}

inline void write_report(const std::string& path, nlohmann::json report,
                         double wall_time_seconds) {
    report["wall_time_seconds"] = wall_time_seconds;
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("write_report: cannot open '" + path + "'");
    os << report.dump(2) << "\n";
}

/// CSV table with a header row; every cell printed with full precision.
inline void write_csv_table(std::ostream& os, const std::vector<std::string>& header,
                            const std::vector<std::vector<double>>& rows) {
    for (std::size_t i = 0; i < header.size(); ++i)
        os << (i ? "," : "") << header[i];
    os << "\n";
    char buf[40];
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw std::invalid_argument("write_csv_table: ragged row");
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", row[i]);
            os << (i ? "," : "") << buf;
        }
        os << "\n";
    }
}

inline void write_csv_file(const std::string& path,
                           const std::vector<std::string>& header,
                           const std::vector<std::vector<double>>& rows) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("write_csv_file: cannot open '" + path + "'");
    write_csv_table(os, header, rows);
}

} // namespace gfbm
