// Human-readable experiment configuration: a `key = value` file with `#`
// comments, repeated `vertex` and `policy` keys, and field-level validation
// that names the offending key (and line) in every error.
//
//     name       = demo            # experiment label
//     h          = 0.75            # Hurst index in (0,1)
//     dim        = 2               # driving dimension d
//     grid_n     = 512             # number of cells
//     grid_t     = 1.0             # horizon T
//     vertex     = 1.0 0.3 0.3 1.0 # dim*dim entries, row-major; repeatable
//     vertex     = 0.25 0 0 0.25
//     policy     = const:0         # const:<i> | switch:<seed> |
//     policy     = antithetic:const:1        #   antithetic:<base policy>
//     replicates = 2000
//     seed       = 42
//     jobs       = 1
//     tolerance  = 0.02            # relative reporting tolerance
//     out        = reports         # output directory
#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "core.hpp"
#include "priors.hpp"

namespace gfbm {

struct ExperimentConfig {
    std::string name = "experiment";
    double h = 0.75;
    std::size_t dim = 1;
    std::vector<Eigen::MatrixXd> vertices;
    std::size_t grid_n = 256;
    double grid_t = 1.0;
    std::vector<ScenarioPolicy> policies;
    std::size_t replicates = 1000;
    std::uint64_t seed = 1;
    unsigned jobs = 1;
    double tolerance = 0.02;
    std::string out_dir = ".";

    /// Validated uncertainty set (throws naming the offending vertex).
    UncertaintySet theta() const { return UncertaintySet(dim, vertices); }

    TimeGrid grid() const { return TimeGrid::uniform(grid_n, grid_t); }
};

namespace detail {

inline std::string config_trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return s.substr(b, e - b);
}

[[noreturn]] inline void config_fail(std::size_t line, const std::string& what) {
    throw std::invalid_argument("config line " + std::to_string(line) + ": " + what);
}

inline double config_real(const std::string& v, std::size_t line, const char* key) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size())
            throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        config_fail(line, std::string("field '") + key + "' is not a number: '" + v + "'");
    }
}

inline std::uint64_t config_unsigned(const std::string& v, std::size_t line,
                                     const char* key) {
    try {
        if (!v.empty() && v[0] == '-')
            throw std::invalid_argument("negative");
        std::size_t used = 0;
        const unsigned long long x = std::stoull(v, &used);
        if (used != v.size())
            throw std::invalid_argument("trailing characters");
        return static_cast<std::uint64_t>(x);
    } catch (const std::exception&) {
        config_fail(line, std::string("field '") + key +
                              "' is not a nonnegative integer: '" + v + "'");
    }
}

inline ScenarioPolicy config_policy(const std::string& v, std::size_t line) {
    const std::string t = config_trim(v);
    if (t.rfind("const:", 0) == 0)
        return ScenarioPolicy::constant(
            static_cast<std::size_t>(config_unsigned(t.substr(6), line, "policy")));
    if (t.rfind("switch:", 0) == 0)
        return ScenarioPolicy::piecewise_switch(config_unsigned(t.substr(7), line, "policy"));
    if (t.rfind("antithetic:", 0) == 0)
        return ScenarioPolicy::antithetic(config_policy(t.substr(11), line));
    config_fail(line, "field 'policy' must be const:<i>, switch:<seed> or "
                      "antithetic:<base>, got '" + t + "'");
}

} // namespace detail

/// Parse a configuration stream; unknown keys, malformed values, and
/// inconsistent fields all throw std::invalid_argument with the line number
/// and field name.
inline ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig cfg;
    cfg.vertices.clear();
    cfg.policies.clear();
    std::vector<std::vector<double>> raw_vertices;

    std::string line;
    std::size_t ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        const std::string body = detail::config_trim(line);
        if (body.empty())
            continue;
        const std::size_t eq = body.find('=');
        if (eq == std::string::npos)
            detail::config_fail(ln, "expected 'key = value', got '" + body + "'");
        const std::string key = detail::config_trim(body.substr(0, eq));
        const std::string value = detail::config_trim(body.substr(eq + 1));
        if (key.empty())
            detail::config_fail(ln, "empty key");
        if (value.empty())
            detail::config_fail(ln, "field '" + key + "' has an empty value");

        if (key == "name") {
            cfg.name = value;
        } else if (key == "h") {
            cfg.h = detail::config_real(value, ln, "h");
            if (!(cfg.h > 0.0) || !(cfg.h < 1.0))
                detail::config_fail(ln, "field 'h' must lie in (0, 1)");
        } else if (key == "dim") {
            cfg.dim = static_cast<std::size_t>(detail::config_unsigned(value, ln, "dim"));
            if (cfg.dim == 0)
                detail::config_fail(ln, "field 'dim' must be >= 1");
        } else if (key == "grid_n") {
            cfg.grid_n =
                static_cast<std::size_t>(detail::config_unsigned(value, ln, "grid_n"));
            if (cfg.grid_n < 2)
                detail::config_fail(ln, "field 'grid_n' must be >= 2");
        } else if (key == "grid_t") {
            cfg.grid_t = detail::config_real(value, ln, "grid_t");
            if (!(cfg.grid_t > 0.0))
                detail::config_fail(ln, "field 'grid_t' must be positive");
        } else if (key == "vertex") {
            std::istringstream vs(value);
            std::vector<double> entries;
            std::string tok;
            while (vs >> tok)
                entries.push_back(detail::config_real(tok, ln, "vertex"));
            raw_vertices.push_back(std::move(entries));
        } else if (key == "policy") {
            cfg.policies.push_back(detail::config_policy(value, ln));
        } else if (key == "replicates") {
            cfg.replicates = static_cast<std::size_t>(
                detail::config_unsigned(value, ln, "replicates"));
            if (cfg.replicates < 2)
                detail::config_fail(ln, "field 'replicates' must be >= 2");
        } else if (key == "seed") {
            cfg.seed = detail::config_unsigned(value, ln, "seed");
        } else if (key == "jobs") {
            cfg.jobs = static_cast<unsigned>(detail::config_unsigned(value, ln, "jobs"));
            if (cfg.jobs == 0)
                detail::config_fail(ln, "field 'jobs' must be >= 1");
        } else if (key == "tolerance") {
            cfg.tolerance = detail::config_real(value, ln, "tolerance");
            if (!(cfg.tolerance > 0.0))
                detail::config_fail(ln, "field 'tolerance' must be positive");
        } else if (key == "out") {
            cfg.out_dir = value;
        } else {
            detail::config_fail(ln, "unknown key '" + key + "'");
        }
    }

    if (raw_vertices.empty())
        throw std::invalid_argument("config: need at least one 'vertex' entry");
    for (std::size_t v = 0; v < raw_vertices.size(); ++v) {
        if (raw_vertices[v].size() != cfg.dim * cfg.dim)
            throw std::invalid_argument(
                "config: vertex " + std::to_string(v) + " has " +
                std::to_string(raw_vertices[v].size()) + " entries, expected dim*dim = " +
                std::to_string(cfg.dim * cfg.dim));
        Eigen::MatrixXd g(cfg.dim, cfg.dim);
        for (std::size_t r = 0; r < cfg.dim; ++r)
            for (std::size_t c = 0; c < cfg.dim; ++c)
                g(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                    raw_vertices[v][r * cfg.dim + c];
        cfg.vertices.push_back(std::move(g));
    }
    if (cfg.policies.empty())
        cfg.policies.push_back(ScenarioPolicy::constant(0));
    for (const auto& pol : cfg.policies) {
        const ScenarioPolicy* leaf = &pol;
        while (leaf->kind == ScenarioPolicy::Kind::AntitheticPair && leaf->base)
            leaf = leaf->base.get();
        if (leaf->kind == ScenarioPolicy::Kind::ConstantVertex &&
            leaf->vertex >= cfg.vertices.size())
            throw std::invalid_argument(
                "config: policy references vertex " + std::to_string(leaf->vertex) +
                " but only " + std::to_string(cfg.vertices.size()) +
                " vertices are defined");
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("config: cannot open '" + path + "'");
    return parse_config(in);
}

} // namespace gfbm
