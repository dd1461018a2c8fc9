#pragma once

// Fractional G-Brownian paths: discrete Volterra transform of G-Brownian
// increments through a kernel weight table, an independent covariance-
// factorization sampler for the classical (singleton prior) case, and the
// statistical verifiers for the distributional laws of the process.

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "core.hpp"
#include "priors.hpp"
#include "rng.hpp"
#include "volterra.hpp"

namespace gfbm {

/// Discrete fractional path B^H on a grid, one block of N+1 values per
/// component.
struct GfbmPath {
    TimeGrid grid;
    std::size_t dim = 0;
    double h = 0.5;
    std::vector<double> values; // [i*(N+1) + k]
    std::string policy_id;      // generating scenario
    std::uint64_t seed = 0;

    explicit GfbmPath(TimeGrid g) : grid(std::move(g)) {}

    double value(std::size_t i, std::size_t k) const {
        return values[i * (grid.cells() + 1) + k];
    }
    double increment(std::size_t i, std::size_t k) const {
        return value(i, k + 1) - value(i, k);
    }
};

/// B^H_{t_k}(i) = sum_{j<k} w[k][j] dB_j(i). O(d N^2); h = 1/2 short-circuits
/// to the raw path.
inline GfbmPath build_gfbm(const PathBundle& bundle, const KernelTable& table) {
    if (!(bundle.grid == table.grid()))
        throw std::invalid_argument("build_gfbm: bundle and table grids differ");
    const std::size_t n = bundle.grid.cells();
    const std::size_t d = bundle.dim;
    GfbmPath out(bundle.grid);
    out.dim = d;
    out.h = table.hurst();
    out.policy_id = bundle.policy_id;
    out.seed = bundle.replicate_seed;
    if (table.hurst() == 0.5) {
        out.values = bundle.values;
        return out;
    }
    out.values.assign(d * (n + 1), 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        const double* db = bundle.increments.data() + i * n;
        double* val = out.values.data() + i * (n + 1);
        for (std::size_t k = 1; k <= n; ++k) {
            const double* w = table.row(k);
            double acc = 0.0;
            for (std::size_t j = 0; j < k; ++j)
                acc += w[j] * db[j];
            val[k] = acc;
        }
    }
    return out;
}

/// B^H at selected node indices only (d x nodes.size() matrix), at O(|nodes|
/// N) instead of O(N^2). Node index 0 yields exact zeros.
inline Eigen::MatrixXd build_gfbm_at(const PathBundle& bundle,
                                     const KernelTable& table,
                                     const std::vector<std::size_t>& nodes) {
    if (!(bundle.grid == table.grid()))
        throw std::invalid_argument("build_gfbm_at: bundle and table grids differ");
    const std::size_t n = bundle.grid.cells();
    const std::size_t d = bundle.dim;
    Eigen::MatrixXd out(d, nodes.size());
    for (std::size_t c = 0; c < nodes.size(); ++c) {
        const std::size_t k = nodes[c];
        if (k > n)
            throw std::invalid_argument("build_gfbm_at: node index out of range");
        for (std::size_t i = 0; i < d; ++i) {
            if (k == 0) {
                out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = 0.0;
                continue;
            }
            const double* db = bundle.increments.data() + i * n;
            double acc = 0.0;
            if (table.hurst() == 0.5) {
                for (std::size_t j = 0; j < k; ++j)
                    acc += db[j];
            } else {
                const double* w = table.row(k);
                for (std::size_t j = 0; j < k; ++j)
                    acc += w[j] * db[j];
            }
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = acc;
        }
    }
    return out;
}

/// Coarsen a path by keeping every stride-th node (stride must divide N).
/// This is the exact restriction of the same trajectory to the coarser grid.
inline GfbmPath subsample_path(const GfbmPath& p, std::size_t stride) {
    const std::size_t n = p.grid.cells();
    if (stride == 0 || n % stride != 0)
        throw std::invalid_argument("subsample_path: stride must divide the cell count");
    const std::size_t m = n / stride;
    std::vector<double> nodes(m + 1);
    for (std::size_t k = 0; k <= m; ++k)
        nodes[k] = p.grid[k * stride];
    GfbmPath out{TimeGrid(nodes)};
    out.dim = p.dim;
    out.h = p.h;
    out.policy_id = p.policy_id;
    out.seed = p.seed;
    out.values.resize(p.dim * (m + 1));
    for (std::size_t i = 0; i < p.dim; ++i)
        for (std::size_t k = 0; k <= m; ++k)
            out.values[i * (m + 1) + k] = p.value(i, k * stride);
    return out;
}

/// Classical (unit-volatility, single-prior) fBm sampler by factorizing the
/// exact covariance 0.5 (t_k^{2H} + t_l^{2H} - |t_k - t_l|^{2H}). Independent
/// of the Volterra pipeline: used as its distributional oracle.
class FbmOracle {
  public:
    FbmOracle(double h, TimeGrid grid) : h_(h), grid_(std::move(grid)) {
        detail::check_hurst(h);
        const std::size_t n = grid_.cells();
        if (n > 4096)
            throw std::invalid_argument("FbmOracle: dense factorization capped at N = 4096");
        Eigen::MatrixXd gamma(n, n);
        for (std::size_t k = 1; k <= n; ++k)
            for (std::size_t l = k; l <= n; ++l) {
                const double tk = grid_[k], tl = grid_[l];
                const double c = 0.5 * (std::pow(tk, 2.0 * h) + std::pow(tl, 2.0 * h) -
                                        std::pow(std::abs(tk - tl), 2.0 * h));
                gamma(k - 1, l - 1) = c;
                gamma(l - 1, k - 1) = c;
            }
        const double scale = gamma.diagonal().maxCoeff();
        for (double jitter : {0.0, 1e-14, 1e-12, 1e-10}) {
            Eigen::MatrixXd g = gamma;
            if (jitter > 0.0)
                g.diagonal().array() += jitter * scale;
            Eigen::LLT<Eigen::MatrixXd> llt(g);
            if (llt.info() == Eigen::Success) {
                chol_ = llt.matrixL();
                return;
            }
        }
        throw std::runtime_error(
            "FbmOracle: covariance not factorizable within 1e-10 jitter");
    }

    const TimeGrid& grid() const { return grid_; }
    double hurst() const { return h_; }

    /// One path (N+1 values, leading zero), deterministic in the seed.
    std::vector<double> sample(std::uint64_t seed) const {
        const std::size_t n = grid_.cells();
        NormalSampler rng(seed);
        Eigen::VectorXd z(static_cast<Eigen::Index>(n));
        for (std::size_t k = 0; k < n; ++k)
            z(static_cast<Eigen::Index>(k)) = rng();
        const Eigen::VectorXd path = chol_ * z;
        std::vector<double> out(n + 1, 0.0);
        for (std::size_t k = 0; k < n; ++k)
            out[k + 1] = path(static_cast<Eigen::Index>(k));
        return out;
    }

  private:
    double h_;
    TimeGrid grid_;
    Eigen::MatrixXd chol_;
};

/// Single-call form of the oracle (factorizes per call; prefer FbmOracle for
/// ensembles).
inline std::vector<double> exact_fbm_oracle(double h, const TimeGrid& grid,
                                            std::uint64_t seed) {
    return FbmOracle(h, grid).sample(seed);
}

// ---------------------------------------------------------------------------
// Ensemble verifiers. Component indices are 0-based. Each reduces a
// per-replicate statistic to (mean, stderr) in replicate order.
// ---------------------------------------------------------------------------

/// Monte Carlo mean of B^H_s(i) B^H_t(j); s, t must be grid nodes.
inline MeanStderr empirical_second_moment(const std::vector<GfbmPath>& paths,
                                          std::size_t i, std::size_t j, double s,
                                          double t) {
    if (paths.empty())
        throw std::invalid_argument("empirical_second_moment: empty ensemble");
    const std::size_t ks = paths.front().grid.index_of(s);
    const std::size_t kt = paths.front().grid.index_of(t);
    std::vector<double> vals;
    vals.reserve(paths.size());
    for (const GfbmPath& p : paths)
        vals.push_back(p.value(i, ks) * p.value(j, kt));
    return mean_stderr(vals);
}

/// Monte Carlo mean of (B^H_r(i) - B^H_s(i)) (B^H_t(i) - B^H_u(i)) for
/// 0 <= s < r < u < t, all grid nodes.
inline MeanStderr increment_covariance(const std::vector<GfbmPath>& paths,
                                       std::size_t i, double s, double r,
                                       double u, double t) {
    if (!(0.0 <= s && s < r && r < u && u < t))
        throw std::invalid_argument(
            "increment_covariance: need 0 <= s < r < u < t");
    if (paths.empty())
        throw std::invalid_argument("increment_covariance: empty ensemble");
    const TimeGrid& g = paths.front().grid;
    const std::size_t ks = g.index_of(s), kr = g.index_of(r), ku = g.index_of(u),
                      kt = g.index_of(t);
    std::vector<double> vals;
    vals.reserve(paths.size());
    for (const GfbmPath& p : paths)
        vals.push_back((p.value(i, kr) - p.value(i, ks)) *
                       (p.value(i, kt) - p.value(i, ku)));
    return mean_stderr(vals);
}

/// Autocovariance of the unit-lag increment sequence at lag n.
struct AutocovResult {
    std::size_t n = 0;
    MeanStderr rho_upper; // max mean across the policies present in the ensemble
    MeanStderr rho_lower; // min mean
};

/// Estimates rho(n) = E[(B_{k+1}-B_k)(B_{k+n+1}-B_{k+n})], averaging over all
/// complete unit-spaced pairs within each replicate, then over replicates.
/// Paths from several policies may be mixed; the result carries the largest
/// and smallest per-policy means.
inline AutocovResult autocovariance(const std::vector<GfbmPath>& paths,
                                    std::size_t i, std::size_t n) {
    if (paths.empty())
        throw std::invalid_argument("autocovariance: empty ensemble");
    const TimeGrid& g = paths.front().grid;
    const std::size_t units = static_cast<std::size_t>(g.horizon() + 1e-9);
    if (units < n + 1)
        throw std::invalid_argument(
            "autocovariance: horizon too short for lag " + std::to_string(n));
    std::vector<std::size_t> idx(units + 1);
    for (std::size_t k = 0; k <= units; ++k)
        idx[k] = g.index_of(static_cast<double>(k));

    std::map<std::string, std::vector<double>> by_policy;
    for (const GfbmPath& p : paths) {
        double acc = 0.0;
        std::size_t cnt = 0;
        for (std::size_t k = 0; k + n < units; ++k) {
            const double x0 = p.value(i, idx[k + 1]) - p.value(i, idx[k]);
            const double x1 = p.value(i, idx[k + n + 1]) - p.value(i, idx[k + n]);
            acc += x0 * x1;
            ++cnt;
        }
        by_policy[p.policy_id].push_back(acc / static_cast<double>(cnt));
    }
    AutocovResult out;
    out.n = n;
    bool first = true;
    for (const auto& [id, vals] : by_policy) {
        const MeanStderr ms = mean_stderr(vals);
        if (first || ms.mean > out.rho_upper.mean)
            out.rho_upper = ms;
        if (first || ms.mean < out.rho_lower.mean)
            out.rho_lower = ms;
        first = false;
    }
    return out;
}

/// sum_k ||B^H_{t_{k+1}} - B^H_{t_k}||^p over the path's grid.
inline double p_variation(const GfbmPath& path, double p) {
    if (!(p > 0.0))
        throw std::invalid_argument("p_variation: need p > 0");
    const std::size_t n = path.grid.cells();
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < path.dim; ++i) {
            const double d = path.increment(i, k);
            s += d * d;
        }
        acc += std::pow(std::sqrt(s), p);
    }
    return acc;
}

/// Regression estimate of the path's Hoelder exponent: block maxima of
/// |increments| across dyadic coarsening levels, log-log least squares of the
/// maxima against the scale.
inline double holder_exponent(const GfbmPath& path) {
    const std::size_t n = path.grid.cells();
    if (n < 256)
        throw std::invalid_argument("holder_exponent: need at least 2^8 cells");
    std::vector<double> logscale, logmax;
    for (std::size_t level = 0;; ++level) {
        const std::size_t stride = static_cast<std::size_t>(1) << level;
        if (level > 6 || n / stride < 4 || n % stride != 0)
            break;
        double mx = 0.0;
        for (std::size_t k = 0; k + stride <= n; k += stride) {
            double s = 0.0;
            for (std::size_t i = 0; i < path.dim; ++i) {
                const double d = path.value(i, k + stride) - path.value(i, k);
                s += d * d;
            }
            mx = std::max(mx, s);
        }
        mx = std::sqrt(mx);
        const double scale =
            path.grid.horizon() * static_cast<double>(stride) / static_cast<double>(n);
        logscale.push_back(std::log(scale));
        logmax.push_back(std::log(mx));
    }
    return linear_fit(logscale, logmax).slope;
}

/// max_k ||dB^H_k|| / dt_k -- diverges like mesh^{H-1} for fractional paths.
inline double difference_quotient_max(const GfbmPath& path) {
    const std::size_t n = path.grid.cells();
    double mx = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < path.dim; ++i) {
            const double d = path.increment(i, k);
            s += d * d;
        }
        mx = std::max(mx, std::sqrt(s) / path.grid.dt(k));
    }
    return mx;
}

/// Monte Carlo mean of |B^H_t(i)|^m.
inline MeanStderr moment_scaling(const std::vector<GfbmPath>& paths, std::size_t i,
                                 unsigned m, double t) {
    if (m < 1)
        throw std::invalid_argument("moment_scaling: need m >= 1");
    if (paths.empty())
        throw std::invalid_argument("moment_scaling: empty ensemble");
    const std::size_t kt = paths.front().grid.index_of(t);
    std::vector<double> vals;
    vals.reserve(paths.size());
    for (const GfbmPath& p : paths)
        vals.push_back(std::pow(std::abs(p.value(i, kt)), static_cast<double>(m)));
    return mean_stderr(vals);
}

} // namespace gfbm
