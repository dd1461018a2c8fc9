// The acceptance registry: sixteen self-contained verifiers covering the
// kernel algebra, the simulated G-fBm laws, the fractional calculus, the
// pathwise SDE layer, the nonlinear-PDE duality, and the classical
// reduction.  Every verifier returns one CheckResult with its target,
// estimate, statistical error, tolerance, pass flag, and a human-readable
// detail line; run_acceptance executes all of them in order against a
// shared fixture context so expensive kernel tables and path ensembles are
// built once.
//
// All sizes, seeds, targets and tolerances are pinned here: a run is
// deterministic for a fixed master seed.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "core.hpp"
#include "fraccalc.hpp"
#include "gfbm.hpp"
#include "gheat.hpp"
#include "priors.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "sde.hpp"
#include "statistics.hpp"
#include "volterra.hpp"

namespace gfbm {

struct AcceptanceOptions {
    unsigned jobs = 1;
    std::uint64_t seed = 20260817u;
};

/// Lazily built shared fixtures.  Tables are memoized by (hurst, cells,
/// horizon); the 200-path fractional ensemble is built once from the finest
/// table and reused by every path-statistics verifier.
class AcceptanceContext {
  public:
    explicit AcceptanceContext(AcceptanceOptions opts = {}) : opts_(opts) {}

    const AcceptanceOptions& options() const { return opts_; }
    std::uint64_t seed() const { return opts_.seed; }
    unsigned jobs() const { return opts_.jobs; }

    const KernelTable& table(double h, std::size_t n, double horizon) {
        char key[64];
        std::snprintf(key, sizeof key, "%.6f/%zu/%.6f", h, n, horizon);
        auto it = tables_.find(key);
        if (it == tables_.end()) {
            WeightOptions w;
            w.jobs = opts_.jobs;
            it = tables_
                     .emplace(key, std::make_shared<KernelTable>(kernel_weights(
                                       h, TimeGrid::uniform(n, horizon), w)))
                     .first;
        }
        return *it->second;
    }

    /// 200 fractional paths, h = 0.75, singleton variance 1, N = 2^13.
    const std::vector<GfbmPath>& ensemble() {
        if (ensemble_.empty()) {
            const KernelTable& t = table(0.75, 1 << 13, 1.0);
            const UncertaintySet unit = UncertaintySet::interval(1.0, 1.0);
            const ScenarioPolicy pol = ScenarioPolicy::constant(0);
            ensemble_.reserve(200);
            for (std::size_t r = 0; r < 200; ++r) {
                const std::uint64_t s = derive_seed(opts_.seed, 8001u, r);
                ensemble_.push_back(build_gfbm(simulate_gbm(unit, pol, t.grid(), s), t));
            }
        }
        return ensemble_;
    }

  private:
    AcceptanceOptions opts_;
    std::map<std::string, std::shared_ptr<KernelTable>> tables_;
    std::vector<GfbmPath> ensemble_;
};

namespace detail {

/// One B^H sample per replicate at the requested node indices (row r =
/// replicate r, in order), all components stacked: row layout [comp0 nodes,
/// comp1 nodes, ...].  Cost O(m * |nodes| * N).
inline Eigen::MatrixXd sample_at_nodes(const UncertaintySet& theta,
                                       const ScenarioPolicy& pol,
                                       const KernelTable& table,
                                       const std::vector<std::size_t>& nodes,
                                       std::size_t m, std::uint64_t master,
                                       std::uint64_t tag) {
    const std::size_t d = theta.dim();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(m),
                        static_cast<Eigen::Index>(d * nodes.size()));
    for (std::size_t r = 0; r < m; ++r) {
        const std::uint64_t s = derive_seed(master, tag, r);
        const PathBundle b = simulate_gbm(theta, pol, table.grid(), s);
        const Eigen::MatrixXd v = build_gfbm_at(b, table, nodes);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t c = 0; c < nodes.size(); ++c)
                out(static_cast<Eigen::Index>(r),
                    static_cast<Eigen::Index>(i * nodes.size() + c)) =
                    v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
    }
    return out;
}

inline MeanStderr column_stats(const Eigen::VectorXd& col) {
    std::vector<double> v(col.data(), col.data() + col.size());
    return mean_stderr(v);
}

/// Power-graded partition t_k = (k/n)^q * horizon. Grading concentrates
/// cells at the time origin, where the kernel's s^{1/2-H} factor otherwise
/// makes the cell-averaged weights lose an O(dt^{2-2H}) share of the
/// variance -- material for H near 1 on uniform grids.
inline TimeGrid power_graded_grid(std::size_t n, double horizon, double q) {
    std::vector<double> v(n + 1);
    for (std::size_t k = 0; k <= n; ++k)
        v[k] = horizon * std::pow(static_cast<double>(k) / static_cast<double>(n), q);
    v[n] = horizon;
    return TimeGrid(std::move(v));
}

inline std::string fmt(const char* pattern, ...) {
    char buf[512];
    va_list args;
    va_start(args, pattern);
    std::vsnprintf(buf, sizeof buf, pattern, args);
    va_end(args);
    return std::string(buf);
}

/// Unit-spacing increment ensemble on [0, 21]: m slim 22-node paths built
/// through the full grid/table (64 cells per unit), policy label preserved.
inline std::vector<GfbmPath> unit_increment_ensemble(AcceptanceContext& ctx,
                                                     double h, std::size_t m,
                                                     std::uint64_t tag) {
    const std::size_t units = 21, per_unit = 64;
    const KernelTable& table = ctx.table(h, units * per_unit, static_cast<double>(units));
    const UncertaintySet unit = UncertaintySet::interval(1.0, 1.0);
    const ScenarioPolicy pol = ScenarioPolicy::constant(0);
    std::vector<std::size_t> nodes(units + 1);
    for (std::size_t k = 0; k <= units; ++k)
        nodes[k] = k * per_unit;
    const TimeGrid slim = TimeGrid::uniform(units, static_cast<double>(units));
    std::vector<GfbmPath> out;
    out.reserve(m);
    for (std::size_t r = 0; r < m; ++r) {
        const std::uint64_t s = derive_seed(ctx.seed(), tag, r);
        const PathBundle b = simulate_gbm(unit, pol, table.grid(), s);
        const Eigen::MatrixXd v = build_gfbm_at(b, table, nodes);
        GfbmPath p(slim);
        p.dim = 1;
        p.h = h;
        p.policy_id = pol.description;
        p.seed = s;
        p.values.resize(units + 1);
        for (std::size_t k = 0; k <= units; ++k)
            p.values[k] = v(0, static_cast<Eigen::Index>(k));
        out.push_back(std::move(p));
    }
    return out;
}

} // namespace detail

// --------------------------------------------------------------------------
// 1. Kernel inner-product identity.
// --------------------------------------------------------------------------
inline CheckResult check_kernel_identity(AcceptanceContext&) {
    CheckResult r;
    r.name = "kernel-identity";
    r.tolerance = 1e-4;
    double worst = 0.0;
    double worst_h = 0.0, worst_s = 0.0, worst_t = 0.0;
    const double pts[5] = {0.2, 0.4, 0.6, 0.8, 1.0};
    for (double h : {0.3, 0.4, 0.6, 0.75, 0.9})
        for (int a = 0; a < 5; ++a)
            for (int b = a; b < 5; ++b) {
                const double s = pts[a], t = pts[b];
                const double target = kernel_inner(h, s, t);
                const double got = kernel_inner_quadrature(h, s, t, 1e-7);
                const double rel = std::abs(got - target) / std::abs(target);
                if (rel > worst) {
                    worst = rel;
                    worst_h = h;
                    worst_s = s;
                    worst_t = t;
                }
            }
    r.estimate = worst;
    r.target = 0.0;
    r.pass = worst <= r.tolerance;
    r.detail = detail::fmt("worst relative error %.3g at (h, s, t) = (%g, %g, %g) "
                           "over 5 Hurst values x 15 time pairs",
                           worst, worst_h, worst_s, worst_t);
    return r;
}

// --------------------------------------------------------------------------
// 2. Kernel rescaling identity.
// --------------------------------------------------------------------------
inline CheckResult check_kernel_scaling(AcceptanceContext&) {
    CheckResult r;
    r.name = "kernel-scaling";
    r.tolerance = 1e-8;
    double worst = 0.0;
    for (double h : {0.3, 0.4, 0.6, 0.75, 0.9})
        for (double a : {0.5, 2.0, 5.0})
            for (double t : {0.7, 1.0})
                for (double x : {0.15, 0.45, 0.75}) {
                    const double v = x * t;          // evaluation point for the base kernel
                    const double lhs = eval_kernel(h, a * t, a * v);
                    const double rhs = std::pow(a, h - 0.5) * eval_kernel(h, t, v);
                    worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
                }
    r.estimate = worst;
    r.target = 0.0;
    r.pass = worst <= r.tolerance;
    r.detail = detail::fmt("worst relative mismatch %.3g over 5 Hurst values, "
                           "a in {0.5, 2, 5}, 6 evaluation points",
                           worst);
    return r;
}

// --------------------------------------------------------------------------
// 3. Covariance law under constant-vertex policies.
// --------------------------------------------------------------------------
inline CheckResult check_covariance_law(AcceptanceContext& ctx) {
    CheckResult r;
    r.name = "covariance-law";
    const double h = 0.75;
    const KernelTable& table = ctx.table(h, 512, 1.0);
    const UncertaintySet theta = UncertaintySet::interval(0.25, 2.25);
    const std::size_t m = 20000;
    const std::vector<std::size_t> nodes = {128, 256, 384, 512};  // t = .25 .5 .75 1
    const std::size_t pair_idx[2][2] = {{1, 3}, {0, 2}};          // (.5,1), (.25,.75)
    const double pair_st[2][2] = {{0.5, 1.0}, {0.25, 0.75}};

    bool all = true;
    double worst_ratio = 0.0;
    std::string detail;
    for (std::size_t policy : {0u, 1u}) {
        const double gamma = policy == 0 ? 0.25 : 2.25;
        const Eigen::MatrixXd v =
            detail::sample_at_nodes(theta, ScenarioPolicy::constant(policy), table,
                                    nodes, m, ctx.seed(), 3000u + policy);
        for (int q = 0; q < 2; ++q) {
            const Eigen::VectorXd prod =
                v.col(static_cast<Eigen::Index>(pair_idx[q][0])).array() *
                v.col(static_cast<Eigen::Index>(pair_idx[q][1])).array();
            const MeanStderr ms = detail::column_stats(prod);
            const double target = gamma * kernel_inner(h, pair_st[q][0], pair_st[q][1]);
            const double allowed = 3.0 * ms.stderr_ + 0.02 * std::abs(target);
            const double dev = std::abs(ms.mean - target);
            all = all && dev <= allowed;
            if (dev / allowed > worst_ratio) {
                worst_ratio = dev / allowed;
                r.target = target;
                r.estimate = ms.mean;
                r.stderr_ = ms.stderr_;
                r.tolerance = allowed;
            }
            detail += detail::fmt("%s(s=%.2g,t=%.2g): est %.4f target %.4f +-%.4f; ",
                                  policy == 0 ? "low" : "high", pair_st[q][0],
                                  pair_st[q][1], ms.mean, target, allowed);
        }
    }
    r.pass = all;
    r.detail = detail + detail::fmt("worst deviation at %.0f%% of allowance",
                                    100.0 * worst_ratio);
    return r;
}

// --------------------------------------------------------------------------
// 4. Cross-moment bound in the two-dimensional two-vertex set.
// --------------------------------------------------------------------------
inline CheckResult check_cross_moment_bound(AcceptanceContext& ctx) {
    CheckResult r;
    r.name = "cross-moment-bound";
    const double h = 0.75;
    const KernelTable& table = ctx.table(h, 512, 1.0);
    std::vector<Eigen::MatrixXd> vertices(2, Eigen::MatrixXd(2, 2));
    vertices[0] << 1.0, 0.3, 0.3, 1.0;
    vertices[1] << 0.25, 0.0, 0.0, 0.25;
    const UncertaintySet theta(2, vertices);
    const double cross_hi = cross_bounds(theta, 1, 2).second;  // 2.1
    const std::size_t m = 10000;
    const std::vector<std::size_t> nodes = {128, 256, 384, 512};
    const std::size_t pair_idx[2][2] = {{1, 3}, {0, 2}};
    const double pair_st[2][2] = {{0.5, 1.0}, {0.25, 0.75}};
    const std::vector<ScenarioPolicy> pols = {ScenarioPolicy::constant(0),
                                              ScenarioPolicy::constant(1),
                                              ScenarioPolicy::piecewise_switch(41u)};

    bool all = true;
    double closest = -1e300;
    std::string detail;
    for (std::size_t p = 0; p < pols.size(); ++p) {
        const Eigen::MatrixXd v = detail::sample_at_nodes(theta, pols[p], table, nodes,
                                                          m, ctx.seed(), 4000u + p);
        for (int q = 0; q < 2; ++q) {
            // component 1 at s times component 2 at t
            const Eigen::VectorXd prod =
                v.col(static_cast<Eigen::Index>(pair_idx[q][0])).array() *
                v.col(static_cast<Eigen::Index>(4 + pair_idx[q][1])).array();
            const MeanStderr ms = detail::column_stats(prod);
            const double bound =
                0.25 * kernel_inner(h, pair_st[q][0], pair_st[q][1]) * cross_hi +
                3.0 * ms.stderr_;
            all = all && ms.mean <= bound;
            if (ms.mean - bound > closest) {
                closest = ms.mean - bound;
                r.estimate = ms.mean;
                r.target = bound;
                r.stderr_ = ms.stderr_;
            }
        }
        detail += pols[p].description + " ok; ";
    }
    r.tolerance = 0.0;
    r.pass = all;
    r.detail = detail + detail::fmt("tightest margin %.4f below the bound", -closest);
    return r;
}

// --------------------------------------------------------------------------
// 5. Stationarity of increments and self-similarity of second moments.
// --------------------------------------------------------------------------
inline CheckResult check_stationarity_self_similarity(AcceptanceContext& ctx) {
    CheckResult r;
    r.name = "stationarity-self-similarity";
    const double h = 0.75;
    const KernelTable& table = ctx.table(h, 512, 1.0);
    const UncertaintySet theta = UncertaintySet::interval(0.25, 2.25);
    const std::size_t m = 10000;
    const std::vector<std::size_t> nodes = {128, 256, 384, 512};

    // Upper (over the two constant-vertex policies) second moments.
    std::vector<Eigen::MatrixXd> samples;
    for (std::size_t policy : {0u, 1u})
        samples.push_back(detail::sample_at_nodes(theta, ScenarioPolicy::constant(policy),
                                                  table, nodes, m, ctx.seed(),
                                                  5000u + policy));
    auto upper_moment = [&](auto&& statistic) {
        MeanStderr best;
        bool first = true;
        for (const auto& v : samples) {
            std::vector<double> vals(static_cast<std::size_t>(v.rows()));
            for (Eigen::Index i = 0; i < v.rows(); ++i)
                vals[static_cast<std::size_t>(i)] = statistic(v.row(i));
            const MeanStderr ms = mean_stderr(vals);
            if (first || ms.mean > best.mean)
                best = ms;
            first = false;
        }
        return best;
    };

    bool all = true;
    double worst_ratio = 0.0;
    std::string detail;
    auto record = [&](const char* label, const MeanStderr& lhs, const MeanStderr& rhs) {
        const double allowed =
            3.0 * std::hypot(lhs.stderr_, rhs.stderr_) + 0.02 * std::abs(rhs.mean);
        const double dev = std::abs(lhs.mean - rhs.mean);
        all = all && dev <= allowed;
        if (dev / allowed > worst_ratio) {
            worst_ratio = dev / allowed;
            r.estimate = lhs.mean;
            r.target = rhs.mean;
            r.stderr_ = std::hypot(lhs.stderr_, rhs.stderr_);
            r.tolerance = allowed;
        }
        detail += detail::fmt("%s: %.4f vs %.4f (+-%.4f); ", label, lhs.mean, rhs.mean,
                              allowed);
    };

    // columns: 0 -> t=0.25, 1 -> t=0.5, 2 -> t=0.75, 3 -> t=1.
    record("shift t=.25 by .25",
           upper_moment([](const auto& row) {
               const double d = row(1) - row(0);
               return d * d;
           }),
           upper_moment([](const auto& row) { return row(0) * row(0); }));
    record("shift t=.5 by .25",
           upper_moment([](const auto& row) {
               const double d = row(2) - row(0);
               return d * d;
           }),
           upper_moment([](const auto& row) { return row(1) * row(1); }));
    const double shrink = std::pow(2.0, -2.0 * h);
    record("scale a=2 at t=.5",
           upper_moment([shrink](const auto& row) { return shrink * row(3) * row(3); }),
           upper_moment([](const auto& row) { return row(1) * row(1); }));

    r.pass = all;
    r.detail = detail + detail::fmt("worst deviation at %.0f%% of allowance",
                                    100.0 * worst_ratio);
    return r;
}

// --------------------------------------------------------------------------
// 6. Increment autocovariance at unit lags.
// --------------------------------------------------------------------------
inline CheckResult check_increment_autocovariance(AcceptanceContext& ctx) {
    CheckResult r;
    r.name = "increment-autocovariance";
    const std::vector<GfbmPath> rough = detail::unit_increment_ensemble(ctx, 0.75, 5000, 6001u);
    const std::vector<GfbmPath> classical =
        detail::unit_increment_ensemble(ctx, 0.5, 3000, 6002u);

    const double targets[2] = {0.414213562373095, 0.269649086607126};
    bool all = true;
    std::string detail;
    double worst_ratio = 0.0;
    for (std::size_t lag : {1u, 2u}) {
        const AutocovResult ac = autocovariance(rough, 0, lag);
        const double target = targets[lag - 1];
        const double allowed = 3.0 * ac.rho_upper.stderr_ + 0.05 * std::abs(target);
        const double dev = std::abs(ac.rho_upper.mean - target);
        all = all && dev <= allowed;
        if (dev / allowed > worst_ratio) {
            worst_ratio = dev / allowed;
            r.estimate = ac.rho_upper.mean;
            r.target = target;
            r.stderr_ = ac.rho_upper.stderr_;
            r.tolerance = allowed;
        }
        detail += detail::fmt("rho(%zu) = %.4f vs %.4f; ", lag, ac.rho_upper.mean, target);
    }
    for (std::size_t lag : {1u, 2u, 3u}) {
        const AutocovResult ac = autocovariance(classical, 0, lag);
        const bool ok = std::abs(ac.rho_upper.mean) <= 3.0 * ac.rho_upper.stderr_;
        all = all && ok;
        detail += detail::fmt("h=.5 rho(%zu) = %.4f +- %.4f; ", lag, ac.rho_upper.mean,
                              ac.rho_upper.stderr_);
    }
    r.pass = all;
    r.detail = detail;
    return r;
}

// --------------------------------------------------------------------------
// 7. Long-memory decay exponent of the increment autocovariance.
// --------------------------------------------------------------------------
inline CheckResult check_long_memory_rate(AcceptanceContext& ctx) {
    CheckResult r;
    r.name = "long-memory-rate";
    r.target = -0.5;  // 2H - 2 at H = 0.75
    r.tolerance = 0.15;
    const std::vector<GfbmPath> rough = detail::unit_increment_ensemble(ctx, 0.75, 5000, 6001u);
    std::vector<double> logn, logr;
    for (std::size_t lag = 2; lag <= 20; ++lag) {
        const AutocovResult ac = autocovariance(rough, 0, lag);
        if (!(ac.rho_upper.mean > 0.0)) {
            r.pass = false;
            r.detail = detail::fmt("rho(%zu) is not positive (%.4g); cannot fit a "
                                   "power law",
                                   lag, ac.rho_upper.mean);
            return r;
        }
        logn.push_back(std::log(static_cast<double>(lag)));
        logr.push_back(std::log(ac.rho_upper.mean));
    }
    const LineFit fit = linear_fit(logn, logr);
    r.estimate = fit.slope;
    r.pass = std::abs(fit.slope - r.target) <= r.tolerance;
    r.detail = detail::fmt("fitted decay exponent %.3f over lags 2..20 (target %.2f "
                           "+- %.2f)",
                           fit.slope, r.target, r.tolerance);
    return r;
}

// --------------------------------------------------------------------------
// 8. Quadratic-variation refinement rate.
// --------------------------------------------------------------------------
inline CheckResult check_quadratic_variation_rate(AcceptanceContext& ctx) {
    CheckResult r;
    r.name = "quadratic-variation-rate";
    r.target = 0.5;  // 2H - 1 against the mesh, H = 0.75
    r.tolerance = 0.1;
    const std::vector<GfbmPath>& paths = ctx.ensemble();
    const std::size_t full = paths.front().grid.cells();
    std::vector<double> logmesh, logqv;
    for (std::size_t n = (1u << 8); n <= full; n <<= 1) {
        double acc = 0.0;
        for (const GfbmPath& p : paths)
            acc += p_variation(subsample_path(p, full / n), 2.0);
        acc /= static_cast<double>(paths.size());
        logmesh.push_back(std::log(1.0 / static_cast<double>(n)));
        logqv.push_back(std::log(acc));
    }
    const LineFit fit = linear_fit(logmesh, logqv);
    r.estimate = fit.slope;
    r.pass = std::abs(fit.slope - r.target) <= r.tolerance;
    r.detail = detail::fmt("mean squared-increment sum over 200 paths decays with "
                           "mesh exponent %.3f across N = 2^8..2^13 (target %.2f +- "
                           "%.2f)",
                           fit.slope, r.target, r.tolerance);
    return r;
}

// --------------------------------------------------------------------------
// 9. Hoelder regularity window and non-differentiability.
// --------------------------------------------------------------------------
inline CheckResult check_holder_regularity(AcceptanceContext& ctx) {
    CheckResult r;
    r.name = "holder-regularity";
    r.target = 0.90;
    const std::vector<GfbmPath>& paths = ctx.ensemble();
    const std::size_t full = paths.front().grid.cells();
    std::size_t in_window = 0, growing = 0;
    for (const GfbmPath& p : paths) {
        const double ex = holder_exponent(p);
        if (ex >= 0.60 && ex <= 0.80)
            ++in_window;
        double prev = difference_quotient_max(subsample_path(p, full / (1u << 10)));
        bool mono = true;
        for (std::size_t n = (1u << 11); n <= full; n <<= 1) {
            const double cur = difference_quotient_max(subsample_path(p, full / n));
            mono = mono && cur > prev;
            prev = cur;
        }
        if (mono)
            ++growing;
    }
    const double frac = static_cast<double>(in_window) / static_cast<double>(paths.size());
    const double grow = static_cast<double>(growing) / static_cast<double>(paths.size());
    r.estimate = frac;
    r.tolerance = 0.0;
    r.pass = frac >= r.target && growing == paths.size();
    r.detail = detail::fmt("%.1f%% of 200 paths give a regularity exponent in "
                           "[0.60, 0.80] (bar 90%%); difference-quotient max grows "
                           "under refinement for %.1f%% (bar 100%%)",
                           100.0 * frac, 100.0 * grow);
    return r;
}

// --------------------------------------------------------------------------
// 10. Fractional-operator oracles.
// --------------------------------------------------------------------------
inline CheckResult check_fractional_operators(AcceptanceContext&) {
    CheckResult r;
    r.name = "fractional-operators";
    r.tolerance = 1e-4;

    // (a) Left derivative of the identity at t = 1.
    const TimeGrid g10 = TimeGrid::uniform(1 << 10, 1.0);
    SampledFunction ident(g10);
    for (std::size_t k = 0; k <= g10.cells(); ++k)
        ident.values[k] = g10[k];
    const SampledFunction d = weyl_left(ident, 0.3);
    const double target_a = 1.10054740552366571;  // 1 / Gamma(1.7)
    const double got_a = d.values[g10.cells()];
    const bool pass_a = std::abs(got_a - target_a) <= 1e-4;

    // (b) Derivative-after-integral identity, sup norm 1e-3.  A payoff with
    // payoff(0) != 0 has a t^alpha boundary layer that linear in-fill cannot
    // resolve at any resolution, so that variant is measured past t = 0.1.
    const std::size_t n = 1 << 12;
    const TimeGrid g12 = TimeGrid::uniform(n, 1.0);
    const double a = 0.3;
    double sup_zero = 0.0, sup_layer = 0.0;
    {
        SampledFunction phi(g12), integ(g12);
        for (std::size_t k = 0; k <= n; ++k)
            phi.values[k] = std::sin(g12[k]);
        for (std::size_t k = 1; k <= n; ++k)
            integ.values[k] = rl_integral_left(phi, a, g12[k]);
        const SampledFunction back = weyl_left(integ, a);
        for (std::size_t k = 0; k <= n; ++k)
            sup_zero = std::max(sup_zero, std::abs(back.values[k] - phi.values[k]));
    }
    {
        SampledFunction phi(g12), integ(g12);
        for (std::size_t k = 0; k <= n; ++k)
            phi.values[k] = std::cos(g12[k]);
        for (std::size_t k = 1; k <= n; ++k)
            integ.values[k] = rl_integral_left(phi, a, g12[k]);
        const SampledFunction back = weyl_left(integ, a);
        for (std::size_t k = 0; k <= n; ++k)
            if (g12[k] >= 0.1)
                sup_layer = std::max(sup_layer, std::abs(back.values[k] - phi.values[k]));
    }
    const bool pass_b = sup_zero < 1e-3 && sup_layer < 1e-3;

    // (c) The product-rule pin: integral of t against d(t^2) on [0, 1].
    const TimeGrid gq = TimeGrid::uniform(1 << 10, 1.0);
    SampledFunction f(gq), q(gq);
    for (std::size_t k = 0; k <= gq.cells(); ++k) {
        f.values[k] = gq[k];
        q.values[k] = gq[k] * gq[k];
    }
    const double got_c = gls_integral(f, q, FracParams(0.375, 0.75));
    const bool pass_c = std::abs(got_c - 2.0 / 3.0) <= 1e-3;

    r.estimate = got_a;
    r.target = target_a;
    r.pass = pass_a && pass_b && pass_c;
    r.detail = detail::fmt("derivative of identity at 1: %.8f vs %.8f; "
                           "integrate-then-differentiate sup error %.2g (zero-start) "
                           "/ %.2g (offset payoff, t >= 0.1); integral of t d(t^2) = "
                           "%.6f vs 2/3",
                           got_a, target_a, sup_zero, sup_layer, got_c);
    return r;
}

// --------------------------------------------------------------------------
// 11. First-order change-of-variable residual for the quadratic.
// --------------------------------------------------------------------------
inline CheckResult check_ito_formula(AcceptanceContext& ctx) {
    CheckResult r;
    r.name = "ito-formula";
    const std::vector<GfbmPath>& paths = ctx.ensemble();
    const std::size_t full = paths.front().grid.cells();
    auto f = [](double v) { return v * v; };
    auto df = [](double v) { return 2.0 * v; };

    std::vector<double> logmesh, logres;
    double res_full = 0.0, scale_full = 0.0;
    for (std::size_t n = (1u << 8); n <= full; n <<= 1) {
        double acc = 0.0;
        for (const GfbmPath& p : paths)
            acc += ito_residual(f, df, subsample_path(p, full / n));
        acc /= static_cast<double>(paths.size());
        logmesh.push_back(std::log(1.0 / static_cast<double>(n)));
        logres.push_back(std::log(acc));
        if (n == full)
            res_full = acc;
    }
    for (const GfbmPath& p : paths) {
        double mx = 0.0;
        for (std::size_t k = 0; k <= full; ++k)
            mx = std::max(mx, std::abs(p.value(0, k)));
        scale_full += mx * mx;
    }
    scale_full /= static_cast<double>(paths.size());

    const LineFit fit = linear_fit(logmesh, logres);
    const double ratio = res_full / scale_full;
    const bool slope_ok = std::abs(fit.slope - 0.5) <= 0.1;
    const bool size_ok = ratio < 1e-2;
    r.estimate = ratio;
    r.target = 0.0;
    r.tolerance = 1e-2;
    r.pass = slope_ok && size_ok;
    r.detail = detail::fmt("residual decays with mesh exponent %.3f (target 0.5 +- "
                           "0.1); at N = 2^13 the mean residual is %.4f per unit "
                           "squared path sup (mean residual %.5f / mean sup^2 %.4f), "
                           "bar 1e-2",
                           fit.slope, ratio, res_full, scale_full);
    return r;
}

// --------------------------------------------------------------------------
// 12. Pathwise integral bound with the singular-norm pair.
// --------------------------------------------------------------------------
inline CheckResult check_pathwise_integral_bound(AcceptanceContext& ctx) {
    CheckResult r;
    r.name = "pathwise-integral-bound";
    r.target = 1.0;
    r.tolerance = 0.05;
    const TimeGrid grid = TimeGrid::uniform(512, 1.0);
    const FbmOracle oracle(0.75, grid);
    const FracParams params = FracParams::for_hurst(0.75);
    const double alpha = params.alpha;
    double worst = 0.0;
    std::size_t violations = 0;
    for (std::size_t k = 0; k < 500; ++k) {
        SampledFunction b(grid, oracle.sample(derive_seed(ctx.seed(), 12001u, k)));
        const double lhs = std::abs(gls_integral(b, b, params));
        const double rhs = g_tilde(b, alpha) * norm_alpha_1(b, alpha);
        const double ratio = lhs / rhs;
        worst = std::max(worst, ratio);
        if (ratio > 1.05)
            ++violations;
    }
    r.estimate = worst;
    r.pass = violations == 0;
    r.detail = detail::fmt("max |integral| / (G-sup x weighted norm) = %.4f over 500 "
                           "exact fractional paths (bar 1.05); %zu violations",
                           worst, violations);
    return r;
}

// --------------------------------------------------------------------------
// 13. Pathwise SDE solver on the geometric equation.
// --------------------------------------------------------------------------
inline CheckResult check_sde_solver(AcceptanceContext& ctx) {
    CheckResult r;
    r.name = "sde-solver";
    const std::vector<GfbmPath>& paths = ctx.ensemble();
    const std::size_t full = paths.front().grid.cells();
    const std::size_t n_paths = 50;
    const double sigma = 1.0;
    SdeSpec spec;
    spec.x0 = Eigen::VectorXd::Ones(1);
    spec.diffusion = [sigma](double, const Eigen::VectorXd& x) {
        Eigen::MatrixXd s(1, 1);
        s(0, 0) = sigma * x(0);
        return s;
    };

    std::vector<double> logn, logerr;
    double rel_at_finest = 0.0;
    for (std::size_t n = (1u << 8); n <= (1u << 12); n <<= 1) {
        double acc = 0.0, rel = 0.0;
        for (std::size_t k = 0; k < n_paths; ++k) {
            const GfbmPath sub = subsample_path(paths[k], full / n);
            const double exact = std::exp(sigma * sub.value(0, n));
            const double got = solve_sde(spec, sub).value(0, n);
            acc += std::abs(got - exact);
            rel += std::abs(got - exact) / exact;
        }
        logn.push_back(std::log(static_cast<double>(n)));
        logerr.push_back(std::log(acc / static_cast<double>(n_paths)));
        if (n == (1u << 12))
            rel_at_finest = rel / static_cast<double>(n_paths);
    }
    const LineFit fit = linear_fit(logn, logerr);
    r.estimate = rel_at_finest;
    r.target = 0.0;
    r.tolerance = 0.05;
    r.pass = rel_at_finest < 0.05 && -fit.slope >= 0.4;
    r.detail = detail::fmt("mean relative terminal error %.4f at N = 2^12 over 50 "
                           "paths (bar 5%%); convergence slope %.3f (bar 0.4)",
                           rel_at_finest, -fit.slope);
    return r;
}

// --------------------------------------------------------------------------
// 14. Nonlinear-PDE duality and H-invariance of the MC target.
// --------------------------------------------------------------------------
inline CheckResult check_gheat_duality(AcceptanceContext& ctx) {
    CheckResult r;
    r.name = "gheat-duality";
    const UncertaintySet theta = UncertaintySet::interval(0.25, 2.25);
    const std::vector<ScenarioPolicy> pols = {ScenarioPolicy::constant(0),
                                              ScenarioPolicy::constant(1)};
    const std::size_t m = 10000;
    EstimateOptions eopts;
    eopts.jobs = ctx.jobs();

    GHeatSpec sq = GHeatSpec::make(0.25, 2.25, [](double v) { return v * v; }, 1.0,
                                   9.5, 0.05);
    const PdeMcReport rq = pde_vs_mc(sq, theta, pols, ctx.table(0.75, 512, 1.0), m,
                                     derive_seed(ctx.seed(), 14001u, 0), 0.0, 1, eopts);
    const bool exact_ok = std::abs(rq.pde_value - 2.25) <= 1e-6;
    const double allow_q = 3.0 * rq.mc_upper_stderr + 0.02 * std::abs(rq.pde_value);
    const bool sq_ok = std::abs(rq.discrepancy) <= allow_q;

    GHeatSpec call = GHeatSpec::make(
        0.25, 2.25, [](double v) { return std::max(v - 0.5, 0.0); }, 1.0, 9.5, 0.02);
    const PdeMcReport rc = pde_vs_mc(call, theta, pols, ctx.table(0.75, 512, 1.0), m,
                                     derive_seed(ctx.seed(), 14002u, 0), 0.0, 1, eopts);
    const double allow_c = 3.0 * rc.mc_upper_stderr + 0.02 * std::abs(rc.pde_value);
    const bool call_ok = std::abs(rc.discrepancy) <= allow_c;

    // H-invariance of the MC arm (the PDE arm is H-free by construction).
    // The estimate is compared at pure statistical tolerance, so the grids
    // must be graded toward t = 0: on uniform cells the cell-averaged
    // weights under-resolve the kernel's start singularity by O(dt^{2-2H})
    // of the variance -- 10% at H = 0.9, N = 512 -- which is systematic
    // bias, not noise. Grading with q = 4 reduces it below 0.4%.
    double mc_h[3], se_h[3];
    const double hs[3] = {0.6, 0.75, 0.9};
    const TimeGrid graded = detail::power_graded_grid(512, 1.0, 4.0);
    WeightOptions wopts;
    wopts.jobs = ctx.jobs();
    for (int i = 0; i < 3; ++i) {
        const KernelTable table = kernel_weights(hs[i], graded, wopts);
        const PdeMcReport ri =
            pde_vs_mc(sq, theta, pols, table, m,
                      derive_seed(ctx.seed(), 14003u, static_cast<std::uint64_t>(i)),
                      0.0, 1, eopts);
        mc_h[i] = ri.mc_upper;
        se_h[i] = ri.mc_upper_stderr;
    }
    bool inv_ok = true;
    double worst_spread = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            const double spread = std::abs(mc_h[i] - mc_h[j]);
            const double allowed = 3.0 * std::hypot(se_h[i], se_h[j]);
            inv_ok = inv_ok && spread <= allowed;
            worst_spread = std::max(worst_spread, spread / allowed);
        }

    r.estimate = rq.mc_upper;
    r.target = rq.pde_value;
    r.stderr_ = rq.mc_upper_stderr;
    r.tolerance = allow_q;
    r.pass = exact_ok && sq_ok && call_ok && inv_ok;
    r.detail = detail::fmt("convex payoff: PDE %.4f (exact 2.25) vs MC %.4f; kinked "
                           "payoff: PDE %.4f vs MC %.4f (allow %.4f); MC target "
                           "spread across H in {0.6, 0.75, 0.9} at %.0f%% of 3 "
                           "combined stderr",
                           rq.pde_value, rq.mc_upper, rc.pde_value, rc.mc_upper,
                           allow_c, 100.0 * worst_spread);
    return r;
}

// --------------------------------------------------------------------------
// 15. Arbitrage wealth identity, positivity, and residual decay.
// --------------------------------------------------------------------------
inline CheckResult check_arbitrage_wealth(AcceptanceContext& ctx) {
    CheckResult r;
    r.name = "arbitrage-wealth";
    std::vector<Eigen::MatrixXd> vertices;
    for (double g : {0.25, 1.0, 2.25})
        vertices.push_back(Eigen::MatrixXd::Constant(1, 1, g));
    const UncertaintySet theta(1, vertices);

    // Full-path wealth statistics on a moderate grid.
    const WealthReport full = arbitrage_experiment(
        theta, {ScenarioPolicy::constant(1), ScenarioPolicy::piecewise_switch(9u)},
        ctx.table(0.75, 256, 1.0), 200, derive_seed(ctx.seed(), 15001u, 0));
    const bool zero_ok = full.initial_wealth == 0.0;
    const bool min_ok = full.min_wealth >= -1e-12;

    // Terminal positivity at scale: unit-volatility vertex, M = 10^4,
    // terminal node only (wealth is a deterministic function of B_T).
    const KernelTable& t512 = ctx.table(0.75, 512, 1.0);
    const Eigen::MatrixXd bt =
        detail::sample_at_nodes(theta, ScenarioPolicy::constant(1), t512, {512}, 10000,
                                ctx.seed(), 15002u);
    std::size_t positive = 0;
    for (Eigen::Index i = 0; i < bt.rows(); ++i) {
        const double b = bt(i, 0);
        const double vt = (-b * b - 2.0 * b) + (2.0 * b) * (1.0 + b);
        if (vt > 1e-4)
            ++positive;
    }
    const double frac = static_cast<double>(positive) / 1e4;
    const bool frac_ok = frac >= 0.99;

    // Self-financing residual decay along dyadic refinements of the shared
    // fractional ensemble.
    const std::vector<GfbmPath>& paths = ctx.ensemble();
    const std::size_t fulln = paths.front().grid.cells();
    std::vector<double> logmesh, logres;
    for (std::size_t n = (1u << 8); n <= fulln; n <<= 1) {
        double acc = 0.0;
        for (const GfbmPath& p : paths) {
            const GfbmPath sub = subsample_path(p, fulln / n);
            double gains = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                gains += 2.0 * sub.value(0, k) * sub.increment(0, k);
            const double bT = sub.value(0, n);
            acc += std::abs(bT * bT - gains);
        }
        logmesh.push_back(std::log(1.0 / static_cast<double>(n)));
        logres.push_back(std::log(acc / static_cast<double>(paths.size())));
    }
    const LineFit fit = linear_fit(logmesh, logres);
    const bool slope_ok = std::abs(fit.slope - 0.5) <= 0.1;

    r.estimate = frac;
    r.target = 0.99;
    r.tolerance = 0.0;
    r.pass = zero_ok && min_ok && frac_ok && slope_ok;
    r.detail = detail::fmt("V0 = %.2g; min wealth %.2g (bar -1e-12); terminal wealth "
                           "above 1e-4 on %.2f%% of 10^4 unit-volatility paths (bar "
                           "99%%); self-financing residual mesh exponent %.3f "
                           "(target 0.5 +- 0.1)",
                           full.initial_wealth, full.min_wealth, 100.0 * frac,
                           fit.slope);
    return r;
}

// --------------------------------------------------------------------------
// 16. Classical reduction against the dense-factorization oracle.
// --------------------------------------------------------------------------
inline CheckResult check_classical_reduction(AcceptanceContext& ctx) {
    CheckResult r;
    r.name = "classical-reduction";
    r.target = 0.01;
    const double h = 0.75;
    const KernelTable& table = ctx.table(h, 512, 1.0);
    const UncertaintySet unit = UncertaintySet::interval(1.0, 1.0);
    const std::size_t m = 10000;
    const Eigen::MatrixXd pipe = detail::sample_at_nodes(
        unit, ScenarioPolicy::constant(0), table, {256, 512}, m, ctx.seed(), 16001u);

    // Exact joint samples of (B_0.5, B_1) from the covariance factorization
    // on the two relevant marginal times.
    const FbmOracle oracle(h, TimeGrid({0.0, 0.5, 1.0}));
    std::vector<double> o_half(m), o_one(m), p_half(m), p_one(m);
    for (std::size_t k = 0; k < m; ++k) {
        const std::vector<double> path = oracle.sample(derive_seed(ctx.seed(), 16002u, k));
        o_half[k] = path[1];
        o_one[k] = path[2];
        p_half[k] = pipe(static_cast<Eigen::Index>(k), 0);
        p_one[k] = pipe(static_cast<Eigen::Index>(k), 1);
    }
    const KsResult k_half = ks_two_sample(p_half, o_half);
    const KsResult k_one = ks_two_sample(p_one, o_one);
    r.estimate = std::min(k_half.p_value, k_one.p_value);
    r.pass = k_half.p_value > 0.01 && k_one.p_value > 0.01;
    r.detail = detail::fmt("two-sample KS against the exact factorization oracle: p "
                           "= %.3f at t = 0.5, p = %.3f at t = 1 (bar 0.01, M = "
                           "10^4)",
                           k_half.p_value, k_one.p_value);
    return r;
}

// --------------------------------------------------------------------------
// Registry.
// --------------------------------------------------------------------------
using CheckFn = CheckResult (*)(AcceptanceContext&);

struct NamedCheck {
    const char* name;
    CheckFn fn;
};

inline const std::vector<NamedCheck>& acceptance_registry() {
    static const std::vector<NamedCheck> reg = {
        {"kernel-identity", check_kernel_identity},
        {"kernel-scaling", check_kernel_scaling},
        {"covariance-law", check_covariance_law},
        {"cross-moment-bound", check_cross_moment_bound},
        {"stationarity-self-similarity", check_stationarity_self_similarity},
        {"increment-autocovariance", check_increment_autocovariance},
        {"long-memory-rate", check_long_memory_rate},
        {"quadratic-variation-rate", check_quadratic_variation_rate},
        {"holder-regularity", check_holder_regularity},
        {"fractional-operators", check_fractional_operators},
        {"ito-formula", check_ito_formula},
        {"pathwise-integral-bound", check_pathwise_integral_bound},
        {"sde-solver", check_sde_solver},
        {"gheat-duality", check_gheat_duality},
        {"arbitrage-wealth", check_arbitrage_wealth},
        {"classical-reduction", check_classical_reduction},
    };
    return reg;
}

inline std::string format_check_line(std::size_t index, std::size_t total,
                                     const CheckResult& c) {
    return detail::fmt("[%2zu/%zu] %-30s %s  %s", index, total, c.name.c_str(),
                       c.pass ? "PASS" : "FAIL", c.detail.c_str());
}

/// Run every acceptance verifier in order; if progress is non-null, one
/// result line is printed as each verifier finishes.
inline std::vector<CheckResult> run_acceptance(AcceptanceContext& ctx,
                                               std::ostream* progress = nullptr) {
    const auto& reg = acceptance_registry();
    std::vector<CheckResult> out;
    out.reserve(reg.size());
    for (std::size_t i = 0; i < reg.size(); ++i) {
        out.push_back(reg[i].fn(ctx));
        if (progress)
            *progress << format_check_line(i + 1, reg.size(), out.back()) << std::endl;
    }
    return out;
}

} // namespace gfbm
