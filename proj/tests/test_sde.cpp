// Pathwise SDE solver, Ito-residual diagnostics, and the arbitrage
// experiment: exact closed forms first, then convergence behaviour on
// exactly sampled fractional paths, then the wealth-report invariants.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <vector>

#include <gfbm/gfbm.hpp>
#include <gfbm/priors.hpp>
#include <gfbm/sde.hpp>
#include <gfbm/volterra.hpp>

using namespace gfbm;
using Catch::Matchers::ContainsSubstring;

namespace {

/// Exactly sampled one-component fractional path wrapped as a driver.
GfbmPath fbm_driver(double h, const TimeGrid& grid, std::uint64_t seed) {
    GfbmPath p(grid);
    p.dim = 1;
    p.h = h;
    p.values = exact_fbm_oracle(h, grid, seed);
    p.seed = seed;
    return p;
}

/// Deterministic smooth driver g(t) = t posing as a rough path, for the
/// classical-ODE consistency check.
GfbmPath identity_driver(const TimeGrid& grid) {
    GfbmPath p(grid);
    p.dim = 1;
    p.h = 0.75;
    p.values.assign(grid.nodes().begin(), grid.nodes().end());
    return p;
}

SdeSpec geometric_spec(double sigma) {
    SdeSpec spec;
    spec.x0 = Eigen::VectorXd::Ones(1);
    spec.diffusion = [sigma](double, const Eigen::VectorXd& x) {
        Eigen::MatrixXd s(1, 1);
        s(0, 0) = sigma * x(0);
        return s;
    };
    return spec;
}

/// One shared exact path at the largest size the dense oracle allows; the
/// factorization is the expensive part, so every convergence check below
/// subsamples this master path instead of refactorizing.
const GfbmPath& master_path() {
    static const GfbmPath p =
        fbm_driver(0.75, TimeGrid::uniform(1 << 12, 1.0), 424242u);
    return p;
}

} // namespace

TEST_CASE("sde: solver input validation") {
    const TimeGrid grid = TimeGrid::uniform(16, 1.0);
    SdeSpec spec = geometric_spec(1.0);

    GfbmPath bm(grid);
    bm.dim = 1;
    bm.h = 0.5;
    bm.values.assign(grid.size(), 0.0);
    CHECK_THROWS_WITH(solve_sde(spec, bm), ContainsSubstring("1/2"));

    GfbmPath rough = identity_driver(grid);

    SdeSpec low_delta = spec;
    low_delta.regularity.delta = 0.5; // alpha0 = 1/3 < alpha = 0.375
    CHECK_THROWS_WITH(solve_sde(low_delta, rough), ContainsSubstring("window"));
    SdeSpec low_beta = spec;
    low_beta.regularity.beta = 0.3;
    CHECK_THROWS_WITH(solve_sde(low_beta, rough), ContainsSubstring("window"));
    SdeSpec bad_const = spec;
    bad_const.regularity.drift_lipschitz = 0.0;
    CHECK_THROWS_WITH(solve_sde(bad_const, rough), ContainsSubstring("positive"));

    SdeSpec wrong_shape = spec;
    wrong_shape.diffusion = [](double, const Eigen::VectorXd&) {
        return Eigen::MatrixXd::Zero(2, 3);
    };
    CHECK_THROWS_WITH(solve_sde(wrong_shape, rough), ContainsSubstring("matrix"));

    SdeSpec empty_state = spec;
    empty_state.x0 = Eigen::VectorXd();
    CHECK_THROWS_WITH(solve_sde(empty_state, rough), ContainsSubstring("initial state"));

    // Non-finite state aborts with the step index: explosive drift.
    SdeSpec blow = spec;
    blow.diffusion = nullptr;
    blow.drift = [](double, const Eigen::VectorXd& x) {
        Eigen::VectorXd b(1);
        b(0) = x(0) > 2.0 ? std::numeric_limits<double>::infinity() : 10.0;
        return b;
    };
    CHECK_THROWS_WITH(solve_sde(blow, rough), ContainsSubstring("step"));
}

TEST_CASE("sde: degenerate coefficients reproduce exact paths") {
    const TimeGrid grid = TimeGrid::uniform(64, 2.0);
    const GfbmPath driver = fbm_driver(0.75, grid, 9001u);

    SdeSpec frozen;
    frozen.x0 = Eigen::VectorXd::Constant(1, 1.25);
    const SdePath c = solve_sde(frozen, driver);
    for (std::size_t k = 0; k <= grid.cells(); ++k)
        CHECK(c.value(0, k) == 1.25);

    SdeSpec clock;
    clock.x0 = Eigen::VectorXd::Constant(1, 0.5);
    clock.drift = [](double, const Eigen::VectorXd&) {
        return Eigen::VectorXd::Ones(1);
    };
    const SdePath lin = solve_sde(clock, driver);
    for (std::size_t k = 0; k <= grid.cells(); ++k)
        CHECK_THAT(lin.value(0, k), Catch::Matchers::WithinAbs(0.5 + grid[k], 1e-12));
}

TEST_CASE("sde: classical ODE consistency on a smooth driver") {
    // dX = X dg with g(t) = t is dX = X dt: exact solution e^t.  Left-point
    // Euler converges at first order, so halving the mesh halves the error.
    auto sup_error = [](std::size_t n) {
        const TimeGrid grid = TimeGrid::uniform(n, 1.0);
        const SdePath x = solve_sde(geometric_spec(1.0), identity_driver(grid));
        double worst = 0.0;
        for (std::size_t k = 0; k <= n; ++k)
            worst = std::max(worst, std::abs(x.value(0, k) - std::exp(grid[k])));
        return worst;
    };
    const double e256 = sup_error(256);
    const double e512 = sup_error(512);
    CHECK(e256 < 0.02);                  // sup error <= C * mesh with modest C
    const double ratio = e256 / e512;
    CHECK(ratio > 1.7);
    CHECK(ratio < 2.3);
}

TEST_CASE("sde: geometric equation tracks exp(sigma B) on an exact path") {
    const GfbmPath& fine = master_path();
    const double sigma = 1.0;
    const double bT = fine.value(0, fine.grid.cells());
    const double exact = std::exp(sigma * bT);

    const SdePath x = solve_sde(geometric_spec(sigma), fine);
    const double rel = std::abs(x.value(0, fine.grid.cells()) - exact) / exact;
    CHECK(rel < 0.05);

    // Log-log convergence under dyadic coarsening of the same path: the
    // Young-Euler error decays like N^{-(2H-1)}, so the slope clears 0.4.
    std::vector<double> logn, logerr;
    for (std::size_t n = (1u << 8); n <= (1u << 12); n <<= 1) {
        const GfbmPath sub = subsample_path(fine, fine.grid.cells() / n);
        const SdePath xs = solve_sde(geometric_spec(sigma), sub);
        const double err = std::abs(xs.value(0, n) - exact);
        logn.push_back(std::log(static_cast<double>(n)));
        logerr.push_back(std::log(err));
    }
    const LineFit fit = linear_fit(logn, logerr);
    CHECK(-fit.slope >= 0.4);

    // Ito--SDE coherence: reconstructing f(B) = e^{sigma B} through the
    // first-order formula carries the same kind of error as the solver.
    const double resid = ito_residual([sigma](double v) { return std::exp(sigma * v); },
                                      [sigma](double v) { return sigma * std::exp(sigma * v); },
                                      fine);
    double scale = 1.0;
    for (std::size_t k = 0; k <= fine.grid.cells(); ++k)
        scale = std::max(scale, std::exp(sigma * fine.value(0, k)));
    CHECK(resid / scale < 0.05);
}

TEST_CASE("sde: ito residual exact cases and the squared-increment identity") {
    const TimeGrid grid = TimeGrid::uniform(1 << 10, 1.0);
    const GfbmPath driver = fbm_driver(0.75, grid, 31337u);

    // Constants reconstruct exactly (every summand is a hard zero).
    CHECK(ito_residual([](double) { return 3.0; }, [](double) { return 0.0; }, driver) == 0.0);

    // The identity telescopes up to rounding.
    CHECK(ito_residual([](double v) { return v; }, [](double) { return 1.0; }, driver) < 1e-10);

    // f(x) = x^2: residual at the horizon is the squared-increment sum, and
    // the running residual is increasing, so the sup equals the p=2
    // variation statistic exactly.
    const double resid = ito_residual([](double v) { return v * v; },
                                      [](double v) { return 2.0 * v; }, driver);
    const double qv = p_variation(driver, 2.0);
    CHECK_THAT(resid, Catch::Matchers::WithinRel(qv, 1e-12));

    // Time-dependent variant: f(t,x) = t + x^2 adds an exactly integrated
    // clock term, leaving the same residual.
    const double resid_t = ito_residual(
        [](double t, double v) { return t + v * v; },
        [](double, double) { return 1.0; },
        [](double, double v) { return 2.0 * v; }, driver);
    CHECK_THAT(resid_t, Catch::Matchers::WithinRel(qv, 1e-9));

    // Validation of the callable arguments.
    CHECK_THROWS_WITH(ito_residual(std::function<double(double)>(),
                                   [](double) { return 0.0; }, driver),
                      ContainsSubstring("callable"));
    CHECK_THROWS_WITH(ito_residual([](double) { return 0.0; },
                                   [](double) { return 0.0; }, driver, 3),
                      ContainsSubstring("component"));
}

TEST_CASE("sde: ito residual decays at the long-memory rate") {
    // Dyadic coarsenings of one exact H = 0.75 path: the squared-increment
    // sum scales like N^{1-2H}, so log residual against log N has slope
    // close to -0.5.
    const GfbmPath& fine = master_path();
    std::vector<double> logn, logr;
    for (std::size_t n = (1u << 8); n <= (1u << 12); n <<= 1) {
        const GfbmPath sub = subsample_path(fine, fine.grid.cells() / n);
        const double r = ito_residual([](double v) { return v * v; },
                                      [](double v) { return 2.0 * v; }, sub);
        logn.push_back(std::log(static_cast<double>(n)));
        logr.push_back(std::log(r));
    }
    const LineFit fit = linear_fit(logn, logr);
    CHECK(fit.slope > -0.68);
    CHECK(fit.slope < -0.32);
}

TEST_CASE("sde: arbitrage experiment wealth report") {
    std::vector<Eigen::MatrixXd> vertices;
    for (double g : {0.25, 1.0, 2.25})
        vertices.push_back(Eigen::MatrixXd::Constant(1, 1, g));
    const UncertaintySet theta(1, vertices);
    const TimeGrid grid = TimeGrid::uniform(1 << 8, 1.0);
    const KernelTable table = kernel_weights(0.75, grid);

    const std::vector<ScenarioPolicy> policies = {
        ScenarioPolicy::constant(0), ScenarioPolicy::constant(1),
        ScenarioPolicy::constant(2), ScenarioPolicy::piecewise_switch(77u)};
    const WealthReport report = arbitrage_experiment(theta, policies, table, 400, 20260817u);

    // Starts from nothing, never dips below rounding, ends positive.
    CHECK(report.initial_wealth == 0.0);
    CHECK(report.min_wealth >= -1e-12);
    CHECK(report.identity_gap_sup < 1e-10);
    CHECK(report.per_policy.size() == 4);
    for (const auto& p : report.per_policy) {
        CHECK(p.fraction_positive > 0.0);
        CHECK(p.terminal.mean > 0.0);
        CHECK(p.residual_sup > 0.0);
        CHECK(p.residual_sup < 0.5);
    }
    // Under the unit-volatility vertex B_T is nearly standard normal, so the
    // squared terminal wealth clears 1e-4 on ~99% of paths.
    CHECK(report.per_policy[1].fraction_positive >= 0.95);

    // Determinism: same seed, same report.
    const WealthReport again = arbitrage_experiment(theta, policies, table, 400, 20260817u);
    CHECK(again.per_policy[1].terminal.mean == report.per_policy[1].terminal.mean);
    CHECK(again.residual_sup == report.residual_sup);

    // Broken inputs surface as argument errors.
    CHECK_THROWS_WITH(
        arbitrage_experiment(theta, {ScenarioPolicy::constant(7)}, table, 4, 1u),
        ContainsSubstring("out of range"));
    CHECK_THROWS_WITH(arbitrage_experiment(theta, {}, table, 4, 1u),
                      ContainsSubstring("policy"));
    CHECK_THROWS_WITH(arbitrage_experiment(theta, policies, table, 0, 1u),
                      ContainsSubstring("replicate"));
}
