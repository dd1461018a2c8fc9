// Nonlinear G-heat solver: exact linear-in-time solutions for signed
// quadratics, the discrete comparison principle, sublinearity, reduction to
// the classical heat kernel (frozen Gaussian-convolution oracles), and the
// PDE-vs-Monte-Carlo cross check with its H-invariance.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include <gfbm/gheat.hpp>
#include <gfbm/priors.hpp>

using namespace gfbm;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {
double call_50(double v) { return std::max(v - 0.5, 0.0); }
} // namespace

TEST_CASE("gheat: spec validation") {
    GHeatSpec s = GHeatSpec::make(0.25, 2.25, [](double v) { return v * v; }, 1.0,
                                  9.5, 0.05);
    CHECK_NOTHROW(solve_g_heat(s));

    GHeatSpec bad = s;
    bad.dt = 2.0 * s.dx * s.dx / s.sigma_high_sq;
    CHECK_THROWS_WITH(solve_g_heat(bad), ContainsSubstring("CFL"));

    bad = s;
    bad.sigma_low_sq = 0.0;
    CHECK_THROWS_WITH(solve_g_heat(bad), ContainsSubstring("sigma_low_sq"));
    bad = s;
    bad.sigma_low_sq = 3.0;
    CHECK_THROWS_WITH(solve_g_heat(bad), ContainsSubstring("sigma_low_sq"));
    bad = s;
    bad.payoff = nullptr;
    CHECK_THROWS_WITH(solve_g_heat(bad), ContainsSubstring("payoff"));
    bad = s;
    bad.horizon = 0.0;
    CHECK_THROWS_WITH(solve_g_heat(bad), ContainsSubstring("positive"));

    // Insulation rule: 6*sigma_high*sqrt(t) + |x| = 9 at the origin.
    GHeatSpec thin = s;
    thin.half_width = 5.0;
    CHECK_THROWS_WITH(g_heat_value(thin, 0.0), ContainsSubstring("insulation"));

    const GHeatSolution sol = solve_g_heat(s);
    CHECK_THROWS_WITH(sol.value_at(11.0), ContainsSubstring("domain"));
}

TEST_CASE("gheat: signed quadratics and linear payoffs are exact") {
    // Convex payoff activates the upper volatility: u = x^2 + sigma_high^2 t.
    GHeatSpec up = GHeatSpec::make(0.25, 2.25, [](double v) { return v * v; }, 1.0,
                                   9.5, 0.05);
    CHECK_THAT(g_heat_value(up, 0.0), WithinAbs(2.25, 1e-6));

    // Concave payoff activates the lower one: u = -x^2 - sigma_low^2 t.
    GHeatSpec down = GHeatSpec::make(0.25, 2.25, [](double v) { return -v * v; },
                                     1.0, 9.5, 0.05);
    CHECK_THAT(g_heat_value(down, 0.0), WithinAbs(-0.25, 1e-6));

    // Linear payoff: G(0) = 0, the initial condition never moves.
    GHeatSpec flat = GHeatSpec::make(0.25, 2.25, [](double v) { return v; }, 1.0,
                                     9.5, 0.05);
    const GHeatSolution sol = solve_g_heat(flat);
    for (std::size_t i = 0; i < sol.x.size(); i += 37)
        CHECK_THAT(sol.u[i], WithinAbs(sol.x[i], 1e-9));

    // Short-time consistency on a smooth payoff:
    // |u(t, x) - payoff(x)| <= sigma_high^2 * t * sup|payoff''|.
    GHeatSpec brief = GHeatSpec::make(1.0, 2.0, [](double v) { return std::cos(v); },
                                      0.025, 4.0, 0.05);
    const GHeatSolution early = solve_g_heat(brief);
    const double drift = std::abs(early.value_at(0.3) - std::cos(0.3));
    CHECK(drift <= 2.0 * 0.025);
    CHECK(drift > 0.0);
}

TEST_CASE("gheat: comparison principle and sublinearity") {
    const double t = 0.5, l = 8.0, dx = 0.05;
    auto solve = [&](std::function<double(double)> phi) {
        return solve_g_heat(GHeatSpec::make(0.25, 2.25, std::move(phi), t, l, dx));
    };

    // payoff1 <= payoff2 pointwise forces u1 <= u2 pointwise.
    const GHeatSolution u1 = solve(call_50);
    const GHeatSolution u2 = solve([](double v) { return std::abs(v - 0.5); });
    for (std::size_t i = 0; i < u1.u.size(); ++i)
        CHECK(u1.u[i] <= u2.u[i] + 1e-12);

    // u[phi1 + phi2] <= u[phi1] + u[phi2] pointwise.
    const GHeatSolution s1 = solve([](double v) { return v * v; });
    const GHeatSolution s2 = solve([](double v) { return -v * v; });
    const GHeatSolution s12 = solve([](double) { return 0.0; });
    for (std::size_t i = 0; i < s12.u.size(); ++i)
        CHECK(s12.u[i] <= s1.u[i] + s2.u[i] + 1e-8);

    const GHeatSolution k1 = solve(call_50);
    const GHeatSolution k2 = solve([](double v) { return std::max(-v - 0.25, 0.0); });
    const GHeatSolution k12 =
        solve([](double v) { return call_50(v) + std::max(-v - 0.25, 0.0); });
    for (std::size_t i = 0; i < k12.u.size(); ++i)
        CHECK(k12.u[i] <= k1.u[i] + k2.u[i] + 1e-8);
}

TEST_CASE("gheat: classical reduction matches the heat-kernel convolution") {
    // Equal bounds collapse G to the linear heat operator; targets are
    // Gaussian convolutions E[(x + s Z - 0.5)^+] frozen from an independent
    // high-precision evaluation.
    GHeatSpec call = GHeatSpec::make(2.25, 2.25, call_50, 1.0, 10.5, 0.02);
    CHECK_THAT(g_heat_value(call, 0.0), WithinAbs(0.381354171448608, 1e-3));
    CHECK_THAT(g_heat_value(call, 1.0), WithinAbs(0.881354171448608, 1e-3));
    CHECK_THAT(g_heat_value(call, -0.5), WithinAbs(0.226679470736605, 1e-3));

    GHeatSpec unit = GHeatSpec::make(1.0, 1.0, call_50, 1.0, 7.0, 0.02);
    CHECK_THAT(g_heat_value(unit, 0.0), WithinAbs(0.197796557401306, 1e-3));
}

TEST_CASE("gheat: csv slice export") {
    GHeatSpec s = GHeatSpec::make(1.0, 1.0, [](double v) { return v; }, 0.1, 1.0, 0.25);
    const GHeatSolution sol = solve_g_heat(s);
    std::ostringstream os;
    sol.write_csv(os);
    CHECK_THAT(os.str(), ContainsSubstring("x,u\n"));
    CHECK_THAT(os.str(), ContainsSubstring("-1,"));
}

TEST_CASE("gheat: pde and monte carlo agree on the volatility band") {
    const UncertaintySet theta = UncertaintySet::interval(0.25, 2.25);
    const std::vector<ScenarioPolicy> policies = {ScenarioPolicy::constant(0),
                                                  ScenarioPolicy::constant(1)};
    const TimeGrid grid = TimeGrid::uniform(256, 1.0);
    const std::size_t m = 2000;

    // Convex payoff: the PDE value is exactly sigma_high^2 * t = 2.25.
    GHeatSpec sq = GHeatSpec::make(0.25, 2.25, [](double v) { return v * v; }, 1.0,
                                   9.5, 0.05);
    const PdeMcReport rq = pde_vs_mc(sq, theta, policies, 0.75, grid, m, 31001u);
    CHECK_THAT(rq.pde_value, WithinAbs(2.25, 1e-6));
    CHECK(std::abs(rq.discrepancy) <=
          3.0 * rq.mc_upper_stderr + 0.02 * std::abs(rq.pde_value));

    // Kinked payoff: no closed form, dual-method agreement only.
    GHeatSpec call = GHeatSpec::make(0.25, 2.25, call_50, 1.0, 9.5, 0.02);
    const PdeMcReport rc = pde_vs_mc(call, theta, policies, 0.75, grid, m, 31002u);
    CHECK(std::abs(rc.discrepancy) <=
          3.0 * rc.mc_upper_stderr + 0.02 * std::abs(rc.pde_value));

    // Determinism: the MC arm reproduces bit-identically under the same seed.
    const PdeMcReport again = pde_vs_mc(sq, theta, policies, 0.75, grid, m, 31001u);
    CHECK(again.mc_upper == rq.mc_upper);

    // Band mismatch is rejected with the offending numbers.
    GHeatSpec off = sq;
    off.sigma_high_sq = 2.0;
    CHECK_THROWS_WITH(pde_vs_mc(off, theta, policies, 0.75, grid, m, 1u),
                      ContainsSubstring("does not match"));
}

TEST_CASE("gheat: the monte carlo target is invariant in the hurst index") {
    // t^{1/2-H} B^H_t has the law of sqrt(t) B_1 for every H, so the MC
    // estimate at fixed (t, x, payoff, band) must agree across H within
    // sampling error.  Exercised off t = 1 so the rescaling is nontrivial.
    const UncertaintySet theta = UncertaintySet::interval(0.25, 2.25);
    const std::vector<ScenarioPolicy> policies = {ScenarioPolicy::constant(0),
                                                  ScenarioPolicy::constant(1)};
    const TimeGrid grid = TimeGrid::uniform(256, 1.0);
    GHeatSpec sq = GHeatSpec::make(0.25, 2.25, [](double v) { return v * v; }, 0.25,
                                   5.0, 0.05);

    const PdeMcReport r6 = pde_vs_mc(sq, theta, policies, 0.6, grid, 2000, 77u);
    const PdeMcReport r9 = pde_vs_mc(sq, theta, policies, 0.9, grid, 2000, 77u);
    CHECK_THAT(r6.pde_value, WithinAbs(0.5625, 1e-6));  // sigma_high^2 * t
    CHECK_THAT(r9.pde_value, WithinAbs(0.5625, 1e-6));
    const double spread = std::abs(r6.mc_upper - r9.mc_upper);
    const double sigma = std::hypot(r6.mc_upper_stderr, r9.mc_upper_stderr);
    CHECK(spread <= 3.0 * sigma + 0.02 * 0.5625);
}
