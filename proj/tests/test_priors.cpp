#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <gfbm/priors.hpp>

using namespace gfbm;

namespace {

Eigen::MatrixXd mat2(double a, double b, double c, double d) {
    Eigen::MatrixXd m(2, 2);
    m << a, b, c, d;
    return m;
}

UncertaintySet example_set() {
    return UncertaintySet(2, {mat2(1.0, 0.3, 0.3, 1.0), mat2(0.25, 0.0, 0.0, 0.25)});
}

} // namespace

TEST_CASE("uncertainty set validation") {
    CHECK_THROWS_AS(UncertaintySet(0, {}), std::invalid_argument);
    CHECK_THROWS_AS(UncertaintySet(2, {}), std::invalid_argument);
    // wrong shape
    CHECK_THROWS_AS(UncertaintySet(2, {Eigen::MatrixXd::Identity(3, 3)}),
                    std::invalid_argument);
    // asymmetric
    CHECK_THROWS_AS(UncertaintySet(2, {mat2(1.0, 0.4, 0.1, 1.0)}),
                    std::invalid_argument);
    // indefinite: eigenvalues 1 +/- 2
    CHECK_THROWS_AS(UncertaintySet(2, {mat2(1.0, 2.0, 2.0, 1.0)}),
                    std::invalid_argument);
    // PSD with a zero eigenvalue is fine
    CHECK_NOTHROW(UncertaintySet(2, {mat2(1.0, 1.0, 1.0, 1.0)}));
}

TEST_CASE("variance bounds are vertex extrema of diagonal entries") {
    const UncertaintySet theta = example_set();
    auto [lo1, hi1] = sigma_bounds(theta, 1);
    CHECK(lo1 == 0.25);
    CHECK(hi1 == 1.0);
    auto [lo2, hi2] = sigma_bounds(theta, 2);
    CHECK(lo2 == 0.25);
    CHECK(hi2 == 1.0);
    CHECK_THROWS_AS(sigma_bounds(theta, 0), std::invalid_argument);
    CHECK_THROWS_AS(sigma_bounds(theta, 3), std::invalid_argument);

    const UncertaintySet single(1, {Eigen::MatrixXd::Constant(1, 1, 0.7)});
    auto [lo, hi] = sigma_bounds(single, 1);
    CHECK(lo == 0.7);
    CHECK(hi == 0.7);

    const UncertaintySet iv = UncertaintySet::interval(0.25, 2.25);
    auto [ilo, ihi] = sigma_bounds(iv, 1);
    CHECK(ilo == 0.25);
    CHECK(ihi == 2.25);
}

TEST_CASE("cross-component bounds by vertex enumeration") {
    const UncertaintySet theta = example_set();
    auto [lo, hi] = cross_bounds(theta, 1, 2);
    CHECK(hi == Catch::Approx(2.1).margin(1e-14));  // 2.6 - 0.5
    CHECK(lo == Catch::Approx(-0.9).margin(1e-14)); // -(1.4) + 0.5
    CHECK_THROWS_AS(cross_bounds(theta, 1, 1), std::invalid_argument);

    // singleton diagonal vertex: no uncertainty, zero correlation
    const UncertaintySet diag(2, {mat2(0.5, 0.0, 0.0, 1.5)});
    auto [dlo, dhi] = cross_bounds(diag, 1, 2);
    CHECK(dlo == Catch::Approx(0.0).margin(1e-14));
    CHECK(dhi == Catch::Approx(0.0).margin(1e-14));

    // set closed under flipping the off-diagonal sign: hi = -lo
    const UncertaintySet sym(2, {mat2(1.0, 0.3, 0.3, 1.0), mat2(1.0, -0.3, -0.3, 1.0)});
    auto [slo, shi] = cross_bounds(sym, 1, 2);
    CHECK(shi == Catch::Approx(-slo).margin(1e-14));
}

TEST_CASE("G-function is half the max vertex trace product") {
    const UncertaintySet iv = UncertaintySet::interval(0.25, 2.25);
    CHECK(g_function(iv, Eigen::MatrixXd::Constant(1, 1, 2.0)) ==
          Catch::Approx(2.25).margin(1e-14));
    CHECK(g_function(iv, Eigen::MatrixXd::Constant(1, 1, -2.0)) ==
          Catch::Approx(-0.25).margin(1e-14));
    CHECK(g_function(iv, Eigen::MatrixXd::Constant(1, 1, 0.0)) == 0.0);

    const UncertaintySet theta = example_set();
    CHECK_THROWS_AS(g_function(theta, mat2(1.0, 0.5, 0.0, 1.0)),
                    std::invalid_argument);
    CHECK(g_function(theta, Eigen::MatrixXd::Identity(2, 2)) ==
          Catch::Approx(1.0).margin(1e-14)); // trace 2 at the first vertex
}

TEST_CASE("simulation is deterministic and cumulative") {
    const UncertaintySet theta = example_set();
    const TimeGrid grid = TimeGrid::uniform(16, 1.0);
    const ScenarioPolicy pol = ScenarioPolicy::constant(0);

    PathBundle a = simulate_gbm(theta, pol, grid, 1234);
    PathBundle b = simulate_gbm(theta, pol, grid, 1234);
    CHECK(a.increments == b.increments);
    CHECK(a.values == b.values);

    PathBundle c = simulate_gbm(theta, pol, grid, 1235);
    CHECK(a.increments != c.increments);

    for (std::size_t i = 0; i < a.dim; ++i) {
        CHECK(a.value(i, 0) == 0.0);
        double run = 0.0;
        for (std::size_t k = 0; k < grid.cells(); ++k) {
            run += a.increment(i, k);
            CHECK(a.value(i, k + 1) == Catch::Approx(run).margin(1e-15));
        }
    }

    CHECK_THROWS_AS(simulate_gbm(theta, ScenarioPolicy::constant(7), grid, 1),
                    std::invalid_argument);
}

TEST_CASE("adapted policies depend only on the past") {
    // Cells shared between a grid and its extension see identical draws and
    // identical vertex choices, so the increments agree bit-for-bit.
    const UncertaintySet theta = example_set();
    const ScenarioPolicy pol = ScenarioPolicy::piecewise_switch(99);
    const TimeGrid full = TimeGrid::uniform(8, 1.0);
    const TimeGrid half = TimeGrid::uniform(4, 0.5);
    PathBundle a = simulate_gbm(theta, pol, full, 777);
    PathBundle b = simulate_gbm(theta, pol, half, 777);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t k = 0; k < 4; ++k)
            CHECK(a.increment(i, k) == b.increment(i, k));
}

TEST_CASE("one-cell increments have the vertex covariance") {
    const UncertaintySet theta = example_set();
    const TimeGrid one = TimeGrid::uniform(1, 1.0);
    const std::size_t m = 100000;
    double s11 = 0.0, s12 = 0.0, s22 = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
        PathBundle b = simulate_gbm(theta, ScenarioPolicy::constant(0), one, 5000 + r);
        const double x = b.increment(0, 0), y = b.increment(1, 0);
        s11 += x * x;
        s12 += x * y;
        s22 += y * y;
    }
    const double n = static_cast<double>(m);
    // Var of X^2 for unit-variance Gaussian is 2 -> stderr ~ sqrt(2/m)
    const double tol = 3.0 * std::sqrt(2.0 / n);
    CHECK(s11 / n == Catch::Approx(1.0).margin(tol));
    CHECK(s22 / n == Catch::Approx(1.0).margin(tol));
    CHECK(s12 / n == Catch::Approx(0.3).margin(tol));
}

TEST_CASE("estimate: constants, centering, and interval variance bounds") {
    const UncertaintySet iv = UncertaintySet::interval(0.25, 2.25);
    const TimeGrid grid = TimeGrid::uniform(8, 1.0);
    const std::vector<ScenarioPolicy> pols = {ScenarioPolicy::constant(0),
                                              ScenarioPolicy::constant(1)};

    SublinearEstimate c = estimate([](const PathBundle&) { return 3.25; }, iv,
                                   pols, grid, 100, 42);
    CHECK(c.upper == 3.25);
    CHECK(c.lower == 3.25);
    CHECK(c.upper_stderr == 0.0);

    auto sq = [](const PathBundle& b) {
        const double x = b.value(0, b.grid.cells());
        return x * x;
    };
    SublinearEstimate v = estimate(sq, iv, pols, grid, 4000, 42);
    CHECK(v.upper == Catch::Approx(2.25).margin(3.0 * v.upper_stderr));
    CHECK(v.lower == Catch::Approx(0.25).margin(3.0 * v.lower_stderr));
    CHECK(v.upper >= v.lower);
    CHECK(v.per_policy.size() == 2);

    auto lin = [](const PathBundle& b) { return b.value(0, b.grid.cells()); };
    SublinearEstimate z = estimate(lin, iv, pols, grid, 4000, 43);
    CHECK(z.upper == Catch::Approx(0.0).margin(3.0 * z.upper_stderr));
    CHECK(z.lower == Catch::Approx(0.0).margin(3.0 * z.lower_stderr));
}

TEST_CASE("estimate: antithetic pairing cancels odd payoffs exactly") {
    const UncertaintySet iv = UncertaintySet::interval(1.0, 1.0);
    const TimeGrid grid = TimeGrid::uniform(4, 1.0);
    const std::vector<ScenarioPolicy> pols = {
        ScenarioPolicy::antithetic(ScenarioPolicy::constant(0))};
    auto lin = [](const PathBundle& b) { return b.value(0, b.grid.cells()); };
    SublinearEstimate e = estimate(lin, iv, pols, grid, 2000, 7);
    CHECK(std::abs(e.upper) < 1e-12);
}

TEST_CASE("estimate: sublinearity and exact positive homogeneity") {
    const UncertaintySet theta = example_set();
    const TimeGrid grid = TimeGrid::uniform(8, 1.0);
    const std::vector<ScenarioPolicy> pols = {ScenarioPolicy::constant(0),
                                              ScenarioPolicy::constant(1),
                                              ScenarioPolicy::piecewise_switch(5)};
    auto x = [](const PathBundle& b) {
        const double v = b.value(0, b.grid.cells());
        return v * v;
    };
    auto y = [](const PathBundle& b) {
        const double v = b.value(1, b.grid.cells() / 2);
        return std::abs(v);
    };
    auto xy = [&](const PathBundle& b) { return x(b) + y(b); };
    auto x3 = [&](const PathBundle& b) { return 3.0 * x(b); };

    const std::size_t m = 2000;
    SublinearEstimate ex = estimate(x, theta, pols, grid, m, 11);
    SublinearEstimate ey = estimate(y, theta, pols, grid, m, 11);
    SublinearEstimate exy = estimate(xy, theta, pols, grid, m, 11);
    SublinearEstimate ex3 = estimate(x3, theta, pols, grid, m, 11);

    CHECK(exy.upper <= ex.upper + ey.upper +
                           6.0 * (ex.upper_stderr + ey.upper_stderr + exy.upper_stderr));
    // identical replicates make scaling exact
    CHECK(ex3.upper == Catch::Approx(3.0 * ex.upper).epsilon(1e-13));
    CHECK(ex3.upper_policy == ex.upper_policy);
}

TEST_CASE("estimate: scaling the uncertainty set scales variance estimates") {
    const TimeGrid grid = TimeGrid::uniform(8, 1.0);
    const UncertaintySet theta = example_set();
    std::vector<Eigen::MatrixXd> scaled;
    for (const auto& v : theta.vertices())
        scaled.push_back(4.0 * v);
    const UncertaintySet theta4(2, scaled);

    const std::vector<ScenarioPolicy> pols = {ScenarioPolicy::constant(0),
                                              ScenarioPolicy::constant(1)};
    auto sq = [](const PathBundle& b) {
        const double v = b.value(0, b.grid.cells());
        return v * v;
    };
    SublinearEstimate e1 = estimate(sq, theta, pols, grid, 1000, 21);
    SublinearEstimate e4 = estimate(sq, theta4, pols, grid, 1000, 21);
    CHECK(e4.upper == Catch::Approx(4.0 * e1.upper).epsilon(1e-12));
    CHECK(e4.upper_policy == e1.upper_policy);
}

TEST_CASE("estimate: cross-moment targets the max vertex off-diagonal") {
    const UncertaintySet theta = example_set();
    const TimeGrid grid = TimeGrid::uniform(16, 1.0);
    const std::vector<ScenarioPolicy> pols = {ScenarioPolicy::constant(0),
                                              ScenarioPolicy::constant(1)};
    auto cross = [](const PathBundle& b) {
        return b.value(0, 8) * b.value(1, 16); // B_{1/2}(1) * B_1(2)
    };
    SublinearEstimate e = estimate(cross, theta, pols, grid, 20000, 31);
    // (s ^ t) * max_vertex gamma_12 = 0.5 * 0.3
    CHECK(e.upper == Catch::Approx(0.15).margin(3.0 * e.upper_stderr));
}

TEST_CASE("estimate: non-finite payoffs are rejected beyond the threshold") {
    const UncertaintySet iv = UncertaintySet::interval(1.0, 1.0);
    const TimeGrid grid = TimeGrid::uniform(2, 1.0);
    const std::vector<ScenarioPolicy> pols = {ScenarioPolicy::constant(0)};
    std::size_t calls = 0;
    auto bad = [&calls](const PathBundle&) {
        return (++calls % 10 == 0) ? std::numeric_limits<double>::quiet_NaN() : 1.0;
    };
    CHECK_THROWS_AS(estimate(bad, iv, pols, grid, 100, 3), std::runtime_error);
    CHECK_THROWS_AS(estimate([](const PathBundle&) { return 0.0; }, iv, pols, grid,
                             1, 3),
                    std::invalid_argument);
    CHECK_THROWS_AS(estimate([](const PathBundle&) { return 0.0; }, iv, {}, grid,
                             10, 3),
                    std::invalid_argument);
}
