#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <gfbm/gfbm.hpp>
#include <gfbm/statistics.hpp>

using namespace gfbm;

namespace {

std::vector<GfbmPath> make_ensemble(const UncertaintySet& theta,
                                    const ScenarioPolicy& pol, const TimeGrid& grid,
                                    const KernelTable& table, std::size_t m,
                                    std::uint64_t seed0) {
    std::vector<GfbmPath> out;
    out.reserve(m);
    for (std::size_t r = 0; r < m; ++r)
        out.push_back(build_gfbm(simulate_gbm(theta, pol, grid, seed0 + r), table));
    return out;
}

} // namespace

TEST_CASE("h = 1/2 transform reproduces the raw path exactly") {
    const UncertaintySet theta = UncertaintySet::interval(0.25, 2.25);
    const TimeGrid grid = TimeGrid::uniform(32, 1.0);
    const KernelTable table = kernel_weights(0.5, grid);
    const PathBundle b = simulate_gbm(theta, ScenarioPolicy::constant(1), grid, 5);
    const GfbmPath p = build_gfbm(b, table);
    CHECK(p.values == b.values);
}

TEST_CASE("zero increments give the zero path") {
    const UncertaintySet zero(1, {Eigen::MatrixXd::Zero(1, 1)});
    const TimeGrid grid = TimeGrid::uniform(16, 1.0);
    const KernelTable table = kernel_weights(0.75, grid);
    const GfbmPath p =
        build_gfbm(simulate_gbm(zero, ScenarioPolicy::constant(0), grid, 9), table);
    for (double v : p.values)
        CHECK(v == 0.0);
}

TEST_CASE("selected-node evaluation matches the full transform") {
    const UncertaintySet theta = UncertaintySet::interval(1.0, 1.0);
    const TimeGrid grid = TimeGrid::uniform(64, 2.0);
    const KernelTable table = kernel_weights(0.75, grid);
    const PathBundle b = simulate_gbm(theta, ScenarioPolicy::constant(0), grid, 17);
    const GfbmPath full = build_gfbm(b, table);
    const std::vector<std::size_t> nodes = {0, 1, 32, 64};
    const Eigen::MatrixXd sel = build_gfbm_at(b, table, nodes);
    for (std::size_t c = 0; c < nodes.size(); ++c)
        CHECK(sel(0, static_cast<Eigen::Index>(c)) == full.value(0, nodes[c]));
    CHECK_THROWS_AS(build_gfbm_at(b, table, {65}), std::invalid_argument);

    const TimeGrid other = TimeGrid::uniform(32, 2.0);
    const KernelTable mismatched = kernel_weights(0.75, other);
    CHECK_THROWS_AS(build_gfbm(b, mismatched), std::invalid_argument);
}

TEST_CASE("subsampling restricts the trajectory to the coarse grid") {
    const UncertaintySet theta = UncertaintySet::interval(1.0, 1.0);
    const TimeGrid grid = TimeGrid::uniform(32, 1.0);
    const KernelTable table = kernel_weights(0.6, grid);
    const GfbmPath p =
        build_gfbm(simulate_gbm(theta, ScenarioPolicy::constant(0), grid, 23), table);
    const GfbmPath q = subsample_path(p, 4);
    REQUIRE(q.grid.cells() == 8);
    for (std::size_t k = 0; k <= 8; ++k) {
        CHECK(q.grid[k] == p.grid[4 * k]);
        CHECK(q.value(0, k) == p.value(0, 4 * k));
    }
    CHECK_THROWS_AS(subsample_path(p, 5), std::invalid_argument);
}

TEST_CASE("variance and covariance laws at the singleton prior") {
    const UncertaintySet one = UncertaintySet::interval(1.0, 1.0);
    const TimeGrid grid = TimeGrid::uniform(256, 1.0);
    const KernelTable table = kernel_weights(0.75, grid);
    const std::size_t m = 4000;
    std::vector<double> b_half(m), b_one(m);
    for (std::size_t r = 0; r < m; ++r) {
        const PathBundle b = simulate_gbm(one, ScenarioPolicy::constant(0), grid, 100 + r);
        const Eigen::MatrixXd v = build_gfbm_at(b, table, {128, 256});
        b_half[r] = v(0, 0);
        b_one[r] = v(0, 1);
    }
    std::vector<double> sq(m), cross(m);
    for (std::size_t r = 0; r < m; ++r) {
        sq[r] = b_one[r] * b_one[r];
        cross[r] = b_half[r] * b_one[r];
    }
    const MeanStderr var = mean_stderr(sq);
    CHECK(var.mean == Catch::Approx(1.0).margin(3.0 * var.stderr_ + 0.02));
    const MeanStderr cov = mean_stderr(cross);
    // 0.5 (1 + 0.5^{1.5} - 0.5^{1.5}) = 0.5
    CHECK(cov.mean == Catch::Approx(0.5).margin(3.0 * cov.stderr_ + 0.01));
}

TEST_CASE("covariance-factorization oracle basics") {
    const TimeGrid grid = TimeGrid::uniform(128, 1.0);
    FbmOracle oracle(0.5, grid);
    const std::vector<double> a = oracle.sample(42);
    const std::vector<double> b = oracle.sample(42);
    CHECK(a == b);
    CHECK(a[0] == 0.0);
    CHECK(a.size() == 129);

    // h = 1/2: increments are iid N(0, dt)
    const TimeGrid fine = TimeGrid::uniform(2048, 1.0);
    FbmOracle bm(0.5, fine);
    const std::vector<double> p = bm.sample(7);
    std::vector<double> inc(2048);
    for (std::size_t k = 0; k < 2048; ++k)
        inc[k] = p[k + 1] - p[k];
    const JbResult jb = jarque_bera(inc);
    CHECK(jb.p_value > 0.01);
    double var = 0.0;
    for (double d : inc)
        var += d * d;
    var /= 2048.0;
    CHECK(var == Catch::Approx(1.0 / 2048.0).epsilon(3.0 * std::sqrt(2.0 / 2048.0)));

    CHECK_THROWS_AS(FbmOracle(0.75, TimeGrid::uniform(5000, 1.0)),
                    std::invalid_argument);
}

TEST_CASE("pipeline marginal matches the oracle distribution (KS)") {
    const double h = 0.75;
    const TimeGrid grid = TimeGrid::uniform(128, 1.0);
    const KernelTable table = kernel_weights(h, grid);
    const UncertaintySet one = UncertaintySet::interval(1.0, 1.0);
    const FbmOracle oracle(h, grid);
    const std::size_t m = 2000;
    std::vector<double> pipeline(m), reference(m);
    for (std::size_t r = 0; r < m; ++r) {
        const PathBundle b = simulate_gbm(one, ScenarioPolicy::constant(0), grid, 900 + r);
        pipeline[r] = build_gfbm_at(b, table, {128})(0, 0);
        reference[r] = oracle.sample(51000 + r)[128];
    }
    const KsResult ks = ks_two_sample(pipeline, reference);
    CHECK(ks.p_value > 0.001);
}

TEST_CASE("p-variation of a straight-line path") {
    const std::size_t n = 64;
    GfbmPath p{TimeGrid::uniform(n, 1.0)};
    p.dim = 1;
    p.h = 0.75;
    p.values.resize(n + 1);
    for (std::size_t k = 0; k <= n; ++k)
        p.values[k] = p.grid[k];
    CHECK(p_variation(p, 2.0) == Catch::Approx(1.0 / n).epsilon(1e-12));
    CHECK(p_variation(p, 1.0) == Catch::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(p_variation(p, 0.0), std::invalid_argument);
}

TEST_CASE("Hoelder estimator on deterministic and fractional paths") {
    const std::size_t n = 1024;
    GfbmPath line{TimeGrid::uniform(n, 1.0)};
    line.dim = 1;
    line.h = 0.5;
    line.values.resize(n + 1);
    for (std::size_t k = 0; k <= n; ++k)
        line.values[k] = line.grid[k];
    CHECK(holder_exponent(line) == Catch::Approx(1.0).margin(1e-9));

    // single h = 0.75 oracle path: estimate lands in a broad sanity window
    const TimeGrid grid = TimeGrid::uniform(n, 1.0);
    const FbmOracle oracle(0.75, grid);
    GfbmPath p{grid};
    p.dim = 1;
    p.h = 0.75;
    p.values = oracle.sample(3);
    const double est = holder_exponent(p);
    CHECK(est > 0.4);
    CHECK(est < 1.0);

    GfbmPath tiny{TimeGrid::uniform(16, 1.0)};
    tiny.dim = 1;
    tiny.values.assign(17, 0.0);
    CHECK_THROWS_AS(holder_exponent(tiny), std::invalid_argument);
}

TEST_CASE("difference quotients grow under refinement") {
    const UncertaintySet one = UncertaintySet::interval(1.0, 1.0);
    const TimeGrid grid = TimeGrid::uniform(1024, 1.0);
    const KernelTable table = kernel_weights(0.75, grid);
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        const GfbmPath fine =
            build_gfbm(simulate_gbm(one, ScenarioPolicy::constant(0), grid, seed), table);
        const GfbmPath mid = subsample_path(fine, 2);
        const GfbmPath coarse = subsample_path(fine, 4);
        const double qf = difference_quotient_max(fine);
        const double qm = difference_quotient_max(mid);
        const double qc = difference_quotient_max(coarse);
        CHECK(qc <= qm);
        CHECK(qm <= qf);
    }
}

TEST_CASE("ensemble verifiers: zero-time moments, ordering, classical lags") {
    const UncertaintySet one = UncertaintySet::interval(1.0, 1.0);
    const TimeGrid grid = TimeGrid::uniform(64, 8.0); // 8 cells per unit
    const KernelTable table = kernel_weights(0.5, grid);
    const std::vector<GfbmPath> paths =
        make_ensemble(one, ScenarioPolicy::constant(0), grid, table, 500, 4000);

    const MeanStderr zero = empirical_second_moment(paths, 0, 0, 0.0, 1.0);
    CHECK(zero.mean == 0.0);
    CHECK(zero.stderr_ == 0.0);
    CHECK_THROWS_AS(empirical_second_moment(paths, 0, 0, 0.33, 1.0),
                    std::invalid_argument);

    // disjoint Brownian increments are uncorrelated
    const MeanStderr disj = increment_covariance(paths, 0, 0.0, 1.0, 2.0, 4.0);
    CHECK(disj.mean == Catch::Approx(0.0).margin(3.0 * disj.stderr_));
    CHECK_THROWS_AS(increment_covariance(paths, 0, 0.0, 2.0, 1.0, 4.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(increment_covariance(paths, 0, 0.0, 1.0, 1.0, 4.0),
                    std::invalid_argument);

    const AutocovResult lag1 = autocovariance(paths, 0, 1);
    CHECK(lag1.rho_upper.mean ==
          Catch::Approx(0.0).margin(3.0 * lag1.rho_upper.stderr_));
    CHECK_THROWS_AS(autocovariance(paths, 0, 8), std::invalid_argument);

    // moment_scaling at m = 2 equals the diagonal second moment
    const MeanStderr m2 = moment_scaling(paths, 0, 2, 4.0);
    const MeanStderr diag = empirical_second_moment(paths, 0, 0, 4.0, 4.0);
    CHECK(m2.mean == Catch::Approx(diag.mean).epsilon(1e-13));
}
