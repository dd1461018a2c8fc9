// Acceptance gate: one test case per published criterion, in registry order.
// Each case prints a single PASS/FAIL line with the measured quantity and the
// pinned tolerance, then asserts the verdict. Expensive fixtures (kernel
// weight tables, path ensembles) live in one shared context so the whole gate
// runs in minutes on a single core.
#include <catch2/catch_amalgamated.hpp>

#include <iostream>
#include <string>

#include <gfbm/checks.hpp>

using namespace gfbm;

namespace {

AcceptanceContext& shared_context() {
    static AcceptanceContext ctx = [] {
        AcceptanceOptions opts;
        std::cout << "acceptance: master seed " << opts.seed << ", jobs "
                  << opts.jobs << std::endl;
        return AcceptanceContext(opts);
    }();
    return ctx;
}

CheckResult run_named(const std::string& name) {
    const auto& reg = acceptance_registry();
    for (std::size_t i = 0; i < reg.size(); ++i) {
        if (name == reg[i].name) {
            const CheckResult r = reg[i].fn(shared_context());
            std::cout << format_check_line(i + 1, reg.size(), r) << std::endl;
            return r;
        }
    }
    FAIL("no acceptance check named " << name);
    return CheckResult{};
}

} // namespace

TEST_CASE("kernel inner products match the closed-form covariance", "[acceptance]") {
    const CheckResult r = run_named("kernel-identity");
    INFO(r.detail);
    REQUIRE(r.pass);
}

TEST_CASE("kernel obeys the self-similar rescaling law", "[acceptance]") {
    const CheckResult r = run_named("kernel-scaling");
    INFO(r.detail);
    REQUIRE(r.pass);
}

TEST_CASE("constant-volatility scenarios hit the predicted covariance", "[acceptance]") {
    const CheckResult r = run_named("covariance-law");
    INFO(r.detail);
    REQUIRE(r.pass);
}

TEST_CASE("cross moments stay inside the sublinear bound", "[acceptance]") {
    const CheckResult r = run_named("cross-moment-bound");
    INFO(r.detail);
    REQUIRE(r.pass);
}

TEST_CASE("increments are stationary and second moments self-similar", "[acceptance]") {
    const CheckResult r = run_named("stationarity-self-similarity");
    INFO(r.detail);
    REQUIRE(r.pass);
}

TEST_CASE("unit-lag autocovariances match the fractional profile", "[acceptance]") {
    const CheckResult r = run_named("increment-autocovariance");
    INFO(r.detail);
    REQUIRE(r.pass);
}

TEST_CASE("autocovariance decays at the long-memory rate", "[acceptance]") {
    const CheckResult r = run_named("long-memory-rate");
    INFO(r.detail);
    REQUIRE(r.pass);
}

TEST_CASE("squared-increment sums vanish at the predicted rate", "[acceptance]") {
    const CheckResult r = run_named("quadratic-variation-rate");
    INFO(r.detail);
    REQUIRE(r.pass);
}

TEST_CASE("paths land in the expected regularity window", "[acceptance]") {
    const CheckResult r = run_named("holder-regularity");
    INFO(r.detail);
    REQUIRE(r.pass);
}

TEST_CASE("fractional operators hit their pinned values", "[acceptance]") {
    const CheckResult r = run_named("fractional-operators");
    INFO(r.detail);
    REQUIRE(r.pass);
}

TEST_CASE("first-order change of variables closes pathwise", "[acceptance]") {
    const CheckResult r = run_named("ito-formula");
    INFO(r.detail);
    REQUIRE(r.pass);
}

TEST_CASE("pathwise integrals respect the norm bound", "[acceptance]") {
    const CheckResult r = run_named("pathwise-integral-bound");
    INFO(r.detail);
    REQUIRE(r.pass);
}

TEST_CASE("geometric equation solves to the driver exponential", "[acceptance]") {
    const CheckResult r = run_named("sde-solver");
    INFO(r.detail);
    REQUIRE(r.pass);
}

TEST_CASE("nonlinear heat values match scenario Monte Carlo", "[acceptance]") {
    const CheckResult r = run_named("gheat-duality");
    INFO(r.detail);
    REQUIRE(r.pass);
}

TEST_CASE("zero-cost strategy never dips and ends positive", "[acceptance]") {
    const CheckResult r = run_named("arbitrage-wealth");
    INFO(r.detail);
    REQUIRE(r.pass);
}

TEST_CASE("singleton prior reduces to classical fractional motion", "[acceptance]") {
    const CheckResult r = run_named("classical-reduction");
    INFO(r.detail);
    REQUIRE(r.pass);
}

TEST_CASE("registry is complete and order-stable", "[acceptance]") {
    const auto& reg = acceptance_registry();
    REQUIRE(reg.size() == 16);
    for (const NamedCheck& c : reg)
        REQUIRE(c.fn != nullptr);
}
