// Nonlinear-expectation pricing demo: the worst-case value of a payoff on
// the fractional terminal marginal solves a nonlinear heat equation in the
// variance variable.  Prints the upper value of a call-type payoff across
// strikes, next to scenario Monte Carlo upper estimates.
//
//   ./option_band [H] [replicates]
#include <cstdio>
#include <cstdlib>
#include <vector>

#include <gfbm/gheat.hpp>
#include <gfbm/priors.hpp>
#include <gfbm/volterra.hpp>

using namespace gfbm;

int main(int argc, char** argv) {
    const double h = argc > 1 ? std::atof(argv[1]) : 0.75;
    const std::size_t m = argc > 2 ? static_cast<std::size_t>(std::atoi(argv[2])) : 4000;

    const UncertaintySet theta = UncertaintySet::interval(0.25, 2.25);
    const TimeGrid grid = TimeGrid::uniform(512, 1.0);
    const KernelTable table = kernel_weights(h, grid);
    const std::vector<ScenarioPolicy> scenarios = {
        ScenarioPolicy::constant(0),
        ScenarioPolicy::constant(1),
        ScenarioPolicy::piecewise_switch(11u),
    };

    std::printf("upper value of (B_1 - K)^+ under volatility uncertainty, H = %.2f\n\n",
                h);
    std::printf("%8s %14s %14s %10s\n", "strike", "heat equation", "MC upper",
                "stderr");
    for (const double strike : {0.0, 0.25, 0.5, 1.0}) {
        GHeatSpec spec = GHeatSpec::make(
            0.25, 2.25,
            [strike](double v) { return v > strike ? v - strike : 0.0; }, 1.0, 9.5,
            0.05);
        const PdeMcReport rep =
            pde_vs_mc(spec, theta, scenarios, table, m, 5150u + static_cast<std::uint64_t>(100 * strike));
        std::printf("%8.2f %14.5f %14.5f %10.5f\n", strike, rep.pde_value,
                    rep.mc_upper, rep.mc_upper_stderr);
    }
    std::printf("\nthe Monte Carlo column maximizes over %zu scenario replicates "
                "per policy;\nit approaches the heat-equation value from below as "
                "the scenario family grows.\n",
                m);
    return 0;
}
