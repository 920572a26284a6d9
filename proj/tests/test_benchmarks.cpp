// Long-horizon benchmark behaviour of the published presets.

#include <gtest/gtest.h>

#include "esadapt/runner.hpp"

using namespace esadapt;

namespace {

const MesRun& state_dependent() {
    static const MesRun run = run_scenario(make_preset("state_dep_case2"));
    return run;
}

const MesRun& time_varying() {
    static const MesRun run = run_scenario(make_preset("timevar_case1"));
    return run;
}

double min_j(const MesRun& run, std::size_t upto) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < run.records.size() && k <= upto; ++k) best = std::min(best, run.records[k].J);
    return best;
}

}  // namespace

TEST(StateDependentBenchmark, FirstCostNearSix) {
    EXPECT_NEAR(state_dependent().records.front().J, 6.0, 3.0);
}

TEST(StateDependentBenchmark, CostBelowHalfWithin100Iterations) {
    EXPECT_LT(min_j(state_dependent(), 100), 0.5);
}

TEST(StateDependentBenchmark, RunsAreFiniteAndBounded) {
    for (const auto& r : state_dependent().records) {
        EXPECT_TRUE(std::isfinite(r.J));
        EXPECT_LT(r.max_z, 1.0);
    }
}

TEST(TimeVaryingBenchmark, FirstCostNearSeven) {
    EXPECT_NEAR(time_varying().records.front().J, 7.0, 3.5);
}

TEST(TimeVaryingBenchmark, CostBelowOneWithin20Iterations) {
    EXPECT_LT(min_j(time_varying(), 20), 1.0);
}

TEST(TimeVaryingBenchmark, FinalEstimateTracksTruth) {
    const auto& run = time_varying();
    const auto& last = run.records.back();
    for (int i = 0; i < 2; ++i) EXPECT_NEAR(run.final_state.delta_hat(i), last.delta_true(i), 0.3) << "channel " << i;
}

TEST(TimeVaryingBenchmark, CostStaysBelowInitialLevel) {
    const auto& run = time_varying();
    for (const auto& r : run.records) EXPECT_LT(r.J, 2.0 * run.records.front().J);
}
