#include <benchmark/benchmark.h>

#include <random>

#include "eths/controller.hpp"
#include "eths/dispatch.hpp"
#include "eths/harness.hpp"
#include "eths/scheduler.hpp"

using namespace eths;

namespace {

const PlantParameters& params() {
    static const PlantParameters p = reference_parameters();
    return p;
}

const std::vector<double>& pv() {
    static const std::vector<double> v = sample_pv_profile(params().horizon, params().dt_hours);
    return v;
}

void BM_DispatchDay(benchmark::State& state) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 160.0);
    std::vector<double> load(params().horizon);
    for (double& l : load) l = u(rng);
    for (auto _ : state) benchmark::DoNotOptimize(dispatch_energy(load, pv(), params()).cost);
}
BENCHMARK(BM_DispatchDay)->Unit(benchmark::kMicrosecond);

void BM_PlanCost(benchmark::State& state) {
    Problem P = build_offline_problem(params(), pv());
    Plan plan = asap_plan(P);
    for (auto _ : state) benchmark::DoNotOptimize(plan_cost(P, plan));
}
BENCHMARK(BM_PlanCost)->Unit(benchmark::kMicrosecond);

void BM_SolveOffline(benchmark::State& state) {
    Problem P = build_offline_problem(params(), pv());
    SolveBudget b;
    b.max_evaluations = state.range(0);
    for (auto _ : state) benchmark::DoNotOptimize(solve(P, b).objective);
}
BENCHMARK(BM_SolveOffline)->Arg(200)->Arg(1500)->Unit(benchmark::kMillisecond);

void BM_Adjust(benchmark::State& state) {
    const PlantParameters& p = params();
    FrozenPd fz{std::vector<std::vector<int>>(10, {0}), std::vector<std::vector<int>>(10, {0}), {0.0}};
    fz.machine_on[0] = {1};
    fz.op_start[0] = {1};
    Observation ob{ShopState::fresh(10, 150), MachineHealth(10), 25.0, {40.0}};
    ConvexPwl w = ConvexPwl::from_points({p.soc_min(), 25.0, p.soc_max()}, {0.5, 0.0, 0.5});
    for (auto _ : state) benchmark::DoNotOptimize(adjust(150, ob, fz, 0.0, w, p).flows.cost);
}
BENCHMARK(BM_Adjust)->Unit(benchmark::kMicrosecond);

void BM_ClosedLoopEths(benchmark::State& state) {
    ScenarioConfig c = reference_scenario();
    c.method = Method::eths;
    Schedule s1 = initial_schedule(c);
    std::uint64_t seed = 1;
    for (auto _ : state) benchmark::DoNotOptimize(run_closed_loop(c, seed++, &s1).metrics.energy_cost);
}
BENCHMARK(BM_ClosedLoopEths)->Unit(benchmark::kMillisecond)->Iterations(3);

}  // namespace

BENCHMARK_MAIN();
