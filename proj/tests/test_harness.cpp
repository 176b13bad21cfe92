#include <doctest.h>

#include <cmath>

#include "eths/harness.hpp"
#include "eths/io.hpp"
#include "eths/scheduler.hpp"

using namespace eths;

namespace {

ScenarioConfig small() {
    ScenarioConfig c = reference_scenario();
    c.params.n_jobs = 5;
    c.reschedule_budget.max_evaluations = 400;
    return c;
}

// Three machines over a coarse day, small enough for the exact solver.
ScenarioConfig exact_day() {
    ScenarioConfig c = reference_scenario();
    PlantParameters& p = c.params;
    p.machine_power = {20.0, 10.0, 8.0};
    p.op_time = {2, 3, 2};
    p.n_jobs = 3;
    p.horizon = 36;
    p.dt_hours = 24.0 / 36.0;
    p.buy_price = tou_prices(36, 0.330, 0.187, 14, 32);
    p.breakdown_rate = 0.0;
    c.noise.enabled = false;
    c.pv_predicted = sample_pv_profile(36, p.dt_hours, 30.0);
    return c;
}

}  // namespace

TEST_CASE("zero uncertainty leaves nothing to react to") {
    // with an optimal day plan no reschedule can improve on it
    ScenarioConfig c = exact_day();
    Schedule s1 = solve_bnb(build_offline_problem(c.params, c.pv_predicted), SolveBudget{});
    double cost[3];
    int i = 0;
    for (Method m : {Method::offline, Method::eths, Method::online}) {
        c.method = m;
        RunResult r = run_closed_loop(c, 11, &s1);
        CHECK(check_trajectory(r, c.params).ok());
        CHECK(r.metrics.finished_jobs == 3.0);
        CHECK(r.metrics.downtime_ticks == 0.0);
        cost[i++] = r.metrics.energy_cost;
        if (m == Method::eths) CHECK(r.metrics.reschedule_count == 0.0);
        if (m == Method::online) CHECK(r.metrics.reschedule_count == 36.0);
    }
    CHECK(cost[0] == doctest::Approx(s1.objective).epsilon(1e-9));
    CHECK(std::fabs(cost[1] - cost[0]) <= 1e-6);
    CHECK(std::fabs(cost[2] - cost[0]) <= 1e-6);
}

TEST_CASE("threshold extremes") {
    ScenarioConfig c = small();
    Schedule s1 = initial_schedule(c);
    c.method = Method::eths;
    c.trigger.epsilon = kInf;
    RunResult never = run_closed_loop(c, 3, &s1);
    CHECK(never.metrics.reschedule_count == 0.0);
    c.trigger.epsilon = 0.0;
    c.reschedule_budget.max_evaluations = 50;
    RunResult always = run_closed_loop(c, 3, &s1);
    CHECK(always.metrics.reschedule_count == 288.0);
    for (int k = 0; k < 288; ++k)
        if (always.log.J[k] > 0.0) CHECK(always.log.triggered[k] == 1);
    CHECK(check_trajectory(always, c.params).ok());
}

TEST_CASE("trigger log agrees with the reschedule count") {
    ScenarioConfig c = small();
    c.method = Method::eths;
    c.trigger.epsilon = 30.0;
    RunResult r = run_closed_loop(c, 5);
    int n = 0;
    for (int t : r.log.triggered) n += t;
    CHECK(n == r.log.count());
    CHECK(r.metrics.reschedule_count == n);
    CHECK(r.d_used.size() == static_cast<std::size_t>(n));
    for (int k : r.log.tau) CHECK(r.log.J[k] >= 30.0);
}

TEST_CASE("offline method loses jobs under breakdowns") {
    ScenarioConfig c = reference_scenario();
    c.method = Method::offline;
    Schedule s1 = initial_schedule(c);
    double total = 0.0;
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        RunResult r = run_closed_loop(c, seed, &s1);
        CHECK(check_trajectory(r, c.params).ok());
        total += r.metrics.finished_jobs;
    }
    CHECK(total < 100.0);
}

TEST_CASE("seed runs are independent of the worker count") {
    ScenarioConfig c = small();
    c.method = Method::eths;
    auto seeds = seed_list(1, 4);
    Schedule s1 = initial_schedule(c);
    c.threads = 1;
    MethodSummary a = run_seeds(c, seeds, "a", &s1, true);
    c.threads = 4;
    MethodSummary b = run_seeds(c, seeds, "b", &s1, true);
    REQUIRE(a.runs.size() == b.runs.size());
    for (std::size_t i = 0; i < a.runs.size(); ++i) {
        auto ra = check_trajectory(a.runs[i], c.params), rb = check_trajectory(b.runs[i], c.params);
        CHECK(metrics_json(a.runs[i], ra) == metrics_json(b.runs[i], rb));
    }
    CHECK(a.mean.cost_per_job == b.mean.cost_per_job);
}

TEST_CASE("aggregation") {
    std::vector<Metrics> v(3);
    v[0].cost_per_job = 1.0;
    v[1].cost_per_job = 2.0;
    v[2].cost_per_job = 3.0;
    CHECK(mean_of(v).cost_per_job == doctest::Approx(2.0));
    CHECK(stderr_of(v).cost_per_job == doctest::Approx(1.0 / std::sqrt(3.0)));
    CHECK(parse_method("online") == Method::online);
    CHECK_THROWS(parse_method("batch"));
    CHECK(parse_ablation("no_S2") == Ablation::no_s2);
}
