#include <doctest.h>

#include <cmath>

#include "eths/controller.hpp"
#include "eths/errors.hpp"

using namespace eths;

namespace {

std::vector<MachineHealth> history(int ticks, int machines, int down_machine = -1, int down_ticks = 0) {
    std::vector<MachineHealth> h(ticks, MachineHealth(machines));
    for (int t = 0; t < down_ticks && t < ticks; ++t) h[ticks - 1 - t][down_machine].up = false;
    return h;
}

ConvexPwl flat_value(const PlantParameters& p) { return ConvexPwl::from_points({p.soc_min(), p.soc_max()}, {0.0, 0.0}); }

FrozenPd machine_one_running(int M) {
    FrozenPd fz{std::vector<std::vector<int>>(M, {0}), std::vector<std::vector<int>>(M, {0}), {0.0}};
    fz.machine_on[0] = {1};
    fz.op_start[0] = {1};
    return fz;
}

}  // namespace

TEST_CASE("evaluation function") {
    TriggerConfig cfg;
    std::vector<double> pred(20, 30.0);
    CHECK(evaluate_J(10, PvTrace{pred, pred}, history(5, 10), cfg) == 0.0);
    CHECK(evaluate_J(10, PvTrace{pred, pred}, history(20, 10, 0, 12), cfg) == doctest::Approx(12.0));
    std::vector<double> obs(20, 25.0);
    CHECK(evaluate_J(10, PvTrace{pred, obs}, history(5, 10), cfg) == doctest::Approx(50.0));
    cfg.pv_error_weight = 0.5;
    cfg.breakdown_weight = 2.0;
    CHECK(evaluate_J(10, PvTrace{pred, obs}, history(20, 10, 3, 4), cfg) == doctest::Approx(25.0 + 8.0));
}

TEST_CASE("trigger threshold is inclusive") {
    TriggerConfig cfg;
    CHECK_FALSE(should_trigger(0.0, cfg));
    CHECK(should_trigger(70.0, cfg));
    CHECK_FALSE(should_trigger(69.999, cfg));
    cfg.epsilon = kInf;
    CHECK_FALSE(should_trigger(1e300, cfg));
    cfg.epsilon = 0.0;
    CHECK(should_trigger(0.0, cfg));
}

TEST_CASE("deadline buffer") {
    CHECK(compute_buffer_d(history(30, 10), 246, 288) == 0);
    CHECK(compute_buffer_d(history(30, 10, 2, 7), 246, 288) == 7);
    std::vector<MachineHealth> h(8, MachineHealth(10));
    for (auto& t : h)
        for (auto& m : t) m.up = false;  // 80 machine-ticks down
    CHECK(downtime_ticks(h) == 80);
    CHECK(compute_buffer_d(h, 246, 288) == 42);
    CHECK(compute_buffer_d(h, 246, 288, BufferPolicy::none) == 0);
}

TEST_CASE("adjustment absorbs a pv shortfall through the grid") {
    PlantParameters p = reference_parameters();
    const int k = 60;  // off-peak
    FrozenPd fz = machine_one_running(10);
    Observation planned{ShopState::fresh(10, k), MachineHealth(10), p.soc_min(), {30.0}};
    AdjustResult a = adjust(k, planned, fz, 0.0, flat_value(p), p);
    Observation seen = planned;
    seen.pv = {20.0};
    AdjustResult b = adjust(k, seen, fz, a.flows.cost, flat_value(p), p);
    CHECK(a.flows.buy == doctest::Approx(50.63 - 30.0));
    CHECK(b.flows.buy - a.flows.buy == doctest::Approx(10.0));
    CHECK(b.flows.discharge == 0.0);
    CHECK(b.gap == doctest::Approx(10.0 * p.dt_hours * 0.187));
}

TEST_CASE("adjustment sells a pv surplus when the store is full") {
    PlantParameters p = reference_parameters();
    const int k = 60;
    FrozenPd fz = machine_one_running(10);
    Observation planned{ShopState::fresh(10, k), MachineHealth(10), p.soc_max(), {60.0}};
    AdjustResult a = adjust(k, planned, fz, 0.0, flat_value(p), p);
    Observation seen = planned;
    seen.pv = {70.0};
    AdjustResult b = adjust(k, seen, fz, a.flows.cost, flat_value(p), p);
    // stored energy is worth nothing here, so the store empties into the grid
    CHECK(a.flows.sell - a.flows.discharge == doctest::Approx(60.0 - 50.63));
    CHECK(b.flows.sell - a.flows.sell == doctest::Approx(10.0));
    CHECK(b.flows.charge == 0.0);
}

TEST_CASE("adjustment with absolute gap tracks the scheduled cost") {
    PlantParameters p = reference_parameters();
    const int k = 60;
    FrozenPd fz = machine_one_running(10);
    Observation ob{ShopState::fresh(10, k), MachineHealth(10), 25.0, {20.0}};
    ConvexPwl w = ConvexPwl::from_points({p.soc_min(), 25.0, p.soc_max()}, {0.5, 0.0, 0.5});
    AdjustResult base = adjust(k, ob, fz, 0.0, w, p);
    double target = base.flows.cost + 0.05;
    AdjustResult g = adjust(k, ob, fz, target, w, p, StateTaxonomy::standard(), true);
    CHECK(std::fabs(g.gap) <= std::fabs(base.flows.cost - target) + 1e-12);
}

TEST_CASE("forecast revision") {
    std::vector<double> pred{0.0, 10.0, 10.0, 10.0, 0.0};
    ForecastReviser r(pred, 0.5);
    r.observe(1, 14.0);
    CHECK(r.bias() == doctest::Approx(2.0));
    auto f = r.forecast(1, 14.0);
    REQUIRE(f.size() == 4u);
    CHECK(f[0] == 14.0);
    CHECK(f[1] == doctest::Approx(12.0));
    CHECK(f[3] == 0.0);  // night stays dark
    r.observe(2, 0.0);
    CHECK(r.bias() == doctest::Approx(-4.0));
    CHECK(r.forecast(2, 0.0)[1] == doctest::Approx(6.0));
}

TEST_CASE("reschedule at the start with exact data reproduces the day plan") {
    PlantParameters p = reference_parameters();
    auto pv = sample_pv_profile(p.horizon, p.dt_hours);
    Problem P = build_offline_problem(p, pv);
    SolveBudget b;
    Schedule s1 = solve(P, b);
    Observation ob{ShopState::fresh(10), MachineHealth(10), 25.0, pv};
    b.seed = 99;
    RescheduleResult r = reschedule(0, ob, 0, p, StateTaxonomy::standard(), b, &s1.plan);
    CHECK(r.schedule.objective == doctest::Approx(s1.objective).epsilon(1e-9));
    CHECK(r.d_used == 0);
}

TEST_CASE("reschedule halves an oversized buffer") {
    PlantParameters p = reference_parameters();
    auto pv = sample_pv_profile(p.horizon, p.dt_hours);
    Observation ob{ShopState::fresh(10), MachineHealth(10), 25.0, pv};
    SolveBudget b;
    b.max_evaluations = 200;
    RescheduleResult r = reschedule(0, ob, 60, p, StateTaxonomy::standard(), b, nullptr);
    CHECK(r.d_used == 30);
    Problem P = build_online_problem(p, 0, ob, StateTaxonomy::standard(), 288, 30, std::nullopt);
    CHECK(check_feasibility(r.schedule, P).ok());
    int last = 0;
    for (int t = 0; t < 288; ++t)
        if (r.schedule.machine_on[9][t]) last = t + 1;
    CHECK(last <= 258);

    p.n_jobs = 40;
    CHECK_THROWS_AS(reschedule(0, ob, 10, p, StateTaxonomy::standard(), b, nullptr), InfeasibleError);
}

TEST_CASE("recovery after a long stoppage compresses the remaining work") {
    PlantParameters p = reference_parameters();
    auto pv = sample_pv_profile(p.horizon, p.dt_hours);
    // 10 jobs are still to start at tick 120 and machine 1 is down
    ShopState st = ShopState::fresh(10, 120);
    for (int i = 0; i < 10; ++i) {
        st.machines[i].done = 15;
        st.machines[i].started = 15;
    }
    st.machines[0].up = false;
    MachineHealth h(10);
    h[0].up = false;
    Observation ob{st, h, 25.0, std::vector<double>(pv.begin() + 120, pv.end())};
    FlowShop fs{&p, st, 25, 288, 288};
    int lb = fs.completion_lower_bound();
    CHECK(lb <= 288);
    SolveBudget b;
    b.max_evaluations = 300;
    RescheduleResult r = reschedule(120, ob, 288 - lb + 5, p, StateTaxonomy::standard(), b, nullptr);
    CHECK(288 - r.d_used >= lb);
    CHECK(r.schedule.ops_finished[9].back() == 25);
    CHECK(r.schedule.machine_on[0][0] == 0);
}
