#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "eths/errors.hpp"
#include "eths/problem.hpp"
#include "eths/scheduler.hpp"

using namespace eths;

namespace {

Schedule idle_schedule(const Problem& P) {
    const int T = P.length(), M = static_cast<int>(P.v_on.size());
    Schedule s;
    s.k0 = P.k0;
    s.k1 = P.k1;
    s.pv = P.pv;
    s.machine_on.assign(M, std::vector<int>(T, 0));
    s.op_start.assign(M, std::vector<int>(T, 0));
    s.ops_finished.assign(M, std::vector<int>(T + 1, 0));
    s.turbine.assign(T, 0.0);
    s.charge.assign(T, 0.0);
    s.discharge.assign(T, 0.0);
    s.buy.assign(T, 0.0);
    s.sell.assign(T, 0.0);
    s.soc.assign(T + 1, P.soc0);
    return s;
}

int count_id(const ViolationReport& r, const std::string& id) {
    return static_cast<int>(std::count_if(r.items.begin(), r.items.end(), [&](const Violation& v) { return v.id == id; }));
}

const Schedule& reference_solution() {
    static const Schedule s = [] {
        PlantParameters p = reference_parameters();
        Problem P = build_offline_problem(p, sample_pv_profile(p.horizon, p.dt_hours));
        return solve(P, SolveBudget{});
    }();
    return s;
}

}  // namespace

TEST_CASE("taxonomy") {
    StateTaxonomy t = StateTaxonomy::standard();
    CHECK(t.of(Family::pv) == StateClass::non_dispatchable);
    CHECK(t.of(Family::machine_on) == StateClass::partially_dispatchable);
    CHECK(t.of(Family::turbine) == StateClass::partially_dispatchable);
    CHECK(t.of(Family::soc) == StateClass::fully_dispatchable);
    CHECK(t.of(Family::sell) == StateClass::fully_dispatchable);
    CHECK_NOTHROW(t.validate(288));
    t.windows[static_cast<int>(Family::turbine)] = {{10, 5}};
    CHECK_THROWS_AS(t.validate(288), ValidationError);
}

TEST_CASE("offline problem bounds") {
    PlantParameters p = reference_parameters();
    auto pv = sample_pv_profile(p.horizon, p.dt_hours);
    Problem P = build_offline_problem(p, pv);
    CHECK(P.shop_view().completion_lower_bound() == 246);
    CHECK(P.deadline == 288);
    CHECK(flow_shop_makespan(p.op_time, 25) == 246);
    CHECK(flow_shop_makespan(p.op_time, 40) == 366);
    p.n_jobs = 40;
    CHECK_THROWS_AS(build_offline_problem(p, pv), InfeasibleError);
    try {
        build_offline_problem(p, pv);
    } catch (const InfeasibleError& e) {
        CHECK(std::string(e.what()).find("366") != std::string::npos);
    }
}

TEST_CASE("tightened deadline at the bottleneck boundary") {
    PlantParameters p = reference_parameters();
    Observation ob{ShopState::fresh(10), MachineHealth(10), 25.0, sample_pv_profile(p.horizon, p.dt_hours)};
    auto tax = StateTaxonomy::standard();
    Problem P = build_online_problem(p, 0, ob, tax, 288, 42, std::nullopt);
    CHECK(P.deadline == 246);
    CHECK_THROWS_AS(build_online_problem(p, 0, ob, tax, 288, 43, std::nullopt), InfeasibleError);
}

TEST_CASE("single tick adjustment problem has only the five energy states free") {
    PlantParameters p = reference_parameters();
    Observation ob{ShopState::fresh(10, 40), MachineHealth(10), 25.0, {0.0}};
    FrozenPd fz{std::vector<std::vector<int>>(10, {0}), std::vector<std::vector<int>>(10, {0}), {0.0}};
    fz.machine_on[0] = {1};
    fz.op_start[0] = {1};
    Problem P = build_online_problem(p, 40, ob, StateTaxonomy::standard(), 0, 0, fz);
    CHECK(P.length() == 1);
    CHECK(P.free_variables() == 5);
    CHECK(P.free_integer_variables() == 0);
    int unfrozen_soc = 0;
    for (const Variable& v : P.vars)
        if (!v.frozen && v.family == Family::soc) ++unfrozen_soc;
    CHECK(unfrozen_soc == 1);
}

TEST_CASE("idle schedule of the empty job set") {
    PlantParameters p = reference_parameters();
    p.n_jobs = 0;
    Problem P = build_offline_problem(p, std::vector<double>(288, 0.0));
    Schedule idle = idle_schedule(P);
    ViolationReport r = check_feasibility(idle, P);
    CHECK(r.ok());
    CHECK(evaluate_objective(idle, P) == doctest::Approx(0.864));
    Schedule s = solve(P, SolveBudget{});
    CHECK(s.objective == doctest::Approx(0.864));
    CHECK(check_feasibility(s, P).ok());
}

TEST_CASE("checker flags a soc below the band") {
    PlantParameters p = reference_parameters();
    p.n_jobs = 0;
    Problem P = build_offline_problem(p, std::vector<double>(288, 0.0));
    Schedule s = idle_schedule(P);
    s.soc[100] = 4.9;
    ViolationReport r = check_feasibility(s, P);
    REQUIRE(count_id(r, "soc_lower_bound") == 1);
    auto it = std::find_if(r.items.begin(), r.items.end(), [](const Violation& v) { return v.id == "soc_lower_bound"; });
    CHECK(it->rhs == doctest::Approx(5.0));
    CHECK(it->tick == 100);
    CHECK(it->slack == doctest::Approx(-0.1));
}

TEST_CASE("checker flags an operation cut short") {
    PlantParameters p = reference_parameters();
    Problem P = build_offline_problem(p, sample_pv_profile(p.horizon, p.dt_hours));
    Schedule s = reference_solution();
    REQUIRE(check_feasibility(s, P).ok());
    // machine 3 (8-tick operations) runs only 7 ticks after its first start
    int t0 = -1;
    for (int t = 0; t < s.length(); ++t)
        if (s.op_start[2][t]) {
            t0 = t;
            break;
        }
    REQUIRE(t0 >= 0);
    s.machine_on[2][t0 + 7] = 0;
    ViolationReport r = check_feasibility(s, P);
    CHECK(count_id(r, "busy_window") >= 1);
    CHECK_FALSE(r.ok());
}

TEST_CASE("solver output is feasible and self consistent") {
    PlantParameters p = reference_parameters();
    Problem P = build_offline_problem(p, sample_pv_profile(p.horizon, p.dt_hours));
    const Schedule& s = reference_solution();
    CHECK(check_feasibility(s, P).ok());
    CHECK(evaluate_objective(s, P) == doctest::Approx(s.objective).epsilon(1e-9));
    CHECK(s.lower_bound <= s.objective + 1e-9);
    CHECK(s.ops_finished[9][288] == 25);
    int last = 0;
    for (int t = 0; t < 288; ++t)
        if (s.machine_on[9][t]) last = t + 1;
    CHECK(last >= 246);
    // the value of every variable reproduces the objective through the cost row
    auto x = variable_values(s, P);
    double obj = P.objective_constant;
    for (std::size_t v = 0; v < x.size(); ++v) obj += P.vars[v].cost * x[v];
    CHECK(obj == doctest::Approx(s.objective).epsilon(1e-9));
}

TEST_CASE("lp dump lists every section") {
    PlantParameters p = reference_parameters();
    p.horizon = 12;
    p.n_jobs = 1;
    p.buy_price.assign(12, 0.2);
    p.machine_power = {10, 5};
    p.op_time = {2, 3};
    Problem P = build_offline_problem(p, std::vector<double>(12, 1.0));
    std::ostringstream os;
    write_lp(P, os);
    std::string t = os.str();
    for (const char* sec : {"Minimize", "Subject To", "Exclusive", "Bounds", "Generals", "End"})
        CHECK(t.find(sec) != std::string::npos);
    CHECK(t.find("soc_t5") != std::string::npos);
    CHECK(t.find("on_m1_t3") != std::string::npos);
}
