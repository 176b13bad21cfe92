#include <doctest.h>

#include <cmath>
#include <random>

#include "eths/dispatch.hpp"
#include "eths/errors.hpp"
#include "eths/pwl.hpp"
#include "eths/simplex.hpp"

using namespace eths;

namespace {

PlantParameters short_day(int T, std::mt19937_64& rng) {
    PlantParameters p = reference_parameters();
    p.horizon = T;
    std::uniform_real_distribution<double> price(0.06, 0.40);
    p.buy_price.assign(T, 0.0);
    for (double& c : p.buy_price) c = price(rng);
    return p;
}

}  // namespace

TEST_CASE("convex pwl evaluation and operations") {
    ConvexPwl f = ConvexPwl::from_points({-2, 0, 1, 3}, {4, 0, 1, 5});
    CHECK(f.lo() == -2.0);
    CHECK(f.hi() == doctest::Approx(3.0));
    CHECK(f.at(-1) == doctest::Approx(2.0));
    CHECK(f.at(2) == doctest::Approx(3.0));
    CHECK(std::isinf(f.at(3.5)));
    CHECK(f.right_slope(0) == doctest::Approx(1.0));
    CHECK(f.left_slope(0) == doctest::Approx(-2.0));
    ConvexPwl r = f.reflected();
    CHECK(r.at(1) == doctest::Approx(f.at(-1)));

    ConvexPwl g = ConvexPwl::from_points({-1, 0, 2}, {3, 0, 1});
    ConvexPwl h = ConvexPwl::inf_convolution(f, g);
    for (double s = h.lo(); s <= h.hi(); s += 0.25) {
        double best = kInf;
        for (double t = f.lo(); t <= f.hi() + 1e-12; t += 0.001) best = std::min(best, f.at(t) + g.at(s - t));
        CHECK(h.at(s) == doctest::Approx(best).epsilon(1e-3));
    }
    ConvexPwl c = f.clipped(-1, 2);
    CHECK(c.lo() == doctest::Approx(-1));
    CHECK(c.hi() == doctest::Approx(2));
    CHECK(c.at(0) == doctest::Approx(0));
    CHECK(ConvexPwl::point(1, 7).at(1) == 7.0);
}

TEST_CASE("simplex on a textbook lp") {
    // max 3x + 5y st x <= 4, 2y <= 12, 3x + 2y <= 18  ->  x=2, y=6, value 36
    LinearProgram lp;
    int x = lp.add_var(-3), y = lp.add_var(-5);
    lp.add_row({{x, 1}}, LinearProgram::Sense::le, 4);
    lp.add_row({{y, 2}}, LinearProgram::Sense::le, 12);
    lp.add_row({{x, 3}, {y, 2}}, LinearProgram::Sense::le, 18);
    LpSolution s = solve_lp(lp);
    REQUIRE(s.status == LpSolution::Status::optimal);
    CHECK(s.objective == doctest::Approx(-36));
    CHECK(s.x[x] == doctest::Approx(2));
    CHECK(s.x[y] == doctest::Approx(6));
    CHECK(complementary_slackness_residual(lp, s) <= 1e-9);
    CHECK(s.row_dual[2] == doctest::Approx(-1.0));
    CHECK(s.row_dual[1] == doctest::Approx(-1.5));

    LinearProgram bad;
    int a = bad.add_var(1);
    bad.add_row({{a, 1}}, LinearProgram::Sense::ge, 2);
    bad.add_row({{a, 1}}, LinearProgram::Sense::le, 1);
    CHECK(solve_lp(bad).status == LpSolution::Status::infeasible);

    LinearProgram unb;
    int u = unb.add_var(-1);
    unb.add_row({{u, 1}}, LinearProgram::Sense::ge, 0);
    CHECK(solve_lp(unb).status == LpSolution::Status::unbounded);
}

TEST_CASE("idle dispatch costs only the fixed ESS charge") {
    PlantParameters p = reference_parameters();
    std::vector<double> zero(288, 0.0);
    DispatchResult r = dispatch_energy(zero, zero, p);
    CHECK(r.cost == doctest::Approx(288 * 0.003));
    for (const auto& f : r.flows) {
        CHECK(f.buy == 0.0);
        CHECK(f.charge == 0.0);
        CHECK(f.turbine == 0.0);
    }
}

TEST_CASE("load met by pv needs no other flow") {
    PlantParameters p = reference_parameters();
    p.horizon = 1;
    p.buy_price = {0.187};
    DispatchResult r = dispatch_energy({10.0}, {10.0}, p);
    CHECK(r.cost == doctest::Approx(0.003));
    CHECK(r.flows[0].buy == 0.0);
    CHECK(r.flows[0].sell == 0.0);
    CHECK(r.flows[0].charge == 0.0);
    CHECK(r.flows[0].discharge == 0.0);
}

TEST_CASE("two tick storage shift against enumeration") {
    PlantParameters p = reference_parameters();
    p.horizon = 2;
    p.buy_price = {0.187, 0.330};
    const double dt = p.dt_hours, eta = p.ess_efficiency, deg = p.ess_degradation_cost;
    // enumerate the energy moved: discharge e in tick 2, charge e/eta^2 in tick 1
    double best = kInf, best_e = -1;
    for (int q = 0; q <= 1200; ++q) {
        double e = q * 0.01, c = e / (eta * eta);
        double cost = 2 * p.ess_fixed_cost + c * dt * (0.187 + deg) + e * dt * deg + (12.0 - e) * dt * 0.330;
        if (cost < best) {
            best = cost;
            best_e = e;
        }
    }
    CHECK(0.187 / (eta * eta) + deg < 0.330);
    CHECK(best_e == doctest::Approx(12.0));
    DispatchResult r = dispatch_energy({0.0, 12.0}, {0.0, 0.0}, p);
    CHECK(r.cost == doctest::Approx(best).epsilon(1e-9));
    CHECK(r.flows[0].charge == doctest::Approx(12.0 / (eta * eta)));
    CHECK(r.flows[1].discharge == doctest::Approx(12.0));
    CHECK(r.soc[2] == doctest::Approx(25.0));
}

TEST_CASE("fast dispatch agrees with the simplex lp") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> load(0.0, 160.0), pv(0.0, 90.0);
    for (int trial = 0; trial < 15; ++trial) {
        const int T = 6 + trial;
        PlantParameters p = short_day(T, rng);
        std::vector<double> L(T), S(T);
        for (int t = 0; t < T; ++t) {
            L[t] = load(rng);
            S[t] = trial % 3 == 0 ? 0.0 : pv(rng);
        }
        if (trial % 4 == 1) p.grid_max_power = 120.0;
        DispatchResult fast = dispatch_energy(L, S, p);
        LpDispatch lp = dispatch_energy_lp(L, S, p);
        REQUIRE(lp.solution.status == LpSolution::Status::optimal);
        CHECK(fast.cost == doctest::Approx(lp.result.cost).epsilon(1e-6));
        CHECK(std::fabs(fast.cost - (lp.solution.objective + T * p.ess_fixed_cost)) <= 1e-6 * std::max(1.0, std::fabs(fast.cost)));
        CHECK(complementary_slackness_residual(lp.lp, lp.solution) <= 1e-8);
        double soc = 25.0;
        for (int t = 0; t < T; ++t) {
            const TickFlows& f = fast.flows[t];
            CHECK(f.charge * f.discharge == doctest::Approx(0.0));
            CHECK(f.buy * f.sell == doctest::Approx(0.0));
            double bal = S[t] + f.turbine + f.discharge + f.buy - L[t] - f.charge - f.sell;
            CHECK(std::fabs(bal) <= 1e-6);
            soc = soc + p.ess_efficiency * f.charge * p.dt_hours - f.discharge * p.dt_hours / p.ess_efficiency;
            CHECK(soc >= p.soc_min() - 1e-9);
            CHECK(soc <= p.soc_max() + 1e-9);
        }
        CHECK(soc == doctest::Approx(25.0));
    }
}

TEST_CASE("custom boundary socs") {
    PlantParameters p = reference_parameters();
    p.horizon = 3;
    p.buy_price = {0.2, 0.2, 0.2};
    DispatchOptions o;
    o.soc0 = 10.0;
    o.soc_terminal = 12.7;
    DispatchResult r = dispatch_energy({0, 0, 0}, {0, 0, 0}, p, o);
    CHECK(r.soc.front() == doctest::Approx(10.0));
    CHECK(r.soc.back() == doctest::Approx(12.7));
    double charged = 0;
    for (const auto& f : r.flows) charged += f.charge;
    CHECK(charged * p.dt_hours * p.ess_efficiency == doctest::Approx(2.7));
    o.soc_terminal = 44.0;  // needs more than 3 ticks of full charge power
    CHECK_THROWS_AS(dispatch_energy({0, 0, 0}, {0, 0, 0}, p, o), InfeasibleError);
}
