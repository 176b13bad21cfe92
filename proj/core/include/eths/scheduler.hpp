#pragma once

#include <cstdint>

#include "eths/dispatch.hpp"
#include "eths/flowshop.hpp"
#include "eths/problem.hpp"

namespace eths {

struct SolveBudget {
    double time_limit_s = 120.0;  // safety cap only; results are budgeted by evaluations
    double gap = 0.0;             // stop once (UB-LB)/|UB| <= gap
    long max_evaluations = 200000;
    std::uint64_t seed = 1;
};

// Continuous layer inputs for a plan.
std::vector<TickData> plan_ticks(const Problem& problem, const Plan& plan);
double plan_cost(const Problem& problem, const Plan& plan);
// Full schedule (trajectories, C[k], value functions) of a plan.
Schedule make_schedule(const Problem& problem, const Plan& plan);

// Start-tick candidates used by the construction step.
Plan asap_plan(const Problem& problem);
Plan alap_plan(const Problem& problem);
// Clamp an arbitrary plan into the earliest/latest envelope.
Plan repair_plan(const Problem& problem, const Plan& wanted);

// Construction + local search. warm, when given, joins the construction candidates.
Schedule solve(const Problem& problem, const SolveBudget& budget, const Plan* warm = nullptr);
// Exact branch and bound over start ticks; bound = optimal dispatch of the ops fixed so far.
Schedule solve_bnb(const Problem& problem, const SolveBudget& budget);

// Lagrangian bound around the incumbent (SOC prices from its value functions).
double lower_bound(const Problem& problem, const Schedule& incumbent);

}  // namespace eths
