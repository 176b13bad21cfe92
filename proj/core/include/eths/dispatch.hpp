#pragma once

#include <optional>
#include <vector>

#include "eths/params.hpp"
#include "eths/pwl.hpp"
#include "eths/simplex.hpp"

namespace eths {

// Data of one tick as seen by the continuous layer.
struct TickData {
    double load = 0.0;           // machine demand, kW
    double pv = 0.0;             // kW
    double price = 0.0;          // buy price, $/kWh
    bool turbine_free = true;    // dispatchable in this problem
    double turbine_fixed = 0.0;  // used when !turbine_free
};

struct TickFlows {
    double turbine = 0.0;
    double charge = 0.0;
    double discharge = 0.0;
    double buy = 0.0;
    double sell = 0.0;
    double delta = 0.0;  // stored-energy change, kWh
    double cost = 0.0;
};

// Cost of tick k as a convex function of the stored-energy change.
ConvexPwl tick_cost_function(const TickData& t, const PlantParameters& p);
TickFlows tick_flows(const TickData& t, double delta, const PlantParameters& p);

// argmin_delta f(delta) + next(soc + delta) with the deterministic tie-break
// (no grid trade, then lower ESS throughput, then lower turbine).
TickFlows best_tick_decision(const TickData& t, const ConvexPwl& f, const ConvexPwl& next, double soc,
                             const PlantParameters& p);

struct DispatchOptions {
    int k0 = 0;                                  // first tick (for prices)
    std::optional<double> soc0;                  // default: initial SOC
    std::optional<double> soc_terminal;          // default: initial SOC
    std::optional<std::vector<double>> turbine;  // fixed turbine trajectory
    bool keep_value_functions = false;
};

struct DispatchResult {
    std::vector<TickFlows> flows;
    std::vector<double> soc;        // length T+1
    std::vector<double> tick_cost;  // length T
    double cost = 0.0;
    std::vector<ConvexPwl> value_to_go;  // W_k for k = 0..T when requested
};

std::vector<TickData> make_ticks(const std::vector<double>& load, const std::vector<double>& pv,
                                 const PlantParameters& p, const DispatchOptions& opt);

// Exact minimum-cost dispatch via dynamic programming over convex piecewise-linear
// value functions of SOC. Throws InfeasibleError when no dispatch exists.
DispatchResult dispatch_energy(const std::vector<double>& load, const std::vector<double>& pv,
                               const PlantParameters& p, const DispatchOptions& opt = {});
DispatchResult dispatch_ticks(const std::vector<TickData>& ticks, const PlantParameters& p, double soc0,
                              double soc_terminal, bool keep_value_functions);

// Optimal cost only; +inf when infeasible.
double dispatch_cost(const std::vector<TickData>& ticks, const PlantParameters& p, double soc0, double soc_terminal);

// Same problem written as an LP and solved with the simplex.
struct LpDispatch {
    LinearProgram lp;
    LpSolution solution;
    DispatchResult result;
    std::vector<int> balance_rows;  // row index of each tick's power balance
};
LpDispatch dispatch_energy_lp(const std::vector<double>& load, const std::vector<double>& pv, const PlantParameters& p,
                              const DispatchOptions& opt = {});

}  // namespace eths
