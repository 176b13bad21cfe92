#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eths/flowshop.hpp"
#include "eths/params.hpp"
#include "eths/plant.hpp"
#include "eths/pwl.hpp"

namespace eths {

// x1..x10
enum class Family { pv = 0, machine_on, op_start, ops_finished, turbine, charge, discharge, soc, buy, sell };
inline constexpr int kFamilies = 10;
const char* family_name(Family f);

enum class StateClass { non_dispatchable, partially_dispatchable, fully_dispatchable };

struct StateTaxonomy {
    std::array<StateClass, kFamilies> cls{};
    // activation windows [a, b] (inclusive ticks) of each partially-dispatchable family
    std::array<std::vector<std::pair<int, int>>, kFamilies> windows;

    static StateTaxonomy standard();  // ND {x1}, PD {x2..x5}, FD {x6..x10}
    StateClass of(Family f) const { return cls[static_cast<int>(f)]; }
    bool in_window(Family f, int k) const;
    void validate(int horizon) const;  // throws ValidationError
};

struct Variable {
    std::string name;
    Family family;
    int machine = -1;
    int tick = 0;  // absolute
    double lb = 0.0;
    double ub = kInf;
    bool integer = false;
    bool frozen = false;
    double cost = 0.0;
};

enum class Sense { eq, le, ge, exclusive };

struct Term {
    int var;
    double coef;
};

struct Constraint {
    std::string id;
    int tick;
    std::vector<Term> terms;
    Sense sense;
    double rhs;
};

// PD values imposed on a problem window: [machine][tick - k0] and [tick - k0].
struct FrozenPd {
    std::vector<std::vector<int>> machine_on;
    std::vector<std::vector<int>> op_start;
    std::vector<double> turbine;
};

struct Observation {
    ShopState shop;
    MachineHealth health;
    double soc = 25.0;
    std::vector<double> pv;  // forecast over [k, N) with the realised value at k
};

struct Problem {
    PlantParameters params;
    int k0 = 0;
    int k1 = 0;  // last tick, inclusive
    int ns = 0;
    int deadline = -1;  // absolute tick for the job-completion bound, -1 if none
    int n_jobs = 0;
    ShopState shop;
    double soc0 = 25.0;
    std::optional<double> soc_terminal;
    std::vector<double> pv;
    StateTaxonomy taxonomy;
    std::optional<FrozenPd> frozen;
    bool turbine_free = true;
    std::optional<ConvexPwl> terminal_value;  // value of soc at k1+1

    std::vector<Variable> vars;
    std::vector<Constraint> cons;
    double objective_constant = 0.0;

    // variable indices
    std::vector<std::vector<int>> v_on, v_start, v_fin;  // v_fin has T+1 columns
    std::vector<int> v_turbine, v_charge, v_discharge, v_soc, v_buy, v_sell;  // v_soc has T+1

    int length() const { return k1 - k0 + 1; }
    int free_variables() const;
    int free_integer_variables() const;
    FlowShop shop_view() const;
};

struct Schedule {
    int k0 = 0;
    int k1 = -1;
    std::vector<double> pv;
    std::vector<std::vector<int>> machine_on, op_start, ops_finished;  // ops_finished has T+1 columns
    std::vector<double> turbine, charge, discharge, soc, buy, sell;   // soc has T+1 entries
    double objective = 0.0;
    std::vector<double> cost;  // C[k]
    double solve_seconds = 0.0;

    Plan plan;
    long evaluations = 0;
    double lower_bound = -kInf;
    double gap = kInf;
    std::vector<ConvexPwl> value_to_go;  // W for ticks k0..k1+1

    int length() const { return k1 - k0 + 1; }
    PlantState state_at(int k) const;  // absolute tick
};

struct Violation {
    std::string id;
    int tick;
    double lhs;
    double rhs;
    double slack;  // signed: negative means violated by |slack|
};

struct ViolationReport {
    std::vector<Violation> items;
    double worst = 0.0;
    bool ok() const { return items.empty(); }
};

Problem build_offline_problem(const PlantParameters& params, const std::vector<double>& pv_predicted);
Problem build_online_problem(const PlantParameters& params, int k, const Observation& obs,
                             const StateTaxonomy& taxonomy, int ns, int d, const std::optional<FrozenPd>& frozen_pd);
// General constructor used by both.
Problem build_problem(const PlantParameters& params, int k0, int k1, const ShopState& shop, double soc0,
                      std::optional<double> soc_terminal, int deadline, const std::vector<double>& pv,
                      const StateTaxonomy& taxonomy, const std::optional<FrozenPd>& frozen, bool turbine_free);

ViolationReport check_feasibility(const Schedule& s, const Problem& problem, double tol = 1e-6);
double evaluate_objective(const Schedule& s, const Problem& problem);

// Plain-text LP-style dump, see docs/lp_format.md.
void write_lp(const Problem& problem, std::ostream& os);

// Value of each variable under schedule s.
std::vector<double> variable_values(const Schedule& s, const Problem& problem);

}  // namespace eths
