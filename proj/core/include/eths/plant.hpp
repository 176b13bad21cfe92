#pragma once

#include <cstdint>
#include <vector>

#include "eths/params.hpp"

namespace eths {

// One tick of the ten state families.
struct PlantState {
    double pv_power = 0.0;
    std::vector<int> machine_on;
    std::vector<int> op_start;
    std::vector<int> ops_finished;
    double turbine_power = 0.0;
    double ess_charge = 0.0;
    double ess_discharge = 0.0;
    double soc = 0.0;
    double grid_buy = 0.0;
    double grid_sell = 0.0;

    static PlantState idle(int machines, double soc);
};

struct HealthEntry {
    bool up = true;
    int t_on = 0;
    int t_bd = 0;
};
using MachineHealth = std::vector<HealthEntry>;

struct PvTrace {
    std::vector<double> predicted;
    std::vector<double> observed;
};

struct PvNoise {
    bool enabled = true;
    double ar = 0.97;             // AR(1) coefficient of the additive error
    double sigma = 0.5;           // innovation std, kW
    double bias_alpha = 0.05;     // smoothing used by the forecast revision
};

// soc + eta*charge*dt - discharge*dt/eta, checked against the SOC band.
double soc_step(double soc, double charge, double discharge, const PlantParameters& p, int tick = -1);

double failure_probability(int t_on, const PlantParameters& p);
double recovery_probability(int t_bd, const PlantParameters& p);

// ran[i]: machine i was running during the previous tick. A running machine fails
// when draw < 1-exp(-breakdown_rate*T_on); a down machine counts one more down tick and
// recovers when draw < 1-exp(-repair_rate*T_bd).
MachineHealth breakdown_step(const MachineHealth& health, const std::vector<double>& draws,
                             const std::vector<int>& ran, const PlantParameters& p);

double load_of(const std::vector<int>& machine_on, const PlantParameters& p);

// supply minus demand, kW
double power_balance_residual(const PlantState& s, const PlantParameters& p);

// $ for tick k
double step_cost(const PlantState& s, int k, const PlantParameters& p);

// Clear-sky style bell curve limited to 6:00-18:00.
std::vector<double> sample_pv_profile(int horizon, double dt_hours, double peak_kw = 90.0);

// Observed PV = predicted + AR(1) error, only in daylight ticks, clipped at zero.
std::vector<double> observe_pv(const std::vector<double>& predicted, const PvNoise& noise, std::uint64_t seed);

// Deterministic stream helpers shared by all runs.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);
double unit_draw(std::uint64_t bits);

// uniform draws [machine][tick] for breakdowns
std::vector<std::vector<double>> breakdown_draws(int machines, int horizon, std::uint64_t seed);

}  // namespace eths
