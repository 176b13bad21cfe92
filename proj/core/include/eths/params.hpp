#pragma once

#include <limits>
#include <vector>

namespace eths {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct PlantParameters {
    std::vector<double> machine_power;  // kW per machine
    std::vector<int> op_time;           // ticks per operation
    double gas_price = 1.83;
    double ess_efficiency = 0.9;
    double ess_fixed_cost = 0.003;
    double ess_degradation_cost = 0.0006;
    double ess_capacity = 50.0;
    double ess_dod = 0.8;
    double ess_max_power = 50.0;
    std::vector<double> buy_price;  // $/kWh per tick
    double feed_in_tariff = 0.052;
    double breakdown_rate = 0.002;
    double repair_rate = 1.0;
    int n_jobs = 25;
    int horizon = 288;
    double dt_hours = 1.0 / 12.0;
    double turbine_max_power = 100.0;
    double grid_max_power = kInf;  // applies to buying and selling

    int machines() const { return static_cast<int>(machine_power.size()); }
    double soc_min() const { return ess_capacity * (1.0 - ess_dod) / 2.0; }
    double soc_max() const { return ess_capacity * (1.0 + ess_dod) / 2.0; }
    double soc_initial() const { return ess_capacity / 2.0; }
    double price(int k) const { return buy_price.at(static_cast<std::size_t>(k)); }
};

// Time-of-use tariff: peak on [peak_start, peak_end), offpeak elsewhere.
std::vector<double> tou_prices(int horizon, double peak, double offpeak, int peak_start, int peak_end);

// Reference plant on a 288-tick day.
PlantParameters reference_parameters();

// Throws ValidationError naming the offending field.
void validate(const PlantParameters& p);

}  // namespace eths
