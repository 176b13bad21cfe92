#include "eths/params.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "eths/errors.hpp"

namespace eths {

std::vector<double> tou_prices(int horizon, double peak, double offpeak, int peak_start, int peak_end) {
    std::vector<double> v(static_cast<std::size_t>(std::max(horizon, 0)), offpeak);
    for (int k = std::max(peak_start, 0); k < std::min(peak_end, horizon); ++k) v[static_cast<std::size_t>(k)] = peak;
    return v;
}

PlantParameters reference_parameters() {
    PlantParameters p;
    p.machine_power = {50.63, 22.4, 5.12, 5.28, 12.68, 35.14, 6.58, 5.21, 8.4, 2.15};
    p.op_time = {5, 2, 8, 5, 3, 8, 4, 6, 6, 7};
    // 9am to 9pm at 5-minute ticks
    p.buy_price = tou_prices(288, 0.330, 0.187, 108, 252);
    return p;
}

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw ValidationError(msg);
}

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace

void validate(const PlantParameters& p) {
    require(!p.machine_power.empty(), "machine_power must list at least one machine");
    require(p.machine_power.size() == p.op_time.size(), "machine_power and op_time must have the same length");
    for (double w : p.machine_power) require(finite_nonneg(w), "machine_power entries must be >= 0");
    for (int t : p.op_time) require(t >= 1, "op_time entries must be >= 1 tick");
    require(finite_nonneg(p.gas_price), "gas_price must be >= 0");
    require(std::isfinite(p.ess_efficiency) && p.ess_efficiency > 0.0 && p.ess_efficiency <= 1.0,
            "ess_efficiency must lie in (0,1]");
    require(finite_nonneg(p.ess_fixed_cost), "ess_fixed_cost must be >= 0");
    require(finite_nonneg(p.ess_degradation_cost), "ess_degradation_cost must be >= 0");
    require(finite_nonneg(p.ess_capacity), "ess_capacity must be >= 0");
    require(std::isfinite(p.ess_dod) && p.ess_dod > 0.0 && p.ess_dod <= 1.0, "ess_dod must lie in (0,1]");
    require(finite_nonneg(p.ess_max_power), "ess_max_power must be >= 0");
    require(finite_nonneg(p.feed_in_tariff), "feed_in_tariff must be >= 0");
    require(finite_nonneg(p.breakdown_rate), "breakdown_rate must be >= 0");
    require(finite_nonneg(p.repair_rate), "repair_rate must be >= 0");
    require(p.n_jobs >= 0, "n_jobs must be >= 0");
    require(p.horizon >= 1, "horizon must be >= 1");
    require(std::isfinite(p.dt_hours) && p.dt_hours > 0.0, "dt_hours must be > 0");
    require(finite_nonneg(p.turbine_max_power), "turbine_max_power must be >= 0");
    require(p.grid_max_power >= 0.0, "grid_max_power must be >= 0");
    require(static_cast<int>(p.buy_price.size()) == p.horizon, "buy_price must have one entry per tick");
    for (double c : p.buy_price) {
        require(finite_nonneg(c), "buy_price entries must be >= 0");
        // Selling above the purchase price would make simultaneous trading attractive.
        require(p.feed_in_tariff <= c, "feed_in_tariff must not exceed any buy_price");
    }
    require(p.feed_in_tariff <= p.gas_price, "feed_in_tariff must not exceed gas_price");
}

}  // namespace eths
