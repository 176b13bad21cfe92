#include "eths/plant.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "eths/errors.hpp"

namespace eths {

namespace {
constexpr double kSocTol = 1e-9;
}

PlantState PlantState::idle(int machines, double soc) {
    PlantState s;
    s.machine_on.assign(static_cast<std::size_t>(machines), 0);
    s.op_start.assign(static_cast<std::size_t>(machines), 0);
    s.ops_finished.assign(static_cast<std::size_t>(machines), 0);
    s.soc = soc;
    return s;
}

double soc_step(double soc, double charge, double discharge, const PlantParameters& p, int tick) {
    const double eta = p.ess_efficiency;
    double next = soc + eta * charge * p.dt_hours - discharge * p.dt_hours / eta;
    auto fail = [&](const char* which, double bound) {
        std::ostringstream os;
        os << "soc " << next << " kWh violates " << which << " bound " << bound << " kWh";
        if (tick >= 0) os << " at tick " << tick;
        throw BoundViolation(os.str(), tick, bound, next);
    };
    if (next < p.soc_min() - kSocTol) fail("lower", p.soc_min());
    if (next > p.soc_max() + kSocTol) fail("upper", p.soc_max());
    return next;
}

double failure_probability(int t_on, const PlantParameters& p) {
    return 1.0 - std::exp(-p.breakdown_rate * static_cast<double>(t_on));
}

double recovery_probability(int t_bd, const PlantParameters& p) {
    return 1.0 - std::exp(-p.repair_rate * static_cast<double>(t_bd));
}

MachineHealth breakdown_step(const MachineHealth& health, const std::vector<double>& draws,
                             const std::vector<int>& ran, const PlantParameters& p) {
    MachineHealth out = health;
    for (std::size_t i = 0; i < out.size(); ++i) {
        HealthEntry& h = out[i];
        if (h.up) {
            if (ran[i] && draws[i] < failure_probability(h.t_on, p)) {
                h.up = false;
                h.t_on = 0;
                h.t_bd = 0;
            }
        } else {
            h.t_bd += 1;
            if (draws[i] < recovery_probability(h.t_bd, p)) {
                h.up = true;
                h.t_bd = 0;
            }
        }
    }
    return out;
}

double load_of(const std::vector<int>& machine_on, const PlantParameters& p) {
    double w = 0.0;
    for (std::size_t i = 0; i < machine_on.size(); ++i)
        if (machine_on[i]) w += p.machine_power[i];
    return w;
}

double power_balance_residual(const PlantState& s, const PlantParameters& p) {
    double supply = s.pv_power + s.grid_buy + s.ess_discharge + s.turbine_power;
    double demand = load_of(s.machine_on, p) + s.grid_sell + s.ess_charge;
    return supply - demand;
}

double step_cost(const PlantState& s, int k, const PlantParameters& p) {
    const double dt = p.dt_hours;
    return s.grid_buy * p.price(k) * dt - s.grid_sell * p.feed_in_tariff * dt + p.ess_fixed_cost +
           (s.ess_charge + s.ess_discharge) * p.ess_degradation_cost * dt + s.turbine_power * p.gas_price * dt;
}

std::vector<double> sample_pv_profile(int horizon, double dt_hours, double peak_kw) {
    std::vector<double> pv(static_cast<std::size_t>(horizon), 0.0);
    for (int k = 0; k < horizon; ++k) {
        double h = (k + 0.5) * dt_hours;
        if (h < 6.0 || h > 18.0) continue;
        double z = (h - 12.5) / 2.6;
        double edge = std::sin(M_PI * (h - 6.0) / 12.0);
        pv[static_cast<std::size_t>(k)] = peak_kw * std::exp(-0.5 * z * z) * std::sqrt(edge);
    }
    return pv;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finaliser
    std::uint64_t z = seed * 0x9E3779B97F4A7C15ULL + stream * 0xD1B54A32D192ED03ULL + 0x632BE59BD9B4E019ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double unit_draw(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

std::vector<double> observe_pv(const std::vector<double>& predicted, const PvNoise& noise, std::uint64_t seed) {
    std::vector<double> obs = predicted;
    if (!noise.enabled || noise.sigma <= 0.0) return obs;
    std::mt19937_64 rng(mix_seed(seed, 2));
    std::normal_distribution<double> n01(0.0, 1.0);
    double e = 0.0;
    for (std::size_t k = 0; k < predicted.size(); ++k) {
        double xi = n01(rng);
        e = noise.ar * e + noise.sigma * xi;
        if (predicted[k] > 0.0) obs[k] = std::max(0.0, predicted[k] + e);
    }
    return obs;
}

std::vector<std::vector<double>> breakdown_draws(int machines, int horizon, std::uint64_t seed) {
    std::mt19937_64 rng(mix_seed(seed, 1));
    std::vector<std::vector<double>> u(static_cast<std::size_t>(machines),
                                       std::vector<double>(static_cast<std::size_t>(horizon)));
    for (int k = 0; k < horizon; ++k)
        for (int i = 0; i < machines; ++i) u[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = unit_draw(rng());
    return u;
}

}  // namespace eths
