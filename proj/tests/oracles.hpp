#pragma once

// Reference implementations used to cross-check the solvers. They are written
// from the model definition and share no code with the solver paths beyond the
// parameter struct and the simplex.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "eths/dispatch.hpp"
#include "eths/params.hpp"

namespace oracle {

using Starts = std::vector<std::vector<int>>;  // [machine][job]

// Every start-tick assignment of n identical jobs on a flow shop over [0, N):
// machine order per job, job order per machine, operations not preemptive,
// everything finished by N.
inline std::vector<Starts> enumerate_plans(const std::vector<int>& op, int n, int N, std::size_t cap = 1000000) {
    const int M = static_cast<int>(op.size());
    std::vector<Starts> out;
    if (n == 0) {
        out.push_back(Starts(M));
        return out;
    }
    // tail[i] = sum of op times of machines after i (a job cannot finish later than N)
    std::vector<int> tail(M, 0);
    for (int i = M - 2; i >= 0; --i) tail[i] = tail[i + 1] + op[i + 1];
    Starts s(M, std::vector<int>(n, 0));
    std::function<void(int, int)> rec = [&](int j, int i) {
        if (out.size() >= cap) return;
        if (j == n) {
            out.push_back(s);
            return;
        }
        int lo = 0;
        if (j > 0) lo = std::max(lo, s[i][j - 1] + op[i]);
        if (i > 0) lo = std::max(lo, s[i - 1][j] + op[i - 1]);
        // later jobs still need (n-1-j) slots on this machine
        int hi = N - op[i] - tail[i];
        hi = std::min(hi, N - (n - j) * op[i]);
        for (int t = lo; t <= hi; ++t) {
            s[i][j] = t;
            if (i + 1 < M) rec(j, i + 1);
            else rec(j + 1, 0);
        }
    };
    rec(0, 0);
    return out;
}

inline std::vector<double> load_of_plan(const Starts& s, const eths::PlantParameters& p) {
    std::vector<double> L(p.horizon, 0.0);
    for (std::size_t i = 0; i < s.size(); ++i)
        for (int t0 : s[i])
            for (int t = t0; t < t0 + p.op_time[i]; ++t) L[t] += p.machine_power[i];
    return L;
}

// Minimum dispatch cost from the simplex formulation (+inf if infeasible).
inline double lp_cost(const std::vector<double>& load, const std::vector<double>& pv, const eths::PlantParameters& p) {
    try {
        eths::LpDispatch d = eths::dispatch_energy_lp(load, pv, p);
        if (d.solution.status != eths::LpSolution::Status::optimal) return std::numeric_limits<double>::infinity();
        return d.result.cost;
    } catch (const std::exception&) {
        return std::numeric_limits<double>::infinity();
    }
}

// Cost of one tick when the stored energy changes by delta (kWh).
inline double tick_cost(double load, double pv, double price, double delta, const eths::PlantParameters& p) {
    const double dt = p.dt_hours, eta = p.ess_efficiency;
    double c = 0.0, e = 0.0;
    if (delta >= 0.0) c = delta / (eta * dt);
    else e = -delta * eta / dt;
    if (c > p.ess_max_power + 1e-9 || e > p.ess_max_power + 1e-9) return std::numeric_limits<double>::infinity();
    double r = load + c - e - pv;  // power still to be supplied
    double cost = p.ess_fixed_cost + (c + e) * p.ess_degradation_cost * dt;
    if (r >= 0.0) {
        // cheapest source first
        double cap_grid = p.grid_max_power, cap_gas = p.turbine_max_power;
        double first = price <= p.gas_price ? cap_grid : cap_gas, second = price <= p.gas_price ? cap_gas : cap_grid;
        double c1 = std::min(price, p.gas_price), c2 = std::max(price, p.gas_price);
        double a = std::min(r, first);
        double b = r - a;
        if (b > second + 1e-9) return std::numeric_limits<double>::infinity();
        cost += (a * c1 + b * c2) * dt;
    } else {
        if (-r > p.grid_max_power + 1e-9) return std::numeric_limits<double>::infinity();
        cost += r * p.feed_in_tariff * dt;
    }
    return cost;
}

// Dynamic programme over a SOC grid of the given step between the band limits.
inline double soc_grid_dp(const std::vector<double>& load, const std::vector<double>& pv, const eths::PlantParameters& p,
                          double step) {
    const double inf = std::numeric_limits<double>::infinity();
    const double lo = p.soc_min(), hi = p.soc_max();
    const int S = static_cast<int>(std::lround((hi - lo) / step)) + 1;
    const int s0 = static_cast<int>(std::lround((p.soc_initial() - lo) / step));
    const int dmax = static_cast<int>(std::floor(p.ess_efficiency * p.ess_max_power * p.dt_hours / step + 1e-9));
    const int dmin = -static_cast<int>(std::floor(p.ess_max_power * p.dt_hours / p.ess_efficiency / step + 1e-9));
    const int T = static_cast<int>(load.size());
    std::vector<double> V(S, inf), W(S);
    V[s0] = 0.0;
    std::vector<double> f(dmax - dmin + 1);
    for (int t = 0; t < T; ++t) {
        for (int d = dmin; d <= dmax; ++d) f[d - dmin] = tick_cost(load[t], pv[t], p.price(t), d * step, p);
        std::fill(W.begin(), W.end(), inf);
        for (int s = 0; s < S; ++s) {
            if (!std::isfinite(V[s])) continue;
            int a = std::max(dmin, -s), b = std::min(dmax, S - 1 - s);
            for (int d = a; d <= b; ++d) {
                double v = V[s] + f[d - dmin];
                if (v < W[s + d]) W[s + d] = v;
            }
        }
        std::swap(V, W);
    }
    return V[s0];
}

}  // namespace oracle
