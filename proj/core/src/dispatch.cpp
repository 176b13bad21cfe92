#include "eths/dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "eths/errors.hpp"

namespace eths {

namespace {

double clean(double v) { return std::fabs(v) < 1e-12 ? 0.0 : v; }

double net_of(const TickData& t) { return t.load - t.pv - (t.turbine_free ? 0.0 : t.turbine_fixed); }

// stored-energy change that gives grid+turbine need r
double delta_for_need(double r, double net, const PlantParameters& p) {
    const double eta = p.ess_efficiency, dt = p.dt_hours;
    return r >= net ? (r - net) * eta * dt : (r - net) * dt / eta;
}

bool turbine_first(const TickData& t, const PlantParameters& p) { return t.turbine_free && p.gas_price < t.price; }

}  // namespace

TickFlows tick_flows(const TickData& t, double delta, const PlantParameters& p) {
    const double eta = p.ess_efficiency, dt = p.dt_hours;
    TickFlows f;
    f.delta = delta;
    if (delta > 0.0) f.charge = delta / (eta * dt);
    if (delta < 0.0) f.discharge = -delta * eta / dt;
    double r = net_of(t) + f.charge - f.discharge;
    double u = 0.0;
    if (r <= 0.0) {
        f.sell = -r;
    } else if (turbine_first(t, p)) {
        u = std::min(r, p.turbine_max_power);
        f.buy = r - u;
    } else if (t.turbine_free) {
        f.buy = std::min(r, p.grid_max_power);
        u = r - f.buy;
    } else {
        f.buy = r;
    }
    f.turbine = t.turbine_free ? clean(u) : t.turbine_fixed;
    f.charge = clean(f.charge);
    f.discharge = clean(f.discharge);
    f.buy = clean(f.buy);
    f.sell = clean(f.sell);
    f.cost = f.buy * t.price * dt - f.sell * p.feed_in_tariff * dt + p.ess_fixed_cost +
             (f.charge + f.discharge) * p.ess_degradation_cost * dt + f.turbine * p.gas_price * dt;
    return f;
}

ConvexPwl tick_cost_function(const TickData& t, const PlantParameters& p) {
    const double eta = p.ess_efficiency, dt = p.dt_hours;
    const double net = net_of(t);
    double lo = -p.ess_max_power * dt / eta;
    double hi = p.ess_max_power * eta * dt;
    const double g = p.grid_max_power;
    const double extra = t.turbine_free ? p.turbine_max_power : 0.0;
    if (std::isfinite(g)) {
        lo = std::max(lo, delta_for_need(-g, net, p));
        hi = std::min(hi, delta_for_need(g + extra, net, p));
    }
    if (lo > hi + 1e-12) return {};
    hi = std::max(hi, lo);
    std::vector<double> xs{lo, hi};
    auto add = [&](double r) {
        double d = delta_for_need(r, net, p);
        if (d > lo && d < hi) xs.push_back(d);
    };
    if (lo < 0.0 && hi > 0.0) xs.push_back(0.0);
    add(0.0);
    if (turbine_first(t, p))
        add(p.turbine_max_power);
    else if (std::isfinite(g))
        add(g);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    std::vector<double> vs;
    vs.reserve(xs.size());
    for (double x : xs) vs.push_back(tick_flows(t, x, p).cost);
    return ConvexPwl::from_points(xs, vs);
}

TickFlows best_tick_decision(const TickData& t, const ConvexPwl& f, const ConvexPwl& next, double soc,
                             const PlantParameters& p) {
    double lo = std::max(f.lo(), next.lo() - soc);
    double hi = std::min(f.hi(), next.hi() - soc);
    if (f.empty() || next.empty() || lo > hi + 1e-9) {
        std::ostringstream os;
        os << "no feasible tick decision from soc " << soc;
        throw InfeasibleError(os.str());
    }
    hi = std::max(hi, lo);
    std::vector<double> cand{lo, hi};
    for (double x : f.breakpoints())
        if (x > lo && x < hi) cand.push_back(x);
    for (double x : next.breakpoints())
        if (x - soc > lo && x - soc < hi) cand.push_back(x - soc);
    if (lo < 0.0 && hi > 0.0) cand.push_back(0.0);
    std::sort(cand.begin(), cand.end());

    double bestv = kInf;
    std::vector<double> vals(cand.size());
    for (std::size_t i = 0; i < cand.size(); ++i) {
        double x = std::clamp(cand[i], f.lo(), f.hi());
        vals[i] = f.at(x) + next.at(std::clamp(soc + x, next.lo(), next.hi()));
        bestv = std::min(bestv, vals[i]);
    }
    const double tol = 1e-11 * (1.0 + std::fabs(bestv));
    TickFlows best;
    bool have = false;
    auto key_less = [](const TickFlows& a, const TickFlows& b) {
        bool ta = a.buy + a.sell > 1e-9, tb = b.buy + b.sell > 1e-9;
        if (ta != tb) return !ta;
        double ea = a.charge + a.discharge, eb = b.charge + b.discharge;
        if (std::fabs(ea - eb) > 1e-12) return ea < eb;
        if (std::fabs(a.turbine - b.turbine) > 1e-12) return a.turbine < b.turbine;
        return std::fabs(a.delta) < std::fabs(b.delta);
    };
    for (std::size_t i = 0; i < cand.size(); ++i) {
        if (vals[i] > bestv + tol) continue;
        TickFlows fl = tick_flows(t, std::clamp(cand[i], f.lo(), f.hi()), p);
        if (!have || key_less(fl, best)) {
            best = fl;
            have = true;
        }
    }
    return best;
}

std::vector<TickData> make_ticks(const std::vector<double>& load, const std::vector<double>& pv,
                                 const PlantParameters& p, const DispatchOptions& opt) {
    if (load.size() != pv.size()) throw UsageError("load and pv profiles differ in length");
    std::vector<TickData> ticks(load.size());
    for (std::size_t k = 0; k < load.size(); ++k) {
        if (load[k] < 0.0 || pv[k] < 0.0) throw UsageError("load and pv must be non-negative");
        TickData& t = ticks[k];
        t.load = load[k];
        t.pv = pv[k];
        t.price = p.price(opt.k0 + static_cast<int>(k));
        if (opt.turbine) {
            t.turbine_free = false;
            t.turbine_fixed = opt.turbine->at(k);
        }
    }
    return ticks;
}

namespace {

ConvexPwl backward_step(const ConvexPwl& next, const ConvexPwl& f, const PlantParameters& p) {
    return ConvexPwl::inf_convolution(next, f.reflected()).clipped(p.soc_min(), p.soc_max());
}

[[noreturn]] void infeasible_at(int k, const char* what) {
    std::ostringstream os;
    os << "no feasible dispatch: " << what << " at tick offset " << k;
    throw InfeasibleError(os.str());
}

}  // namespace

DispatchResult dispatch_ticks(const std::vector<TickData>& ticks, const PlantParameters& p, double soc0,
                              double soc_terminal, bool keep) {
    const int T = static_cast<int>(ticks.size());
    std::vector<ConvexPwl> f(T);
    std::vector<ConvexPwl> w(T + 1);
    w[T] = ConvexPwl::point(soc_terminal, 0.0);
    for (int k = T - 1; k >= 0; --k) {
        f[k] = tick_cost_function(ticks[k], p);
        if (f[k].empty()) infeasible_at(k, "load exceeds available supply");
        w[k] = backward_step(w[k + 1], f[k], p);
        if (w[k].empty()) infeasible_at(k, "terminal SOC unreachable");
    }
    if (!std::isfinite(w[0].at(soc0))) infeasible_at(0, "terminal SOC unreachable from the initial SOC");

    DispatchResult r;
    r.flows.resize(T);
    r.tick_cost.resize(T);
    r.soc.resize(T + 1);
    r.soc[0] = soc0;
    double s = soc0;
    for (int k = 0; k < T; ++k) {
        TickFlows fl = best_tick_decision(ticks[k], f[k], w[k + 1], s, p);
        r.flows[k] = fl;
        r.tick_cost[k] = fl.cost;
        r.cost += fl.cost;
        s = s + p.ess_efficiency * fl.charge * p.dt_hours - fl.discharge * p.dt_hours / p.ess_efficiency;
        r.soc[k + 1] = s;
    }
    if (keep) r.value_to_go = std::move(w);
    return r;
}

double dispatch_cost(const std::vector<TickData>& ticks, const PlantParameters& p, double soc0, double soc_terminal) {
    ConvexPwl w = ConvexPwl::point(soc_terminal, 0.0);
    for (int k = static_cast<int>(ticks.size()) - 1; k >= 0; --k) {
        ConvexPwl f = tick_cost_function(ticks[k], p);
        if (f.empty()) return kInf;
        w = backward_step(w, f, p);
        if (w.empty()) return kInf;
    }
    return w.at(soc0);
}

DispatchResult dispatch_energy(const std::vector<double>& load, const std::vector<double>& pv,
                               const PlantParameters& p, const DispatchOptions& opt) {
    auto ticks = make_ticks(load, pv, p, opt);
    return dispatch_ticks(ticks, p, opt.soc0.value_or(p.soc_initial()), opt.soc_terminal.value_or(p.soc_initial()),
                          opt.keep_value_functions);
}

LpDispatch dispatch_energy_lp(const std::vector<double>& load, const std::vector<double>& pv, const PlantParameters& p,
                              const DispatchOptions& opt) {
    auto ticks = make_ticks(load, pv, p, opt);
    const int T = static_cast<int>(ticks.size());
    const double eta = p.ess_efficiency, dt = p.dt_hours;
    const double smin = p.soc_min(), span = p.soc_max() - p.soc_min();
    const double y0 = opt.soc0.value_or(p.soc_initial()) - smin;
    const double yT = opt.soc_terminal.value_or(p.soc_initial()) - smin;

    LpDispatch out;
    LinearProgram& lp = out.lp;
    struct Ids {
        int c, e, b, s, u;
    };
    std::vector<Ids> id(T);
    std::vector<int> soc_var(T + 1, -1);
    double constant = 0.0;
    for (int k = 0; k < T; ++k) {
        const auto& t = ticks[k];
        id[k].c = lp.add_var(p.ess_degradation_cost * dt, p.ess_max_power);
        id[k].e = lp.add_var(p.ess_degradation_cost * dt, p.ess_max_power);
        id[k].b = lp.add_var(t.price * dt, p.grid_max_power);
        id[k].s = lp.add_var(-p.feed_in_tariff * dt, p.grid_max_power);
        id[k].u = t.turbine_free ? lp.add_var(p.gas_price * dt, p.turbine_max_power) : -1;
        constant += p.ess_fixed_cost + (t.turbine_free ? 0.0 : t.turbine_fixed * p.gas_price * dt);
    }
    for (int k = 1; k < T; ++k) soc_var[k] = lp.add_var(0.0, span);
    for (int k = 0; k < T; ++k) {
        const auto& t = ticks[k];
        std::vector<std::pair<int, double>> bal{{id[k].b, 1.0}, {id[k].e, 1.0}, {id[k].s, -1.0}, {id[k].c, -1.0}};
        if (id[k].u >= 0) bal.push_back({id[k].u, 1.0});
        out.balance_rows.push_back(static_cast<int>(lp.rows.size()));
        lp.add_row(bal, LinearProgram::Sense::eq, net_of(t));
    }
    for (int k = 0; k < T; ++k) {
        std::vector<std::pair<int, double>> row{{id[k].c, -eta * dt}, {id[k].e, dt / eta}};
        double rhs = 0.0;
        if (soc_var[k + 1] >= 0)
            row.push_back({soc_var[k + 1], 1.0});
        else
            rhs -= yT;
        if (soc_var[k] >= 0)
            row.push_back({soc_var[k], -1.0});
        else
            rhs += y0;
        lp.add_row(row, LinearProgram::Sense::eq, rhs);
    }
    out.solution = solve_lp(lp);
    if (out.solution.status != LpSolution::Status::optimal) throw InfeasibleError("dispatch LP has no optimal solution");

    DispatchResult& r = out.result;
    const auto& x = out.solution.x;
    r.flows.resize(T);
    r.tick_cost.resize(T);
    r.soc.resize(T + 1);
    r.soc[0] = y0 + smin;
    r.soc[T] = yT + smin;
    for (int k = 0; k < T; ++k) {
        const auto& t = ticks[k];
        TickFlows& fl = r.flows[k];
        fl.charge = x[id[k].c];
        fl.discharge = x[id[k].e];
        fl.buy = x[id[k].b];
        fl.sell = x[id[k].s];
        fl.turbine = id[k].u >= 0 ? x[id[k].u] : t.turbine_fixed;
        fl.delta = eta * fl.charge * dt - fl.discharge * dt / eta;
        fl.cost = fl.buy * t.price * dt - fl.sell * p.feed_in_tariff * dt + p.ess_fixed_cost +
                  (fl.charge + fl.discharge) * p.ess_degradation_cost * dt + fl.turbine * p.gas_price * dt;
        r.tick_cost[k] = fl.cost;
        if (k + 1 < T) r.soc[k + 1] = x[soc_var[k + 1]] + smin;
    }
    r.cost = out.solution.objective + constant;
    return out;
}

}  // namespace eths
