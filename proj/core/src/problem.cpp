#include "eths/problem.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "eths/errors.hpp"

namespace eths {

const char* family_name(Family f) {
    static const char* names[] = {"pv", "on", "start", "finished", "turbine", "charge", "discharge", "soc", "buy", "sell"};
    return names[static_cast<int>(f)];
}

StateTaxonomy StateTaxonomy::standard() {
    StateTaxonomy t;
    t.cls[0] = StateClass::non_dispatchable;
    for (int f = 1; f <= 4; ++f) t.cls[f] = StateClass::partially_dispatchable;
    for (int f = 5; f < kFamilies; ++f) t.cls[f] = StateClass::fully_dispatchable;
    return t;
}

bool StateTaxonomy::in_window(Family f, int k) const {
    for (auto [a, b] : windows[static_cast<int>(f)])
        if (k >= a && k <= b) return true;
    return false;
}

void StateTaxonomy::validate(int horizon) const {
    if (cls[0] != StateClass::non_dispatchable) throw ValidationError("taxonomy: pv must be non-dispatchable");
    for (int f = 0; f < kFamilies; ++f) {
        auto w = windows[f];
        if (!w.empty() && cls[f] != StateClass::partially_dispatchable)
            throw ValidationError(std::string("taxonomy: windows given for non-PD family ") + family_name(Family(f)));
        std::sort(w.begin(), w.end());
        for (std::size_t q = 0; q < w.size(); ++q) {
            if (w[q].first > w[q].second || w[q].first < 0 || w[q].second > horizon - 1)
                throw ValidationError("taxonomy: window outside [0, N-1]");
            if (q > 0 && w[q].first <= w[q - 1].second) throw ValidationError("taxonomy: windows overlap");
        }
    }
}

int Problem::free_variables() const {
    return static_cast<int>(std::count_if(vars.begin(), vars.end(), [](const Variable& v) { return !v.frozen; }));
}

int Problem::free_integer_variables() const {
    return static_cast<int>(
        std::count_if(vars.begin(), vars.end(), [](const Variable& v) { return !v.frozen && v.integer; }));
}

FlowShop Problem::shop_view() const {
    return FlowShop{&params, shop, n_jobs, deadline < 0 ? k1 + 1 : deadline, k1 + 1};
}

PlantState Schedule::state_at(int k) const {
    int t = k - k0;
    const int M = static_cast<int>(machine_on.size());
    PlantState s = PlantState::idle(M, soc.at(t));
    s.pv_power = pv.at(t);
    for (int i = 0; i < M; ++i) {
        s.machine_on[i] = machine_on[i][t];
        s.op_start[i] = op_start[i][t];
        s.ops_finished[i] = ops_finished[i][t];
    }
    s.turbine_power = turbine[t];
    s.ess_charge = charge[t];
    s.ess_discharge = discharge[t];
    s.grid_buy = buy[t];
    s.grid_sell = sell[t];
    return s;
}

namespace {

std::string vname(Family f, int machine, int tick) {
    std::ostringstream os;
    os << family_name(f);
    if (machine >= 0) os << "_m" << machine;
    os << "_t" << tick;
    return os.str();
}

int add_var(Problem& P, Family f, int machine, int tick, double lb, double ub, bool integer, double cost) {
    P.vars.push_back({vname(f, machine, tick), f, machine, tick, lb, ub, integer, false, cost});
    return static_cast<int>(P.vars.size()) - 1;
}

void freeze(Problem& P, int v, double value) {
    P.vars[v].lb = P.vars[v].ub = value;
    P.vars[v].frozen = true;
}

}  // namespace

Problem build_problem(const PlantParameters& params, int k0, int k1, const ShopState& shop, double soc0,
                      std::optional<double> soc_terminal, int deadline, const std::vector<double>& pv,
                      const StateTaxonomy& taxonomy, const std::optional<FrozenPd>& frozen, bool turbine_free) {
    Problem P;
    P.params = params;
    P.k0 = k0;
    P.k1 = k1;
    P.shop = shop;
    P.shop.k0 = k0;
    P.soc0 = soc0;
    P.soc_terminal = soc_terminal;
    P.deadline = deadline;
    P.n_jobs = params.n_jobs;
    P.pv = pv;
    P.taxonomy = taxonomy;
    P.frozen = frozen;
    P.turbine_free = turbine_free;
    const int T = k1 - k0 + 1;
    const int M = params.machines();
    const int end = k1 + 1;
    const double dt = params.dt_hours, eta = params.ess_efficiency;
    if (static_cast<int>(pv.size()) != T) throw UsageError("pv vector does not cover the problem window");
    if (static_cast<int>(shop.machines.size()) != M) throw UsageError("shop state machine count mismatch");
    if (frozen) {
        if (static_cast<int>(frozen->machine_on.size()) != M || static_cast<int>(frozen->op_start.size()) != M)
            throw UsageError("frozen trajectories do not match the machine count");
    }

    P.v_on.assign(M, std::vector<int>(T));
    P.v_start.assign(M, std::vector<int>(T));
    P.v_fin.assign(M, std::vector<int>(T + 1));
    for (int t = 0; t < T; ++t) {
        const int k = k0 + t;
        for (int i = 0; i < M; ++i) {
            bool down_now = t == 0 && !shop.machines[i].up;
            P.v_on[i][t] = add_var(P, Family::machine_on, i, k, 0, down_now ? 0 : 1, true, 0.0);
            bool can_start = !down_now && k + params.op_time[i] <= end;
            P.v_start[i][t] = add_var(P, Family::op_start, i, k, 0, can_start ? 1 : 0, true, 0.0);
        }
    }
    for (int t = 0; t <= T; ++t)
        for (int i = 0; i < M; ++i)
            P.v_fin[i][t] = add_var(P, Family::ops_finished, i, k0 + t, 0, params.n_jobs, true, 0.0);
    for (int t = 0; t < T; ++t) {
        const int k = k0 + t;
        P.v_turbine.push_back(add_var(P, Family::turbine, -1, k, 0, params.turbine_max_power, false, params.gas_price * dt));
        P.v_charge.push_back(add_var(P, Family::charge, -1, k, 0, params.ess_max_power, false, params.ess_degradation_cost * dt));
        P.v_discharge.push_back(
            add_var(P, Family::discharge, -1, k, 0, params.ess_max_power, false, params.ess_degradation_cost * dt));
        P.v_buy.push_back(add_var(P, Family::buy, -1, k, 0, params.grid_max_power, false, params.price(k) * dt));
        P.v_sell.push_back(add_var(P, Family::sell, -1, k, 0, params.grid_max_power, false, -params.feed_in_tariff * dt));
    }
    for (int t = 0; t <= T; ++t)
        P.v_soc.push_back(add_var(P, Family::soc, -1, k0 + t, params.soc_min(), params.soc_max(), false, 0.0));
    P.objective_constant = params.ess_fixed_cost * T;

    // constant parts coming from the operation in progress at k0
    auto active_on = [&](int i, int k) {
        const auto& m = shop.machines[i];
        if (m.remaining <= 0) return 0;
        int a = k0 + (m.up ? 0 : 1);
        return (k >= a && k < a + m.remaining) ? 1 : 0;
    };
    auto fin_base = [&](int i, int k) {
        int af = shop.active_finish(i);
        return shop.machines[i].done + ((af >= 0 && af <= k) ? 1 : 0);
    };

    if (frozen) {
        for (int t = 0; t < T; ++t)
            for (int i = 0; i < M; ++i) {
                freeze(P, P.v_on[i][t], frozen->machine_on[i].at(t));
                freeze(P, P.v_start[i][t], frozen->op_start[i].at(t));
            }
        for (int t = 0; t <= T; ++t)
            for (int i = 0; i < M; ++i) {
                int v = fin_base(i, k0 + t);
                for (int tt = 0; tt < T; ++tt)
                    if (frozen->op_start[i][tt] && k0 + tt + params.op_time[i] <= k0 + t) ++v;
                freeze(P, P.v_fin[i][t], v);
            }
    }
    if (!turbine_free) {
        if (!frozen || static_cast<int>(frozen->turbine.size()) != T)
            throw UsageError("turbine is frozen but no turbine trajectory was supplied");
        for (int t = 0; t < T; ++t) freeze(P, P.v_turbine[t], frozen->turbine[t]);
    }
    freeze(P, P.v_soc[0], soc0);
    if (soc_terminal) freeze(P, P.v_soc[T], *soc_terminal);

    auto add = [&](std::string id, int tick, std::vector<Term> terms, Sense s, double rhs) {
        P.cons.push_back({std::move(id), tick, std::move(terms), s, rhs});
    };

    for (int t = 0; t < T; ++t) {
        const int k = k0 + t;
        std::vector<Term> bal{{P.v_buy[t], 1}, {P.v_discharge[t], 1}, {P.v_turbine[t], 1}, {P.v_sell[t], -1}, {P.v_charge[t], -1}};
        for (int i = 0; i < M; ++i) bal.push_back({P.v_on[i][t], -params.machine_power[i]});
        add("balance", k, bal, Sense::eq, -pv[t]);
        add("soc_dynamics", k,
            {{P.v_soc[t + 1], 1}, {P.v_soc[t], -1}, {P.v_charge[t], -eta * dt}, {P.v_discharge[t], dt / eta}}, Sense::eq, 0.0);
        add("ess_exclusive", k, {{P.v_charge[t], 1}, {P.v_discharge[t], 1}}, Sense::exclusive, 0.0);
        add("grid_exclusive", k, {{P.v_buy[t], 1}, {P.v_sell[t], 1}}, Sense::exclusive, 0.0);
    }
    add("soc_initial", k0, {{P.v_soc[0], 1}}, Sense::eq, soc0);
    if (soc_terminal) add("soc_terminal", end, {{P.v_soc[T], 1}}, Sense::eq, *soc_terminal);

    for (int i = 0; i < M; ++i) {
        const int p = params.op_time[i];
        for (int t = 0; t < T; ++t) {
            const int k = k0 + t;
            std::vector<Term> busy{{P.v_on[i][t], 1}};
            for (int j = std::max(0, t - p + 1); j <= t; ++j) busy.push_back({P.v_start[i][j], -1});
            add("busy_window", k, busy, Sense::eq, active_on(i, k));
        }
        for (int t = 0; t <= T; ++t) {
            const int k = k0 + t;
            std::vector<Term> cnt{{P.v_fin[i][t], 1}};
            for (int j = 0; j < T && k0 + j <= k - p; ++j) cnt.push_back({P.v_start[i][j], -1});
            add("finished_count", k, cnt, Sense::eq, fin_base(i, k));
        }
        std::vector<Term> total;
        for (int t = 0; t < T; ++t) total.push_back({P.v_start[i][t], 1});
        add("start_count", k0, total, Sense::le, params.n_jobs - shop.machines[i].started);
    }
    for (int i = 0; i + 1 < M; ++i)
        for (int t = 0; t < T; ++t)
            add("precedence", k0 + t, {{P.v_fin[i][t], 1}, {P.v_fin[i + 1][t], -1}, {P.v_on[i + 1][t], -1}}, Sense::ge, 0.0);
    if (deadline >= 0 && params.n_jobs > 0) {
        int td = std::clamp(deadline - k0, 0, T);
        add("jobs_complete", k0 + td, {{P.v_fin[M - 1][td], 1}}, Sense::ge, params.n_jobs);
    }
    return P;
}

Problem build_offline_problem(const PlantParameters& params, const std::vector<double>& pv_predicted) {
    validate(params);
    const int N = params.horizon;
    int lb = flow_shop_makespan(params.op_time, params.n_jobs);
    if (lb > N) {
        std::ostringstream os;
        os << "infeasible: flow-shop completion lower bound " << lb << " exceeds horizon " << N;
        throw InfeasibleError(os.str());
    }
    if (static_cast<int>(pv_predicted.size()) != N) throw UsageError("pv trace length differs from horizon");
    Problem P = build_problem(params, 0, N - 1, ShopState::fresh(params.machines()), params.soc_initial(),
                              params.soc_initial(), N, pv_predicted, StateTaxonomy::standard(), std::nullopt, true);
    P.ns = N;
    return P;
}

Problem build_online_problem(const PlantParameters& params, int k, const Observation& obs,
                             const StateTaxonomy& taxonomy, int ns, int d, const std::optional<FrozenPd>& frozen_pd) {
    const int N = params.horizon;
    if (k < 0 || k >= N) throw UsageError("tick outside the horizon");
    if (ns < 0 || d < 0) throw UsageError("N_s and d must be non-negative");
    ShopState shop = obs.shop;
    shop.k0 = k;
    if (ns == 0) {
        bool turbine_free = taxonomy.of(Family::turbine) == StateClass::fully_dispatchable ||
                            taxonomy.in_window(Family::turbine, k);
        bool production_free = taxonomy.in_window(Family::machine_on, k) && taxonomy.in_window(Family::op_start, k);
        if (!production_free && !frozen_pd) throw UsageError("frozen PD trajectories required outside activation windows");
        std::vector<double> pv{obs.pv.at(0)};
        Problem P = build_problem(params, k, k, shop, obs.soc, std::nullopt, -1, pv, taxonomy,
                                  production_free ? std::nullopt : frozen_pd, turbine_free || !frozen_pd);
        P.ns = 0;
        return P;
    }
    const int k1 = std::min(k + ns, N) - 1;
    const int deadline = N - d;
    FlowShop fs{&params, shop, params.n_jobs, deadline, k1 + 1};
    int lb = fs.completion_lower_bound();
    if (lb > deadline) {
        std::ostringstream os;
        os << "infeasible: remaining-work completion bound " << lb << " exceeds tightened deadline " << deadline
           << " (d=" << d << ")";
        throw InfeasibleError(os.str());
    }
    std::vector<double> pv(obs.pv.begin(), obs.pv.begin() + (k1 - k + 1));
    std::optional<double> term;
    if (k1 == N - 1) term = params.soc_initial();
    Problem P = build_problem(params, k, k1, shop, obs.soc, term, deadline, pv, taxonomy, std::nullopt, true);
    P.ns = ns;
    return P;
}

std::vector<double> variable_values(const Schedule& s, const Problem& P) {
    std::vector<double> x(P.vars.size(), 0.0);
    const int T = P.length();
    const int M = static_cast<int>(P.v_on.size());
    for (int t = 0; t < T; ++t) {
        for (int i = 0; i < M; ++i) {
            x[P.v_on[i][t]] = s.machine_on[i][t];
            x[P.v_start[i][t]] = s.op_start[i][t];
        }
        x[P.v_turbine[t]] = s.turbine[t];
        x[P.v_charge[t]] = s.charge[t];
        x[P.v_discharge[t]] = s.discharge[t];
        x[P.v_buy[t]] = s.buy[t];
        x[P.v_sell[t]] = s.sell[t];
    }
    for (int t = 0; t <= T; ++t) {
        for (int i = 0; i < M; ++i) x[P.v_fin[i][t]] = s.ops_finished[i][t];
        x[P.v_soc[t]] = s.soc[t];
    }
    return x;
}

ViolationReport check_feasibility(const Schedule& s, const Problem& P, double tol) {
    const int T = P.length();
    const int M = P.params.machines();
    auto bad_len = [&](std::size_t n, int want) { return static_cast<int>(n) != want; };
    if (s.k0 != P.k0 || s.k1 != P.k1) throw UsageError("schedule window does not match the problem window");
    if (bad_len(s.machine_on.size(), M) || bad_len(s.op_start.size(), M) || bad_len(s.ops_finished.size(), M))
        throw UsageError("schedule machine count does not match the problem");
    for (int i = 0; i < M; ++i)
        if (bad_len(s.machine_on[i].size(), T) || bad_len(s.op_start[i].size(), T) ||
            bad_len(s.ops_finished[i].size(), T + 1))
            throw UsageError("schedule trajectories do not cover the problem window");
    if (bad_len(s.turbine.size(), T) || bad_len(s.charge.size(), T) || bad_len(s.discharge.size(), T) ||
        bad_len(s.buy.size(), T) || bad_len(s.sell.size(), T) || bad_len(s.soc.size(), T + 1))
        throw UsageError("schedule trajectories do not cover the problem window");

    std::vector<double> x = variable_values(s, P);
    ViolationReport rep;
    auto record = [&](const std::string& id, int tick, double lhs, double rhs, double slack) {
        if (slack < -tol) {
            rep.items.push_back({id, tick, lhs, rhs, slack});
            rep.worst = std::max(rep.worst, -slack);
        }
    };
    for (std::size_t j = 0; j < P.vars.size(); ++j) {
        const Variable& v = P.vars[j];
        std::string fam = family_name(v.family);
        record(fam + "_lower_bound", v.tick, x[j], v.lb, x[j] - v.lb);
        if (std::isfinite(v.ub)) record(fam + "_upper_bound", v.tick, x[j], v.ub, v.ub - x[j]);
        if (v.integer) {
            double frac = std::fabs(x[j] - std::round(x[j]));
            record(fam + "_integrality", v.tick, x[j], std::round(x[j]), -frac);
        }
    }
    for (const Constraint& c : P.cons) {
        double lhs = 0.0;
        if (c.sense == Sense::exclusive) {
            lhs = std::min(std::fabs(x[c.terms[0].var]), std::fabs(x[c.terms[1].var]));
            record(c.id, c.tick, lhs, 0.0, -lhs);
            continue;
        }
        for (const Term& t : c.terms) lhs += t.coef * x[t.var];
        switch (c.sense) {
            case Sense::eq: record(c.id, c.tick, lhs, c.rhs, -std::fabs(lhs - c.rhs)); break;
            case Sense::le: record(c.id, c.tick, lhs, c.rhs, c.rhs - lhs); break;
            case Sense::ge: record(c.id, c.tick, lhs, c.rhs, lhs - c.rhs); break;
            default: break;
        }
    }
    return rep;
}

double evaluate_objective(const Schedule& s, const Problem& P) {
    double total = 0.0;
    for (int k = P.k0; k <= P.k1; ++k) total += step_cost(s.state_at(k), k, P.params);
    return total;
}

void write_lp(const Problem& P, std::ostream& os) {
    os.precision(12);
    os << "\\ window " << P.k0 << " " << P.k1 << " deadline " << P.deadline << " jobs " << P.n_jobs << "\n";
    os << "Minimize\n obj:";
    for (const Variable& v : P.vars)
        if (v.cost != 0.0) os << (v.cost < 0 ? " - " : " + ") << std::fabs(v.cost) << " " << v.name;
    os << " + " << P.objective_constant << "\n";
    os << "Subject To\n";
    std::vector<const Constraint*> excl;
    for (const Constraint& c : P.cons) {
        if (c.sense == Sense::exclusive) {
            excl.push_back(&c);
            continue;
        }
        os << " " << c.id << "_t" << c.tick << ":";
        for (const Term& t : c.terms) os << (t.coef < 0 ? " - " : " + ") << std::fabs(t.coef) << " " << P.vars[t.var].name;
        os << (c.sense == Sense::eq ? " = " : c.sense == Sense::le ? " <= " : " >= ") << c.rhs << "\n";
    }
    os << "Exclusive\n";
    for (const Constraint* c : excl)
        os << " " << c->id << "_t" << c->tick << ": " << P.vars[c->terms[0].var].name << " "
           << P.vars[c->terms[1].var].name << "\n";
    os << "Bounds\n";
    for (const Variable& v : P.vars) {
        if (v.lb == v.ub) {
            os << " " << v.name << " = " << v.lb << "\n";
        } else {
            os << " " << v.lb << " <= " << v.name << " <= ";
            if (std::isfinite(v.ub))
                os << v.ub << "\n";
            else
                os << "+inf\n";
        }
    }
    os << "Generals\n";
    for (const Variable& v : P.vars)
        if (v.integer) os << " " << v.name << "\n";
    os << "End\n";
}

}  // namespace eths
