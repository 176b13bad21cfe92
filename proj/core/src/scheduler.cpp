#include "eths/scheduler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "eths/errors.hpp"

namespace eths {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// absolute improvement needed to accept a move
constexpr double kImprove = 1e-7;

double soc_end(const Problem& P) { return P.soc_terminal.value_or(P.params.soc_initial()); }

}  // namespace

std::vector<TickData> plan_ticks(const Problem& P, const Plan& plan) {
    FlowShop fs = P.shop_view();
    std::vector<double> load = fs.load(plan);
    const int T = P.length();
    std::vector<TickData> ticks(T);
    for (int t = 0; t < T; ++t) {
        TickData& d = ticks[t];
        d.load = load[t];
        d.pv = P.pv[t];
        d.price = P.params.price(P.k0 + t);
        d.turbine_free = P.turbine_free;
        if (!P.turbine_free) d.turbine_fixed = P.frozen->turbine.at(t);
    }
    return ticks;
}

double plan_cost(const Problem& P, const Plan& plan) {
    return dispatch_cost(plan_ticks(P, plan), P.params, P.soc0, soc_end(P));
}

Schedule make_schedule(const Problem& P, const Plan& plan) {
    FlowShop fs = P.shop_view();
    auto ticks = plan_ticks(P, plan);
    DispatchResult d = dispatch_ticks(ticks, P.params, P.soc0, soc_end(P), true);
    const int T = P.length();
    const int M = P.params.machines();
    Schedule s;
    s.k0 = P.k0;
    s.k1 = P.k1;
    s.pv = P.pv;
    fs.occupancy(plan, s.machine_on, s.op_start);
    s.ops_finished.assign(M, std::vector<int>(T + 1, 0));
    for (int i = 0; i < M; ++i) {
        int af = P.shop.active_finish(i);
        for (int t = 0; t <= T; ++t) {
            int k = P.k0 + t;
            int v = P.shop.machines[i].done + ((af >= 0 && af <= k) ? 1 : 0);
            for (int st : plan.starts[i])
                if (st + P.params.op_time[i] <= k) ++v;
            s.ops_finished[i][t] = v;
        }
    }
    for (int t = 0; t < T; ++t) {
        const TickFlows& f = d.flows[t];
        s.turbine.push_back(f.turbine);
        s.charge.push_back(f.charge);
        s.discharge.push_back(f.discharge);
        s.buy.push_back(f.buy);
        s.sell.push_back(f.sell);
    }
    s.soc = d.soc;
    s.cost = d.tick_cost;
    s.objective = d.cost;
    s.plan = plan;
    s.value_to_go = std::move(d.value_to_go);
    return s;
}

Plan asap_plan(const Problem& P) { return P.shop_view().earliest(); }

Plan alap_plan(const Problem& P) { return P.shop_view().latest(); }

Plan repair_plan(const Problem& P, const Plan& wanted) {
    FlowShop fs = P.shop_view();
    Plan ls = fs.latest();
    if (ls.starts.empty()) return ls;
    Plan out = ls;
    const int M = fs.machines();
    for (int i = 0; i < M; ++i) {
        int t = fs.state.available(i);
        for (std::size_t q = 0; q < out.starts[i].size(); ++q) {
            int j = fs.state.machines[i].started + static_cast<int>(q);
            int es = t;
            if (i > 0) es = std::max(es, fs.completion(out, i - 1, j));
            int w = (i < static_cast<int>(wanted.starts.size()) && q < wanted.starts[i].size()) ? wanted.starts[i][q] : es;
            out.starts[i][q] = std::clamp(w, es, ls.starts[i][q]);
            t = out.starts[i][q] + fs.p(i);
        }
    }
    return out;
}

namespace {

struct Move {
    int type;  // 0 single op, 1 job on machines >= i, 2 machine tail from op q, 3 jobs >= q on machines >= i
    int i;
    int q;  // op index (type 0, 2) or job index (type 1)
    int delta;
};

bool apply_move(const FlowShop& fs, const Plan& base, const Move& m, Plan& out) {
    out = base;
    const int M = fs.machines();
    switch (m.type) {
        case 0:
            out.starts[m.i][m.q] += m.delta;
            break;
        case 1: {
            bool any = false;
            for (int i = m.i; i < M; ++i) {
                int q = m.q - fs.state.machines[i].started;
                if (q < 0 || q >= static_cast<int>(out.starts[i].size())) continue;
                out.starts[i][q] += m.delta;
                any = true;
            }
            if (!any) return false;
            break;
        }
        case 2:
            for (std::size_t q = m.q; q < out.starts[m.i].size(); ++q) out.starts[m.i][q] += m.delta;
            break;
        case 3:
            for (int i = m.i; i < M; ++i) {
                int q0 = std::max(m.q - fs.state.machines[i].started, 0);
                for (std::size_t q = q0; q < out.starts[i].size(); ++q) out.starts[i][q] += m.delta;
            }
            break;
    }
    return fs.feasible(out);
}

std::vector<Move> neighbourhood(const FlowShop& fs, const Plan& plan) {
    static const int deltas[] = {-32, -16, -8, -4, -2, -1, 1, 2, 4, 8, 16, 32};
    std::vector<Move> mv;
    const int M = fs.machines();
    for (int i = 0; i < M; ++i)
        for (int q = 0; q < static_cast<int>(plan.starts[i].size()); ++q)
            for (int d : deltas) {
                mv.push_back({0, i, q, d});
                mv.push_back({2, i, q, d});
            }
    int first_job = fs.n_jobs;
    for (int i = 0; i < M; ++i) first_job = std::min(first_job, fs.state.machines[i].started);
    for (int j = first_job; j < fs.n_jobs; ++j)
        for (int i = 0; i < M; ++i) {
            if (j < fs.state.machines[i].started) continue;
            for (int d : deltas) {
                mv.push_back({1, i, j, d});
                mv.push_back({3, i, j, d});
            }
        }
    return mv;
}

}  // namespace

Schedule solve(const Problem& P, const SolveBudget& budget, const Plan* warm) {
    auto t0 = Clock::now();
    FlowShop fs = P.shop_view();
    Plan ls = fs.latest();
    if (ls.starts.empty()) {
        std::ostringstream os;
        os << "infeasible: completion lower bound " << fs.completion_lower_bound() << " exceeds deadline "
           << fs.deadline;
        throw InfeasibleError(os.str());
    }
    long evals = 0;
    std::vector<Plan> cands;
    if (warm) cands.push_back(repair_plan(P, *warm));
    cands.push_back(fs.earliest());
    cands.push_back(ls);
    {
        Plan es = fs.earliest();
        Plan mid = es;
        for (std::size_t i = 0; i < mid.starts.size(); ++i)
            for (std::size_t q = 0; q < mid.starts[i].size(); ++q)
                mid.starts[i][q] = (es.starts[i][q] + ls.starts[i][q]) / 2;
        cands.push_back(repair_plan(P, mid));
    }
    Plan best;
    double best_cost = kInf;
    for (const Plan& c : cands) {
        if (!std::isfinite(best_cost) && seconds_since(t0) >= budget.time_limit_s)
            throw TimeoutError("time limit reached before a feasible plan was found");
        double v = plan_cost(P, c);
        ++evals;
        if (v < best_cost - kImprove) {
            best_cost = v;
            best = c;
        }
    }
    if (!std::isfinite(best_cost)) throw InfeasibleError("no candidate plan admits a feasible energy dispatch");

    std::mt19937_64 rng(mix_seed(budget.seed, 7));
    Plan trial;
    bool stop = false;
    double lb = -kInf;
    while (!stop) {
        auto moves = neighbourhood(fs, best);
        std::shuffle(moves.begin(), moves.end(), rng);
        bool improved = false;
        for (const Move& m : moves) {
            if (evals >= budget.max_evaluations ||
                ((evals & 63) == 0 && seconds_since(t0) > budget.time_limit_s)) {
                stop = true;
                break;
            }
            if (!apply_move(fs, best, m, trial)) continue;
            double v = plan_cost(P, trial);
            ++evals;
            if (v < best_cost - kImprove) {
                best_cost = v;
                std::swap(best, trial);
                improved = true;
            }
        }
        if (!improved) break;
        if (budget.gap > 0.0) {
            Schedule tmp = make_schedule(P, best);
            lb = lower_bound(P, tmp);
            if ((best_cost - lb) <= budget.gap * std::max(std::fabs(best_cost), 1e-9)) break;
        }
    }
    Schedule s = make_schedule(P, best);
    s.evaluations = evals;
    s.lower_bound = lower_bound(P, s);
    s.gap = (s.objective - s.lower_bound) / std::max(std::fabs(s.objective), 1e-9);
    s.solve_seconds = seconds_since(t0);
    return s;
}

double lower_bound(const Problem& P, const Schedule& inc) {
    const int T = P.length();
    if (inc.value_to_go.size() != static_cast<std::size_t>(T + 1)) return -kInf;
    FlowShop fs = P.shop_view();
    Plan ls = fs.latest();
    if (ls.starts.empty()) return -kInf;
    Plan es = fs.earliest();
    const auto& p = P.params;
    auto ticks = plan_ticks(P, inc.plan);

    // SOC prices: mu_k must lie in the subdifferential of tick k's cost at the
    // chosen change and in -dW_{k+1}; ticks joined by an interior SOC share one value.
    std::vector<double> lo_k(T), hi_k(T);
    for (int k = 0; k < T; ++k) {
        ConvexPwl f = tick_cost_function(ticks[k], p);
        double d = inc.soc[k + 1] - inc.soc[k];
        double a = f.left_slope(d), b = f.right_slope(d);
        const ConvexPwl& w = inc.value_to_go[k + 1];
        double wa = w.left_slope(inc.soc[k + 1]), wb = w.right_slope(inc.soc[k + 1]);
        lo_k[k] = std::max(a, -wb);
        hi_k[k] = std::min(b, -wa);
        if (lo_k[k] > hi_k[k]) {
            // rounding only; fall back to the tick's own subdifferential
            lo_k[k] = std::isfinite(a) ? a : b;
            hi_k[k] = std::isfinite(b) ? b : a;
        }
    }
    std::vector<double> mu(T, 0.0);
    const double band = 1e-7;
    for (int a = 0; a < T;) {
        int b = a;
        double lo = lo_k[a], hi = hi_k[a];
        while (b + 1 < T && inc.soc[b + 1] > p.soc_min() + band && inc.soc[b + 1] < p.soc_max() - band &&
               std::max(lo, lo_k[b + 1]) <= std::min(hi, hi_k[b + 1])) {
            ++b;
            lo = std::max(lo, lo_k[b]);
            hi = std::min(hi, hi_k[b]);
        }
        double v = std::isfinite(lo) && std::isfinite(hi) ? 0.5 * (lo + hi) : (std::isfinite(lo) ? lo : hi);
        if (!std::isfinite(v)) v = 0.0;
        for (int k = a; k <= b; ++k) mu[k] = v;
        a = b + 1;
    }
    auto h = [&](TickData t, double load, double m) {
        t.load = load;
        ConvexPwl f = tick_cost_function(t, p);
        if (f.empty()) return kInf;
        double best = kInf;
        for (double x : f.breakpoints()) best = std::min(best, f.at(x) - m * x);
        return best;
    };

    // active-op load is fixed, production load of planned ops is relaxed
    FlowShop none = fs;
    Plan empty;
    empty.starts.assign(fs.machines(), {});
    for (int i = 0; i < fs.machines(); ++i) none.state.machines[i].started = fs.n_jobs;
    std::vector<double> fixed_load = none.load(empty);

    double total = 0.0;
    std::vector<double> g(T);
    for (int k = 0; k < T; ++k) {
        double L = ticks[k].load;
        double h0 = h(ticks[k], L, mu[k]);
        const double eta = 1e-6;
        double h1 = h(ticks[k], L + eta, mu[k]);
        if (!std::isfinite(h0)) return -kInf;
        g[k] = std::isfinite(h1) ? (h1 - h0) / eta : 0.0;
        total += h0 - g[k] * L + g[k] * fixed_load[k];
    }
    for (int i = 0; i < fs.machines(); ++i) {
        int r = static_cast<int>(es.starts[i].size());
        if (r == 0) continue;
        int a = es.starts[i].front() - P.k0;
        int b = ls.starts[i].back() + fs.p(i) - P.k0;  // exclusive
        std::vector<double> gw(g.begin() + a, g.begin() + b);
        std::sort(gw.begin(), gw.end());
        int work = r * fs.p(i);
        for (int q = 0; q < work && q < static_cast<int>(gw.size()); ++q) total += p.machine_power[i] * gw[q];
    }
    // SOC terms of the relaxed dynamics
    const double smin = p.soc_min(), smax = p.soc_max();
    for (int k = 1; k < T; ++k) {
        double c = mu[k - 1] - mu[k];
        total += std::min(c * smin, c * smax);
    }
    total += mu[T - 1] * soc_end(P) - mu[0] * P.soc0;
    return total - 1e-6 * T;
}

namespace {

struct BnB {
    const Problem& P;
    FlowShop fs;
    Plan ls;
    std::vector<std::pair<int, int>> order;  // (machine, q)
    Plan cur;
    Plan best;
    double best_cost;
    long nodes = 0;
    long limit;
    bool exhausted = false;

    double partial_cost(int depth) {
        // ops beyond depth are removed from the load
        FlowShop part = fs;
        Plan pl;
        pl.starts.assign(fs.machines(), {});
        for (int i = 0; i < fs.machines(); ++i) part.state.machines[i].started = fs.n_jobs;
        std::vector<double> load = part.load(pl);
        for (int d = 0; d < depth; ++d) {
            auto [i, q] = order[d];
            int s = cur.starts[i][q];
            for (int k = s; k < s + fs.p(i); ++k) load[k - P.k0] += P.params.machine_power[i];
        }
        auto ticks = plan_ticks(P, best);
        for (std::size_t k = 0; k < ticks.size(); ++k) ticks[k].load = load[k];
        ++nodes;
        return dispatch_cost(ticks, P.params, P.soc0, soc_end(P));
    }

    void dfs(int depth) {
        if (nodes >= limit) {
            exhausted = true;
            return;
        }
        if (depth == static_cast<int>(order.size())) {
            double v = partial_cost(depth);
            if (v < best_cost - 1e-12) {
                best_cost = v;
                best = cur;
            }
            return;
        }
        if (depth > 0 && partial_cost(depth) >= best_cost - 1e-12) return;
        auto [i, q] = order[depth];
        int j = fs.state.machines[i].started + q;
        int es = q == 0 ? fs.state.available(i) : cur.starts[i][q - 1] + fs.p(i);
        if (i > 0) es = std::max(es, fs.completion(cur, i - 1, j));
        for (int s = es; s <= ls.starts[i][q]; ++s) {
            cur.starts[i][q] = s;
            dfs(depth + 1);
            if (exhausted) return;
        }
    }
};

}  // namespace

Schedule solve_bnb(const Problem& P, const SolveBudget& budget) {
    auto t0 = Clock::now();
    Schedule warm = solve(P, budget);
    BnB b{P, P.shop_view(), {}, {}, {}, warm.plan, warm.objective, 0, budget.max_evaluations, false};
    b.ls = b.fs.latest();
    b.cur = b.ls;
    const int M = b.fs.machines();
    for (int j = 0; j < b.fs.n_jobs; ++j)
        for (int i = 0; i < M; ++i) {
            int q = j - b.fs.state.machines[i].started;
            if (q >= 0) b.order.push_back({i, q});
        }
    b.dfs(0);
    Schedule s = make_schedule(P, b.best);
    s.evaluations = warm.evaluations + b.nodes;
    // an interrupted search keeps the heuristic bound
    s.lower_bound = b.exhausted ? std::max(warm.lower_bound, -kInf) : s.objective;
    s.gap = (s.objective - s.lower_bound) / std::max(std::fabs(s.objective), 1e-9);
    s.solve_seconds = seconds_since(t0);
    return s;
}

}  // namespace eths
