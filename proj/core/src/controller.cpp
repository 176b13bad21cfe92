#include "eths/controller.hpp"

#include <algorithm>
#include <cmath>

#include "eths/errors.hpp"

namespace eths {

namespace {

TickFlows absolute_gap_decision(const TickData& t, const ConvexPwl& f, const ConvexPwl& next, double soc, double target,
                                const PlantParameters& p) {
    double lo = std::max(f.lo(), next.lo() - soc);
    double hi = std::min(f.hi(), next.hi() - soc);
    if (f.empty() || next.empty() || lo > hi + 1e-9) throw InfeasibleError("no feasible tick decision");
    hi = std::max(hi, lo);
    std::vector<double> cand{lo, hi};
    auto bp = f.breakpoints();
    for (double x : bp) cand.push_back(x);
    for (double x : next.breakpoints()) cand.push_back(x - soc);
    // crossings of f with the target level
    for (std::size_t q = 0; q + 1 < bp.size(); ++q) {
        double v0 = f.at(bp[q]), v1 = f.at(bp[q + 1]);
        if ((v0 - target) * (v1 - target) < 0.0) cand.push_back(bp[q] + (target - v0) * (bp[q + 1] - bp[q]) / (v1 - v0));
    }
    double best_gap = kInf, best_total = kInf, best_x = lo;
    for (double x : cand) {
        if (x < lo || x > hi) continue;
        double fx = f.at(x);
        double gap = std::fabs(fx - target);
        double total = fx + next.at(std::clamp(soc + x, next.lo(), next.hi()));
        if (gap < best_gap - 1e-12 || (gap <= best_gap + 1e-12 && total < best_total)) {
            best_gap = gap;
            best_total = total;
            best_x = x;
        }
    }
    return tick_flows(t, best_x, p);
}

}  // namespace

AdjustResult adjust(int k, const Observation& observed, const FrozenPd& scheduled_pd, double scheduled_cost,
                    const ConvexPwl& value_next, const PlantParameters& p, const StateTaxonomy& taxonomy,
                    bool absolute_gap) {
    Problem P = build_online_problem(p, k, observed, taxonomy, 0, 0, scheduled_pd);
    P.terminal_value = value_next;
    TickData t;
    for (int i = 0; i < p.machines(); ++i)
        t.load += P.vars[P.v_on[i][0]].lb * p.machine_power[i];
    t.pv = P.pv[0];
    t.price = p.price(k);
    t.turbine_free = P.turbine_free;
    if (!t.turbine_free) t.turbine_fixed = scheduled_pd.turbine.at(0);
    ConvexPwl f = tick_cost_function(t, p);
    if (f.empty()) throw InfeasibleError("tick load cannot be served");
    AdjustResult r;
    r.flows = absolute_gap ? absolute_gap_decision(t, f, value_next, observed.soc, scheduled_cost, p)
                           : best_tick_decision(t, f, value_next, observed.soc, p);
    r.gap = r.flows.cost - scheduled_cost;
    return r;
}

int downtime_ticks(const std::vector<MachineHealth>& history) {
    int n = 0;
    for (const auto& h : history)
        for (const auto& m : h)
            if (!m.up) ++n;
    return n;
}

double evaluate_J(int k, const PvTrace& pv, const std::vector<MachineHealth>& history, const TriggerConfig& cfg) {
    double e = 0.0;
    const int N = static_cast<int>(pv.predicted.size());
    for (int s = k; s < N; ++s) e += std::fabs(pv.predicted[s] - pv.observed[s]);
    return cfg.pv_error_weight * e + cfg.breakdown_weight * downtime_ticks(history);
}

bool should_trigger(double J, const TriggerConfig& cfg) { return std::isfinite(cfg.epsilon) && J >= cfg.epsilon; }

int compute_buffer_d(const std::vector<MachineHealth>& history, int completion_lb, int horizon, BufferPolicy policy) {
    if (policy == BufferPolicy::none) return 0;
    int d = downtime_ticks(history);
    return std::clamp(d, 0, std::max(0, horizon - completion_lb));
}

ForecastReviser::ForecastReviser(std::vector<double> predicted, double alpha) : pred_(std::move(predicted)), alpha_(alpha) {}

void ForecastReviser::observe(int k, double observed_kw) {
    if (pred_[k] > 0.0) bias_ = (1.0 - alpha_) * bias_ + alpha_ * (observed_kw - pred_[k]);
}

std::vector<double> ForecastReviser::forecast(int k, double observed_kw) const {
    const int N = static_cast<int>(pred_.size());
    std::vector<double> f(N - k, 0.0);
    f[0] = observed_kw;
    for (int s = k + 1; s < N; ++s)
        if (pred_[s] > 0.0) f[s - k] = std::max(0.0, pred_[s] + bias_);
    return f;
}

RescheduleResult reschedule(int k, const Observation& obs, int d, const PlantParameters& p,
                            const StateTaxonomy& taxonomy, const SolveBudget& budget, const Plan* warm) {
    const int N = p.horizon;
    while (true) {
        try {
            Problem P = build_online_problem(p, k, obs, taxonomy, N - k, d, std::nullopt);
            RescheduleResult r;
            r.schedule = solve(P, budget, warm);
            r.d_used = d;
            return r;
        } catch (const InfeasibleError&) {
            if (d == 0) throw;
            d /= 2;
        }
    }
}

}  // namespace eths
