#pragma once

#include <vector>

#include "eths/problem.hpp"
#include "eths/scheduler.hpp"

namespace eths {

enum class BufferPolicy { accumulated_downtime, none };

struct TriggerConfig {
    double epsilon = 70.0;  // +inf disables rescheduling
    double pv_error_weight = 1.0;
    double breakdown_weight = 1.0;
    BufferPolicy buffer_policy = BufferPolicy::accumulated_downtime;
    bool absolute_gap = false;  // S2 tracks C[k] instead of minimising cost
};

struct TriggerLog {
    std::vector<double> J;
    std::vector<int> triggered;
    std::vector<double> solve_ms;  // 0 on ticks without a reschedule
    std::vector<int> tau;          // reschedule instants

    int count() const { return static_cast<int>(tau.size()); }
};

struct AdjustResult {
    TickFlows flows;
    double gap = 0.0;  // cost - C[k]
};

// Single-tick S2 problem (N_s = 0). value_next is the plan's value of end-of-tick SOC.
AdjustResult adjust(int k, const Observation& observed, const FrozenPd& scheduled_pd, double scheduled_cost,
                    const ConvexPwl& value_next, const PlantParameters& p,
                    const StateTaxonomy& taxonomy = StateTaxonomy::standard(), bool absolute_gap = false);

// pv.predicted: forecast behind the plan in force; pv.observed: realised value up to k
// and the latest forecast revision afterwards. health_history: one entry per tick
// since the plan was made.
double evaluate_J(int k, const PvTrace& pv, const std::vector<MachineHealth>& health_history, const TriggerConfig& cfg);
bool should_trigger(double J, const TriggerConfig& cfg);

// d = accumulated downtime ticks, capped so that horizon - d stays >= completion_lb.
int compute_buffer_d(const std::vector<MachineHealth>& health_history, int completion_lb, int horizon,
                     BufferPolicy policy = BufferPolicy::accumulated_downtime);
int downtime_ticks(const std::vector<MachineHealth>& health_history);

// Persistence-bias forecast revision.
class ForecastReviser {
public:
    ForecastReviser(std::vector<double> predicted, double alpha);
    void observe(int k, double observed_kw);
    // realised value at k, revised forecast on (k, N)
    std::vector<double> forecast(int k, double observed_kw) const;
    double bias() const { return bias_; }
    const std::vector<double>& predicted() const { return pred_; }

private:
    std::vector<double> pred_;
    double alpha_;
    double bias_ = 0.0;
};

struct RescheduleResult {
    Schedule schedule;
    int d_used = 0;
};

// Full remaining-horizon reschedule from tick k; d is halved until feasible.
RescheduleResult reschedule(int k, const Observation& obs, int d, const PlantParameters& p,
                            const StateTaxonomy& taxonomy, const SolveBudget& budget, const Plan* warm);

}  // namespace eths
