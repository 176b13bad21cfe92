#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "eths/controller.hpp"
#include "eths/plant.hpp"
#include "eths/problem.hpp"

namespace eths {

enum class Method { offline, online, eths };
const char* method_name(Method m);
Method parse_method(const std::string& s);

struct ScenarioConfig {
    PlantParameters params;
    std::vector<double> pv_predicted;
    std::optional<std::vector<double>> pv_observed;  // fixed observation trace (CSV); else generated per seed
    PvNoise noise;
    std::uint64_t seed = 1;
    Method method = Method::eths;
    TriggerConfig trigger;
    int n_seeds = 20;
    SolveBudget s1_budget;
    SolveBudget reschedule_budget;
    StateTaxonomy taxonomy = StateTaxonomy::standard();
    bool use_s2 = true;
    int threads = 0;  // 0: ETHS_THREADS or hardware concurrency
};

struct Metrics {
    double finished_jobs = 0.0;
    double energy_cost = 0.0;
    double cost_per_job = 0.0;
    double computing_time = 0.0;  // solver wall time, s
    double reschedule_count = 0.0;
    double downtime_ticks = 0.0;
    double evaluations = 0.0;
};

struct RunResult {
    std::uint64_t seed = 0;
    Method method = Method::eths;
    std::vector<PlantState> trajectory;  // tick 0..N-1 (soc at tick start)
    double final_soc = 0.0;
    std::vector<int> final_finished;  // ops finished per machine by the end of the horizon
    std::vector<double> tick_cost;
    std::vector<std::vector<int>> machine_down;  // [machine][tick]
    Metrics metrics;
    TriggerLog log;
    std::vector<int> d_used;  // per reschedule
    std::vector<std::string> diagnostics;
};

// S1 schedule for a scenario (shared by every method and seed).
Schedule initial_schedule(const ScenarioConfig& cfg);

RunResult run_closed_loop(const ScenarioConfig& cfg, std::uint64_t seed, const Schedule* s1 = nullptr);

// Per-tick constraints of a realised trajectory: balance, SOC band, ESS and grid limits, exclusivity.
ViolationReport check_trajectory(const RunResult& run, const PlantParameters& p, double tol = 1e-6);

struct MethodSummary {
    std::string label;
    Metrics mean;
    Metrics stderr_;
    std::vector<Metrics> per_seed;
    std::vector<RunResult> runs;
};

struct ComparisonTable {
    std::vector<std::uint64_t> seeds;
    std::vector<MethodSummary> rows;
};

int worker_threads(int requested);
std::vector<std::uint64_t> seed_list(std::uint64_t first, int count);

// Runs every (variant, seed) pair in parallel; aggregation is in seed order.
MethodSummary run_seeds(const ScenarioConfig& cfg, const std::vector<std::uint64_t>& seeds, const std::string& label,
                        const Schedule* s1 = nullptr, bool keep_runs = false);

ComparisonTable compare_methods(const ScenarioConfig& cfg, const std::vector<std::uint64_t>& seeds,
                                const std::vector<Method>& methods = {Method::offline, Method::online, Method::eths},
                                bool keep_runs = false);
ComparisonTable sweep_threshold(const ScenarioConfig& cfg, const std::vector<double>& eps_list,
                                const std::vector<std::uint64_t>& seeds);

enum class Ablation { pd_selection, no_s2, no_s3 };
Ablation parse_ablation(const std::string& s);
ComparisonTable ablate(const ScenarioConfig& cfg, const std::vector<std::uint64_t>& seeds, Ablation variant);

Metrics mean_of(const std::vector<Metrics>& v);
Metrics stderr_of(const std::vector<Metrics>& v);

// Reference scenario: reference plant, sample PV day, default noise and budgets.
ScenarioConfig reference_scenario();

}  // namespace eths
