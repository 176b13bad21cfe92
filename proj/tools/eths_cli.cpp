#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eths/errors.hpp"
#include "eths/io.hpp"

using namespace eths;

namespace {

enum Exit { ok = 0, internal = 1, validation = 2, infeasible = 3, timeout = 4, io = 5, usage = 6, violations = 7 };

struct Overrides {
    std::string scenario;
    std::optional<double> epsilon;
    std::optional<std::uint64_t> seed;
    std::optional<int> seeds;
    std::optional<std::string> method;
    std::string out_dir = "out";
    std::optional<double> budget_secs;
    std::optional<double> gap;
};

ScenarioConfig load(const Overrides& o) {
    ScenarioConfig c = o.scenario.empty() ? reference_scenario() : parse_scenario(o.scenario);
    if (o.epsilon) {
        if (!(*o.epsilon >= 0.0)) throw ValidationError("--epsilon must be >= 0");
        c.trigger.epsilon = *o.epsilon;
    }
    if (o.seed) c.seed = *o.seed;
    if (o.seeds) {
        if (*o.seeds < 1) throw ValidationError("--seeds must be >= 1");
        c.n_seeds = *o.seeds;
    }
    if (o.method) c.method = parse_method(*o.method);
    if (o.budget_secs) {
        if (!(*o.budget_secs >= 0.0)) throw ValidationError("--budget-secs must be >= 0");
        c.s1_budget.time_limit_s = *o.budget_secs;
        c.reschedule_budget.time_limit_s = *o.budget_secs;
    }
    if (o.gap) {
        if (!(*o.gap >= 0.0)) throw ValidationError("--gap must be >= 0");
        c.s1_budget.gap = *o.gap;
        c.reschedule_budget.gap = *o.gap;
    }
    return c;
}

void print_table(const ComparisonTable& t) {
    std::printf("%-16s %8s %10s %10s %9s %10s\n", "label", "jobs", "cost", "cost/job", "resched", "time_s");
    for (const auto& r : t.rows)
        std::printf("%-16s %8.2f %10.3f %10.4f %9.2f %10.3f\n", r.label.c_str(), r.mean.finished_jobs,
                    r.mean.energy_cost, r.mean.cost_per_job, r.mean.reschedule_count, r.mean.computing_time);
}

void print_files(const std::vector<std::string>& files) {
    for (const auto& f : files) std::printf("wrote %s\n", f.c_str());
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t pos = 0;
            v.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ValidationError("--epsilons: '" + item + "' is not a number");
        }
    }
    if (v.empty()) throw ValidationError("--epsilons: empty list");
    return v;
}

void add_common(CLI::App* sc, Overrides& o) {
    sc->add_option("scenario", o.scenario, "Scenario JSON (defaults to the reference scenario)");
    sc->add_option("--out-dir", o.out_dir, "Output directory");
    sc->add_option("--budget-secs", o.budget_secs, "Solver wall-clock cap per solve");
    sc->add_option("--gap", o.gap, "Relative optimality gap at which a solve stops");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Event-triggered hybrid scheduling for a PV/ESS/turbine flow-shop plant"};
    app.require_subcommand(1);
    Overrides o;
    bool exact = false;
    std::string epsilons = "30,70,100", variant = "no_S2", schedule_path, lp_path;
    bool realized = false;

    auto* so = app.add_subcommand("solve-offline", "Solve the full-day offline schedule");
    add_common(so, o);
    so->add_flag("--exact", exact, "Use branch and bound (small instances only)");
    so->add_option("--lp", lp_path, "Also write the model in LP text form");

    auto* run = app.add_subcommand("run", "Closed-loop run of one method and seed");
    add_common(run, o);
    run->add_option("--method", o.method, "offline, online or eths");
    run->add_option("--seed", o.seed, "Scenario seed");
    run->add_option("--epsilon", o.epsilon, "Trigger threshold");

    auto* cmp = app.add_subcommand("compare", "Offline, online and eths over paired seeds");
    add_common(cmp, o);
    cmp->add_option("--seed", o.seed, "First seed");
    cmp->add_option("--seeds", o.seeds, "Number of seeds");
    cmp->add_option("--epsilon", o.epsilon, "Trigger threshold");

    auto* sw = app.add_subcommand("sweep", "Trigger threshold sweep");
    add_common(sw, o);
    sw->add_option("--seed", o.seed, "First seed");
    sw->add_option("--seeds", o.seeds, "Number of seeds");
    sw->add_option("--epsilons", epsilons, "Comma separated thresholds");

    auto* ab = app.add_subcommand("ablate", "Ablation study");
    add_common(ab, o);
    ab->add_option("--seed", o.seed, "First seed");
    ab->add_option("--seeds", o.seeds, "Number of seeds");
    ab->add_option("--epsilon", o.epsilon, "Trigger threshold");
    ab->add_option("--variant", variant, "pd_selection, no_S2 or no_S3");

    auto* ck = app.add_subcommand("check", "Re-check a schedule CSV");
    ck->add_option("scenario", o.scenario, "Scenario JSON (defaults to the reference scenario)");
    ck->add_option("--schedule", schedule_path, "Schedule CSV")->required();
    ck->add_flag("--realized", realized, "Check as a realised trajectory (per-tick constraints only)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return usage;
    }

    try {
        ScenarioConfig cfg = load(o);
        if (so->parsed()) {
            Problem P = build_offline_problem(cfg.params, cfg.pv_predicted);
            if (!lp_path.empty()) {
                std::ostringstream lp;
                write_lp(P, lp);
                write_text_file(lp_path, lp.str());
            }
            Schedule s = exact ? solve_bnb(P, cfg.s1_budget) : solve(P, cfg.s1_budget);
            ViolationReport rep = check_feasibility(s, P);
            std::printf("objective %.6f lower_bound %.6f gap %.4f evaluations %ld violations %zu\n", s.objective,
                        s.lower_bound, s.gap, s.evaluations, rep.items.size());
            print_files(emit_offline(s, rep, o.out_dir));
            return rep.ok() ? ok : violations;
        }
        if (run->parsed()) {
            RunResult r = run_closed_loop(cfg, cfg.seed);
            ViolationReport rep = check_trajectory(r, cfg.params);
            const Metrics& m = r.metrics;
            std::printf("%s seed %llu: jobs %.0f cost %.4f cost/job %.4f reschedules %.0f time %.3f s violations %zu\n",
                        method_name(cfg.method), static_cast<unsigned long long>(cfg.seed), m.finished_jobs,
                        m.energy_cost, m.cost_per_job, m.reschedule_count, m.computing_time, rep.items.size());
            for (const auto& d : r.diagnostics) std::printf("note: %s\n", d.c_str());
            print_files(emit_outputs(r, cfg.params, o.out_dir));
            return rep.ok() ? ok : violations;
        }
        auto seeds = seed_list(cfg.seed, cfg.n_seeds);
        if (cmp->parsed()) {
            ComparisonTable t = compare_methods(cfg, seeds);
            print_table(t);
            print_files(emit_comparison(t, "comparison", o.out_dir));
            return ok;
        }
        if (sw->parsed()) {
            ComparisonTable t = sweep_threshold(cfg, parse_list(epsilons), seeds);
            print_table(t);
            print_files(emit_comparison(t, "sweep", o.out_dir));
            return ok;
        }
        if (ab->parsed()) {
            ComparisonTable t = ablate(cfg, seeds, parse_ablation(variant));
            print_table(t);
            print_files(emit_comparison(t, "ablation", o.out_dir));
            return ok;
        }
        if (ck->parsed()) {
            std::ifstream is(schedule_path);
            if (!is) throw IoError("cannot read schedule " + schedule_path);
            Schedule s = read_schedule_csv(is);
            ViolationReport rep;
            if (realized) {
                rep = check_trajectory(run_from_schedule(s), cfg.params);
            } else {
                Problem P = build_offline_problem(cfg.params, s.pv.size() == cfg.pv_predicted.size() ? s.pv : cfg.pv_predicted);
                rep = check_feasibility(s, P);
            }
            for (const auto& v : rep.items)
                std::printf("violation %s tick %d lhs %.9g rhs %.9g slack %.3g\n", v.id.c_str(), v.tick, v.lhs, v.rhs,
                            v.slack);
            std::printf("%zu violations, worst %.3g\n", rep.items.size(), rep.worst);
            return rep.ok() ? ok : violations;
        }
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return validation;
    } catch (const InfeasibleError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return infeasible;
    } catch (const TimeoutError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return timeout;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return io;
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return usage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return internal;
    }
    return ok;
}
