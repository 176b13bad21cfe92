#include "eths/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <climits>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "eths/errors.hpp"

namespace eths {

const char* method_name(Method m) {
    switch (m) {
        case Method::offline: return "offline";
        case Method::online: return "online";
        case Method::eths: return "eths";
    }
    return "?";
}

Method parse_method(const std::string& s) {
    if (s == "offline") return Method::offline;
    if (s == "online") return Method::online;
    if (s == "eths") return Method::eths;
    throw ValidationError("unknown method '" + s + "' (expected offline, online or eths)");
}

Ablation parse_ablation(const std::string& s) {
    if (s == "pd_selection" || s == "pd-selection") return Ablation::pd_selection;
    if (s == "no_S2" || s == "no-s2" || s == "no_s2") return Ablation::no_s2;
    if (s == "no_S3" || s == "no-s3" || s == "no_s3") return Ablation::no_s3;
    throw ValidationError("unknown ablation '" + s + "' (expected pd_selection, no_S2 or no_S3)");
}

ScenarioConfig reference_scenario() {
    ScenarioConfig c;
    c.params = reference_parameters();
    c.pv_predicted = sample_pv_profile(c.params.horizon, c.params.dt_hours, 90.0);
    c.s1_budget.max_evaluations = 200000;
    c.reschedule_budget.max_evaluations = 1500;
    c.reschedule_budget.time_limit_s = 20.0;
    return c;
}

Schedule initial_schedule(const ScenarioConfig& cfg) {
    Problem P = build_offline_problem(cfg.params, cfg.pv_predicted);
    return solve(P, cfg.s1_budget);
}

namespace {

constexpr int kNever = INT_MAX;

struct Shop {
    std::vector<int> rem, done, started;
};

ShopState shop_state(const Shop& s, const MachineHealth& h, int k) {
    ShopState st = ShopState::fresh(static_cast<int>(s.rem.size()), k);
    for (std::size_t i = 0; i < s.rem.size(); ++i) {
        st.machines[i].up = h[i].up;
        st.machines[i].remaining = s.rem[i];
        st.machines[i].done = s.done[i];
        st.machines[i].started = s.started[i];
    }
    return st;
}

// Largest job count that the shop can still complete by the horizon, or -1.
int completable_jobs(const PlantParameters& p, const ShopState& st) {
    int lo = 0;
    for (const auto& m : st.machines) lo = std::max(lo, m.started);
    for (int n = p.n_jobs - 1; n >= lo; --n) {
        FlowShop fs{&p, st, n, p.horizon, p.horizon};
        if (fs.completion_lower_bound() <= p.horizon) return n;
    }
    return -1;
}

}  // namespace

RunResult run_closed_loop(const ScenarioConfig& cfg, std::uint64_t seed, const Schedule* s1_in) {
    const PlantParameters& p = cfg.params;
    validate(p);
    cfg.taxonomy.validate(p.horizon);
    const int N = p.horizon, M = p.machines(), n = p.n_jobs;
    if (static_cast<int>(cfg.pv_predicted.size()) != N) throw ValidationError("predicted pv length differs from horizon");

    RunResult R;
    R.seed = seed;
    R.method = cfg.method;

    std::vector<double> obs_pv;
    if (cfg.pv_observed) {
        obs_pv = *cfg.pv_observed;
        if (static_cast<int>(obs_pv.size()) != N) throw ValidationError("observed pv length differs from horizon");
    } else {
        obs_pv = cfg.noise.enabled ? observe_pv(cfg.pv_predicted, cfg.noise, seed) : cfg.pv_predicted;
    }
    const auto draws = breakdown_draws(M, N, seed);

    Schedule s1_local;
    if (!s1_in) s1_local = initial_schedule(cfg);
    const Schedule& s1 = s1_in ? *s1_in : s1_local;
    double solver_s = s1.solve_seconds;
    double evals = static_cast<double>(s1.evaluations);

    // per job start ticks of the plan in force
    std::vector<std::vector<int>> planned(M, std::vector<int>(n, kNever));
    for (int i = 0; i < M; ++i)
        for (std::size_t q = 0; q < s1.plan.starts[i].size() && q < static_cast<std::size_t>(n); ++q)
            planned[i][q] = s1.plan.starts[i][q];
    std::vector<std::size_t> next_slot(M, 0);

    Schedule cur = s1;
    std::vector<double> plan_fc = cfg.pv_predicted;
    ForecastReviser reviser(cfg.pv_predicted, cfg.noise.bias_alpha);
    PlantParameters target = p;

    Shop shop{std::vector<int>(M, 0), std::vector<int>(M, 0), std::vector<int>(M, 0)};
    MachineHealth health(M);
    std::vector<int> ran(M, 0);
    std::vector<MachineHealth> since_plan, all_hist;
    double soc = p.soc_initial();
    const bool adaptive = cfg.method != Method::offline;

    R.trajectory.reserve(N);
    R.log.J.assign(N, 0.0);
    R.log.triggered.assign(N, 0);
    R.log.solve_ms.assign(N, 0.0);
    R.tick_cost.assign(N, 0.0);
    R.machine_down.assign(M, std::vector<int>(N, 0));

    for (int k = 0; k < N; ++k) {
        if (k > 0) {
            std::vector<double> dk(M);
            for (int i = 0; i < M; ++i) dk[i] = draws[i][k];
            health = breakdown_step(health, dk, ran, p);
        }
        since_plan.push_back(health);
        all_hist.push_back(health);
        for (int i = 0; i < M; ++i) R.machine_down[i][k] = health[i].up ? 0 : 1;

        reviser.observe(k, obs_pv[k]);
        std::vector<double> fc = reviser.forecast(k, obs_pv[k]);
        {
            PvTrace tr{std::vector<double>(plan_fc.begin() + k, plan_fc.end()), fc};
            R.log.J[k] = evaluate_J(0, tr, since_plan, cfg.trigger);
        }
        bool trig = false;
        if (cfg.method == Method::online) trig = true;
        else if (cfg.method == Method::eths) trig = should_trigger(R.log.J[k], cfg.trigger);

        ShopState st = shop_state(shop, health, k);
        if (trig) {
            Observation ob{st, health, soc, fc};
            FlowShop fs{&target, st, target.n_jobs, N, N};
            int d = compute_buffer_d(all_hist, fs.completion_lower_bound(), N, cfg.trigger.buffer_policy);
            Plan warm;
            warm.starts.resize(M);
            for (int i = 0; i < M; ++i)
                for (int j = shop.started[i]; j < target.n_jobs; ++j) warm.starts[i].push_back(planned[i][j]);
            SolveBudget b = cfg.reschedule_budget;
            b.seed = mix_seed(seed, 100 + static_cast<std::uint64_t>(k));
            std::optional<RescheduleResult> rr;
            try {
                rr = reschedule(k, ob, d, target, cfg.taxonomy, b, &warm);
            } catch (const InfeasibleError& e) {
                int m = completable_jobs(target, st);
                std::ostringstream os;
                os << "tick " << k << ": " << e.what();
                if (m >= 0) {
                    target.n_jobs = m;
                    os << "; job target reduced to " << m;
                    try {
                        rr = reschedule(k, ob, 0, target, cfg.taxonomy, b, nullptr);
                    } catch (const InfeasibleError&) {
                        os << "; still infeasible, plan kept";
                    }
                } else {
                    os << "; plan kept";
                }
                R.diagnostics.push_back(os.str());
            }
            if (rr) {
                const Schedule& s = rr->schedule;
                solver_s += s.solve_seconds;
                evals += static_cast<double>(s.evaluations);
                for (int i = 0; i < M; ++i) {
                    for (int j = shop.started[i]; j < n; ++j) {
                        std::size_t q = static_cast<std::size_t>(j - shop.started[i]);
                        planned[i][j] = q < s.plan.starts[i].size() ? s.plan.starts[i][q] : kNever;
                    }
                }
                cur = s;
                std::copy(fc.begin(), fc.end(), plan_fc.begin() + k);
                since_plan.clear();
                R.log.tau.push_back(k);
                R.log.triggered[k] = 1;
                R.log.solve_ms[k] = s.solve_seconds * 1e3;
                R.d_used.push_back(rr->d_used);
            }
        }

        // production layer
        PlantState x = PlantState::idle(M, soc);
        x.pv_power = obs_pv[k];
        for (int i = 0; i < M; ++i) {
            x.ops_finished[i] = shop.done[i];
            if (!health[i].up) continue;
            if (shop.rem[i] > 0) {
                x.machine_on[i] = 1;
                continue;
            }
            bool has_job = shop.started[i] < target.n_jobs &&
                           (i == 0 || shop.done[i - 1] > shop.started[i]);
            bool go = false;
            if (adaptive) {
                go = has_job && planned[i][shop.started[i]] <= k;
            } else {
                auto& sl = next_slot[i];
                const auto& st1 = s1.plan.starts[i];
                while (sl < st1.size() && st1[sl] < k) ++sl;
                if (sl < st1.size() && st1[sl] == k) {
                    go = has_job;
                    ++sl;
                }
            }
            if (go) {
                shop.rem[i] = p.op_time[i];
                ++shop.started[i];
                x.machine_on[i] = 1;
                x.op_start[i] = 1;
            }
        }

        // energy layer
        const int t = k - cur.k0;
        const double u_plan = cur.turbine.at(t);
        if (adaptive && cfg.use_s2) {
            FrozenPd fz{std::vector<std::vector<int>>(M), std::vector<std::vector<int>>(M), {u_plan}};
            for (int i = 0; i < M; ++i) {
                fz.machine_on[i] = {x.machine_on[i]};
                fz.op_start[i] = {x.op_start[i]};
            }
            Observation ob{st, health, soc, {obs_pv[k]}};
            AdjustResult a = adjust(k, ob, fz, cur.cost.at(t), cur.value_to_go.at(t + 1), p, cfg.taxonomy,
                                    cfg.trigger.absolute_gap);
            x.turbine_power = a.flows.turbine;
            x.ess_charge = a.flows.charge;
            x.ess_discharge = a.flows.discharge;
            x.grid_buy = a.flows.buy;
            x.grid_sell = a.flows.sell;
        } else {
            x.turbine_power = u_plan;
            x.ess_charge = cur.charge.at(t);
            x.ess_discharge = cur.discharge.at(t);
            double r = load_of(x.machine_on, p) + x.ess_charge - x.ess_discharge - x.pv_power - x.turbine_power;
            x.grid_buy = std::max(0.0, r);
            x.grid_sell = std::max(0.0, -r);
        }
        double soc_next = soc_step(soc, x.ess_charge, x.ess_discharge, p, k + 1);
        R.tick_cost[k] = step_cost(x, k, p);
        R.trajectory.push_back(std::move(x));
        soc = soc_next;

        for (int i = 0; i < M; ++i) {
            ran[i] = R.trajectory.back().machine_on[i];
            if (!ran[i]) continue;
            ++health[i].t_on;
            if (--shop.rem[i] == 0) ++shop.done[i];
        }
    }
    R.final_soc = soc;
    R.final_finished = shop.done;

    Metrics& m = R.metrics;
    m.finished_jobs = shop.done[M - 1];
    for (double c : R.tick_cost) m.energy_cost += c;
    m.cost_per_job = m.energy_cost / std::max(m.finished_jobs, 1.0);
    m.computing_time = solver_s;
    m.reschedule_count = R.log.count();
    m.downtime_ticks = downtime_ticks(all_hist);
    m.evaluations = evals;
    return R;
}

ViolationReport check_trajectory(const RunResult& run, const PlantParameters& p, double tol) {
    ViolationReport rep;
    auto need = [&](const char* id, int k, double lhs, double rhs, double slack) {
        if (slack < -tol) {
            rep.items.push_back({id, k, lhs, rhs, slack});
            rep.worst = std::max(rep.worst, -slack);
        }
    };
    const int T = static_cast<int>(run.trajectory.size());
    for (int k = 0; k < T; ++k) {
        const PlantState& s = run.trajectory[k];
        double r = power_balance_residual(s, p);
        need("balance", k, r, 0.0, -std::fabs(r));
        need("soc_lower_bound", k, s.soc, p.soc_min(), s.soc - p.soc_min());
        need("soc_upper_bound", k, s.soc, p.soc_max(), p.soc_max() - s.soc);
        double next = k + 1 < T ? run.trajectory[k + 1].soc : run.final_soc;
        double dyn = s.soc + p.ess_efficiency * s.ess_charge * p.dt_hours - s.ess_discharge * p.dt_hours / p.ess_efficiency;
        need("soc_dynamics", k, next, dyn, -std::fabs(next - dyn));
        need("charge_upper_bound", k, s.ess_charge, p.ess_max_power, p.ess_max_power - s.ess_charge);
        need("discharge_upper_bound", k, s.ess_discharge, p.ess_max_power, p.ess_max_power - s.ess_discharge);
        need("ess_exclusive", k, std::min(s.ess_charge, s.ess_discharge), 0.0, -std::min(s.ess_charge, s.ess_discharge));
        need("grid_exclusive", k, std::min(s.grid_buy, s.grid_sell), 0.0, -std::min(s.grid_buy, s.grid_sell));
        need("turbine_upper_bound", k, s.turbine_power, p.turbine_max_power, p.turbine_max_power - s.turbine_power);
        need("turbine_lower_bound", k, s.turbine_power, 0.0, s.turbine_power);
        need("buy_lower_bound", k, s.grid_buy, 0.0, s.grid_buy);
        need("sell_lower_bound", k, s.grid_sell, 0.0, s.grid_sell);
        if (std::isfinite(p.grid_max_power)) {
            need("buy_upper_bound", k, s.grid_buy, p.grid_max_power, p.grid_max_power - s.grid_buy);
            need("sell_upper_bound", k, s.grid_sell, p.grid_max_power, p.grid_max_power - s.grid_sell);
        }
    }
    need("soc_terminal", T, run.final_soc, p.soc_initial(), -std::fabs(run.final_soc - p.soc_initial()));
    return rep;
}

int worker_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* e = std::getenv("ETHS_THREADS")) {
        int v = std::atoi(e);
        if (v > 0) return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<std::uint64_t> seed_list(std::uint64_t first, int count) {
    std::vector<std::uint64_t> s;
    for (int i = 0; i < count; ++i) s.push_back(first + static_cast<std::uint64_t>(i));
    return s;
}

namespace {

template <class F>
void parallel_for(int count, int threads, F&& f) {
    threads = std::min(threads, count);
    if (threads <= 1) {
        for (int i = 0; i < count; ++i) f(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errs(count);
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
        pool.emplace_back([&] {
            for (int i = next++; i < count; i = next++) {
                try {
                    f(i);
                } catch (...) {
                    errs[i] = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

}  // namespace

Metrics mean_of(const std::vector<Metrics>& v) {
    Metrics m;
    if (v.empty()) return m;
    for (const Metrics& x : v) {
        m.finished_jobs += x.finished_jobs;
        m.energy_cost += x.energy_cost;
        m.cost_per_job += x.cost_per_job;
        m.computing_time += x.computing_time;
        m.reschedule_count += x.reschedule_count;
        m.downtime_ticks += x.downtime_ticks;
        m.evaluations += x.evaluations;
    }
    double n = static_cast<double>(v.size());
    m.finished_jobs /= n;
    m.energy_cost /= n;
    m.cost_per_job /= n;
    m.computing_time /= n;
    m.reschedule_count /= n;
    m.downtime_ticks /= n;
    m.evaluations /= n;
    return m;
}

Metrics stderr_of(const std::vector<Metrics>& v) {
    Metrics s;
    if (v.size() < 2) return s;
    Metrics m = mean_of(v);
    const double n = static_cast<double>(v.size());
    auto se = [&](double Metrics::*f) {
        double acc = 0.0;
        for (const Metrics& x : v) acc += (x.*f - m.*f) * (x.*f - m.*f);
        s.*f = std::sqrt(acc / (n - 1.0) / n);
    };
    se(&Metrics::finished_jobs);
    se(&Metrics::energy_cost);
    se(&Metrics::cost_per_job);
    se(&Metrics::computing_time);
    se(&Metrics::reschedule_count);
    se(&Metrics::downtime_ticks);
    se(&Metrics::evaluations);
    return s;
}

MethodSummary run_seeds(const ScenarioConfig& cfg, const std::vector<std::uint64_t>& seeds, const std::string& label,
                        const Schedule* s1, bool keep_runs) {
    Schedule own;
    if (!s1) {
        own = initial_schedule(cfg);
        s1 = &own;
    }
    std::vector<RunResult> runs(seeds.size());
    parallel_for(static_cast<int>(seeds.size()), worker_threads(cfg.threads),
                 [&](int i) { runs[i] = run_closed_loop(cfg, seeds[i], s1); });
    MethodSummary out;
    out.label = label;
    for (const RunResult& r : runs) out.per_seed.push_back(r.metrics);
    out.mean = mean_of(out.per_seed);
    out.stderr_ = stderr_of(out.per_seed);
    if (keep_runs) out.runs = std::move(runs);
    return out;
}

ComparisonTable compare_methods(const ScenarioConfig& cfg, const std::vector<std::uint64_t>& seeds,
                                const std::vector<Method>& methods, bool keep_runs) {
    ComparisonTable t;
    t.seeds = seeds;
    Schedule s1 = initial_schedule(cfg);
    for (Method m : methods) {
        ScenarioConfig c = cfg;
        c.method = m;
        t.rows.push_back(run_seeds(c, seeds, method_name(m), &s1, keep_runs));
    }
    return t;
}

ComparisonTable sweep_threshold(const ScenarioConfig& cfg, const std::vector<double>& eps_list,
                                const std::vector<std::uint64_t>& seeds) {
    ComparisonTable t;
    t.seeds = seeds;
    Schedule s1 = initial_schedule(cfg);
    for (double eps : eps_list) {
        ScenarioConfig c = cfg;
        c.method = Method::eths;
        c.trigger.epsilon = eps;
        std::ostringstream os;
        os << "epsilon=" << eps;
        t.rows.push_back(run_seeds(c, seeds, os.str(), &s1));
    }
    return t;
}

ComparisonTable ablate(const ScenarioConfig& cfg, const std::vector<std::uint64_t>& seeds, Ablation variant) {
    ComparisonTable t;
    t.seeds = seeds;
    Schedule s1 = initial_schedule(cfg);
    ScenarioConfig base = cfg;
    base.method = Method::eths;
    t.rows.push_back(run_seeds(base, seeds, "eths", &s1));
    switch (variant) {
        case Ablation::pd_selection: {
            ScenarioConfig c = base;
            c.taxonomy.cls[static_cast<int>(Family::turbine)] = StateClass::fully_dispatchable;
            t.rows.push_back(run_seeds(c, seeds, "pd=production", &s1));
            ScenarioConfig c2 = base;
            c2.method = Method::online;
            t.rows.push_back(run_seeds(c2, seeds, "pd=none", &s1));
            break;
        }
        case Ablation::no_s2: {
            ScenarioConfig c = base;
            c.use_s2 = false;
            t.rows.push_back(run_seeds(c, seeds, "no_S2", &s1));
            break;
        }
        case Ablation::no_s3: {
            ScenarioConfig c = base;
            c.method = Method::online;
            t.rows.push_back(run_seeds(c, seeds, "no_S3", &s1));
            break;
        }
    }
    return t;
}

}  // namespace eths
