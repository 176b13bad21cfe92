#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "eths/errors.hpp"
#include "eths/io.hpp"

using namespace eths;
namespace fs = std::filesystem;

namespace {

std::string reference_path() { return std::string(ETHS_SOURCE_DIR) + "/scenarios/reference.json"; }

std::string error_of(const std::string& text) {
    try {
        parse_scenario_text(text);
    } catch (const ValidationError& e) {
        return e.what();
    }
    return "";
}

fs::path scratch_dir(const std::string& name) {
    fs::path d = fs::temp_directory_path() / ("eths_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

ScenarioConfig small_noisy() {
    ScenarioConfig c = reference_scenario();
    c.params.n_jobs = 4;
    c.reschedule_budget.max_evaluations = 200;
    c.trigger.epsilon = 30.0;
    return c;
}

}  // namespace

TEST_CASE("reference scenario file") {
    ScenarioConfig c = parse_scenario(reference_path());
    CHECK(c.params.ess_capacity == 50.0);
    CHECK(c.params.ess_dod == 0.8);
    CHECK(c.params.n_jobs == 25);
    CHECK(c.params.op_time[2] == 8);
    CHECK(c.params.price(107) == doctest::Approx(0.187));
    CHECK(c.params.price(108) == doctest::Approx(0.330));
    CHECK(c.params.price(252) == doctest::Approx(0.187));
    CHECK(c.trigger.epsilon == 70.0);
    CHECK(c.method == Method::eths);
    CHECK(emit_scenario(c) == emit_scenario(reference_scenario()));
}

TEST_CASE("blank scenario falls back to the reference") {
    CHECK(emit_scenario(parse_scenario_text("")) == emit_scenario(reference_scenario()));
    CHECK(emit_scenario(parse_scenario_text("{}")) == emit_scenario(reference_scenario()));
}

TEST_CASE("emit and parse round trip") {
    ScenarioConfig c = reference_scenario();
    c.params.n_jobs = 12;
    c.trigger.epsilon = kInf;
    c.method = Method::online;
    c.noise.sigma = 1.25;
    std::string a = emit_scenario(c);
    ScenarioConfig d = parse_scenario_text(a);
    CHECK(d.trigger.epsilon == kInf);
    CHECK(d.params.n_jobs == 12);
    CHECK(emit_scenario(d) == a);
}

TEST_CASE("validation messages name the field") {
    CHECK(error_of(R"({"plant": {"ess_dod": 1.5}})").find("ess_dod must lie in (0,1]") != std::string::npos);
    CHECK(error_of(R"({"plant": {"colour": 3}})") == "plant.colour: unknown field");
    CHECK(error_of(R"({"plant": {"n_jobs": "many"}})") == "plant.n_jobs: expected an integer");
    CHECK(error_of(R"({"run": {"method": "batch"}})").rfind("run.method", 0) == 0);
    CHECK(error_of(R"({"schema_version": 2})").find("unsupported") != std::string::npos);
    CHECK(error_of("{oops").find("not valid JSON") != std::string::npos);
    CHECK(error_of(R"({"pv": {"predicted": [1, 2]}})").rfind("pv.predicted", 0) == 0);
    CHECK(error_of(R"({"trigger": {"epsilon": -1}})").rfind("trigger.epsilon", 0) == 0);
}

TEST_CASE("pv trace csv") {
    PvTrace t{{0.0, 1.5, 3.25}, {0.0, 1.0, 4.0}};
    std::stringstream ss;
    write_pv_csv(t, ss);
    PvTrace u = read_pv_csv(ss);
    CHECK(u.predicted == t.predicted);
    CHECK(u.observed == t.observed);
    std::stringstream only("tick,predicted_kw\n0,2\n1,3\n");
    PvTrace v = read_pv_csv(only);
    CHECK(v.predicted == std::vector<double>{2.0, 3.0});
    CHECK(v.observed.empty());
    std::stringstream bad("tick,predicted_kw\n0,-2\n");
    CHECK_THROWS_AS(read_pv_csv(bad), ValidationError);
}

TEST_CASE("schedule csv round trip keeps the violation report") {
    ScenarioConfig c = small_noisy();
    Schedule s1 = initial_schedule(c);
    Problem P = build_offline_problem(c.params, c.pv_predicted);
    std::stringstream ss;
    write_schedule_csv(s1, ss);
    Schedule back = read_schedule_csv(ss);
    CHECK(back.machine_on == s1.machine_on);
    CHECK(back.soc == s1.soc);
    CHECK(check_feasibility(back, P).items.size() == check_feasibility(s1, P).items.size());
    CHECK(evaluate_objective(back, P) == doctest::Approx(s1.objective).epsilon(1e-12));

    RunResult r = run_closed_loop(c, 2, &s1);
    ViolationReport rep = check_trajectory(r, c.params);
    std::stringstream rs;
    write_schedule_csv(realized_schedule(r), rs);
    ViolationReport again = check_trajectory(run_from_schedule(read_schedule_csv(rs)), c.params);
    CHECK(again.items.size() == rep.items.size());
    CHECK(again.ok() == rep.ok());
}

TEST_CASE("trigger log csv has one true row per reschedule") {
    ScenarioConfig c = small_noisy();
    RunResult r = run_closed_loop(c, 4);
    std::stringstream ss;
    write_trigger_log_csv(r.log, ss);
    std::string line;
    std::getline(ss, line);
    CHECK(line == "tick,J,triggered,solve_ms");
    int rows = 0, trues = 0;
    while (std::getline(ss, line)) {
        ++rows;
        if (line.find(",true,") != std::string::npos) ++trues;
    }
    CHECK(rows == 288);
    CHECK(trues == r.log.count());
}

TEST_CASE("metrics json is free of wall-clock values") {
    ScenarioConfig c = small_noisy();
    RunResult r = run_closed_loop(c, 1);
    std::string m = metrics_json(r, check_trajectory(r, c.params));
    CHECK(m.find("computing_time") == std::string::npos);
    CHECK(m.find("\"method\": \"eths\"") != std::string::npos);
    CHECK(timing_json(r).find("computing_time_s") != std::string::npos);
    CHECK(run_stem(r) == "eths_seed1");
}

TEST_CASE("comparison output files") {
    ScenarioConfig c = small_noisy();
    c.n_seeds = 2;
    ComparisonTable t = compare_methods(c, seed_list(1, 2), {Method::offline, Method::eths});
    fs::path d = scratch_dir("cmp");
    auto files = emit_comparison(t, "cmp", d.string());
    int metrics = 0, tables = 0;
    for (const auto& e : fs::directory_iterator(d)) {
        std::string n = e.path().filename().string();
        if (n.size() > 13 && n.substr(n.size() - 13) == "_metrics.json") ++metrics;
        if (e.path().extension() == ".csv") ++tables;
    }
    CHECK(metrics == 2);
    CHECK(tables == 1);
    CHECK(files.size() == 3u);
    fs::remove_all(d);
}

TEST_CASE("run outputs and gantt") {
    ScenarioConfig c = small_noisy();
    RunResult r = run_closed_loop(c, 6);
    fs::path d = scratch_dir("run");
    auto files = emit_outputs(r, c.params, d.string());
    CHECK(files.size() == 6u);
    for (const auto& f : files) CHECK(fs::file_size(f) > 0);
    std::ostringstream g;
    write_gantt_text(realized_schedule(r), r.machine_down, g);
    std::string txt = g.str();
    CHECK(txt.find('0') != std::string::npos);  // job 0 appears
    fs::remove_all(d);
}

TEST_CASE("unwritable output directory") {
    fs::path d = scratch_dir("ro");
    fs::path f = d / "plain";
    std::ofstream(f) << "x";
    CHECK_THROWS_AS(write_text_file((f / "sub" / "a.json").string(), "{}"), IoError);
    fs::remove_all(d);
}
