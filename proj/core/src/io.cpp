#include "eths/io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "eths/errors.hpp"

namespace eths {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* class_name(StateClass c) {
    switch (c) {
        case StateClass::non_dispatchable: return "non_dispatchable";
        case StateClass::partially_dispatchable: return "partially_dispatchable";
        case StateClass::fully_dispatchable: return "fully_dispatchable";
    }
    return "?";
}

StateClass parse_class(const std::string& field, const std::string& s) {
    if (s == "non_dispatchable") return StateClass::non_dispatchable;
    if (s == "partially_dispatchable") return StateClass::partially_dispatchable;
    if (s == "fully_dispatchable") return StateClass::fully_dispatchable;
    throw ValidationError(field + ": unknown class '" + s + "'");
}

int family_index(const std::string& field, const std::string& s) {
    for (int f = 0; f < kFamilies; ++f)
        if (s == family_name(static_cast<Family>(f))) return f;
    throw ValidationError(field + ": unknown state family '" + s + "'");
}

// Schema reader over one JSON object; remembers the path for error messages.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ValidationError(path_ + ": expected an object");
    }

    void allow(std::initializer_list<const char*> keys) const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            bool ok = false;
            for (const char* k : keys) ok = ok || it.key() == k;
            if (!ok) throw ValidationError(field(it.key()) + ": unknown field");
        }
    }
    bool has(const char* k) const { return j_.contains(k); }
    std::string field(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
    const json& at(const char* k) const { return j_.at(k); }

    void number(const char* k, double& out, bool null_is_inf = false) const {
        if (!has(k)) return;
        const json& v = j_.at(k);
        if (null_is_inf && v.is_null()) {
            out = kInf;
            return;
        }
        if (!v.is_number()) throw ValidationError(field(k) + ": expected a number");
        out = v.get<double>();
    }
    void integer(const char* k, int& out) const {
        if (!has(k)) return;
        const json& v = j_.at(k);
        if (!v.is_number_integer()) throw ValidationError(field(k) + ": expected an integer");
        out = v.get<int>();
    }
    void uinteger(const char* k, std::uint64_t& out) const {
        if (!has(k)) return;
        const json& v = j_.at(k);
        if (!v.is_number_unsigned()) throw ValidationError(field(k) + ": expected a non-negative integer");
        out = v.get<std::uint64_t>();
    }
    void longint(const char* k, long& out) const {
        if (!has(k)) return;
        const json& v = j_.at(k);
        if (!v.is_number_integer()) throw ValidationError(field(k) + ": expected an integer");
        out = v.get<long>();
    }
    void boolean(const char* k, bool& out) const {
        if (!has(k)) return;
        const json& v = j_.at(k);
        if (!v.is_boolean()) throw ValidationError(field(k) + ": expected true or false");
        out = v.get<bool>();
    }
    void string(const char* k, std::string& out) const {
        if (!has(k)) return;
        const json& v = j_.at(k);
        if (!v.is_string()) throw ValidationError(field(k) + ": expected a string");
        out = v.get<std::string>();
    }
    template <class T>
    void array(const char* k, std::vector<T>& out) const {
        if (!has(k)) return;
        const json& v = j_.at(k);
        if (!v.is_array()) throw ValidationError(field(k) + ": expected an array");
        std::vector<T> r;
        for (const json& e : v) {
            if constexpr (std::is_integral_v<T>) {
                if (!e.is_number_integer()) throw ValidationError(field(k) + ": expected integer entries");
            } else {
                if (!e.is_number()) throw ValidationError(field(k) + ": expected numeric entries");
            }
            r.push_back(e.get<T>());
        }
        out = std::move(r);
    }

private:
    const json& j_;
    std::string path_;
};

void read_budget(const Reader& r, SolveBudget& b) {
    r.allow({"time_limit_s", "gap", "max_evaluations", "seed"});
    r.number("time_limit_s", b.time_limit_s);
    r.number("gap", b.gap);
    r.longint("max_evaluations", b.max_evaluations);
    r.uinteger("seed", b.seed);
    if (!(b.time_limit_s >= 0.0)) throw ValidationError(r.field("time_limit_s") + ": must be >= 0");
    if (!(b.gap >= 0.0)) throw ValidationError(r.field("gap") + ": must be >= 0");
    if (b.max_evaluations < 1) throw ValidationError(r.field("max_evaluations") + ": must be >= 1");
}

json budget_json(const SolveBudget& b) {
    return json{{"time_limit_s", b.time_limit_s}, {"gap", b.gap}, {"max_evaluations", b.max_evaluations},
                {"seed", b.seed}};
}

json inf_or(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string dir_of(const std::string& path) {
    fs::path p(path);
    return p.has_parent_path() ? p.parent_path().string() : std::string(".");
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path);
    os << std::setprecision(17);
    return os;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double to_double(const std::string& s, int line) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ValidationError("line " + std::to_string(line) + ": '" + s + "' is not a number");
    }
}

}  // namespace

ScenarioConfig parse_scenario_text(const std::string& text, const std::string& base_dir) {
    ScenarioConfig cfg = reference_scenario();
    bool all_blank = std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); });
    if (all_blank) return cfg;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("scenario is not valid JSON: ") + e.what());
    }
    Reader root(j, "");
    root.allow({"schema_version", "name", "plant", "pv", "noise", "trigger", "solver", "run", "taxonomy"});
    int version = kSchemaVersion;
    root.integer("schema_version", version);
    if (version != kSchemaVersion)
        throw ValidationError("schema_version: unsupported version " + std::to_string(version));

    PlantParameters& p = cfg.params;
    if (root.has("plant")) {
        Reader r(root.at("plant"), "plant");
        r.allow({"machine_power", "op_time", "gas_price", "ess_efficiency", "ess_fixed_cost", "ess_degradation_cost",
                 "ess_capacity", "ess_dod", "ess_max_power", "buy_price", "peak_price", "offpeak_price",
                 "peak_start_tick", "peak_end_tick", "feed_in_tariff", "breakdown_rate", "repair_rate", "n_jobs",
                 "horizon", "dt_hours", "turbine_max_power", "grid_max_power"});
        r.array("machine_power", p.machine_power);
        r.array("op_time", p.op_time);
        r.number("gas_price", p.gas_price);
        r.number("ess_efficiency", p.ess_efficiency);
        r.number("ess_fixed_cost", p.ess_fixed_cost);
        r.number("ess_degradation_cost", p.ess_degradation_cost);
        r.number("ess_capacity", p.ess_capacity);
        r.number("ess_dod", p.ess_dod);
        r.number("ess_max_power", p.ess_max_power);
        r.number("feed_in_tariff", p.feed_in_tariff);
        r.number("breakdown_rate", p.breakdown_rate);
        r.number("repair_rate", p.repair_rate);
        r.integer("n_jobs", p.n_jobs);
        const int old_h = p.horizon;
        r.integer("horizon", p.horizon);
        r.number("dt_hours", p.dt_hours);
        r.number("turbine_max_power", p.turbine_max_power);
        r.number("grid_max_power", p.grid_max_power, true);
        if (p.horizon < 1) throw ValidationError("plant.horizon: must be >= 1");
        if (r.has("buy_price")) {
            if (r.has("peak_price") || r.has("offpeak_price") || r.has("peak_start_tick") || r.has("peak_end_tick"))
                throw ValidationError("plant.buy_price: cannot be combined with the peak/off-peak fields");
            r.array("buy_price", p.buy_price);
        } else {
            // default tariff window is 9:00-21:00 whatever the tick count
            double peak = 0.330, off = 0.187;
            int a = static_cast<int>(std::lround(108.0 * p.horizon / 288.0));
            int b = static_cast<int>(std::lround(252.0 * p.horizon / 288.0));
            r.number("peak_price", peak);
            r.number("offpeak_price", off);
            r.integer("peak_start_tick", a);
            r.integer("peak_end_tick", b);
            if (a < 0 || b < a || b > p.horizon)
                throw ValidationError("plant.peak_start_tick/peak_end_tick: need 0 <= start <= end <= horizon");
            p.buy_price = tou_prices(p.horizon, peak, off, a, b);
        }
        if (p.horizon != old_h && !root.has("pv"))
            cfg.pv_predicted = sample_pv_profile(p.horizon, p.dt_hours, 90.0);
    }
    try {
        validate(p);
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("plant.") + e.what());
    }

    if (root.has("pv")) {
        Reader r(root.at("pv"), "pv");
        r.allow({"profile", "peak_kw", "trace_csv", "predicted", "observed"});
        std::string profile = "bell";
        double peak_kw = 90.0;
        r.string("profile", profile);
        r.number("peak_kw", peak_kw);
        if (profile != "bell") throw ValidationError("pv.profile: only 'bell' is built in");
        if (!(peak_kw >= 0.0)) throw ValidationError("pv.peak_kw: must be >= 0");
        cfg.pv_predicted = sample_pv_profile(p.horizon, p.dt_hours, peak_kw);
        cfg.pv_observed.reset();
        if (r.has("trace_csv")) {
            std::string path;
            r.string("trace_csv", path);
            fs::path fp(path);
            if (fp.is_relative()) fp = fs::path(base_dir) / fp;
            PvTrace tr = read_pv_csv_file(fp.string());
            cfg.pv_predicted = tr.predicted;
            if (!tr.observed.empty()) cfg.pv_observed = tr.observed;
        }
        r.array("predicted", cfg.pv_predicted);
        if (r.has("observed")) {
            std::vector<double> o;
            r.array("observed", o);
            cfg.pv_observed = o;
        }
    }
    if (static_cast<int>(cfg.pv_predicted.size()) != p.horizon)
        throw ValidationError("pv.predicted: needs one entry per tick (" + std::to_string(p.horizon) + ")");
    if (cfg.pv_observed && static_cast<int>(cfg.pv_observed->size()) != p.horizon)
        throw ValidationError("pv.observed: needs one entry per tick (" + std::to_string(p.horizon) + ")");
    for (double v : cfg.pv_predicted)
        if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("pv.predicted: entries must be >= 0");
    if (cfg.pv_observed)
        for (double v : *cfg.pv_observed)
            if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("pv.observed: entries must be >= 0");

    if (root.has("noise")) {
        Reader r(root.at("noise"), "noise");
        r.allow({"enabled", "ar", "sigma", "bias_alpha"});
        r.boolean("enabled", cfg.noise.enabled);
        r.number("ar", cfg.noise.ar);
        r.number("sigma", cfg.noise.sigma);
        r.number("bias_alpha", cfg.noise.bias_alpha);
        if (!(std::fabs(cfg.noise.ar) < 1.0)) throw ValidationError("noise.ar: must lie in (-1,1)");
        if (!(cfg.noise.sigma >= 0.0)) throw ValidationError("noise.sigma: must be >= 0");
        if (!(cfg.noise.bias_alpha >= 0.0 && cfg.noise.bias_alpha <= 1.0))
            throw ValidationError("noise.bias_alpha: must lie in [0,1]");
    }

    if (root.has("trigger")) {
        Reader r(root.at("trigger"), "trigger");
        r.allow({"epsilon", "pv_error_weight", "breakdown_weight", "buffer_policy", "absolute_gap"});
        TriggerConfig& t = cfg.trigger;
        r.number("epsilon", t.epsilon, true);
        r.number("pv_error_weight", t.pv_error_weight);
        r.number("breakdown_weight", t.breakdown_weight);
        std::string bp = t.buffer_policy == BufferPolicy::none ? "none" : "accumulated_downtime";
        r.string("buffer_policy", bp);
        if (bp == "none") t.buffer_policy = BufferPolicy::none;
        else if (bp == "accumulated_downtime") t.buffer_policy = BufferPolicy::accumulated_downtime;
        else throw ValidationError("trigger.buffer_policy: expected accumulated_downtime or none");
        r.boolean("absolute_gap", t.absolute_gap);
        if (!(t.epsilon >= 0.0)) throw ValidationError("trigger.epsilon: must be >= 0");
        if (!(t.pv_error_weight >= 0.0)) throw ValidationError("trigger.pv_error_weight: must be >= 0");
        if (!(t.breakdown_weight >= 0.0)) throw ValidationError("trigger.breakdown_weight: must be >= 0");
    }

    if (root.has("solver")) {
        Reader r(root.at("solver"), "solver");
        r.allow({"offline", "reschedule"});
        if (r.has("offline")) read_budget(Reader(r.at("offline"), "solver.offline"), cfg.s1_budget);
        if (r.has("reschedule")) read_budget(Reader(r.at("reschedule"), "solver.reschedule"), cfg.reschedule_budget);
    }

    if (root.has("run")) {
        Reader r(root.at("run"), "run");
        r.allow({"method", "seed", "n_seeds", "use_s2", "threads"});
        std::string m = method_name(cfg.method);
        r.string("method", m);
        try {
            cfg.method = parse_method(m);
        } catch (const ValidationError& e) {
            throw ValidationError(std::string("run.method: ") + e.what());
        }
        r.uinteger("seed", cfg.seed);
        r.integer("n_seeds", cfg.n_seeds);
        r.boolean("use_s2", cfg.use_s2);
        r.integer("threads", cfg.threads);
        if (cfg.n_seeds < 1) throw ValidationError("run.n_seeds: must be >= 1");
        if (cfg.threads < 0) throw ValidationError("run.threads: must be >= 0");
    }

    if (root.has("taxonomy")) {
        Reader r(root.at("taxonomy"), "taxonomy");
        r.allow({"classes", "windows"});
        if (r.has("classes")) {
            const json& c = r.at("classes");
            if (!c.is_object()) throw ValidationError("taxonomy.classes: expected an object");
            for (auto it = c.begin(); it != c.end(); ++it) {
                std::string f = "taxonomy.classes." + it.key();
                if (!it.value().is_string()) throw ValidationError(f + ": expected a string");
                cfg.taxonomy.cls[family_index(f, it.key())] = parse_class(f, it.value().get<std::string>());
            }
        }
        if (r.has("windows")) {
            const json& w = r.at("windows");
            if (!w.is_object()) throw ValidationError("taxonomy.windows: expected an object");
            for (auto it = w.begin(); it != w.end(); ++it) {
                std::string f = "taxonomy.windows." + it.key();
                int fam = family_index(f, it.key());
                std::vector<std::pair<int, int>> win;
                if (!it.value().is_array()) throw ValidationError(f + ": expected [[start, end], ...]");
                for (const json& e : it.value()) {
                    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
                        throw ValidationError(f + ": expected [[start, end], ...]");
                    win.emplace_back(e[0].get<int>(), e[1].get<int>());
                }
                cfg.taxonomy.windows[fam] = win;
            }
        }
        try {
            cfg.taxonomy.validate(p.horizon);
        } catch (const ValidationError& e) {
            throw ValidationError(std::string("taxonomy: ") + e.what());
        }
    }
    return cfg;
}

ScenarioConfig parse_scenario(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot read scenario " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_scenario_text(ss.str(), dir_of(path));
}

std::string emit_scenario(const ScenarioConfig& cfg) {
    const PlantParameters& p = cfg.params;
    json j;
    j["schema_version"] = kSchemaVersion;
    j["plant"] = json{{"machine_power", p.machine_power},
                      {"op_time", p.op_time},
                      {"gas_price", p.gas_price},
                      {"ess_efficiency", p.ess_efficiency},
                      {"ess_fixed_cost", p.ess_fixed_cost},
                      {"ess_degradation_cost", p.ess_degradation_cost},
                      {"ess_capacity", p.ess_capacity},
                      {"ess_dod", p.ess_dod},
                      {"ess_max_power", p.ess_max_power},
                      {"buy_price", p.buy_price},
                      {"feed_in_tariff", p.feed_in_tariff},
                      {"breakdown_rate", p.breakdown_rate},
                      {"repair_rate", p.repair_rate},
                      {"n_jobs", p.n_jobs},
                      {"horizon", p.horizon},
                      {"dt_hours", p.dt_hours},
                      {"turbine_max_power", p.turbine_max_power},
                      {"grid_max_power", inf_or(p.grid_max_power)}};
    j["pv"] = json{{"predicted", cfg.pv_predicted}};
    if (cfg.pv_observed) j["pv"]["observed"] = *cfg.pv_observed;
    j["noise"] = json{{"enabled", cfg.noise.enabled},
                      {"ar", cfg.noise.ar},
                      {"sigma", cfg.noise.sigma},
                      {"bias_alpha", cfg.noise.bias_alpha}};
    j["trigger"] = json{{"epsilon", inf_or(cfg.trigger.epsilon)},
                        {"pv_error_weight", cfg.trigger.pv_error_weight},
                        {"breakdown_weight", cfg.trigger.breakdown_weight},
                        {"buffer_policy", cfg.trigger.buffer_policy == BufferPolicy::none ? "none" : "accumulated_downtime"},
                        {"absolute_gap", cfg.trigger.absolute_gap}};
    j["solver"] = json{{"offline", budget_json(cfg.s1_budget)}, {"reschedule", budget_json(cfg.reschedule_budget)}};
    j["run"] = json{{"method", method_name(cfg.method)},
                    {"seed", cfg.seed},
                    {"n_seeds", cfg.n_seeds},
                    {"use_s2", cfg.use_s2},
                    {"threads", cfg.threads}};
    json cls = json::object(), win = json::object();
    for (int f = 0; f < kFamilies; ++f) {
        const char* name = family_name(static_cast<Family>(f));
        cls[name] = class_name(cfg.taxonomy.cls[f]);
        if (!cfg.taxonomy.windows[f].empty()) {
            json a = json::array();
            for (auto [s, e] : cfg.taxonomy.windows[f]) a.push_back({s, e});
            win[name] = a;
        }
    }
    j["taxonomy"] = json{{"classes", cls}, {"windows", win}};
    return j.dump(2) + "\n";
}

PvTrace read_pv_csv(std::istream& is) {
    PvTrace tr;
    std::string line;
    int ln = 0;
    bool header = false, with_obs = false;
    while (std::getline(is, line)) {
        ++ln;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto c = split(line);
        if (!header) {
            header = true;
            if (c.size() < 2 || c[0] != "tick" || c[1] != "predicted_kw" || (c.size() > 2 && c[2] != "observed_kw") ||
                c.size() > 3)
                throw ValidationError("pv csv: header must be tick,predicted_kw[,observed_kw]");
            with_obs = c.size() == 3;
            continue;
        }
        if (c.size() != (with_obs ? 3u : 2u)) throw ValidationError("pv csv line " + std::to_string(ln) + ": wrong column count");
        double tick = to_double(c[0], ln);
        if (tick != static_cast<double>(tr.predicted.size()))
            throw ValidationError("pv csv line " + std::to_string(ln) + ": ticks must run 0,1,2,...");
        double pr = to_double(c[1], ln);
        if (pr < 0.0) throw ValidationError("pv csv line " + std::to_string(ln) + ": negative predicted_kw");
        tr.predicted.push_back(pr);
        if (with_obs) {
            double ob = to_double(c[2], ln);
            if (ob < 0.0) throw ValidationError("pv csv line " + std::to_string(ln) + ": negative observed_kw");
            tr.observed.push_back(ob);
        }
    }
    if (!header) throw ValidationError("pv csv: empty file");
    return tr;
}

PvTrace read_pv_csv_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot read pv trace " + path);
    return read_pv_csv(is);
}

void write_pv_csv(const PvTrace& pv, std::ostream& os) {
    os << std::setprecision(17);
    bool obs = !pv.observed.empty();
    os << "tick,predicted_kw" << (obs ? ",observed_kw" : "") << "\n";
    for (std::size_t k = 0; k < pv.predicted.size(); ++k) {
        os << k << "," << pv.predicted[k];
        if (obs) os << "," << pv.observed.at(k);
        os << "\n";
    }
}

void write_schedule_csv(const Schedule& s, std::ostream& os) {
    const int M = static_cast<int>(s.machine_on.size());
    const int T = s.length();
    os << std::setprecision(17);
    os << "tick,pv";
    for (const char* f : {"on", "start", "finished"})
        for (int i = 0; i < M; ++i) os << "," << f << "_m" << i;
    os << ",turbine,charge,discharge,soc,buy,sell\n";
    for (int t = 0; t <= T; ++t) {
        bool end = t == T;
        os << s.k0 + t << "," << (end ? 0.0 : s.pv[t]);
        for (int i = 0; i < M; ++i) os << "," << (end ? 0 : s.machine_on[i][t]);
        for (int i = 0; i < M; ++i) os << "," << (end ? 0 : s.op_start[i][t]);
        for (int i = 0; i < M; ++i) os << "," << s.ops_finished[i][t];
        if (end)
            os << ",0,0,0," << s.soc[t] << ",0,0\n";
        else
            os << "," << s.turbine[t] << "," << s.charge[t] << "," << s.discharge[t] << "," << s.soc[t] << ","
               << s.buy[t] << "," << s.sell[t] << "\n";
    }
}

Schedule read_schedule_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ValidationError("schedule csv: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto head = split(line);
    int M = 0;
    while (static_cast<std::size_t>(2 + M) < head.size() && head[2 + M].rfind("on_m", 0) == 0) ++M;
    const std::size_t cols = 2 + 3 * static_cast<std::size_t>(M) + 6;
    if (head.size() != cols || head[0] != "tick" || head[1] != "pv")
        throw ValidationError("schedule csv: unexpected header");
    std::vector<std::vector<double>> rows;
    int ln = 1;
    while (std::getline(is, line)) {
        ++ln;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto c = split(line);
        if (c.size() != cols) throw ValidationError("schedule csv line " + std::to_string(ln) + ": wrong column count");
        std::vector<double> v;
        for (const auto& x : c) v.push_back(to_double(x, ln));
        rows.push_back(std::move(v));
    }
    if (rows.size() < 2) throw ValidationError("schedule csv: needs at least one tick and the closing row");
    Schedule s;
    const int T = static_cast<int>(rows.size()) - 1;
    s.k0 = static_cast<int>(rows[0][0]);
    s.k1 = s.k0 + T - 1;
    s.machine_on.assign(M, std::vector<int>(T));
    s.op_start.assign(M, std::vector<int>(T));
    s.ops_finished.assign(M, std::vector<int>(T + 1));
    s.pv.resize(T);
    s.turbine.resize(T);
    s.charge.resize(T);
    s.discharge.resize(T);
    s.buy.resize(T);
    s.sell.resize(T);
    s.soc.resize(T + 1);
    for (int t = 0; t <= T; ++t) {
        const auto& r = rows[t];
        if (static_cast<int>(r[0]) != s.k0 + t) throw ValidationError("schedule csv: ticks must be consecutive");
        for (int i = 0; i < M; ++i) s.ops_finished[i][t] = static_cast<int>(std::lround(r[2 + 2 * M + i]));
        const std::size_t b = 2 + 3 * static_cast<std::size_t>(M);
        s.soc[t] = r[b + 3];
        if (t == T) break;
        s.pv[t] = r[1];
        for (int i = 0; i < M; ++i) {
            s.machine_on[i][t] = static_cast<int>(std::lround(r[2 + i]));
            s.op_start[i][t] = static_cast<int>(std::lround(r[2 + M + i]));
        }
        s.turbine[t] = r[b];
        s.charge[t] = r[b + 1];
        s.discharge[t] = r[b + 2];
        s.buy[t] = r[b + 4];
        s.sell[t] = r[b + 5];
    }
    return s;
}

Schedule realized_schedule(const RunResult& run) {
    Schedule s;
    const int T = static_cast<int>(run.trajectory.size());
    const int M = T > 0 ? static_cast<int>(run.trajectory[0].machine_on.size()) : 0;
    s.k0 = 0;
    s.k1 = T - 1;
    s.machine_on.assign(M, std::vector<int>(T));
    s.op_start.assign(M, std::vector<int>(T));
    s.ops_finished.assign(M, std::vector<int>(T + 1));
    for (int t = 0; t < T; ++t) {
        const PlantState& x = run.trajectory[t];
        s.pv.push_back(x.pv_power);
        for (int i = 0; i < M; ++i) {
            s.machine_on[i][t] = x.machine_on[i];
            s.op_start[i][t] = x.op_start[i];
            s.ops_finished[i][t] = x.ops_finished[i];
        }
        s.turbine.push_back(x.turbine_power);
        s.charge.push_back(x.ess_charge);
        s.discharge.push_back(x.ess_discharge);
        s.soc.push_back(x.soc);
        s.buy.push_back(x.grid_buy);
        s.sell.push_back(x.grid_sell);
    }
    for (int i = 0; i < M && i < static_cast<int>(run.final_finished.size()); ++i) s.ops_finished[i][T] = run.final_finished[i];
    s.soc.push_back(run.final_soc);
    s.cost = run.tick_cost;
    for (double c : run.tick_cost) s.objective += c;
    return s;
}

RunResult run_from_schedule(const Schedule& s) {
    RunResult r;
    const int T = s.length();
    const int M = static_cast<int>(s.machine_on.size());
    for (int t = 0; t < T; ++t) r.trajectory.push_back(s.state_at(s.k0 + t));
    r.final_soc = s.soc.at(T);
    r.final_finished.resize(M);
    for (int i = 0; i < M; ++i) r.final_finished[i] = s.ops_finished[i][T];
    return r;
}

void write_trigger_log_csv(const TriggerLog& log, std::ostream& os) {
    os << std::setprecision(17);
    os << "tick,J,triggered,solve_ms\n";
    for (std::size_t k = 0; k < log.J.size(); ++k)
        os << k << "," << log.J[k] << "," << (log.triggered[k] ? "true" : "false") << "," << log.solve_ms[k] << "\n";
}

std::string metrics_json(const RunResult& run, const ViolationReport& report) {
    const Metrics& m = run.metrics;
    json j{{"schema_version", kSchemaVersion},
           {"method", method_name(run.method)},
           {"seed", run.seed},
           {"finished_jobs", m.finished_jobs},
           {"total_cost", m.energy_cost},
           {"cost_per_job", m.cost_per_job},
           {"reschedule_count", m.reschedule_count},
           {"reschedule_ticks", run.log.tau},
           {"buffer_d", run.d_used},
           {"downtime_ticks", m.downtime_ticks},
           {"final_soc", run.final_soc},
           {"violations", report.items.size()},
           {"diagnostics", run.diagnostics}};
    return j.dump(2) + "\n";
}

std::string timing_json(const RunResult& run) {
    json ms = json::array();
    for (int k : run.log.tau) ms.push_back(run.log.solve_ms[k]);
    json j{{"method", method_name(run.method)},
           {"seed", run.seed},
           {"computing_time_s", run.metrics.computing_time},
           {"evaluations", run.metrics.evaluations},
           {"reschedule_solve_ms", ms}};
    return j.dump(2) + "\n";
}

namespace {

json metrics_obj(const Metrics& m, bool with_time) {
    json j{{"finished_jobs", m.finished_jobs},
           {"total_cost", m.energy_cost},
           {"cost_per_job", m.cost_per_job},
           {"reschedule_count", m.reschedule_count},
           {"downtime_ticks", m.downtime_ticks}};
    if (with_time) {
        j["computing_time_s"] = m.computing_time;
        j["evaluations"] = m.evaluations;
    }
    return j;
}

}  // namespace

std::string summary_json(const MethodSummary& m, const std::vector<std::uint64_t>& seeds) {
    json per = json::array();
    for (std::size_t i = 0; i < m.per_seed.size(); ++i) {
        json e = metrics_obj(m.per_seed[i], false);
        e["seed"] = i < seeds.size() ? seeds[i] : 0;
        per.push_back(e);
    }
    json j{{"schema_version", kSchemaVersion},
           {"label", m.label},
           {"seeds", seeds.size()},
           {"mean", metrics_obj(m.mean, false)},
           {"stderr", metrics_obj(m.stderr_, false)},
           {"per_seed", per}};
    return j.dump(2) + "\n";
}

void write_comparison_csv(const ComparisonTable& t, std::ostream& os) {
    os << std::setprecision(10);
    os << "label,seeds,finished_jobs,finished_jobs_se,total_cost,total_cost_se,cost_per_job,cost_per_job_se,"
          "reschedule_count,reschedule_count_se,computing_time_s,computing_time_s_se\n";
    for (const auto& r : t.rows)
        os << r.label << "," << t.seeds.size() << "," << r.mean.finished_jobs << "," << r.stderr_.finished_jobs << ","
           << r.mean.energy_cost << "," << r.stderr_.energy_cost << "," << r.mean.cost_per_job << ","
           << r.stderr_.cost_per_job << "," << r.mean.reschedule_count << "," << r.stderr_.reschedule_count << ","
           << r.mean.computing_time << "," << r.stderr_.computing_time << "\n";
}

namespace {

struct Bar {
    int machine, job, start, end;  // [start, end)
};

std::vector<Bar> bars_of(const Schedule& s) {
    std::vector<Bar> out;
    const int M = static_cast<int>(s.machine_on.size());
    const int T = s.length();
    for (int i = 0; i < M; ++i) {
        int job = s.ops_finished[i][0] - 1;
        bool busy_prev = false;
        int open = -1;
        for (int t = 0; t <= T; ++t) {
            bool on = t < T && s.machine_on[i][t];
            bool start = t < T && s.op_start[i][t];
            if (open >= 0 && (!on || start)) {
                out.push_back({i, job, s.k0 + open, s.k0 + t});
                open = -1;
            }
            if (start) ++job;
            if (on && open < 0) {
                if (!start && !busy_prev && job < 0) job = 0;
                open = t;
            }
            busy_prev = on;
        }
    }
    return out;
}

const char* kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                          "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};

}  // namespace

void write_gantt_svg(const Schedule& s, const std::vector<std::vector<int>>& down, std::ostream& os) {
    const int M = static_cast<int>(s.machine_on.size());
    const int T = s.length();
    const int left = 48, top = 20, row = 20, px = 3;
    const int width = left + T * px + 10, height = top + M * row + 30;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" font-family=\"monospace\" font-size=\"11\">\n";
    os << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    for (int i = 0; i < M; ++i) {
        int y = top + i * row;
        os << "<text x=\"4\" y=\"" << y + 14 << "\">M" << i + 1 << "</text>\n";
        os << "<line x1=\"" << left << "\" y1=\"" << y + row << "\" x2=\"" << left + T * px << "\" y2=\"" << y + row
           << "\" stroke=\"#ddd\"/>\n";
        if (i < static_cast<int>(down.size()))
            for (int t = 0; t < T && s.k0 + t < static_cast<int>(down[i].size()); ++t)
                if (down[i][s.k0 + t])
                    os << "<rect x=\"" << left + t * px << "\" y=\"" << y + 2 << "\" width=\"" << px << "\" height=\""
                       << row - 4 << "\" fill=\"#444\"/>\n";
    }
    for (const Bar& b : bars_of(s)) {
        int x = left + (b.start - s.k0) * px, y = top + b.machine * row;
        int job = std::max(b.job, 0);
        os << "<rect x=\"" << x << "\" y=\"" << y + 2 << "\" width=\"" << (b.end - b.start) * px << "\" height=\""
           << row - 4 << "\" fill=\"" << kPalette[job % 10] << "\" stroke=\"black\" stroke-width=\"0.3\"><title>job "
           << job + 1 << " on M" << b.machine + 1 << ", ticks " << b.start << "-" << b.end - 1 << "</title></rect>\n";
    }
    int ya = top + M * row + 16;
    for (int t = 0; t <= T; t += 24)
        os << "<text x=\"" << left + t * px << "\" y=\"" << ya << "\">" << s.k0 + t << "</text>\n";
    os << "</svg>\n";
}

void write_gantt_text(const Schedule& s, const std::vector<std::vector<int>>& down, std::ostream& os) {
    static const char* sym = "0123456789abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ";
    const int M = static_cast<int>(s.machine_on.size());
    const int T = s.length();
    std::vector<std::string> lines(M, std::string(T, '.'));
    for (int i = 0; i < M && i < static_cast<int>(down.size()); ++i)
        for (int t = 0; t < T && s.k0 + t < static_cast<int>(down[i].size()); ++t)
            if (down[i][s.k0 + t]) lines[i][t] = '#';
    for (const Bar& b : bars_of(s))
        for (int k = b.start; k < b.end; ++k) lines[b.machine][k - s.k0] = sym[std::max(b.job, 0) % 62];
    os << "# ticks " << s.k0 << ".." << s.k1 << "; job index in base 62, '#' down, '.' idle\n";
    for (int i = 0; i < M; ++i) os << "M" << std::setw(2) << std::left << i + 1 << " " << lines[i] << "\n";
}

std::string run_stem(const RunResult& run) {
    return std::string(method_name(run.method)) + "_seed" + std::to_string(run.seed);
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os = open_out(path);
    os << content;
    if (!os) throw IoError("failed writing " + path);
}

namespace {

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir);
}

}  // namespace

std::vector<std::string> emit_outputs(const RunResult& run, const PlantParameters& p, const std::string& out_dir) {
    ensure_dir(out_dir);
    const std::string base = (fs::path(out_dir) / run_stem(run)).string();
    Schedule s = realized_schedule(run);
    ViolationReport rep = check_trajectory(run, p);
    std::vector<std::string> files;
    auto put = [&](const std::string& suffix, auto&& writer) {
        std::string path = base + suffix;
        std::ofstream os = open_out(path);
        writer(os);
        if (!os) throw IoError("failed writing " + path);
        files.push_back(path);
    };
    put("_schedule.csv", [&](std::ostream& os) { write_schedule_csv(s, os); });
    put("_metrics.json", [&](std::ostream& os) { os << metrics_json(run, rep); });
    put("_timing.json", [&](std::ostream& os) { os << timing_json(run); });
    put("_triggers.csv", [&](std::ostream& os) { write_trigger_log_csv(run.log, os); });
    put("_gantt.svg", [&](std::ostream& os) { write_gantt_svg(s, run.machine_down, os); });
    put("_gantt.txt", [&](std::ostream& os) { write_gantt_text(s, run.machine_down, os); });
    return files;
}

std::vector<std::string> emit_comparison(const ComparisonTable& t, const std::string& prefix, const std::string& out_dir) {
    ensure_dir(out_dir);
    std::vector<std::string> files;
    for (const auto& r : t.rows) {
        std::string label = r.label;
        for (char& c : label)
            if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.') c = '_';
        std::string path = (fs::path(out_dir) / (prefix + "_" + label + "_metrics.json")).string();
        write_text_file(path, summary_json(r, t.seeds));
        files.push_back(path);
    }
    std::string path = (fs::path(out_dir) / (prefix + ".csv")).string();
    std::ofstream os = open_out(path);
    write_comparison_csv(t, os);
    if (!os) throw IoError("failed writing " + path);
    files.push_back(path);
    return files;
}

std::vector<std::string> emit_offline(const Schedule& s, const ViolationReport& report, const std::string& out_dir) {
    ensure_dir(out_dir);
    std::vector<std::string> files;
    auto path = [&](const char* name) { return (fs::path(out_dir) / name).string(); };
    {
        std::ofstream os = open_out(path("offline_schedule.csv"));
        write_schedule_csv(s, os);
        files.push_back(path("offline_schedule.csv"));
    }
    json starts = json::array();
    for (const auto& m : s.plan.starts) starts.push_back(m);
    json j{{"schema_version", kSchemaVersion},
           {"objective", s.objective},
           {"lower_bound", std::isfinite(s.lower_bound) ? json(s.lower_bound) : json(nullptr)},
           {"gap", std::isfinite(s.gap) ? json(s.gap) : json(nullptr)},
           {"violations", report.items.size()},
           {"starts", starts}};
    write_text_file(path("offline_schedule.json"), j.dump(2) + "\n");
    files.push_back(path("offline_schedule.json"));
    write_text_file(path("offline_timing.json"),
                    json{{"solve_seconds", s.solve_seconds}, {"evaluations", s.evaluations}}.dump(2) + "\n");
    files.push_back(path("offline_timing.json"));
    std::vector<std::vector<int>> none;
    {
        std::ofstream os = open_out(path("offline_gantt.svg"));
        write_gantt_svg(s, none, os);
        files.push_back(path("offline_gantt.svg"));
    }
    {
        std::ofstream os = open_out(path("offline_gantt.txt"));
        write_gantt_text(s, none, os);
        files.push_back(path("offline_gantt.txt"));
    }
    return files;
}

}  // namespace eths
