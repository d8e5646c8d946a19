#include "rrqss/run.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace rrqss {

namespace {

using nlohmann::json;

std::string iso_utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(
        std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void expect_keys(const json& obj, std::initializer_list<const char*> allowed,
                 const char* where) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) {
                ok = true;
                break;
            }
        if (!ok)
            throw std::invalid_argument(std::string("unknown config key '") + key +
                                        "' in " + where);
    }
}

std::vector<double> log_spaced(double lo, double hi, int n) {
    if (!(lo > 0) || !(hi > lo) || n < 2)
        throw std::invalid_argument("intensity range must satisfy 0 < lo < hi, n >= 2");
    std::vector<double> g(n);
    const double a = std::log10(lo), b = std::log10(hi);
    for (int i = 0; i < n; ++i)
        g[i] = std::pow(10.0, a + (b - a) * i / (n - 1));
    return g;
}

Objective to_objective(Curve c) {
    switch (c) {
        case Curve::outside: return Objective::outside;
        case Curve::inside: return Objective::inside;
        case Curve::inside_finite: return Objective::inside_finite;
        default: throw std::invalid_argument("plob is not an optimizable objective");
    }
}

json system_json(const SystemParams& sys) {
    return {{"eta_d", sys.eta_d},
            {"p_d", sys.p_d},
            {"e_d", sys.e_d},
            {"alpha", sys.alpha},
            {"f", sys.f}};
}

json params_json(const ProtocolParams& p) {
    return {{"mu", p.mu}, {"L", p.L}, {"nu_th", p.nu_th}};
}

json breakdown_json(const RateBreakdown& b) {
    return {{"Q", b.Q},
            {"Q_A", b.Q_A},
            {"Q_B", b.Q_B},
            {"Q_hat", b.Q_hat},
            {"e_b", b.e_b},
            {"e_src", b.e_src},
            {"e_p", b.e_p},
            {"e_p_hat", b.e_p_hat},
            {"R", b.R},
            {"r1", b.r1},
            {"r2", b.r2},
            {"gaussian_flagged", b.gaussian_flagged}};
}

json stats_json(const SimStats& st) {
    return {{"trains", st.trains},
            {"effective_count", st.effective_count},
            {"error_count", st.error_count},
            {"Q_emp", st.Q_emp},
            {"Q_se", st.Q_se},
            {"e_b_emp", st.e_b_emp},
            {"e_b_se", st.e_b_se}};
}

json validation_report_json(const ValidationReport& rep) {
    return {{"stats", stats_json(rep.stats)},
            {"Q_analytic", rep.Q_analytic},
            {"e_b_analytic", rep.e_b_analytic},
            {"z_gain", rep.z_gain},
            {"z_error", rep.z_error},
            {"pass", rep.pass}};
}

// The phase-error column carries the bound that actually limits the chosen
// adversary: e_p for outside rows, e_p_hat otherwise.
double phase_column(const SweepRecord& rec) {
    return rec.objective == Curve::outside ? rec.breakdown.e_p : rec.breakdown.e_p_hat;
}

}  // namespace

void validate(const SweepGrid& grid) {
    if (!std::isfinite(grid.start_km) || !std::isfinite(grid.stop_km) ||
        !std::isfinite(grid.step_km))
        throw std::invalid_argument("sweep grid must be finite");
    if (grid.start_km < 0) throw std::invalid_argument("sweep start must be >= 0");
    if (grid.step_km <= 0) throw std::invalid_argument("sweep step must be > 0");
    if (grid.stop_km < grid.start_km)
        throw std::invalid_argument("sweep stop must be >= start");
}

std::vector<double> grid_points(const SweepGrid& grid) {
    validate(grid);
    const int n =
        static_cast<int>(std::floor((grid.stop_km - grid.start_km) / grid.step_km +
                                    1e-9)) +
        1;
    std::vector<double> pts(n);
    for (int i = 0; i < n; ++i) pts[i] = grid.start_km + i * grid.step_km;
    return pts;
}

std::string curve_name(Curve c) {
    switch (c) {
        case Curve::outside: return "outside";
        case Curve::inside: return "inside";
        case Curve::inside_finite: return "inside_finite";
        case Curve::plob: return "plob";
    }
    throw std::invalid_argument("unknown curve");
}

Curve parse_curve(const std::string& name) {
    if (name == "outside") return Curve::outside;
    if (name == "inside") return Curve::inside;
    if (name == "inside_finite") return Curve::inside_finite;
    if (name == "plob") return Curve::plob;
    throw std::invalid_argument("unknown objective '" + name +
                                "' (expected outside, inside, inside_finite, plob)");
}

void validate(const RunConfig& config) {
    validate(config.system);
    validate(config.sweep);
    validate(config.search);
    if (config.objectives.empty())
        throw std::invalid_argument("at least one objective must be selected");
    bool wants_finite = false;
    for (Curve c : config.objectives)
        if (c == Curve::inside_finite) wants_finite = true;
    if (wants_finite && !config.finite)
        throw std::invalid_argument("inside_finite requires finite-size parameters");
    if (config.finite) validate(*config.finite);
    if (config.output.dir.empty())
        throw std::invalid_argument("output directory must be non-empty");
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw std::invalid_argument("malformed config " + path + ": " + e.what());
    }
    if (!doc.is_object()) throw std::invalid_argument("config root must be an object");

    RunConfig cfg;
    expect_keys(doc,
                {"system", "sweep", "objectives", "finite", "search", "output",
                 "seed", "verbose"},
                "config root");

    if (doc.contains("system")) {
        const json& s = doc["system"];
        expect_keys(s, {"eta_d", "p_d", "e_d", "alpha", "f"}, "system");
        if (s.contains("eta_d")) cfg.system.eta_d = s["eta_d"].get<double>();
        if (s.contains("p_d")) cfg.system.p_d = s["p_d"].get<double>();
        if (s.contains("e_d")) cfg.system.e_d = s["e_d"].get<double>();
        if (s.contains("alpha")) cfg.system.alpha = s["alpha"].get<double>();
        if (s.contains("f")) cfg.system.f = s["f"].get<double>();
    }
    if (doc.contains("sweep")) {
        const json& s = doc["sweep"];
        expect_keys(s, {"start", "stop", "step"}, "sweep");
        if (s.contains("start")) cfg.sweep.start_km = s["start"].get<double>();
        if (s.contains("stop")) cfg.sweep.stop_km = s["stop"].get<double>();
        if (s.contains("step")) cfg.sweep.step_km = s["step"].get<double>();
    }
    if (doc.contains("objectives")) {
        cfg.objectives.clear();
        for (const json& o : doc["objectives"])
            cfg.objectives.push_back(parse_curve(o.get<std::string>()));
    }
    if (doc.contains("finite") && !doc["finite"].is_null()) {
        const json& f = doc["finite"];
        expect_keys(f, {"N", "s", "tail"}, "finite");
        FiniteSizeParams fin;
        fin.N = static_cast<std::int64_t>(std::llround(f.at("N").get<double>()));
        fin.s = f.value("s", 100);
        const std::string tail = f.value("tail", std::string("gaussian"));
        if (tail == "gaussian")
            fin.tail = FiniteSizeParams::Tail::gaussian;
        else if (tail == "exact")
            fin.tail = FiniteSizeParams::Tail::exact;
        else
            throw std::invalid_argument("finite.tail must be 'gaussian' or 'exact'");
        cfg.finite = fin;
    }
    if (doc.contains("search")) {
        const json& s = doc["search"];
        expect_keys(s, {"mu_grid", "mu_min", "mu_max", "mu_points", "L_values",
                        "nu_values"},
                    "search");
        if (s.contains("mu_grid"))
            cfg.search.mu_grid = s["mu_grid"].get<std::vector<double>>();
        else if (s.contains("mu_min") || s.contains("mu_max") || s.contains("mu_points"))
            cfg.search.mu_grid = log_spaced(s.value("mu_min", 1e-3),
                                            s.value("mu_max", 1e2),
                                            s.value("mu_points", 61));
        if (s.contains("L_values"))
            cfg.search.L_values = s["L_values"].get<std::vector<int>>();
        if (s.contains("nu_values"))
            cfg.search.nu_values = s["nu_values"].get<std::vector<int>>();
    }
    if (doc.contains("output")) {
        const json& o = doc["output"];
        expect_keys(o, {"dir", "format", "timestamp"}, "output");
        if (o.contains("dir")) cfg.output.dir = o["dir"].get<std::string>();
        if (o.contains("format")) {
            const std::string fmt = o["format"].get<std::string>();
            if (fmt == "csv")
                cfg.output.format = OutputFormat::csv;
            else if (fmt == "json")
                cfg.output.format = OutputFormat::json;
            else
                throw std::invalid_argument("output.format must be 'csv' or 'json'");
        }
        if (o.contains("timestamp")) cfg.output.timestamp = o["timestamp"].get<bool>();
    }
    if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("verbose")) cfg.verbose = doc["verbose"].get<bool>();

    validate(cfg);
    return cfg;
}

std::vector<SweepRecord> sweep_rates(const RunConfig& config, std::ostream* log) {
    validate(config);
    const std::vector<double> pts = grid_points(config.sweep);
    std::vector<SweepRecord> records;
    records.reserve(pts.size() * config.objectives.size());

    for (double d : pts) {
        const Geometry geom{d};
        const double plob = plob_bound(config.system, geom);
        for (Curve c : config.objectives) {
            SweepRecord rec;
            rec.distance_km = d;
            rec.objective = c;
            rec.plob = plob;
            if (c == Curve::plob) {
                rec.rate = plob;
            } else {
                const OptimizationResult res =
                    optimize(config.system, geom, config.search, to_objective(c),
                             config.finite);
                rec.optimized = true;
                rec.params = res.best;
                rec.breakdown = res.breakdown;
                rec.rate = res.positive ? res.breakdown.reported_rate() : 0.0;
                rec.clamped = !res.positive;
                if (log)
                    *log << "D=" << d << " km " << curve_name(c) << " rate=" << rec.rate
                         << " mu=" << res.best.mu << " L=" << res.best.L
                         << " nu_th=" << res.best.nu_th << " evals=" << res.evaluations
                         << '\n';
            }
            records.push_back(rec);
        }
    }
    return records;
}

void write_csv(const std::vector<SweepRecord>& records, const RunConfig& config,
               std::ostream& out) {
    if (config.output.timestamp) out << "# generated " << iso_utc_now() << '\n';
    out << "distance_km,objective,mu,L,nu_th,Q,e_b,e_src,e_p,r1,r2,rate,clamped,plob\n";
    for (const SweepRecord& rec : records) {
        out << num(rec.distance_km) << ',' << curve_name(rec.objective) << ',';
        if (rec.optimized) {
            out << num(rec.params.mu) << ',' << rec.params.L << ',' << rec.params.nu_th
                << ',' << num(rec.breakdown.Q) << ',' << num(rec.breakdown.e_b) << ','
                << num(rec.breakdown.e_src) << ',' << num(phase_column(rec)) << ','
                << num(rec.breakdown.r1) << ',' << num(rec.breakdown.r2) << ',';
        } else {
            out << ",,,,,,,,,";  // benchmark rows carry no protocol point
        }
        out << num(rec.rate) << ',' << (rec.clamped ? 1 : 0) << ',' << num(rec.plob)
            << '\n';
    }
}

void write_json(const std::vector<SweepRecord>& records, const RunConfig& config,
                std::ostream& out) {
    json doc;
    if (config.output.timestamp) doc["generated"] = iso_utc_now();
    doc["system"] = system_json(config.system);
    doc["seed"] = config.seed;
    json rows = json::array();
    for (const SweepRecord& rec : records) {
        json row;
        row["distance_km"] = rec.distance_km;
        row["objective"] = curve_name(rec.objective);
        row["rate"] = rec.rate;
        row["clamped"] = rec.clamped;
        row["plob"] = rec.plob;
        if (rec.optimized) {
            row["params"] = params_json(rec.params);
            row["breakdown"] = breakdown_json(rec.breakdown);
        } else {
            row["params"] = nullptr;
            row["breakdown"] = nullptr;
        }
        rows.push_back(std::move(row));
    }
    doc["records"] = std::move(rows);
    out << doc.dump(2) << '\n';
}

std::string run_sweep(const RunConfig& config, std::ostream* log) {
    validate(config);
    std::filesystem::create_directories(config.output.dir);
    const bool csv = config.output.format == OutputFormat::csv;
    const std::filesystem::path path =
        std::filesystem::path(config.output.dir) / (csv ? "sweep.csv" : "sweep.json");
    const std::vector<SweepRecord> records = sweep_rates(config, log);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    if (csv)
        write_csv(records, config, out);
    else
        write_json(records, config, out);
    return path.string();
}

std::string optimization_json(const OptimizationResult& result, double distance_km,
                              double plob, bool timestamp) {
    json doc;
    if (timestamp) doc["generated"] = iso_utc_now();
    doc["distance_km"] = distance_km;
    doc["objective"] = result.objective == Objective::outside     ? "outside"
                       : result.objective == Objective::inside    ? "inside"
                                                                  : "inside_finite";
    doc["positive"] = result.positive;
    doc["evaluations"] = result.evaluations;
    doc["params"] = params_json(result.best);
    doc["breakdown"] = breakdown_json(result.breakdown);
    doc["rate"] = result.positive ? result.breakdown.reported_rate() : 0.0;
    doc["plob"] = plob;
    return doc.dump(2) + "\n";
}

std::string validation_json(const TrainConfig& cfg, const ValidationReport& report,
                            bool timestamp) {
    json doc;
    if (timestamp) doc["generated"] = iso_utc_now();
    doc["system"] = system_json(cfg.sys);
    doc["params"] = params_json(cfg.proto);
    doc["distance_km"] = cfg.geom.distance_km;
    doc["trains"] = cfg.trains;
    doc["seed"] = cfg.seed;
    doc["report"] = validation_report_json(report);
    doc["pass"] = report.pass;
    return doc.dump(2) + "\n";
}

CheckReport run_checks(const CheckOptions& opts, std::ostream* log) {
    CheckReport rep;
    if (log)
        *log << "equivalence: L=" << opts.L << " trials=" << opts.trials
             << " seed=" << opts.seed << '\n';
    rep.equivalence = equivalence_report(opts.L, opts.trials, opts.seed);
    if (log)
        *log << "equivalence max deviation " << rep.equivalence.max_deviation
             << (rep.equivalence.pass ? " (pass)" : " (FAIL)") << '\n';

    if (opts.trains > 0) {
        TrainConfig tc;
        tc.sys = opts.system;
        tc.proto = opts.proto;
        tc.geom = Geometry{opts.distance_km};
        tc.trains = opts.trains;
        tc.seed = opts.seed;
        const SystemParams* ref =
            opts.analytic_reference ? &*opts.analytic_reference : nullptr;
        rep.simulation = validate_against_analytic(tc, ref);
        if (log)
            *log << "simulation z_gain=" << rep.simulation->z_gain
                 << " z_error=" << rep.simulation->z_error
                 << (rep.simulation->pass ? " (pass)" : " (FAIL)") << '\n';
    }
    rep.pass = rep.equivalence.pass && (!rep.simulation || rep.simulation->pass);
    return rep;
}

std::string check_report_json(const CheckOptions& opts, const CheckReport& report,
                              bool timestamp) {
    json doc;
    if (timestamp) doc["generated"] = iso_utc_now();
    json equiv;
    equiv["L"] = report.equivalence.L;
    equiv["trials"] = report.equivalence.trials;
    equiv["seed"] = report.equivalence.seed;
    equiv["max_deviation"] = report.equivalence.max_deviation;
    equiv["pass"] = report.equivalence.pass;
    json cells = json::array();
    for (const RbDeviation& c : report.equivalence.breakdown)
        cells.push_back({{"r", c.r}, {"b", c.b}, {"deviation", c.deviation}});
    equiv["breakdown"] = std::move(cells);
    doc["equivalence"] = std::move(equiv);
    if (report.simulation) {
        json sim = validation_report_json(*report.simulation);
        sim["distance_km"] = opts.distance_km;
        sim["params"] = params_json(opts.proto);
        sim["trains"] = opts.trains;
        sim["seed"] = opts.seed;
        doc["simulation"] = std::move(sim);
    } else {
        doc["simulation"] = nullptr;
    }
    doc["pass"] = report.pass;
    return doc.dump(2) + "\n";
}

}  // namespace rrqss
