// Command-line front end: distance sweeps, single-point optimization,
// Monte-Carlo validation, measurement-equivalence checks, and plot-ready
// data presets. Exit codes: 0 success, 1 usage/config/runtime error,
// 2 a requested check failed.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "rrqss/run.hpp"

namespace {

using namespace rrqss;

struct CommonFlags {
    std::string config_path;
    double ed = -1;
    double N = -1;
    int s = -1;
    std::string tail;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir;
    std::string format;
    bool no_timestamp = false;
    bool verbose = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "JSON config file (flags win)");
    cmd->add_option("--ed", f.ed, "misalignment error rate override");
    cmd->add_option("--N", f.N, "finite-size sifted key length");
    cmd->add_option("--s", f.s, "finite-size security exponent");
    cmd->add_option("--tail", f.tail, "finite-size tail mode: gaussian|exact");
    cmd->add_option("--seed", f.seed, "random seed")->each([&](const std::string&) {
        f.seed_set = true;
    });
    cmd->add_option("--out", f.out_dir, "output directory");
    cmd->add_option("--format", f.format, "data file format: csv|json");
    cmd->add_flag("--no-timestamp", f.no_timestamp,
                  "suppress the generated-at header for byte-identical reruns");
    cmd->add_flag("--verbose", f.verbose, "progress to standard error");
}

RunConfig build_config(const CommonFlags& f) {
    RunConfig cfg;
    if (!f.config_path.empty()) cfg = load_config(f.config_path);
    if (f.ed >= 0) cfg.system.e_d = f.ed;
    if (f.N >= 0 || f.s >= 0 || !f.tail.empty()) {
        FiniteSizeParams fin = cfg.finite.value_or(FiniteSizeParams{10000, 100});
        if (f.N >= 0) fin.N = static_cast<std::int64_t>(f.N);
        if (f.s >= 0) fin.s = f.s;
        if (!f.tail.empty()) {
            if (f.tail == "gaussian")
                fin.tail = FiniteSizeParams::Tail::gaussian;
            else if (f.tail == "exact")
                fin.tail = FiniteSizeParams::Tail::exact;
            else
                throw std::invalid_argument("--tail must be gaussian or exact");
        }
        cfg.finite = fin;
    }
    if (f.seed_set) cfg.seed = f.seed;
    if (!f.out_dir.empty()) cfg.output.dir = f.out_dir;
    if (!f.format.empty()) {
        if (f.format == "csv")
            cfg.output.format = OutputFormat::csv;
        else if (f.format == "json")
            cfg.output.format = OutputFormat::json;
        else
            throw std::invalid_argument("--format must be csv or json");
    }
    if (f.no_timestamp) cfg.output.timestamp = false;
    if (f.verbose) cfg.verbose = true;
    return cfg;
}

std::ostream* log_stream(const RunConfig& cfg) {
    return cfg.verbose ? &std::cerr : nullptr;
}

int cmd_sweep(const CommonFlags& f, const std::vector<std::string>& objective_names,
              double start, double stop, double step, bool grid_set) {
    RunConfig cfg = build_config(f);
    if (grid_set) cfg.sweep = SweepGrid{start, stop, step};
    if (!objective_names.empty()) {
        cfg.objectives.clear();
        for (const std::string& n : objective_names)
            cfg.objectives.push_back(parse_curve(n));
    }
    // A finite-size request implies the finite curve unless already listed.
    if (cfg.finite) {
        bool has = false;
        for (Curve c : cfg.objectives)
            if (c == Curve::inside_finite) has = true;
        if (!has) cfg.objectives.push_back(Curve::inside_finite);
    }
    const std::string path = run_sweep(cfg, log_stream(cfg));
    std::cout << path << '\n';
    return 0;
}

int cmd_optimize(const CommonFlags& f, double distance, const std::string& objective) {
    RunConfig cfg = build_config(f);
    const Curve curve = parse_curve(objective);
    if (curve == Curve::plob)
        throw std::invalid_argument("plob is a benchmark, not an objective");
    Objective obj = curve == Curve::outside ? Objective::outside
                    : curve == Curve::inside ? Objective::inside
                                             : Objective::inside_finite;
    if (obj == Objective::inside_finite && !cfg.finite)
        cfg.finite = FiniteSizeParams{10000, 100};
    const Geometry geom{distance};
    const OptimizationResult res =
        optimize(cfg.system, geom, cfg.search, obj, cfg.finite);
    std::cout << optimization_json(res, distance, plob_bound(cfg.system, geom),
                                   cfg.output.timestamp);
    return 0;
}

int cmd_simulate(const CommonFlags& f, double distance, double mu, int L, int nu,
                 std::int64_t trains, const std::string& trace_path) {
    RunConfig base = build_config(f);
    TrainConfig cfg;
    cfg.sys = base.system;
    cfg.proto = ProtocolParams{mu, L, nu};
    cfg.geom = Geometry{distance};
    cfg.trains = trains;
    cfg.seed = f.seed_set ? f.seed : base.seed;
    if (!trace_path.empty()) {
        std::ofstream trace(trace_path);
        if (!trace) throw std::runtime_error("cannot write trace file " + trace_path);
        run_batch(cfg, &trace);
        if (base.verbose) std::cerr << "trace written to " << trace_path << '\n';
    }
    const ValidationReport rep = validate_against_analytic(cfg);
    std::cout << validation_json(cfg, rep, base.output.timestamp);
    return rep.pass ? 0 : 2;
}

int cmd_check(const CommonFlags& f, int L, int trials, std::int64_t trains,
              double distance, double mu, int proto_L, int nu, double corrupt_ed) {
    RunConfig base = build_config(f);
    CheckOptions opts;
    opts.system = base.system;
    opts.L = L;
    opts.trials = trials;
    opts.seed = f.seed_set ? f.seed : base.seed;
    opts.trains = trains;
    opts.distance_km = distance;
    opts.proto = ProtocolParams{mu, proto_L, nu};
    if (corrupt_ed >= 0) {
        SystemParams ref = base.system;
        ref.e_d = corrupt_ed;
        opts.analytic_reference = ref;
    }
    const CheckReport rep = run_checks(opts, base.verbose ? &std::cerr : nullptr);
    std::cout << check_report_json(opts, rep, base.output.timestamp);
    return rep.pass ? 0 : 2;
}

int cmd_plot_data(const CommonFlags& f, const std::string& preset) {
    RunConfig base = build_config(f);
    base.sweep = SweepGrid{0, 700, 10};
    std::filesystem::create_directories(base.output.dir);
    const bool csv = base.output.format == OutputFormat::csv;
    const char* ext = csv ? ".csv" : ".json";

    auto emit = [&](RunConfig cfg, const std::string& stem) {
        const std::vector<SweepRecord> records = sweep_rates(cfg, log_stream(base));
        const std::filesystem::path path =
            std::filesystem::path(base.output.dir) / (stem + ext);
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        if (csv)
            write_csv(records, cfg, out);
        else
            write_json(records, cfg, out);
        std::cout << path.string() << '\n';
    };

    if (preset == "distance") {
        RunConfig cfg = base;
        cfg.objectives = {Curve::outside, Curve::inside, Curve::plob};
        emit(cfg, "distance");
    } else if (preset == "misalignment") {
        for (double ed : {0.02, 0.04, 0.06}) {
            RunConfig cfg = base;
            cfg.system.e_d = ed;
            cfg.objectives = {Curve::inside, Curve::plob};
            emit(cfg, "misalignment_ed" + std::to_string(static_cast<int>(ed * 100)));
        }
    } else if (preset == "finite-size") {
        RunConfig cfg = base;
        cfg.objectives = {Curve::inside, Curve::plob};
        emit(cfg, "finite_asymptotic");
        for (double N : {1e4, 1e6, 1e8}) {
            RunConfig fcfg = base;
            fcfg.objectives = {Curve::inside_finite};
            FiniteSizeParams fin = base.finite.value_or(FiniteSizeParams{0, 100});
            fin.N = static_cast<std::int64_t>(N);
            fcfg.finite = fin;
            emit(fcfg, "finite_N1e" + std::to_string(static_cast<int>(std::log10(N))));
        }
    } else {
        throw std::invalid_argument(
            "unknown preset '" + preset +
            "' (expected distance, misalignment, finite-size)");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Round-robin quantum secret sharing rate laboratory"};
    app.require_subcommand(1);

    CommonFlags sweep_flags;
    std::vector<std::string> objective_names;
    double start = 0, stop = 700, step = 10;
    auto* sweep_cmd = app.add_subcommand("sweep", "Optimized key rates over distance");
    add_common(sweep_cmd, sweep_flags);
    auto* o_start = sweep_cmd->add_option("--start", start, "first distance, km");
    auto* o_stop = sweep_cmd->add_option("--stop", stop, "last distance, km");
    auto* o_step = sweep_cmd->add_option("--step", step, "grid step, km");
    sweep_cmd
        ->add_option("--objectives", objective_names,
                     "curves: outside inside inside_finite plob")
        ->delimiter(',');

    CommonFlags opt_flags;
    double opt_distance = 300;
    std::string opt_objective = "inside";
    auto* opt_cmd = app.add_subcommand("optimize", "Best protocol at one distance");
    add_common(opt_cmd, opt_flags);
    opt_cmd->add_option("--distance", opt_distance, "distance, km");
    opt_cmd->add_option("--objective", opt_objective,
                        "outside, inside, or inside_finite");

    CommonFlags sim_flags;
    double sim_distance = 100, sim_mu = 0.5;
    int sim_L = 64, sim_nu = 10;
    std::int64_t sim_trains = 100000;
    std::string trace_path;
    auto* sim_cmd =
        app.add_subcommand("simulate", "Monte-Carlo trains scored against the model");
    add_common(sim_cmd, sim_flags);
    sim_cmd->add_option("--distance", sim_distance, "distance, km");
    sim_cmd->add_option("--mu", sim_mu, "train intensity");
    sim_cmd->add_option("--L", sim_L, "pulses per train");
    sim_cmd->add_option("--nu", sim_nu, "tagging threshold");
    sim_cmd->add_option("--trains", sim_trains, "number of trains");
    sim_cmd->add_option("--trace", trace_path, "write per-train records here");

    CommonFlags check_flags;
    int check_L = 8, check_trials = 100;
    std::int64_t check_trains = 100000;
    double check_distance = 100, check_mu = 0.5, corrupt_ed = -1;
    int check_proto_L = 64, check_nu = 10;
    auto* check_cmd =
        app.add_subcommand("check", "Equivalence theorem plus simulator validation");
    add_common(check_cmd, check_flags);
    check_cmd->add_option("--L", check_L, "mode count for the equivalence check");
    check_cmd->add_option("--trials", check_trials, "random states per (r, b)");
    check_cmd->add_option("--trains", check_trains,
                          "Monte-Carlo trains (0 skips the simulator leg)");
    check_cmd->add_option("--distance", check_distance, "simulator distance, km");
    check_cmd->add_option("--mu", check_mu, "simulator train intensity");
    check_cmd->add_option("--proto-L", check_proto_L, "simulator pulses per train");
    check_cmd->add_option("--nu", check_nu, "simulator tagging threshold");
    check_cmd->add_option("--corrupt-ed", corrupt_ed,
                          "score against this misalignment instead (negative control)");

    CommonFlags plot_flags;
    std::string preset = "distance";
    auto* plot_cmd =
        app.add_subcommand("plot-data", "Preset sweep bundles for plotting");
    add_common(plot_cmd, plot_flags);
    plot_cmd->add_option("--preset", preset, "distance, misalignment, or finite-size");

    try {
        app.parse(argc, argv);
        if (sweep_cmd->parsed())
            return cmd_sweep(sweep_flags, objective_names, start, stop, step,
                             o_start->count() || o_stop->count() || o_step->count());
        if (opt_cmd->parsed()) return cmd_optimize(opt_flags, opt_distance, opt_objective);
        if (sim_cmd->parsed())
            return cmd_simulate(sim_flags, sim_distance, sim_mu, sim_L, sim_nu,
                                sim_trains, trace_path);
        if (check_cmd->parsed())
            return cmd_check(check_flags, check_L, check_trials, check_trains,
                             check_distance, check_mu, check_proto_L, check_nu,
                             corrupt_ed);
        if (plot_cmd->parsed()) return cmd_plot_data(plot_flags, preset);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
