#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rrqss/keyrate.hpp"
#include "rrqss/model.hpp"
#include "rrqss/optimizer.hpp"
#include "rrqss/protocol_sim.hpp"
#include "rrqss/security_checks.hpp"

// Batch engine behind the command-line tool: config files, distance sweeps
// with per-distance optimization, CSV/JSON writers, and the self-check
// harness. Data files are byte-identical across reruns of the same config
// and seed, modulo one suppressible timestamp comment.

namespace rrqss {

struct SweepGrid {
    double start_km = 0;
    double stop_km = 700;
    double step_km = 10;
};

// Nonempty, increasing: step > 0 and stop >= start.
void validate(const SweepGrid& grid);

std::vector<double> grid_points(const SweepGrid& grid);

// Curves a sweep can emit. plob is the repeaterless benchmark, not an
// optimized protocol rate.
enum class Curve { outside, inside, inside_finite, plob };

std::string curve_name(Curve c);
Curve parse_curve(const std::string& name);  // throws std::invalid_argument

enum class OutputFormat { csv, json };

struct OutputOptions {
    std::string dir = ".";
    OutputFormat format = OutputFormat::csv;
    bool timestamp = true;
};

struct RunConfig {
    SystemParams system = default_system();
    SweepGrid sweep;
    std::vector<Curve> objectives{Curve::outside, Curve::inside, Curve::plob};
    std::optional<FiniteSizeParams> finite;
    SearchSpace search = SearchSpace::defaults();
    OutputOptions output;
    std::uint64_t seed = 1;
    bool verbose = false;
};

// Field validity, at least one objective, finite params present whenever
// inside_finite is requested.
void validate(const RunConfig& config);

// Strict JSON config loader: unknown keys are rejected, every field has a
// default so {} is a complete file. Schema documented in the README.
RunConfig load_config(const std::string& path);

struct SweepRecord {
    double distance_km = 0;
    Curve objective = Curve::inside;
    bool optimized = false;   // false for plob benchmark rows
    ProtocolParams params{};  // meaningful only when optimized
    RateBreakdown breakdown{};
    double rate = 0;  // reported (clamped at zero)
    bool clamped = false;
    double plob = 0;
};

// One record per (grid distance, objective), optimizing where applicable.
// Optimizer progress streams to log when non-null.
std::vector<SweepRecord> sweep_rates(const RunConfig& config,
                                     std::ostream* log = nullptr);

void write_csv(const std::vector<SweepRecord>& records, const RunConfig& config,
               std::ostream& out);
void write_json(const std::vector<SweepRecord>& records, const RunConfig& config,
                std::ostream& out);

// Sweep plus file output under config.output.dir; returns the file path.
std::string run_sweep(const RunConfig& config, std::ostream* log = nullptr);

// Single-distance optimization summaries for the CLI.
std::string optimization_json(const OptimizationResult& result, double distance_km,
                              double plob, bool timestamp);
std::string validation_json(const TrainConfig& cfg, const ValidationReport& report,
                            bool timestamp);

struct CheckOptions {
    SystemParams system = default_system();
    // Measurement-equivalence leg.
    int L = 8;
    int trials = 100;
    std::uint64_t seed = 1;
    // Monte-Carlo leg; trains = 0 skips it.
    std::int64_t trains = 100000;
    double distance_km = 100;
    ProtocolParams proto{0.5, 64, 10};
    // When set, the simulator is scored against this parameter set instead
    // of `system` (negative control: inject a wrong reference on purpose).
    std::optional<SystemParams> analytic_reference;
};

struct CheckReport {
    EquivalenceReport equivalence;
    std::optional<ValidationReport> simulation;
    bool pass = false;
};

CheckReport run_checks(const CheckOptions& opts, std::ostream* log = nullptr);
std::string check_report_json(const CheckOptions& opts, const CheckReport& report,
                              bool timestamp);

}  // namespace rrqss
