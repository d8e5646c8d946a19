#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <random>
#include <utility>

#include "rrqss/keyrate.hpp"
#include "rrqss/model.hpp"

// Pulse-train Monte Carlo of the protocol: random phase bits, the relay's
// random train delay, interference clicks, dark counts, sifting, and raw
// key extraction. Validates the closed-form gain and bit-error model.

namespace rrqss {

struct TrainConfig {
    SystemParams sys;
    ProtocolParams proto;
    Geometry geom;
    std::int64_t trains = 0;
    std::uint64_t seed = 0;
};

void validate(const TrainConfig& cfg);

struct TrainOutcome {
    bool effective = false;  // exactly one click survived, and it is announceable
    int j_A = 0;             // announced sender-A pulse index, 1..L
    int i_B = 0;             // announced sender-B pulse index, 1..L
    int r = 0;               // delay magnitude, 1..L-1
    int b = 0;               // delay direction bit
    int X_A = 0, X_B = 0, X_C = 0;  // raw key bits (valid when effective)
    bool error = false;      // X_A ^ X_B != X_C (valid when effective)
};

struct SimStats {
    std::int64_t trains = 0;
    std::int64_t effective_count = 0;
    std::int64_t error_count = 0;
    double Q_emp = 0;   // effective_count / trains
    double e_b_emp = 0; // error_count / effective_count (0 when undefined)
    double Q_se = 0;    // binomial standard errors
    double e_b_se = 0;
    // How often each (j_A, i_B) pair was announced.
    std::map<std::pair<int, int>, std::int64_t> announcements;
};

// One train against a caller-supplied randomness stream.
TrainOutcome run_train(const TrainConfig& cfg, std::mt19937_64& rng);

// Aggregates cfg.trains trains deterministically from cfg.seed. When trace
// is non-null, writes one tab-separated record per train (schema documented
// in the README).
SimStats run_batch(const TrainConfig& cfg, std::ostream* trace = nullptr);

struct ValidationReport {
    SimStats stats;
    double Q_analytic = 0;
    double e_b_analytic = 0;
    double z_gain = 0;   // (Q_emp - Q) / binomial se under the analytic Q
    double z_error = 0;  // same for the bit error rate
    bool pass = false;   // both |z| <= 3
};

// Runs a batch and scores it against the closed-form gain and error rate.
// `analytic` substitutes a different parameter set as the reference model
// (negative-control hook); defaults to cfg.sys. Throws std::invalid_argument
// when the expected effective count is below 100 (z-scores meaningless).
ValidationReport validate_against_analytic(const TrainConfig& cfg,
                                           const SystemParams* analytic = nullptr);

}  // namespace rrqss
