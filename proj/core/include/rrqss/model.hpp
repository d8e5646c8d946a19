#pragma once

// Hardware and channel model: detector/fiber constants, per-arm
// transmittance, and the repeaterless-capacity benchmark.

namespace rrqss {

// Fixed hardware characteristics of the detectors and the fiber link.
struct SystemParams {
    double eta_d;  // detector efficiency
    double p_d;    // dark count probability per pulse slot
    double e_d;    // misalignment error rate
    double alpha;  // fiber attenuation, dB/km
    double f;      // error-correction inefficiency
};

// Standard parameter set used throughout: eta_d = 0.56, p_d = 1e-8,
// e_d = 2%, alpha = 0.167 dB/km, f = 1.1.
SystemParams default_system();

// Throws std::invalid_argument when a field is outside its physical range.
void validate(const SystemParams& sys);

struct Geometry {
    double distance_km;  // total Alice-to-Bob fiber length; relay at midpoint
};

void validate(const Geometry& geom);

// Efficiency of one arm (sender to relay), detector included:
// eta_d * 10^(-alpha*D/20). Strictly decreasing in D.
double arm_transmittance(const SystemParams& sys, const Geometry& geom);

// Repeaterless secret-key capacity -log2(1 - eta) of the direct
// Alice-to-Bob channel with eta = eta_d * 10^(-alpha*D/10).
// Throws std::domain_error if eta reaches 1 (the bound diverges).
double plob_bound(const SystemParams& sys, const Geometry& geom);

}  // namespace rrqss
