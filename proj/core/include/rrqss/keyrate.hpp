#pragma once

#include <cstdint>

#include "rrqss/model.hpp"

// Analytic secret-key-rate machinery: train gain, bit error, source
// tagging, phase-error bounds for the outside and inside adversary,
// asymptotic rates, and finite-size corrections.

namespace rrqss {

// Tunable protocol knobs the optimizer searches over.
struct ProtocolParams {
    double mu;   // total mean photon number of one L-pulse train
    int L;       // pulses per train, >= 2
    int nu_th;   // photon-number tagging threshold, >= 0
};

void validate(const ProtocolParams& proto);

// Finite-size statistics settings. epsilon_1 = epsilon_2 = 2^-s.
struct FiniteSizeParams {
    std::int64_t N;  // sifted key length in bits
    int s;           // security exponent, typically 70..160

    // gaussian: the closed-form tail approximation (default working formula).
    // exact: invert the binomial tail numerically (slower, high accuracy).
    enum class Tail { gaussian, exact };
    Tail tail = Tail::gaussian;
};

void validate(const FiniteSizeParams& fin);

// Every intermediate quantity of one rate evaluation.
struct RateBreakdown {
    double Q = 0;        // train gain
    double Q_A = 0;      // gain attributed to Alice-side locations
    double Q_B = 0;      // gain attributed to Bob-side locations
    double Q_hat = 0;    // min(Q_A, Q_B)
    double e_b = 0;      // bit error rate
    double e_src = 0;    // tagging probability (train carries > nu_th photons)
    double e_p = 0;      // phase error rate, outside adversary
    double e_p_hat = 0;  // phase error rate, inside adversary
    double R = 0;        // secret bits per pulse, may be negative pre-clamp

    // Finite-size extras (populated by the finite path only).
    double r1 = 0;             // tagged-fraction bound
    double r2 = 0;             // phase-error-fraction bound
    bool gaussian_flagged = false;  // tail approximation outside its trusted regime

    double reported_rate() const { return R > 0.0 ? R : 0.0; }
    bool clamped() const { return R <= 0.0; }
};

// Binary Shannon entropy, h(0) = h(1) = 0 by continuity.
// Throws std::domain_error outside [0, 1].
double binary_entropy(double x);

// Probability that a train produces an effective detection:
// (1 - (1 - L*p_d) * exp(-2*mu*sqrt_eta)) / 2.
// Rejects L*p_d >= 1 (no-click weight would go negative).
double gain(const SystemParams& sys, const ProtocolParams& proto,
            const Geometry& geom);

// Error fraction among effective detections: misaligned interference
// clicks plus dark counts landing on a random detector.
// Throws std::domain_error when mu = 0 and p_d = 0 (no click source).
double bit_error_rate(const SystemParams& sys, const ProtocolParams& proto,
                      const Geometry& geom);

// Probability a train carries more than nu_th photons (upper Poisson tail
// of mean mu). Those trains are pessimistically surrendered.
double source_tag_probability(double mu, int nu_th);

// Phase-error bound against an external eavesdropper:
// 2*e_src/Q + (1 - 2*e_src/Q) * nu_th/(L-1), saturating at 1 when the
// tagged weight 2*e_src reaches the gain. Throws std::domain_error on Q <= 0.
double phase_error_outside(double Q, double e_src, int nu_th, int L);

// Exact upper binomial tail P(X > a), X ~ Binomial(n, p). Stable for
// large n via log-space start plus term recurrence.
double binomial_tail(std::int64_t a, std::int64_t n, double p);

// Smallest a with binomial_tail(a, n, p) <= 2^-s.
std::int64_t invert_binomial_tail(std::int64_t n, double p, int s);

// Finite-size phase-error entropy penalty r1 + (1-r1)*h(r2) + s/N with the
// tail bounds taken at the gaussian approximation
//   r1 = p1 + sqrt(2 ln2 * p1 * s/N),  r2 = p2 + sqrt(2 ln2 * p2(1-p2) * s/N).
// Converges to p1 + (1-p1)*h(p2) as N grows.
double finite_size_phase_entropy(double p1, double p2, std::int64_t N, int s);

// Asymptotic rate against an outside adversary: (Q/L) * [1 - h(e_p) - f*h(e_b)].
RateBreakdown keyrate_outside(const SystemParams& sys,
                              const ProtocolParams& proto,
                              const Geometry& geom);

// Asymptotic rate against a dishonest player:
// (1/L) * { Q_hat * [1 - penalty] - Q * f * h(e_b) } with the tagged-train
// penalty p1 + (1-p1)*h(p2), p1 = e_src/Q_hat, p2 = nu_th/(L-1).
// Symmetric placement fixes Q_A = Q_B = Q/2.
RateBreakdown keyrate_inside(const SystemParams& sys,
                             const ProtocolParams& proto,
                             const Geometry& geom);

// Inside rate with the finite-size penalty in place of the asymptotic one.
RateBreakdown keyrate_inside_finite(const SystemParams& sys,
                                    const ProtocolParams& proto,
                                    const Geometry& geom,
                                    const FiniteSizeParams& fin);

}  // namespace rrqss
