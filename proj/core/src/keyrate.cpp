#include "rrqss/keyrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rrqss {

namespace {

constexpr double kLn2 = 0.6931471805599453;

// Entropy as used inside rate formulas: an error bound above 1/2 certifies
// nothing, so the privacy term saturates instead of bouncing back down the
// symmetric side of h. Keeps rates monotone in loss and kills the spurious
// key revival h(1) = 0 would produce.
double privacy_entropy(double x) {
    return x > 0.5 ? 1.0 : binary_entropy(x);
}

// Fraction of multi-photon (tagged) pulses among the threshold nu_th/(L-1)
// slots, clamped into probability range. nu_th may legally exceed L-1.
double threshold_fraction(int nu_th, int L) {
    return std::min(1.0, static_cast<double>(nu_th) / (L - 1));
}

// Sample size below which the gaussian tail bound is known to understate
// the exact binomial inversion by more than a few percent (measured at
// s = 100; the gap reaches ~36% at n*p = 10 and ~8% at n*p = 100).
constexpr double kGaussianTrustedCount = 500.0;

struct Channel {
    double x;       // 2 * mu * arm transmittance
    double emx;     // exp(-x)
    double one_minus_emx;  // 1 - exp(-x), computed stably
};

Channel channel(const SystemParams& sys, const ProtocolParams& proto,
                const Geometry& geom) {
    const double x = 2.0 * proto.mu * arm_transmittance(sys, geom);
    return Channel{x, std::exp(-x), -std::expm1(-x)};
}

}  // namespace

void validate(const ProtocolParams& proto) {
    if (proto.L < 2)
        throw std::invalid_argument("L must be at least 2");
    if (proto.nu_th < 0)
        throw std::invalid_argument("nu_th must be nonnegative");
    if (!(proto.mu > 0.0) || !std::isfinite(proto.mu))
        throw std::invalid_argument("mu must be positive and finite");
}

void validate(const FiniteSizeParams& fin) {
    if (fin.N <= 0)
        throw std::invalid_argument("N must be positive");
    if (fin.s <= 0)
        throw std::invalid_argument("s must be positive");
}

double binary_entropy(double x) {
    if (!(x >= 0.0) || x > 1.0)
        throw std::domain_error("binary_entropy argument outside [0, 1]");
    if (x == 0.0 || x == 1.0) return 0.0;
    return (-x * std::log(x) - (1.0 - x) * std::log1p(-x)) / kLn2;
}

double gain(const SystemParams& sys, const ProtocolParams& proto,
            const Geometry& geom) {
    validate(sys);
    validate(geom);
    // mu = 0 is allowed here (degenerate no-light limit); the strict mu > 0
    // invariant is enforced where full protocol runs are configured.
    if (proto.L < 2 || proto.nu_th < 0 || proto.mu < 0.0)
        throw std::invalid_argument("bad protocol parameters");
    const double Lpd = static_cast<double>(proto.L) * sys.p_d;
    if (Lpd >= 1.0)
        throw std::invalid_argument("L * p_d >= 1: dark counts saturate the train");
    const Channel ch = channel(sys, proto, geom);
    return 0.5 * (ch.one_minus_emx + Lpd * ch.emx);
}

double bit_error_rate(const SystemParams& sys, const ProtocolParams& proto,
                      const Geometry& geom) {
    validate(sys);
    validate(geom);
    if (proto.L < 2 || proto.nu_th < 0 || proto.mu < 0.0)
        throw std::invalid_argument("bad protocol parameters");
    // mu = 0 is meaningful (dark counts only) unless darks vanish too.
    if (proto.mu == 0.0 && sys.p_d == 0.0)
        throw std::domain_error("no clicks possible: error rate undefined");
    const double Lpd = static_cast<double>(proto.L) * sys.p_d;
    if (Lpd >= 1.0)
        throw std::invalid_argument("L * p_d >= 1: dark counts saturate the train");
    const Channel ch = channel(sys, proto, geom);
    const double num = sys.e_d * ch.one_minus_emx + 0.5 * Lpd * ch.emx;
    const double den = ch.one_minus_emx + Lpd * ch.emx;
    return num / den;
}

double source_tag_probability(double mu, int nu_th) {
    if (mu < 0.0 || !std::isfinite(mu))
        throw std::domain_error("mu must be nonnegative and finite");
    if (nu_th < 0)
        throw std::domain_error("nu_th must be nonnegative");
    if (mu == 0.0) return 0.0;
    // Upper Poisson tail, summed upward from nu_th + 1. The first term is
    // anchored in log space so deep tails do not underflow prematurely.
    const double k0 = static_cast<double>(nu_th) + 1.0;
    double log_t = k0 * std::log(mu) - mu - std::lgamma(k0 + 1.0);
    double term = std::exp(log_t);
    double sum = term;
    double k = k0;
    while (term > 0.0) {
        k += 1.0;
        term *= mu / k;
        sum += term;
        if (k > mu && term < sum * 1e-20) break;
    }
    return std::min(sum, 1.0);
}

double phase_error_outside(double Q, double e_src, int nu_th, int L) {
    if (!(Q > 0.0))
        throw std::domain_error("phase error undefined for Q <= 0");
    if (L < 2 || nu_th < 0 || e_src < 0.0)
        throw std::domain_error("bad phase-error inputs");
    const double tagged = 2.0 * e_src / Q;
    if (tagged >= 1.0) return 1.0;  // every effective train may be tagged
    return std::min(1.0, tagged + (1.0 - tagged) * threshold_fraction(nu_th, L));
}

double binomial_tail(std::int64_t a, std::int64_t n, double p) {
    if (n < 0 || a < 0 || a > n)
        throw std::domain_error("binomial_tail requires 0 <= a <= n");
    if (p < 0.0 || p > 1.0)
        throw std::domain_error("binomial_tail requires p in [0, 1]");
    if (a == n) return 0.0;
    if (p == 0.0) return 0.0;
    if (p == 1.0) return 1.0;

    const double nd = static_cast<double>(n);
    const double mean = nd * p;
    const double lp = std::log(p);
    const double l1p = std::log1p(-p);
    const double odds = p / (1.0 - p);

    auto log_pmf = [&](double k) {
        return std::lgamma(nd + 1.0) - std::lgamma(k + 1.0) -
               std::lgamma(nd - k + 1.0) + k * lp + (nd - k) * l1p;
    };

    if (static_cast<double>(a) + 1.0 >= mean) {
        // Sum the tail upward from a+1; terms decay past the mode.
        double k = static_cast<double>(a) + 1.0;
        double term = std::exp(log_pmf(k));
        double sum = term;
        while (k < nd) {
            term *= (nd - k) / (k + 1.0) * odds;
            k += 1.0;
            sum += term;
            if (term < sum * 1e-19) break;
        }
        return std::min(sum, 1.0);
    }
    // a sits below the mode: the lower sum is the small piece. Walk it
    // downward from a so the leading term is the largest.
    double k = static_cast<double>(a);
    double term = std::exp(log_pmf(k));
    double sum = term;
    while (k > 0.0) {
        term *= k / (nd - k + 1.0) / odds;
        k -= 1.0;
        sum += term;
        if (term < sum * 1e-19) break;
    }
    return std::max(0.0, std::min(1.0, 1.0 - sum));
}

std::int64_t invert_binomial_tail(std::int64_t n, double p, int s) {
    if (n < 0) throw std::domain_error("n must be nonnegative");
    if (p < 0.0 || p > 1.0) throw std::domain_error("p must be in [0, 1]");
    if (s <= 0) throw std::domain_error("s must be positive");
    const double eps = std::exp2(-static_cast<double>(s));
    std::int64_t lo = 0, hi = n;
    while (lo < hi) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (binomial_tail(mid, n, p) <= eps)
            hi = mid;
        else
            lo = mid + 1;
    }
    return lo;
}

double finite_size_phase_entropy(double p1, double p2, std::int64_t N, int s) {
    if (p1 < 0.0 || p1 > 1.0 || p2 < 0.0 || p2 > 1.0)
        throw std::domain_error("p1, p2 must be probabilities");
    if (N <= 0 || s <= 0)
        throw std::domain_error("N and s must be positive");
    const double sn = static_cast<double>(s) / static_cast<double>(N);
    const double r1 = std::min(1.0, p1 + std::sqrt(2.0 * kLn2 * p1 * sn));
    const double r2 =
        std::min(1.0, p2 + std::sqrt(2.0 * kLn2 * p2 * (1.0 - p2) * sn));
    return r1 + (1.0 - r1) * privacy_entropy(r2) + sn;
}

namespace {

// Shared plumbing: everything except the phase-error penalty.
RateBreakdown base_breakdown(const SystemParams& sys,
                             const ProtocolParams& proto,
                             const Geometry& geom) {
    RateBreakdown out;
    out.Q = gain(sys, proto, geom);
    out.Q_A = 0.5 * out.Q;  // relay at the midpoint splits the gain evenly
    out.Q_B = 0.5 * out.Q;
    out.Q_hat = std::min(out.Q_A, out.Q_B);
    out.e_b = bit_error_rate(sys, proto, geom);
    out.e_src = source_tag_probability(proto.mu, proto.nu_th);
    return out;
}

// Tagged fraction of the inside channel; 1 when tagging swamps the gain.
double inside_tag_fraction(const RateBreakdown& bd) {
    if (bd.e_src >= bd.Q_hat) return 1.0;
    return bd.e_src / bd.Q_hat;
}

double inside_rate(const RateBreakdown& bd, double penalty, double f, int L) {
    return (bd.Q_hat * (1.0 - penalty) - bd.Q * f * binary_entropy(bd.e_b)) / L;
}

}  // namespace

RateBreakdown keyrate_outside(const SystemParams& sys,
                              const ProtocolParams& proto,
                              const Geometry& geom) {
    RateBreakdown bd = base_breakdown(sys, proto, geom);
    bd.e_p = phase_error_outside(bd.Q, bd.e_src, proto.nu_th, proto.L);
    const double bracket = 1.0 - privacy_entropy(bd.e_p) -
                           sys.f * binary_entropy(bd.e_b);
    bd.R = bd.Q / proto.L * bracket;
    return bd;
}

RateBreakdown keyrate_inside(const SystemParams& sys,
                             const ProtocolParams& proto,
                             const Geometry& geom) {
    RateBreakdown bd = base_breakdown(sys, proto, geom);
    const double p1 = inside_tag_fraction(bd);
    const double p2 = threshold_fraction(proto.nu_th, proto.L);
    bd.e_p_hat = std::min(1.0, p1 + (1.0 - p1) * p2);
    // Tagged trains surrender one full bit each; the rest carry phase
    // error at most p2. This decomposition is the N -> infinity limit of
    // the finite-size penalty below.
    const double penalty = p1 + (1.0 - p1) * privacy_entropy(p2);
    bd.R = inside_rate(bd, penalty, sys.f, proto.L);
    return bd;
}

RateBreakdown keyrate_inside_finite(const SystemParams& sys,
                                    const ProtocolParams& proto,
                                    const Geometry& geom,
                                    const FiniteSizeParams& fin) {
    validate(fin);
    RateBreakdown bd = base_breakdown(sys, proto, geom);
    const double p1 = inside_tag_fraction(bd);
    const double p2 = threshold_fraction(proto.nu_th, proto.L);
    bd.e_p_hat = std::min(1.0, p1 + (1.0 - p1) * p2);
    const double sn = static_cast<double>(fin.s) / static_cast<double>(fin.N);

    double penalty;
    if (fin.tail == FiniteSizeParams::Tail::exact) {
        // Tagged trains are binomial over the transmitted rounds, of which
        // roughly N / Q_hat were needed to sift N bits; phase errors are
        // binomial over the N sifted bits themselves.
        const double rounds = std::ceil(static_cast<double>(fin.N) /
                                        std::max(bd.Q_hat, 1e-300));
        const auto n1 = static_cast<std::int64_t>(
            std::min(rounds, 9.0e18));
        const std::int64_t a1 = invert_binomial_tail(n1, bd.e_src, fin.s);
        const std::int64_t a2 = invert_binomial_tail(fin.N, p2, fin.s);
        bd.r1 = std::min(1.0, static_cast<double>(a1) / fin.N);
        bd.r2 = std::min(1.0, static_cast<double>(a2) / fin.N);
        penalty = bd.r1 + (1.0 - bd.r1) * privacy_entropy(bd.r2) + sn;
    } else {
        bd.r1 = std::min(1.0, p1 + std::sqrt(2.0 * kLn2 * p1 * sn));
        bd.r2 = std::min(1.0, p2 + std::sqrt(2.0 * kLn2 * p2 * (1.0 - p2) * sn));
        penalty = bd.r1 + (1.0 - bd.r1) * privacy_entropy(bd.r2) + sn;
        // The gaussian tail is optimistic when few tagged or threshold
        // events are expected; surface that instead of silently trusting it.
        const double n1p = static_cast<double>(fin.N) * p1;
        const double n2p = static_cast<double>(fin.N) * p2;
        bd.gaussian_flagged =
            (p1 > 0.0 && n1p < kGaussianTrustedCount) ||
            (p2 > 0.0 && n2p < kGaussianTrustedCount);
    }
    bd.R = inside_rate(bd, penalty, sys.f, proto.L);
    return bd;
}

}  // namespace rrqss
