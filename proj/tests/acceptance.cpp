// Acceptance gate: nine numbered criteria, one PASS/FAIL line each.
// Run all, or a single one with --criterion N. Exit status is the number
// of failing criteria.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "rrqss/run.hpp"

using namespace rrqss;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

std::string fmt(const char* spec, ...) {
    char buf[512];
    va_list args;
    va_start(args, spec);
    std::vsnprintf(buf, sizeof buf, spec, args);
    va_end(args);
    return buf;
}

double optimized_rate(const SystemParams& sys, double d, Objective obj,
                      const std::optional<FiniteSizeParams>& fin = {}) {
    const OptimizationResult res =
        optimize(sys, Geometry{d}, SearchSpace::defaults(), obj, fin);
    return res.positive ? res.breakdown.reported_rate() : 0.0;
}

// 1: the optimized dishonest-player rate crosses the repeaterless bound
// between 250 and 350 km.
Outcome criterion1() {
    const auto t0 = std::chrono::steady_clock::now();
    const SystemParams sys = default_system();
    auto above = [&](double d) {
        return optimized_rate(sys, d, Objective::inside) >
               plob_bound(sys, Geometry{d});
    };
    if (above(200)) return {false, "already above the benchmark at 200 km"};
    if (!above(400)) return {false, "still below the benchmark at 400 km"};
    double lo = 200, hi = 400;  // bisection on the 10 km sweep grid
    while (hi - lo > 10.0) {
        const double mid = lo + std::floor((hi - lo) / 20.0) * 10.0;
        if (above(mid))
            hi = mid;
        else
            lo = mid;
    }
    const double elapsed = seconds_since(t0);
    const bool in_window = hi >= 250.0 && hi <= 350.0;
    return {in_window && elapsed < 120.0,
            fmt("crossover at %.0f km (window 250..350), %.2f s", hi, elapsed)};
}

// 2: positive rate at 600 km.
Outcome criterion2() {
    const double rate = optimized_rate(default_system(), 600, Objective::inside);
    return {rate > 0.0, fmt("rate %.3e at 600 km", rate)};
}

// 3: at 6%% misalignment some distance still beats the benchmark.
Outcome criterion3() {
    SystemParams sys = default_system();
    sys.e_d = 0.06;
    double first_beat = -1;
    for (double d = 0; d <= 700; d += 10) {
        if (optimized_rate(sys, d, Objective::inside) >
            plob_bound(sys, Geometry{d})) {
            first_beat = d;
            break;
        }
    }
    if (first_beat < 0) return {false, "benchmark never beaten at e_d = 6%"};
    return {true, fmt("benchmark beaten from %.0f km at e_d = 6%%", first_beat)};
}

// 4: finite-size behaviour at s = 100: positive at 600 km with N = 1e4,
// never above the asymptote, and N = 1e9 recovers it within 1%.
Outcome criterion4() {
    const SystemParams sys = default_system();
    const FiniteSizeParams small{10000, 100};
    const FiniteSizeParams large{1000000000, 100};

    const double at600 =
        optimized_rate(sys, 600, Objective::inside_finite, small);
    if (!(at600 > 0.0)) return {false, "no positive N=1e4 rate at 600 km"};

    double worst_excess = 0.0, worst_recovery = 0.0;
    for (double d = 0; d <= 700; d += 50) {
        const double asym = optimized_rate(sys, d, Objective::inside);
        const double fin_small =
            optimized_rate(sys, d, Objective::inside_finite, small);
        const double fin_large =
            optimized_rate(sys, d, Objective::inside_finite, large);
        worst_excess = std::max(worst_excess, fin_small - asym);
        worst_excess = std::max(worst_excess, fin_large - asym);
        if (asym > 0.0)
            worst_recovery =
                std::max(worst_recovery, std::abs(fin_large - asym) / asym);
    }
    const bool ordered = worst_excess <= 1e-15;
    const bool recovered = worst_recovery <= 0.01;
    return {ordered && recovered,
            fmt("N=1e4 rate %.3e at 600 km; finite-asymptotic excess %.1e; "
                "N=1e9 recovery gap %.3f%% (50 km grid)",
                at600, worst_excess, 100.0 * worst_recovery)};
}

// 5: log-rate slope over 200..450 km equals -alpha/20 within 10%.
Outcome criterion5() {
    const SystemParams sys = default_system();
    std::vector<double> xs, ys;
    for (double d = 200; d <= 450; d += 10) {
        const double r = optimized_rate(sys, d, Objective::inside);
        if (r > 0.0) {
            xs.push_back(d);
            ys.push_back(std::log10(r));
        }
    }
    if (xs.size() < 10) return {false, "too few positive rates for the fit"};
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= xs.size();
    my /= ys.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    const double slope = sxy / sxx;
    const double target = -sys.alpha / 20.0;
    const double rel = std::abs(slope - target) / std::abs(target);
    return {rel <= 0.10,
            fmt("slope %.6f per km vs -alpha/20 = %.6f (off by %.2f%%)", slope,
                target, 100.0 * rel)};
}

// 6: Monte-Carlo gain and error rate match the closed form within 3
// binomial standard errors at five operating points.
Outcome criterion6() {
    const auto t0 = std::chrono::steady_clock::now();
    struct Point {
        double d, mu;
        int L;
        std::uint64_t seed;
    };
    const Point pts[] = {
        {50, 0.2, 64, 1001},  {100, 0.2, 128, 1002}, {100, 0.5, 64, 1003},
        {200, 0.2, 64, 1004}, {200, 0.5, 128, 1005},
    };
    std::string detail;
    bool all_pass = true;
    for (const Point& p : pts) {
        TrainConfig cfg;
        cfg.sys = default_system();
        cfg.proto = ProtocolParams{p.mu, p.L, 10};
        cfg.geom = Geometry{p.d};
        cfg.trains = 100000;
        cfg.seed = p.seed;
        const ValidationReport rep = validate_against_analytic(cfg);
        all_pass = all_pass && rep.pass;
        detail += fmt("(%g km, mu=%g, L=%d: z=%.2f/%.2f) ", p.d, p.mu, p.L,
                      rep.z_gain, rep.z_error);
    }
    const double elapsed = seconds_since(t0);
    detail += fmt("%.2f s total", elapsed);
    return {all_pass && elapsed < 300.0, detail};
}

// 7: interference and location measurements announce identically.
Outcome criterion7() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0;
    bool pass = true;
    for (int L : {4, 8}) {
        const EquivalenceReport rep = equivalence_report(L, 100, 4242 + L);
        worst = std::max(worst, rep.max_deviation);
        pass = pass && rep.pass;
    }
    const double elapsed = seconds_since(t0);
    return {pass && elapsed < 30.0,
            fmt("max deviation %.2e over L in {4, 8}, 100 mixed states, "
                "all delay settings, %.2f s",
                worst, elapsed)};
}

// 8: two finite-size consistency clauses. The 1.98 shortcut is checked
// against the r1/r2 construction over the stated box; the exact binomial
// inversion is checked against the gaussian bound with 5% slack.
Outcome criterion8() {
    const int s = 100;
    double worst_shortcut = 0;
    double worst_p1 = 0, worst_p2 = 0, worst_sn = 0;
    int within = 0, total = 0;
    for (int i = 0; i < 10; ++i) {
        const double p1 = 0.01 + 0.01 * i;
        for (int j = 0; j < 10; ++j) {
            const double p2 = 0.01 + 0.01 * j;
            for (int k = 0; k < 5; ++k) {
                const double sn = std::pow(10.0, -3.0 + 0.25 * k);
                const auto N = static_cast<std::int64_t>(std::llround(s / sn));
                const double construction = finite_size_phase_entropy(p1, p2, N, s);
                const double asymptote =
                    p1 + (1.0 - p1) * binary_entropy(p2);
                const double shortcut = asymptote * (1.0 + 1.98 * std::sqrt(sn));
                const double rel =
                    std::abs(shortcut - construction) / construction;
                ++total;
                if (rel <= 0.15) ++within;
                if (rel > worst_shortcut) {
                    worst_shortcut = rel;
                    worst_p1 = p1;
                    worst_p2 = p2;
                    worst_sn = sn;
                }
            }
        }
    }
    const bool clause_shortcut = worst_shortcut <= 0.15;

    double worst_ratio = 0;
    for (double n : {1e3, 1e4, 1e5, 1e6}) {
        for (double p : {0.01, 0.02, 0.05, 0.1}) {
            for (int sec : {70, 100}) {
                const auto a = invert_binomial_tail(
                    static_cast<std::int64_t>(n), p, sec);
                const double exact = static_cast<double>(a) / n;
                const double gauss =
                    p + std::sqrt(2.0 * std::log(2.0) * p * (1.0 - p) * sec / n);
                worst_ratio = std::max(worst_ratio, gauss / exact);
            }
        }
    }
    const bool clause_inversion = worst_ratio <= 1.05;

    return {clause_shortcut && clause_inversion,
            fmt("shortcut vs construction: worst %.2f%% at p1=%.2f p2=%.2f "
                "s/N=%.4f, %d/%d points within 15%%; gaussian/exact bound "
                "ratio at most %.4f (allowed 1.05)",
                100.0 * worst_shortcut, worst_p1, worst_p2, worst_sn, within,
                total, worst_ratio)};
}

// 9: degenerate limits hold exactly.
Outcome criterion9() {
    const double tol = 1e-12;
    SystemParams clean = default_system();
    clean.e_d = 0.0;
    clean.p_d = 0.0;
    const double e_clean =
        bit_error_rate(clean, ProtocolParams{1.0, 128, 0}, Geometry{100});

    const double e_dark =
        bit_error_rate(default_system(), ProtocolParams{0.0, 128, 0}, Geometry{100});

    double tag_gap = 0;
    for (double mu : {0.1, 1.0, 5.0, 17.0})
        tag_gap = std::max(tag_gap, std::abs(source_tag_probability(mu, 0) -
                                             (-std::expm1(-mu))));

    double phase_gap = 0;
    phase_gap = std::max(phase_gap,
                         std::abs(phase_error_outside(0.01, 0.0, 5, 101) - 0.05));
    phase_gap = std::max(
        phase_gap, std::abs(phase_error_outside(0.3, 0.0, 2, 64) - 2.0 / 63.0));

    const bool pass = e_clean == 0.0 && e_dark == 0.5 && tag_gap <= tol &&
                      phase_gap <= tol;
    return {pass, fmt("clean e_b=%g, dark-only e_b=%g, tagging gap %.1e, "
                      "threshold gap %.1e",
                      e_clean, e_dark, tag_gap, phase_gap)};
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc)
            only = std::atoi(argv[++i]);
    }

    Outcome (*criteria[])() = {criterion1, criterion2, criterion3,
                               criterion4, criterion5, criterion6,
                               criterion7, criterion8, criterion9};
    int failures = 0;
    for (int n = 1; n <= 9; ++n) {
        if (only != 0 && only != n) continue;
        const Outcome out = criteria[n - 1]();
        std::printf("%s criterion %d: %s\n", out.pass ? "PASS" : "FAIL", n,
                    out.detail.c_str());
        if (!out.pass) ++failures;
    }
    return failures;
}
