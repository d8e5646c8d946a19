#include "rrqss/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace rrqss {

namespace {

double evaluate(const SystemParams& sys, const Geometry& geom,
                const ProtocolParams& proto, Objective obj,
                const std::optional<FiniteSizeParams>& fin,
                RateBreakdown& bd) {
    switch (obj) {
        case Objective::outside:
            bd = keyrate_outside(sys, proto, geom);
            break;
        case Objective::inside:
            bd = keyrate_inside(sys, proto, geom);
            break;
        case Objective::inside_finite:
            bd = keyrate_inside_finite(sys, proto, geom, *fin);
            break;
    }
    return bd.R;
}

// Strictly-better-or-equal-and-cheaper ordering for the argmax.
bool improves(double R, const ProtocolParams& p, double bestR,
              const ProtocolParams& best) {
    if (R != bestR) return R > bestR;
    if (p.mu != best.mu) return p.mu < best.mu;
    if (p.L != best.L) return p.L < best.L;
    return p.nu_th < best.nu_th;
}

}  // namespace

SearchSpace SearchSpace::defaults() {
    SearchSpace s;
    constexpr int n_mu = 61;
    s.mu_grid.reserve(n_mu);
    for (int i = 0; i < n_mu; ++i) {
        // 10^-3 .. 10^2, evenly spaced exponents
        const double expo = -3.0 + 5.0 * i / (n_mu - 1);
        s.mu_grid.push_back(std::pow(10.0, expo));
    }
    for (int L = 2; L <= 4096; L *= 2) s.L_values.push_back(L);
    for (int nu = 0; nu <= 32; ++nu) s.nu_values.push_back(nu);
    return s;
}

void validate(const SearchSpace& space) {
    if (space.mu_grid.empty() || space.L_values.empty() ||
        space.nu_values.empty())
        throw std::invalid_argument("search space has an empty grid");
    for (double mu : space.mu_grid)
        if (!(mu > 0.0) || !std::isfinite(mu))
            throw std::invalid_argument("mu grid values must be positive");
    for (int L : space.L_values)
        if (L < 2) throw std::invalid_argument("L candidates must be >= 2");
    for (int nu : space.nu_values)
        if (nu < 0) throw std::invalid_argument("nu_th candidates must be >= 0");
}

OptimizationResult optimize(const SystemParams& sys, const Geometry& geom,
                            const SearchSpace& space, Objective objective,
                            const std::optional<FiniteSizeParams>& fin) {
    validate(sys);
    validate(geom);
    validate(space);
    if (objective == Objective::inside_finite) {
        if (!fin.has_value())
            throw std::invalid_argument(
                "finite-size objective requires finite-size parameters");
        validate(*fin);
    }

    OptimizationResult res;
    res.objective = objective;
    bool have_best = false;
    std::size_t best_mu_idx = 0;

    for (int L : space.L_values) {
        for (int nu : space.nu_values) {
            for (std::size_t i = 0; i < space.mu_grid.size(); ++i) {
                const ProtocolParams cand{space.mu_grid[i], L, nu};
                RateBreakdown bd;
                const double R = evaluate(sys, geom, cand, objective, fin, bd);
                ++res.evaluations;
                if (!have_best || improves(R, cand, res.breakdown.R, res.best)) {
                    have_best = true;
                    res.best = cand;
                    res.breakdown = bd;
                    best_mu_idx = i;
                }
            }
        }
    }

    if (res.breakdown.R > 0.0) {
        // Polish mu between the winner's grid neighbours (log scale).
        // Only a strictly better refined point replaces the grid winner,
        // so refinement never loses ground.
        const std::size_t lo_idx = best_mu_idx > 0 ? best_mu_idx - 1 : 0;
        const std::size_t hi_idx =
            std::min(best_mu_idx + 1, space.mu_grid.size() - 1);
        double a = std::log(space.mu_grid[lo_idx]);
        double b = std::log(space.mu_grid[hi_idx]);
        if (b > a) {
            const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
            auto rate_at = [&](double logmu, RateBreakdown& bd) {
                const ProtocolParams cand{std::exp(logmu), res.best.L,
                                          res.best.nu_th};
                ++res.evaluations;
                return evaluate(sys, geom, cand, objective, fin, bd);
            };
            double c = b - gr * (b - a);
            double d = a + gr * (b - a);
            RateBreakdown bc, bdd;
            double fc = rate_at(c, bc);
            double fd = rate_at(d, bdd);
            for (int it = 0; it < 80 && (b - a) > 1e-12; ++it) {
                if (fc > fd) {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - gr * (b - a);
                    fc = rate_at(c, bc);
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + gr * (b - a);
                    fd = rate_at(d, bdd);
                }
            }
            RateBreakdown bm;
            const double logm = 0.5 * (a + b);
            const double fm = rate_at(logm, bm);
            if (fm > res.breakdown.R) {
                res.best.mu = std::exp(logm);
                res.breakdown = bm;
            }
        }
    }

    res.positive = res.breakdown.R > 0.0;
    return res;
}

}  // namespace rrqss
