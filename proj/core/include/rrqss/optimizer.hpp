#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rrqss/keyrate.hpp"

// Exhaustive search over (mu, L, nu_th) for the best key rate at one
// distance, with a golden-section polish on mu in the winning cell.

namespace rrqss {

enum class Objective { outside, inside, inside_finite };

struct SearchSpace {
    std::vector<double> mu_grid;   // log-spaced intensities
    std::vector<int> L_values;     // candidate train lengths
    std::vector<int> nu_values;    // candidate tagging thresholds

    // mu in [1e-3, 1e2] over 61 log-spaced points, L in powers of two
    // 2..4096, nu_th in 0..32.
    static SearchSpace defaults();
};

void validate(const SearchSpace& space);

struct OptimizationResult {
    ProtocolParams best{};
    RateBreakdown breakdown{};
    Objective objective = Objective::inside;
    std::int64_t evaluations = 0;
    bool positive = false;  // false: no grid point produced a positive rate
};

// Deterministic: full grid scan, lexicographic tie-breaking toward smaller
// (mu, L, nu_th), then a monotone golden-section refinement of mu between
// the grid neighbours of the winner. fin is required for inside_finite.
OptimizationResult optimize(const SystemParams& sys, const Geometry& geom,
                            const SearchSpace& space, Objective objective,
                            const std::optional<FiniteSizeParams>& fin = {});

}  // namespace rrqss
