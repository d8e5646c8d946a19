#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <random>
#include <utility>
#include <vector>

// Single-photon subspace check that the interference measurement and the
// location measurement announce identically distributed index pairs. The
// 2L-dimensional mode basis is ordered receiver-side first: |k>_B -> row
// k-1, |k>_A -> row L+k-1, k = 1..L.

namespace rrqss {

struct SinglePhotonState {
    int L = 0;
    Eigen::MatrixXcd rho;  // 2L x 2L density matrix
};

// Hermiticity and unit trace within 1e-12, eigenvalues >= -1e-12.
void validate(const SinglePhotonState& state);

SinglePhotonState random_pure_state(int L, std::mt19937_64& rng);
SinglePhotonState random_mixed_state(int L, std::mt19937_64& rng);

struct InterferenceOutcome {
    Eigen::MatrixXcd op;  // rank-1 projector
    int k = 0;            // receiver-side pulse index
    int s = 0;            // relative-phase outcome bit
};

// The 2(L-r) projectors onto (|k>_B + (-1)^s |k+(-1)^b r>_A)/sqrt(2) for
// every k whose partner index stays inside 1..L. Outcome probability is
// Tr(rho E)/2; the detector-side filter keeps half the events.
std::vector<InterferenceOutcome> interference_povm(int L, int r, int b);

struct LocationOutcome {
    Eigen::MatrixXcd op;  // (P(|k>_B) + P(|k>_A)) / 2
    int k = 0;
};

std::vector<LocationOutcome> location_povm(int L);

struct AnnouncementDistribution {
    std::map<std::pair<int, int>, double> entries;  // {j_A, i_B} -> probability
    double no_detection = 0;                        // absorbs all residual mass
};

// Non-negativity, total mass 1 within 1e-10, every pair obeys
// j_A - i_B = (-1)^b r.
void validate(const AnnouncementDistribution& dist, int r, int b);

enum class PovmKind { interference, location };

// Announced-pair distribution induced by either measurement. The location
// kind resolves which side clicked and completes the partner index from
// (r, b); completions that leave 1..L fold into no_detection.
AnnouncementDistribution announcement_distribution(const SinglePhotonState& state,
                                                   PovmKind kind, int r, int b);

struct RbDeviation {
    int r = 0;
    int b = 0;
    double deviation = 0;  // max entrywise gap between the two distributions
};

struct EquivalenceReport {
    int L = 0;
    int trials = 0;
    std::uint64_t seed = 0;
    double max_deviation = 0;
    bool pass = false;  // max_deviation <= 1e-10
    std::vector<RbDeviation> breakdown;
};

// Random mixed states, every (r, b), both measurements, worst entrywise gap.
EquivalenceReport equivalence_report(int L, int trials, std::uint64_t seed);

}  // namespace rrqss
