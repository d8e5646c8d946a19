#include "rrqss/security_checks.hpp"

#include <cmath>
#include <complex>
#include <iterator>
#include <stdexcept>

namespace rrqss {

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

constexpr double kStateTol = 1e-12;
constexpr double kDistTol = 1e-10;

// Tr(A B) without forming the product.
std::complex<double> trace_product(const MatrixXcd& a, const MatrixXcd& b) {
    return a.cwiseProduct(b.transpose()).sum();
}

void check_rb(int L, int r, int b) {
    if (L < 2) throw std::domain_error("L must be >= 2");
    if (r < 1 || r > L - 1) throw std::domain_error("r must lie in 1..L-1");
    if (b != 0 && b != 1) throw std::domain_error("b must be 0 or 1");
}

MatrixXcd gaussian_matrix(int rows, int cols, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    MatrixXcd g(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            g(i, j) = std::complex<double>(n(rng), n(rng)) / std::sqrt(2.0);
    return g;
}

}  // namespace

void validate(const SinglePhotonState& state) {
    if (state.L < 2) throw std::invalid_argument("L must be >= 2");
    const int dim = 2 * state.L;
    if (state.rho.rows() != dim || state.rho.cols() != dim)
        throw std::invalid_argument("density matrix must be 2L x 2L");
    if ((state.rho - state.rho.adjoint()).cwiseAbs().maxCoeff() > kStateTol)
        throw std::invalid_argument("density matrix must be Hermitian");
    if (std::abs(state.rho.trace().real() - 1.0) > kStateTol ||
        std::abs(state.rho.trace().imag()) > kStateTol)
        throw std::invalid_argument("density matrix must have unit trace");
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(state.rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kStateTol)
        throw std::invalid_argument("density matrix must be positive semidefinite");
}

SinglePhotonState random_pure_state(int L, std::mt19937_64& rng) {
    if (L < 2) throw std::invalid_argument("L must be >= 2");
    VectorXcd v = gaussian_matrix(2 * L, 1, rng);
    v.normalize();
    SinglePhotonState st;
    st.L = L;
    st.rho = v * v.adjoint();
    return st;
}

SinglePhotonState random_mixed_state(int L, std::mt19937_64& rng) {
    if (L < 2) throw std::invalid_argument("L must be >= 2");
    // Wishart construction: full rank almost surely, well away from pure.
    const MatrixXcd g = gaussian_matrix(2 * L, 3 * L, rng);
    MatrixXcd w = g * g.adjoint();
    w /= w.trace().real();
    SinglePhotonState st;
    st.L = L;
    st.rho = 0.5 * (w + w.adjoint());  // scrub rounding asymmetry
    return st;
}

std::vector<InterferenceOutcome> interference_povm(int L, int r, int b) {
    check_rb(L, r, b);
    const int dim = 2 * L;
    const int shift = (b == 0) ? r : -r;
    std::vector<InterferenceOutcome> family;
    family.reserve(2 * (L - r));
    for (int k = 1; k <= L; ++k) {
        const int j = k + shift;
        if (j < 1 || j > L) continue;
        for (int s = 0; s <= 1; ++s) {
            // Projector onto (|k>_B + (-1)^s |j>_A)/sqrt(2), written out so
            // every entry is an exact 0.5: squaring 1/sqrt(2) in floating
            // point would smear the last bit.
            InterferenceOutcome o;
            o.op = MatrixXcd::Zero(dim, dim);
            const double sign = s == 0 ? 0.5 : -0.5;
            o.op(k - 1, k - 1) = 0.5;
            o.op(L + j - 1, L + j - 1) = 0.5;
            o.op(k - 1, L + j - 1) = sign;
            o.op(L + j - 1, k - 1) = sign;
            o.k = k;
            o.s = s;
            family.push_back(std::move(o));
        }
    }
    return family;
}

std::vector<LocationOutcome> location_povm(int L) {
    if (L < 2) throw std::domain_error("L must be >= 2");
    const int dim = 2 * L;
    std::vector<LocationOutcome> family;
    family.reserve(L);
    for (int k = 1; k <= L; ++k) {
        MatrixXcd op = MatrixXcd::Zero(dim, dim);
        op(k - 1, k - 1) = 0.5;
        op(L + k - 1, L + k - 1) = 0.5;
        LocationOutcome o;
        o.op = std::move(op);
        o.k = k;
        family.push_back(std::move(o));
    }
    return family;
}

void validate(const AnnouncementDistribution& dist, int r, int b) {
    const int shift = (b == 0) ? r : -r;
    double total = dist.no_detection;
    if (dist.no_detection < -kDistTol)
        throw std::invalid_argument("no_detection must be non-negative");
    for (const auto& [pair, p] : dist.entries) {
        if (p < -kStateTol) throw std::invalid_argument("probabilities must be non-negative");
        if (pair.first - pair.second != shift)
            throw std::invalid_argument("announced pair violates the delay relation");
        total += p;
    }
    if (std::abs(total - 1.0) > kDistTol)
        throw std::invalid_argument("distribution must sum to 1");
}

AnnouncementDistribution announcement_distribution(const SinglePhotonState& state,
                                                   PovmKind kind, int r, int b) {
    validate(state);
    check_rb(state.L, r, b);
    const int L = state.L;
    const int shift = (b == 0) ? r : -r;

    AnnouncementDistribution dist;
    double total = 0;

    if (kind == PovmKind::interference) {
        for (const InterferenceOutcome& o : interference_povm(L, r, b)) {
            // Filter of efficiency 1/2 in front of the projective outcome.
            const double p = 0.5 * trace_product(state.rho, o.op).real();
            dist.entries[{o.k + shift, o.k}] += p;
            total += p;
        }
    } else {
        // A location click resolves which mode fired; Tr(rho P(e_m)) is just
        // the m-th diagonal entry. Completed partners outside 1..L cannot be
        // announced and stay in no_detection.
        for (int k = 1; k <= L; ++k) {
            const double q_B = 0.5 * state.rho(k - 1, k - 1).real();
            const int j = k + shift;
            if (j >= 1 && j <= L) {
                dist.entries[{j, k}] += q_B;
                total += q_B;
            }
            const double q_A = 0.5 * state.rho(L + k - 1, L + k - 1).real();
            const int i = k - shift;
            if (i >= 1 && i <= L) {
                dist.entries[{k, i}] += q_A;
                total += q_A;
            }
        }
    }

    // A pair the state never lights up is not an announcement outcome.
    for (auto it = dist.entries.begin(); it != dist.entries.end();)
        it = it->second <= 0.0 ? dist.entries.erase(it) : std::next(it);

    dist.no_detection = 1.0 - total;
    return dist;
}

EquivalenceReport equivalence_report(int L, int trials, std::uint64_t seed) {
    if (L < 2) throw std::invalid_argument("L must be >= 2");
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");

    EquivalenceReport rep;
    rep.L = L;
    rep.trials = trials;
    rep.seed = seed;
    for (int r = 1; r <= L - 1; ++r)
        for (int b = 0; b <= 1; ++b) rep.breakdown.push_back({r, b, 0.0});

    std::mt19937_64 rng(seed);
    for (int t = 0; t < trials; ++t) {
        const SinglePhotonState state = random_mixed_state(L, rng);
        for (RbDeviation& cell : rep.breakdown) {
            const AnnouncementDistribution via_interference =
                announcement_distribution(state, PovmKind::interference, cell.r, cell.b);
            const AnnouncementDistribution via_location =
                announcement_distribution(state, PovmKind::location, cell.r, cell.b);
            double dev = std::abs(via_interference.no_detection - via_location.no_detection);
            for (const auto& [pair, p] : via_interference.entries) {
                const auto it = via_location.entries.find(pair);
                const double q = (it == via_location.entries.end()) ? 0.0 : it->second;
                dev = std::max(dev, std::abs(p - q));
            }
            for (const auto& [pair, q] : via_location.entries)
                if (!via_interference.entries.count(pair)) dev = std::max(dev, q);
            cell.deviation = std::max(cell.deviation, dev);
            rep.max_deviation = std::max(rep.max_deviation, dev);
        }
    }
    rep.pass = rep.max_deviation <= kDistTol;
    return rep;
}

}  // namespace rrqss
