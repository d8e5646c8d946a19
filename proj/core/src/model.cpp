#include "rrqss/model.hpp"

#include <cmath>
#include <stdexcept>

namespace rrqss {

SystemParams default_system() {
    return SystemParams{0.56, 1e-8, 0.02, 0.167, 1.1};
}

void validate(const SystemParams& sys) {
    if (!(sys.eta_d > 0.0) || sys.eta_d > 1.0)
        throw std::invalid_argument("eta_d must be in (0, 1]");
    if (sys.p_d < 0.0 || sys.p_d >= 1.0)
        throw std::invalid_argument("p_d must be in [0, 1)");
    if (sys.e_d < 0.0 || sys.e_d > 0.5)
        throw std::invalid_argument("e_d must be in [0, 0.5]");
    if (!(sys.alpha > 0.0))
        throw std::invalid_argument("alpha must be positive");
    if (sys.f < 1.0)
        throw std::invalid_argument("f must be >= 1");
}

void validate(const Geometry& geom) {
    if (geom.distance_km < 0.0 || !std::isfinite(geom.distance_km))
        throw std::invalid_argument("distance must be finite and nonnegative");
}

double arm_transmittance(const SystemParams& sys, const Geometry& geom) {
    return sys.eta_d * std::pow(10.0, -sys.alpha * geom.distance_km / 20.0);
}

double plob_bound(const SystemParams& sys, const Geometry& geom) {
    const double eta =
        sys.eta_d * std::pow(10.0, -sys.alpha * geom.distance_km / 10.0);
    if (eta >= 1.0)
        throw std::domain_error("capacity bound diverges at unit transmittance");
    // -log2(1 - eta), stable for eta << 1
    return -std::log1p(-eta) / std::log(2.0);
}

}  // namespace rrqss
