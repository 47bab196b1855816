#pragma once

// Constituent specs and synthetic histories shared by the tests.

#include "cmv/mixture.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace cmv::testing {

inline Vec3 fiber_direction(double deg) {
    const double a = deg * std::numbers::pi / 180.0;
    return {0.0, std::sin(a), std::cos(a)};
}

inline ConstituentSpec elastin_spec(double rho_r0 = 105.0) {
    ConstituentSpec s;
    s.name = "elastin";
    s.material = MaterialModel::neo_hookean(9.913);
    s.deposition = DepositionStretch::diagonal(1.0 / (1.219 * 1.428), 1.219, 1.428);
    s.turnover.kind = TurnoverKind::Elastin;
    s.rho_r0 = rho_r0;
    return s;
}

inline ConstituentSpec fiber_spec(const std::string& name, double c1, double c2, double deg, double g_f,
                                  double rho_r0) {
    ConstituentSpec s;
    s.name = name;
    s.material = MaterialModel::fung(c1, c2, fiber_direction(deg));
    s.deposition = DepositionStretch::fiber(g_f, fiber_direction(deg));
    s.turnover.kind = TurnoverKind::Mechano;
    s.turnover.k_h = 1.0 / 80.0;
    s.turnover.k_sigma = 1.0;
    s.turnover.k_tau = 5.0;
    s.rho_r0 = rho_r0;
    return s;
}

/// Elastin, smooth muscle and four collagen families with the ovine IVC constants.
inline std::vector<ConstituentSpec> ivc_specs(double g_f = 1.05) {
    return {elastin_spec(),
            fiber_spec("smc", 48.33, 1.02, 90.0, g_f, 85.05),
            fiber_spec("collagen_circ", 2.696, 14.92, 90.0, g_f, 14.595),
            fiber_spec("collagen_axial", 2.696, 14.92, 0.0, g_f, 143.85),
            fiber_spec("collagen_diag_p", 2.696, 14.92, 41.94, g_f, 350.7),
            fiber_spec("collagen_diag_m", 2.696, 14.92, -41.94, g_f, 350.7)};
}

/// Random deformation gradient with principal stretches in [lo, hi] and a
/// small shear, always with positive determinant.
inline Tensor2 random_deformation(std::mt19937& rng, double lo = 0.9, double hi = 1.3, double shear = 0.05) {
    std::uniform_real_distribution<double> st(lo, hi), sh(-shear, shear);
    Tensor2 f = Tensor2::diag(st(rng), st(rng), st(rng));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (i != j) f(i, j) = sh(rng);
    return f;
}

/// A committed history of `steps` cohorts deposited at random gradients with
/// random production rates and deviations, ending at a random F.
inline MixtureState random_mixture(std::mt19937& rng, int steps, double ds = 4.0) {
    std::uniform_real_distribution<double> g(0.95, 1.1), m(0.0, 3.0), dev(-0.2, 0.2);
    MixtureState ms(ivc_specs(g(rng)));
    for (int n = 0; n < steps; ++n) {
        ms.f = random_deformation(rng, 0.95, 1.15, 0.03);
        std::vector<double> rates(ms.size());
        for (auto& r : rates) r = m(rng);
        ms.open_step(n * ds, dev(rng), dev(rng), rates);
        ms.commit_step();
    }
    ms.f = random_deformation(rng);
    return ms;
}

} // namespace cmv::testing
