#pragma once

// Steady Poiseuille hemodynamics along a chain of segments (CGS units:
// cm, s, dyn; Q in ml/s, R in dyn s/cm^5, μ in poise).

#include <vector>

namespace cmv {

inline constexpr double kPaToDynCm2 = 1.0e4;
inline constexpr double kPascalToDynCm2 = 10.0;  ///< 1 Pa = 10 dyn/cm^2

struct HemodynamicField {
    double q = 0.0;
    double mu = 0.04;
    double r_outlet = 0.0;
    std::vector<double> pressure;  ///< segment-midpoint pressure [dyn/cm^2]
    std::vector<double> wss;       ///< wall shear stress [dyn/cm^2]
};

/// τ = 4 μ Q / (π a³)
double wall_shear(double q, double a, double mu);

/// Outlet pressure R Q, then Poiseuille drops 8 μ L Q / (π a⁴) marching
/// upstream; each segment reports its midpoint value.
std::vector<double> pressure_field(const std::vector<double>& radii, const std::vector<double>& lengths, double q,
                                   double mu, double r_outlet);

/// Triangular-kernel moving average over the segment midpoints z with
/// half-width window [cm]; window 0 returns the input.
std::vector<double> smooth_axial(const std::vector<double>& values, const std::vector<double>& z, double window);

HemodynamicField evaluate_hemodynamics(const std::vector<double>& radii, const std::vector<double>& lengths,
                                       const std::vector<double>& z, double q, double mu, double r_outlet,
                                       double window);

} // namespace cmv
