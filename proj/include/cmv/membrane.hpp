#pragma once

// Thin-walled axisymmetric vessel segment: kinematics F = diag(λ_r, λ_θ, 1)
// in (r, θ, z) and the Laplace balance σ_θθ = P a / h. Lengths in cm,
// stresses and pressures in kPa.

#include "cmv/growth_update.hpp"
#include "cmv/mixture.hpp"

namespace cmv {

struct VesselSegment {
    double a0 = 1.0;  ///< reference inner radius [cm]
    double h0 = 0.1;  ///< reference thickness [cm]
    double length = 1.0;
    double z = 0.0;   ///< axial position of the segment midpoint [cm]
    int region = 0;
    MixtureState mixture;

    double lambda_theta() const { return mixture.f(1, 1); }
    double lambda_r() const { return mixture.f(0, 0); }
    double j() const { return mixture.f.det(); }
    void validate() const;
};

struct Geometry {
    double a = 0.0;  ///< inner radius [cm]
    double h = 0.0;  ///< thickness [cm]
};

/// F = diag(J/λ_θ, λ_θ, 1)
Tensor2 segment_deformation(double lambda_theta, double j);
Tensor2 segment_deformation(const VesselSegment& seg, double j);
/// a = λ_θ a0, h = h0 J/λ_θ
Geometry current_geometry(const VesselSegment& seg, double j);
/// Geometry implied by the segment's current F.
Geometry current_geometry(const VesselSegment& seg);

struct WallStress {
    MixtureResponse response;
    double p = 0.0;          ///< Lagrange pressure [kPa]
    Tensor2 sigma;           ///< total Cauchy stress [kPa]
    double residual = 0.0;   ///< σ_θθ - P a/h [kPa]
    double laplace = 0.0;    ///< P a/h [kPa]
};

/// Evaluates the wall at deformation f under lumen pressure P.
WallStress wall_stress(const VesselSegment& seg, const Tensor2& f, double p_lumen, double delta_tau = 0.0,
                       bool tangent = false);

double equilibrium_residual(const VesselSegment& seg, double p_lumen, double delta_tau = 0.0);

struct NewtonOptions {
    double stress_scale = 1.0;  ///< residual tolerance is rel_tol * max(stress_scale, P a/h)
    double rel_tol = 1e-9;
    int max_iter = 100;
    double lo = 0.5;
    double hi = 2.0;
};

/// Circumferential stretch at which the full nonlinear wall satisfies the
/// Laplace balance with det F = J_target.
double solve_equilibrium_newton(const VesselSegment& seg, double p_lumen, double j_target, double delta_tau = 0.0,
                                const NewtonOptions& opt = {});

/// Solves the radial closure and the Laplace balance with stress from the
/// linearized update about the segment's current F. Returns F^{n+1} = F* Fⁿ.
Tensor2 solve_equilibrium_linearized(const VesselSegment& seg, double p_lumen, const LinearizedMaterial& mat);

/// Assembles the linearized material at the segment's current F.
LinearizedMaterial linearize_wall(const VesselSegment& seg, double p_lumen, double j_target, double k_p,
                                  double delta_tau = 0.0);

} // namespace cmv
