#pragma once

// Constituent-level stored energy, stress and stiffness, plus active
// smooth-muscle tone. Stresses are in kPa.

#include "cmv/tensor.hpp"

namespace cmv {

enum class MaterialKind { NeoHookean, Fung };

struct MaterialModel {
    MaterialKind kind = MaterialKind::NeoHookean;
    double c = 0.0;   ///< isotropic modulus [kPa]
    double c1 = 0.0;  ///< Fung stiffness [kPa]
    double c2 = 1.0;  ///< Fung exponent [-]
    Vec3 h0{0.0, 1.0, 0.0};

    static MaterialModel neo_hookean(double c);
    static MaterialModel fung(double c1, double c2, const Vec3& h0);

    /// Throws InvalidArgument on c < 0, c1 < 0, c2 <= 0 or |h0| != 1.
    void validate() const;
};

/// Symmetric, volume-preserving deposition stretch tensor G.
struct DepositionStretch {
    Tensor2 g = Tensor2::identity();

    /// G = diag(G_r, G_theta, G_z); requires G_r G_theta G_z = 1.
    static DepositionStretch diagonal(double g_r, double g_theta, double g_z);
    /// Transversely isotropic expansion G_f h0⊗h0 + G_f^(-1/2) (I - h0⊗h0).
    static DepositionStretch fiber(double g_f, const Vec3& h0);

    void validate() const;
};

struct ActiveStressParams {
    double t_max = 0.0;     ///< [kPa]
    double lambda_m = 1.4;  ///< stretch at maximum contraction
    double lambda_0 = 0.4;  ///< stretch below which no force is generated
    double c_b = 0.0;       ///< basal vasoconstrictor ratio
    double c_s = 0.0;       ///< shear sensitivity of the ratio
    double k_act = 0.0;     ///< tone relaxation rate [1/day]

    void validate() const;
};

/// Direction-dependent structural tensor H = (R h0) ⊗ (R h0).
Tensor2 structural_tensor(const Vec3& h0, const Tensor2& rotation);

double strain_energy(const MaterialModel& model, const Tensor2& cn, const Tensor2& h);
/// Ŝ = 2 ∂Ŵ/∂Cn
Tensor2 pk2_hat(const MaterialModel& model, const Tensor2& cn, const Tensor2& h);
/// Ĉ = 4 ∂²Ŵ/∂Cn∂Cn
Tensor4 elasticity_hat(const MaterialModel& model, const Tensor2& cn, const Tensor2& h);

/// 1 - exp(-C²) with C = C_B - C_S Δτ_f.
double activation_factor(const ActiveStressParams& p, double delta_tau);
/// λ [1 - ((λ_M - λ)/(λ_M - λ_0))²], zero outside [λ_0, λ_M].
double active_length_tension(const ActiveStressParams& p, double lambda_act);

Tensor2 active_pk2(const ActiveStressParams& p, double lambda_act, double delta_tau, const Tensor2& h0);
/// σ_act = (φ_m / det F) F Ŝ_act Fᵀ
Tensor2 active_cauchy(const ActiveStressParams& p, double phi_m, double lambda_act, double delta_tau,
                      const Tensor2& f, const Tensor2& h0);

} // namespace cmv
