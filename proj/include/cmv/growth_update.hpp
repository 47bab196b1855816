#pragma once

// Linearized stress update about the current iterate and Aitken relaxation.

#include "cmv/tensor.hpp"

#include <limits>
#include <vector>

namespace cmv {

struct LinearizedMaterial {
    Tensor2 sigma_bar;      ///< σ̄ⁿ at the current iterate [kPa]
    Tensor4 c_bar;          ///< spatial tangent 𝕔̄ⁿ [kPa]
    double p = 0.0;         ///< Lagrange pressure pⁿ [kPa]
    double j_star = 1.0;    ///< target volume increment J^{n+1}/J^n
    double k_p = 1.0e4;     ///< volumetric penalty [kPa]

    void validate() const;
};

/// σ^{n+1} = -(pⁿ + p*) I + (1/J*) F* σ̄ⁿ F*ᵀ + (1/J*) F* (𝕔̄ⁿ : E*) F*ᵀ
/// with E* = ½[(det F*/J*)^{-2/3} F*ᵀF* - I] and p* = -k_p (det F* - J*).
Tensor2 linearized_cauchy(const LinearizedMaterial& mat, const Tensor2& f_star);

struct AitkenState {
    double omega = 0.5;
    std::vector<double> r_prev;
    int iteration = 0;  ///< number of completed relaxation steps
};

struct AitkenResult {
    std::vector<double> d_next;
    std::vector<double> residual;  ///< d̃ - d_prev
    double omega = 0.5;
};

/// One Aitken-relaxed fixed-point update. The first two updates use the
/// initial ω; a zero residual difference reuses the previous ω. Later
/// factors are clipped to [omega_min, omega_max].
AitkenResult aitken_step(AitkenState& state, const std::vector<double>& d_prev, const std::vector<double>& d_tilde,
                         double omega_initial = 0.5, double omega_min = -std::numeric_limits<double>::infinity(),
                         double omega_max = std::numeric_limits<double>::infinity());

double max_abs(const std::vector<double>& v);

} // namespace cmv
