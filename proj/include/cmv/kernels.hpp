#pragma once

// Per-segment solid and growth kernels with serial and OpenMP drivers.

#include "cmv/membrane.hpp"

#include <exception>
#include <vector>

namespace cmv {

enum class Execution { Serial, Parallel };
enum class SolidSolver { Linearized, Newton };
enum class StressInvariant { Trace, InPlane, Hoop };

/// Runs fn(i) for i in [0, n); exceptions are rethrown after the loop.
template <class Fn>
void for_each_index(std::size_t n, Execution ex, Fn&& fn) {
    if (ex == Execution::Serial) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    const long count = static_cast<long>(n);
#pragma omp parallel for schedule(static)
    for (long i = 0; i < count; ++i) {
        try {
            fn(static_cast<std::size_t>(i));
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

double stress_invariant(const Tensor2& sigma, StressInvariant kind);

struct GrowthInput {
    double p_kpa = 0.0;
    double wss = 0.0;      ///< [dyn/cm^2]
    double sigma_h = 1.0;  ///< [kPa]
    double tau_h = 1.0;    ///< [dyn/cm^2]
    double s = 0.0;        ///< time since implant [day]
    StressInvariant invariant = StressInvariant::Trace;
    double balance_ds = 0.0;  ///< step for the balanced production factor; 0 disables it [day]
};

struct GrowthOutput {
    double sigma_inv = 0.0;
    double dsigma = 0.0;
    double dtau = 0.0;
    double j_target = 1.0;
    double residual = 0.0;  ///< σ_θθ - P a/h after the production update [kPa]
    double laplace = 0.0;   ///< P a/h [kPa]
    std::vector<double> rho;
    std::vector<double> upsilon;
};

/// tanh(k Δs/2) / (k Δs/2). Scaling basal production by this factor makes the
/// trapezoidal heredity sum reproduce a constant density exactly on a uniform
/// grid with constant removal rate k.
double balanced_production_factor(double k, double ds);

/// Production rate of the open cohort that is consistent with the density it
/// creates: m = b max(ρ k_h, floor) Υ with ρ = base + weight m, where b is the
/// balanced production factor (1 to disable).
double endpoint_production(const TurnoverParams& p, double base, double weight, double rho_0, double upsilon,
                           double balance = 1.0);

/// Updates stimuli and the open cohort's production at the segment's current F.
GrowthOutput growth_kernel(VesselSegment& seg, const GrowthInput& in);

void growth_all(std::vector<VesselSegment>& segs, const std::vector<GrowthInput>& in, std::vector<GrowthOutput>& out,
                Execution ex);

struct SolidInput {
    double p_kpa = 0.0;
    double j_target = 1.0;
    double dtau = 0.0;
    double k_p = 1.0e4;
    double stress_scale = 1.0;
    SolidSolver solver = SolidSolver::Linearized;
};

/// Unrelaxed deformation gradient from one solid solve.
Tensor2 solid_kernel(const VesselSegment& seg, const SolidInput& in);

void solid_all(const std::vector<VesselSegment>& segs, const std::vector<SolidInput>& in, std::vector<Tensor2>& out,
               Execution ex);

} // namespace cmv
