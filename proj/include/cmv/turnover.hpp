#pragma once

// Mass production stimuli and survival functions for each constituent class.
// Times are in days, densities in kg/m^3, production rates in kg/(m^3 day).

#include <span>
#include <vector>

namespace cmv {

enum class TurnoverKind { Mechano, Inflammatory, Elastin, Polymer, PolymerGround };

struct TurnoverParams {
    TurnoverKind kind = TurnoverKind::Elastin;
    double k_h = 0.0;         ///< basal removal rate [1/day]
    double k_sigma = 0.0;     ///< production gain on intramural stress
    double k_tau = 0.0;       ///< production gain on wall shear stress
    double k_d_sigma = 0.0;   ///< degradation gain on intramural stress
    double k_d_tau = 0.0;     ///< degradation gain on wall shear stress

    // Inflammatory burden Γ(s) = δ^β s^(β-1) e^(-δ s), scaled by K.
    double k_inflam = 0.0;
    double delta = 0.0;
    double beta = 0.0;

    // Polymer sigmoid survival.
    double k_polymer = 0.0;
    double zeta = 0.0;
    double gamma = 0.0;

    // Ground-matrix survival.
    double eps_rmin = 0.0;
    double s_d = 0.0;

    /// Floor of the nominal production rate for mechano-mediated kinds, and
    /// the nominal rate itself for inflammatory kinds [kg/(m^3 day)]. Zero
    /// means "use this constituent's own rho_R(0) k_h".
    double reference_production = 0.0;

    void validate() const;
};

struct StimulusInput {
    double dsigma = 0.0;  ///< σ_f/σ_h - 1
    double dtau = 0.0;    ///< τ_f/τ_h - 1
    double s = 0.0;       ///< time since implant [day]
};

/// Stimulus deviations sampled on the G&R grid. Times strictly increasing.
struct DeviationHistory {
    std::vector<double> t;
    std::vector<double> dsigma;
    std::vector<double> dtau;

    void push_back(double time, double ds, double dt);
    std::size_t size() const { return t.size(); }
};

/// Υ = max(0.1, 1 + K_σ Δσ - K_τ Δτ)
double stimulus_mechano(const TurnoverParams& p, const StimulusInput& in);
/// Γ(s)/Γ_max, peaking at 1 when s = (β-1)/δ.
double inflammatory_burden(const TurnoverParams& p, double s);
/// Υ = K Γ(s)/Γ_max
double stimulus_inflammatory(const TurnoverParams& p, double s);
/// Dispatches on kind; zero for elastin and polymers.
double stimulus(const TurnoverParams& p, const StimulusInput& in);

double production_rate(const TurnoverParams& p, double rho_now, double rho_0, double upsilon);

/// Removal rate k(t) at one instant, floored at zero.
double removal_rate(const TurnoverParams& p, double t, double dsigma, double dtau);

/// q(s, τ) = exp(-∫_τ^s k(t) dt) by the trapezoid rule on the history grid,
/// with deviations interpolated linearly between samples.
double survival_fraction(const TurnoverParams& p, double tau, double s, const DeviationHistory& history);

/// Running integral of k(t) at every history sample (first entry 0).
/// q(t_n, t_k) = exp(-(K[n] - K[k])).
std::vector<double> cumulative_removal(const TurnoverParams& p, const DeviationHistory& history);

/// Q(s): survival of the mass present at s = 0.
double initial_cohort_survival(const TurnoverParams& p, double s, const DeviationHistory& history);

} // namespace cmv
