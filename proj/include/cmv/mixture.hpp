#pragma once

// Cohort ledger and heredity-integral evaluation for one material point.

#include "cmv/constituent.hpp"
#include "cmv/tensor.hpp"
#include "cmv/turnover.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cmv {

struct ConstituentSpec {
    std::string name;
    MaterialModel material;
    DepositionStretch deposition;
    TurnoverParams turnover;
    double rho_r0 = 0.0;    ///< initial referential density [kg/m^3]
    double rho_hat = 1050;  ///< intrinsic mass density [kg/m^3]
    std::optional<ActiveStressParams> active;

    double initial_volume_fraction() const { return rho_r0 / rho_hat; }
    void validate() const;
};

struct Cohort {
    double tau = 0.0;                 ///< deposition time [day]
    double m_r = 0.0;                 ///< production rate [kg/(m^3 day)]
    Tensor2 f = Tensor2::identity();  ///< mixture F at deposition
    Tensor2 a = Tensor2::identity();  ///< F^-1(τ) F_G(τ)
    Tensor2 h = Tensor2::identity();  ///< structural tensor in the cohort frame
};

struct ConstituentHistory {
    ConstituentSpec spec;
    Tensor2 a_initial = Tensor2::identity();  ///< A for the mass present at s = 0
    Tensor2 h_initial = Tensor2::identity();
    std::vector<Cohort> cohorts;              ///< ordered by τ

    explicit ConstituentHistory(ConstituentSpec s);
};

/// State of one material point. The deviation and fiber-stretch histories are
/// sampled at the cohort times. When `provisional_endpoint` is set the last
/// cohort of every constituent belongs to the step being iterated and its
/// kinematics follow the current F.
class MixtureState {
public:
    MixtureState() = default;
    explicit MixtureState(std::vector<ConstituentSpec> specs);

    std::vector<ConstituentHistory> constituents;
    DeviationHistory deviations;
    std::vector<double> fiber_stretch;  ///< C(τ):H0 of the active constituent
    Tensor2 f = Tensor2::identity();
    double p = 0.0;                     ///< Lagrange pressure [kPa]
    bool provisional_endpoint = false;

    double time() const { return deviations.t.empty() ? 0.0 : deviations.t.back(); }
    std::size_t size() const { return constituents.size(); }
    int active_index() const;

    /// Opens the cohort at time s for every constituent (kinematics follow F).
    void open_step(double s, double dsigma, double dtau, const std::vector<double>& m_r);
    /// Freezes the open cohort at the current F.
    void commit_step();
    /// Overwrites the deviation sample of the open step.
    void set_current_deviation(double dsigma, double dtau);
};

struct MixtureResponse {
    std::vector<double> rho;      ///< ρ_R per constituent [kg/m^3]
    double j_target = 0.0;        ///< Σ ρ_R/ρ̂
    double j = 1.0;               ///< det F
    Tensor2 s_bar;                ///< passive mixture PK2 [kPa]
    Tensor2 sigma_bar;            ///< passive mixture Cauchy [kPa]
    Tensor2 sigma_active;         ///< active Cauchy [kPa]
    Tensor4 c_material;           ///< passive material elasticity [kPa]
    Tensor4 c_spatial;            ///< passive spatial elasticity [kPa]
    double lambda_act = 1.0;
};

struct EvalOptions {
    bool tangent = false;
    double delta_tau = 0.0;  ///< WSS deviation for the active activation factor
};

/// Weights of the trapezoid rule on arbitrary nodes; half weights at both ends.
std::vector<double> trapezoid_weights(const std::vector<double>& t);

/// Survival of every cohort to the last history time, q(s, τ_k).
std::vector<double> cohort_survival(const TurnoverParams& p, const DeviationHistory& history);

double referential_density(const ConstituentHistory& h, const DeviationHistory& history);
std::vector<double> referential_densities(const MixtureState& ms);
double mixture_volume_ratio(const MixtureState& ms);

/// F_G = G R(τ)
Tensor2 deposition_tensor(const DepositionStretch& g, const Tensor2& f_tau);
/// Cn = Aᵀ C A
Tensor2 cohort_cauchy_green(const Tensor2& a_tau, const Tensor2& c_s);
/// Builds the cohort record for deposition at time tau with mixture gradient f.
Cohort make_cohort(const ConstituentSpec& spec, double tau, double m_r, const Tensor2& f);

/// Full evaluation at the deformation gradient f (which also drives the open cohort).
MixtureResponse evaluate_mixture(const MixtureState& ms, const Tensor2& f, const EvalOptions& opt = {});

Tensor2 mixture_pk2(const MixtureState& ms);
/// σ̄ by push-forward of the mixture PK2.
Tensor2 mixture_cauchy_bar(const MixtureState& ms);
/// σ̄ summed cohort by cohort in the current configuration.
Tensor2 mixture_cauchy_bar_direct(const MixtureState& ms);
/// σ = -p I + σ̄ + σ_act
Tensor2 mixture_cauchy(const MixtureState& ms, double delta_tau = 0.0);
Tensor4 mixture_material_elasticity(const MixtureState& ms);
Tensor4 mixture_spatial_elasticity(const MixtureState& ms);

/// p = σ̄_rr + P/2 so that the total radial stress is -P/2.
double lagrange_pressure_membrane(const Tensor2& sigma_bar, double p_lumen);

/// First-order filter of the fiber stretch history evaluated at times.back().
/// Values before times.front() are taken equal to values.front().
double active_stretch(const std::vector<double>& times, const std::vector<double>& values, double k_act);

} // namespace cmv
