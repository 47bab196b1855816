#pragma once

// G&R time loop with partitioned fluid-solid-growth iterations.

#include "cmv/hemodynamics.hpp"
#include "cmv/kernels.hpp"

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cmv {

enum class Algorithm { Alg2, Alg3 };

struct Vessel;
struct ConvergenceReport;
/// Called after every coupling iteration with the step time.
using IterationObserver = std::function<void(const Vessel&, double, const ConvergenceReport&)>;
enum class HomeostasisMode { Table, Measured };

struct CouplingConfig {
    double ds = 4.0;       ///< [day]
    double t_max = 720.0;  ///< [day]
    int n_max = 100;
    int k_max = 50;
    int j_max = 50;
    double eps_r = 1e-5;
    double eps_tau = 1e-4;
    double eps_sigma = 1e-4;
    double eps_j = 1e-4;
    double eps_eq = 1e-7;  ///< relative Laplace residual at an accepted iterate
    double omega0 = 0.5;
    double omega_min = 0.1;  ///< bounds on the Aitken factor after the first two updates
    double omega_max = 1.0;
    double k_p = 1.0e4;    ///< [kPa]
    double ramp = 1.0;     ///< displacement increment scaling
    bool project_relaxed = false;  ///< re-solve the wall at the relaxed volume before growth
    bool balanced_production = true;
    Algorithm algorithm = Algorithm::Alg2;
    SolidSolver solid = SolidSolver::Linearized;
    Execution execution = Execution::Serial;
    IterationObserver on_iteration;

    void validate() const;
    int steps() const;
};

struct LoadCase {
    double q = 20.0;          ///< [ml/s]
    double r_outlet = 307.5;  ///< [dyn s/cm^5]
    double mu = 0.04;         ///< [poise]
    double window = 0.0;      ///< axial smoothing half-width [cm]
};

struct Homeostasis {
    HomeostasisMode mode = HomeostasisMode::Measured;
    StressInvariant invariant = StressInvariant::Trace;
    double sigma_h = 0.0;  ///< table value [kPa]
    double tau_h = 0.0;    ///< table value [dyn/cm^2]
};

struct SegmentStatus {
    double p = 0.0;          ///< [dyn/cm^2]
    double wss = 0.0;        ///< [dyn/cm^2]
    double sigma_inv = 0.0;  ///< [kPa]
    double dsigma = 0.0;
    double dtau = 0.0;
    double j_target = 1.0;
    double residual_rel = 0.0;    ///< |σ_θθ - P a/h| / (P a/h)
    double j_consistency = 0.0;   ///< |det F - J_target| / J_target
    std::vector<double> rho;
    std::vector<double> upsilon;
};

struct Vessel {
    std::vector<VesselSegment> segments;
    LoadCase reference;  ///< load at which the initial state is evaluated
    LoadCase applied;    ///< load for s > 0
    Homeostasis homeostasis;
    std::vector<double> sigma_h;  ///< per segment [kPa]
    std::vector<double> tau_h;    ///< per segment [dyn/cm^2]
    std::vector<SegmentStatus> status;
    double time = 0.0;
    int step = 0;
    long fluid_evaluations = 0;
    double initial_residual = 0.0;  ///< max relative Laplace residual at s = 0
};

struct ConvergenceReport {
    double r_tol = 0.0;
    double tau_tol = 0.0;
    double sigma_tol = 0.0;
    double j_tol = 0.0;
    double eq_tol = 0.0;
    double jc_tol = 0.0;
    int iterations = 0;
    int inner_iterations = 0;
    int fluid_evaluations = 0;
    bool converged = false;
};

class NonConvergence : public std::runtime_error {
public:
    NonConvergence(const std::string& what, ConvergenceReport r) : std::runtime_error(what), report(r) {}
    ConvergenceReport report;
};

/// Quantities compared between successive coupling iterates.
struct IterationSnapshot {
    std::vector<double> displacement;  ///< two entries per segment, normalized by a0
    std::vector<double> wss;
    std::vector<double> sigma;
    std::vector<double> j;
};

ConvergenceReport convergence_metrics(const IterationSnapshot& prev, const IterationSnapshot& next,
                                      const std::vector<double>& sigma_h, const std::vector<double>& tau_h);

/// Displacement vector [λ_θ - 1, (h0/a0)(λ_r - 1)] per segment.
std::vector<double> displacement_vector(const std::vector<VesselSegment>& segs);
std::vector<double> displacement_vector(const std::vector<VesselSegment>& segs, const std::vector<Tensor2>& f);

/// Evaluates the hemodynamics on the current geometry and counts the call.
HemodynamicField evaluate_fluid(Vessel& v, const LoadCase& load);

void homeostatic_initialize(Vessel& v, const CouplingConfig& cfg);

ConvergenceReport run_timestep_alg2(Vessel& v, const CouplingConfig& cfg);
ConvergenceReport run_timestep_alg3(Vessel& v, const CouplingConfig& cfg);
ConvergenceReport run_timestep(Vessel& v, const CouplingConfig& cfg);

struct StepInfo {
    int step = 0;
    double time = 0.0;
    ConvergenceReport report;
};

struct SimulationResult {
    std::vector<StepInfo> steps;
    bool completed = false;
    std::string failure;
    long fluid_evaluations = 0;
};

/// Advances from the current state to cfg.t_max. The observer is called
/// after initialization (step 0) and after every converged step.
SimulationResult run_simulation(Vessel& v, const CouplingConfig& cfg,
                                const std::function<void(const Vessel&, const StepInfo&)>& observer = {});

} // namespace cmv
