#include "cmv/coupling.hpp"

#include "cmv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

namespace cmv {

void CouplingConfig::validate() const {
    if (!(ds > 0.0)) throw ConfigError("coupling.ds_day must be > 0");
    if (!(t_max >= 0.0)) throw ConfigError("coupling.t_max_day must be >= 0");
    const double ratio = t_max / ds;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio))
        throw ConfigError("coupling.t_max_day must be a multiple of ds_day");
    if (n_max < 1 || k_max < 1 || j_max < 1) throw ConfigError("iteration caps must be >= 1");
    if (!(eps_r > 0 && eps_tau > 0 && eps_sigma > 0 && eps_j > 0 && eps_eq > 0))
        throw ConfigError("all tolerances must be > 0");
    if (!(omega0 > 0.0)) throw ConfigError("initial relaxation factor must be > 0");
    if (!(omega_min > 0.0 && omega_min <= omega_max)) throw ConfigError("relaxation bounds need 0 < omega_min <= omega_max");
    if (!(k_p > 0.0)) throw ConfigError("penalty k_p must be > 0");
    if (!(ramp > 0.0 && ramp <= 1.0)) throw ConfigError("ramp factor must lie in (0, 1]");
}

int CouplingConfig::steps() const { return static_cast<int>(std::lround(t_max / ds)); }

ConvergenceReport convergence_metrics(const IterationSnapshot& prev, const IterationSnapshot& next,
                                      const std::vector<double>& sigma_h, const std::vector<double>& tau_h) {
    if (prev.displacement.size() != next.displacement.size() || prev.wss.size() != next.wss.size() ||
        prev.sigma.size() != next.sigma.size() || prev.j.size() != next.j.size())
        throw InvalidArgument("convergence_metrics: snapshots are not aligned");
    ConvergenceReport r;
    for (std::size_t i = 0; i < next.displacement.size(); ++i)
        r.r_tol = std::max(r.r_tol, std::abs(next.displacement[i] - prev.displacement[i]));
    for (std::size_t i = 0; i < next.wss.size(); ++i)
        r.tau_tol = std::max(r.tau_tol, std::abs((next.wss[i] - prev.wss[i]) / tau_h.at(i)));
    for (std::size_t i = 0; i < next.sigma.size(); ++i)
        r.sigma_tol = std::max(r.sigma_tol, std::abs((next.sigma[i] - prev.sigma[i]) / sigma_h.at(i)));
    for (std::size_t i = 0; i < next.j.size(); ++i) r.j_tol = std::max(r.j_tol, std::abs(next.j[i] / prev.j[i] - 1.0));
    return r;
}

std::vector<double> displacement_vector(const std::vector<VesselSegment>& segs, const std::vector<Tensor2>& f) {
    std::vector<double> d;
    d.reserve(2 * segs.size());
    for (std::size_t i = 0; i < segs.size(); ++i) {
        d.push_back(f[i](1, 1) - 1.0);
        d.push_back(segs[i].h0 / segs[i].a0 * (f[i](0, 0) - 1.0));
    }
    return d;
}

std::vector<double> displacement_vector(const std::vector<VesselSegment>& segs) {
    std::vector<Tensor2> f;
    f.reserve(segs.size());
    for (const auto& s : segs) f.push_back(s.mixture.f);
    return displacement_vector(segs, f);
}

namespace {

void apply_displacement(std::vector<VesselSegment>& segs, const std::vector<double>& d) {
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const double lt = 1.0 + d[2 * i];
        const double lr = 1.0 + d[2 * i + 1] * segs[i].a0 / segs[i].h0;
        if (!(lt > 0.0 && lr > 0.0)) throw InvalidKinematics("relaxed displacement gives a non-positive stretch");
        segs[i].mixture.f = Tensor2::diag(lr, lt, 1.0);
    }
}

std::vector<GrowthOutput> growth_pass(Vessel& v, const HemodynamicField& fluid, double s, const CouplingConfig& cfg) {
    std::vector<GrowthInput> in(v.segments.size());
    for (std::size_t i = 0; i < in.size(); ++i) {
        in[i].p_kpa = fluid.pressure[i] / kPaToDynCm2;
        in[i].wss = fluid.wss[i];
        in[i].sigma_h = v.sigma_h[i];
        in[i].tau_h = v.tau_h[i];
        in[i].s = s;
        in[i].invariant = v.homeostasis.invariant;
        in[i].balance_ds = cfg.balanced_production ? cfg.ds : 0.0;
    }
    std::vector<GrowthOutput> out;
    growth_all(v.segments, in, out, cfg.execution);
    return out;
}

IterationSnapshot snapshot(const Vessel& v, const HemodynamicField& fluid, const std::vector<GrowthOutput>& g) {
    IterationSnapshot s;
    s.displacement = displacement_vector(v.segments);
    s.wss = fluid.wss;
    for (const auto& o : g) {
        s.sigma.push_back(o.sigma_inv);
        s.j.push_back(o.j_target);
    }
    return s;
}

double relative_residual(const GrowthOutput& g, double sigma_h) {
    const double scale = std::abs(g.laplace) > 0.0 ? std::abs(g.laplace) : std::abs(sigma_h);
    return std::abs(g.residual) / scale;
}

// Equilibrium and volume-consistency checks at the current iterate.
void wall_checks(const Vessel& v, const std::vector<GrowthOutput>& g, ConvergenceReport& r) {
    r.eq_tol = 0.0;
    r.jc_tol = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        r.eq_tol = std::max(r.eq_tol, relative_residual(g[i], v.sigma_h[i]));
        r.jc_tol = std::max(r.jc_tol, std::abs(v.segments[i].j() / g[i].j_target - 1.0));
    }
}

bool solid_growth_passed(const ConvergenceReport& r, const CouplingConfig& cfg) {
    return r.r_tol <= cfg.eps_r && r.sigma_tol <= cfg.eps_sigma && r.j_tol <= cfg.eps_j && r.eq_tol <= cfg.eps_eq &&
           r.jc_tol <= cfg.eps_j;
}

void open_step(Vessel& v, double s) {
    for (std::size_t i = 0; i < v.segments.size(); ++i) {
        MixtureState& ms = v.segments[i].mixture;
        std::vector<double> m(ms.size());
        for (std::size_t a = 0; a < ms.size(); ++a) m[a] = ms.constituents[a].cohorts.back().m_r;
        ms.open_step(s, v.status[i].dsigma, v.status[i].dtau, m);
    }
}

void store_status(Vessel& v, const HemodynamicField& fluid, const std::vector<GrowthOutput>& g) {
    v.status.resize(v.segments.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        SegmentStatus& st = v.status[i];
        st.p = fluid.pressure[i];
        st.wss = fluid.wss[i];
        st.sigma_inv = g[i].sigma_inv;
        st.dsigma = g[i].dsigma;
        st.dtau = g[i].dtau;
        st.j_target = g[i].j_target;
        st.residual_rel = relative_residual(g[i], v.sigma_h[i]);
        st.j_consistency = std::abs(v.segments[i].j() / g[i].j_target - 1.0);
        st.rho = g[i].rho;
        st.upsilon = g[i].upsilon;
    }
}

void close_step(Vessel& v, double s, const HemodynamicField& fluid, const std::vector<GrowthOutput>& g) {
    for (auto& seg : v.segments) seg.mixture.commit_step();
    store_status(v, fluid, g);
    v.time = s;
    ++v.step;
}

// Solid solve, relaxation and growth update at fixed hemodynamic inputs.
struct SolidGrowthIterate {
    std::vector<double> d_prev;
    std::vector<double> d_tilde;
    std::vector<GrowthOutput> growth;
};

SolidGrowthIterate solid_and_relax(Vessel& v, const HemodynamicField& fluid, const std::vector<GrowthOutput>& g,
                                   AitkenState& aitken, const CouplingConfig& cfg) {
    const std::size_t n = v.segments.size();
    std::vector<SolidInput> in(n);
    for (std::size_t i = 0; i < n; ++i) {
        in[i].p_kpa = fluid.pressure[i] / kPaToDynCm2;
        in[i].j_target = g[i].j_target;
        in[i].dtau = g[i].dtau;
        in[i].k_p = cfg.k_p;
        in[i].stress_scale = std::abs(v.sigma_h[i]);
        in[i].solver = cfg.solid;
    }
    std::vector<Tensor2> f_tilde;
    solid_all(v.segments, in, f_tilde, cfg.execution);

    SolidGrowthIterate it;
    it.d_prev = displacement_vector(v.segments);
    it.d_tilde = displacement_vector(v.segments, f_tilde);
    if (cfg.ramp != 1.0)
        for (std::size_t k = 0; k < it.d_tilde.size(); ++k)
            it.d_tilde[k] = it.d_prev[k] + cfg.ramp * (it.d_tilde[k] - it.d_prev[k]);
    const AitkenResult relaxed = aitken_step(aitken, it.d_prev, it.d_tilde, cfg.omega0, cfg.omega_min, cfg.omega_max);
    apply_displacement(v.segments, relaxed.d_next);
    if (cfg.project_relaxed) {
        // Back onto the equilibrium curve at the relaxed volume.
        for (std::size_t i = 0; i < n; ++i) in[i].j_target = v.segments[i].j();
        solid_all(v.segments, in, f_tilde, cfg.execution);
        for (std::size_t i = 0; i < n; ++i) v.segments[i].mixture.f = f_tilde[i];
    }
    return it;
}

std::string describe(const ConvergenceReport& r, double s) {
    std::ostringstream os;
    os << "G&R step at s = " << s << " d did not converge after " << r.iterations << " iterations (r " << r.r_tol
       << ", tau " << r.tau_tol << ", sigma " << r.sigma_tol << ", J " << r.j_tol << ", eq " << r.eq_tol << ", Jc "
       << r.jc_tol << ")";
    return os.str();
}

} // namespace

HemodynamicField evaluate_fluid(Vessel& v, const LoadCase& load) {
    const std::size_t n = v.segments.size();
    std::vector<double> radii(n), lengths(n), z(n);
    for (std::size_t i = 0; i < n; ++i) {
        radii[i] = current_geometry(v.segments[i]).a;
        lengths[i] = v.segments[i].length;
        z[i] = v.segments[i].z;
    }
    ++v.fluid_evaluations;
    return evaluate_hemodynamics(radii, lengths, z, load.q, load.mu, load.r_outlet, load.window);
}

void homeostatic_initialize(Vessel& v, const CouplingConfig& cfg) {
    cfg.validate();
    const std::size_t n = v.segments.size();
    if (n == 0) throw ConfigError("vessel has no segments");
    for (auto& seg : v.segments) {
        seg.validate();
        if (!seg.mixture.deviations.t.empty()) throw InvalidArgument("homeostatic_initialize needs a fresh vessel");
        seg.mixture.f = Tensor2::identity();
    }
    v.time = 0.0;
    v.step = 0;
    const HemodynamicField fluid = evaluate_fluid(v, v.reference);
    v.sigma_h.assign(n, v.homeostasis.sigma_h);
    v.tau_h.assign(n, v.homeostasis.tau_h);
    v.status.assign(n, SegmentStatus{});

    for (std::size_t i = 0; i < n; ++i) {
        MixtureState& ms = v.segments[i].mixture;
        ms.open_step(0.0, 0.0, 0.0, std::vector<double>(ms.size(), 0.0));
        if (v.homeostasis.mode == HomeostasisMode::Measured) {
            const WallStress w = wall_stress(v.segments[i], ms.f, fluid.pressure[i] / kPaToDynCm2, 0.0);
            v.sigma_h[i] = stress_invariant(w.sigma, v.homeostasis.invariant);
            v.tau_h[i] = fluid.wss[i];
            if (!(std::abs(v.sigma_h[i]) > 0.0))
                throw ConfigError("measured homeostatic stress invariant is zero; choose another invariant");
        } else if (!(v.sigma_h[i] != 0.0 && v.tau_h[i] > 0.0)) {
            throw ConfigError("table homeostasis needs sigma_h and tau_h");
        }
    }
    const std::vector<GrowthOutput> g = growth_pass(v, fluid, 0.0, cfg);
    for (auto& seg : v.segments) seg.mixture.commit_step();
    store_status(v, fluid, g);
    v.initial_residual = 0.0;
    for (const auto& st : v.status) v.initial_residual = std::max(v.initial_residual, st.residual_rel);
    if (v.homeostasis.mode == HomeostasisMode::Table && v.initial_residual > 1e-6) {
        std::cerr << "warning: initial state is not in equilibrium (relative Laplace residual "
                  << v.initial_residual << ")\n";
    }
}

ConvergenceReport run_timestep_alg2(Vessel& v, const CouplingConfig& cfg) {
    const double s = v.time + cfg.ds;
    open_step(v, s);
    ConvergenceReport report;
    HemodynamicField fluid = evaluate_fluid(v, v.applied);
    ++report.fluid_evaluations;
    std::vector<GrowthOutput> g = growth_pass(v, fluid, s, cfg);
    IterationSnapshot prev = snapshot(v, fluid, g);
    AitkenState aitken;

    for (int n = 0; n < cfg.n_max; ++n) {
        const SolidGrowthIterate it = solid_and_relax(v, fluid, g, aitken, cfg);
        fluid = evaluate_fluid(v, v.applied);
        ++report.fluid_evaluations;
        g = growth_pass(v, fluid, s, cfg);
        IterationSnapshot next = snapshot(v, fluid, g);
        prev.displacement = it.d_prev;
        next.displacement = it.d_tilde;
        const ConvergenceReport m = convergence_metrics(prev, next, v.sigma_h, v.tau_h);
        report.r_tol = m.r_tol;
        report.tau_tol = m.tau_tol;
        report.sigma_tol = m.sigma_tol;
        report.j_tol = m.j_tol;
        wall_checks(v, g, report);
        report.iterations = n + 1;
        report.inner_iterations = n + 1;
        if (cfg.on_iteration) cfg.on_iteration(v, s, report);
        if (solid_growth_passed(report, cfg) && report.tau_tol <= cfg.eps_tau) {
            report.converged = true;
            break;
        }
        prev = next;
    }
    if (!report.converged) throw NonConvergence(describe(report, s), report);
    close_step(v, s, fluid, g);
    return report;
}

ConvergenceReport run_timestep_alg3(Vessel& v, const CouplingConfig& cfg) {
    const double s = v.time + cfg.ds;
    open_step(v, s);
    ConvergenceReport report;
    HemodynamicField fluid = evaluate_fluid(v, v.applied);
    ++report.fluid_evaluations;
    std::vector<GrowthOutput> g = growth_pass(v, fluid, s, cfg);
    IterationSnapshot prev = snapshot(v, fluid, g);

    for (int j = 0; j < cfg.j_max; ++j) {
        AitkenState aitken;
        bool inner = false;
        for (int k = 0; k < cfg.k_max; ++k) {
            const SolidGrowthIterate it = solid_and_relax(v, fluid, g, aitken, cfg);
            g = growth_pass(v, fluid, s, cfg);
            IterationSnapshot next = snapshot(v, fluid, g);
            prev.displacement = it.d_prev;
            next.displacement = it.d_tilde;
            const ConvergenceReport m = convergence_metrics(prev, next, v.sigma_h, v.tau_h);
            report.r_tol = m.r_tol;
            report.sigma_tol = m.sigma_tol;
            report.j_tol = m.j_tol;
            wall_checks(v, g, report);
            ++report.inner_iterations;
            if (cfg.on_iteration) cfg.on_iteration(v, s, report);
            prev = next;
            if (solid_growth_passed(report, cfg)) {
                inner = true;
                break;
            }
        }
        report.iterations = j + 1;

        const std::vector<double> wss_before = fluid.wss;
        fluid = evaluate_fluid(v, v.applied);
        ++report.fluid_evaluations;
        report.tau_tol = 0.0;
        for (std::size_t i = 0; i < wss_before.size(); ++i)
            report.tau_tol = std::max(report.tau_tol, std::abs((fluid.wss[i] - wss_before[i]) / v.tau_h[i]));

        // Growth response to the refreshed hemodynamics.
        g = growth_pass(v, fluid, s, cfg);
        IterationSnapshot next = snapshot(v, fluid, g);
        next.displacement = prev.displacement;
        const ConvergenceReport m = convergence_metrics(prev, next, v.sigma_h, v.tau_h);
        wall_checks(v, g, report);
        prev = next;
        if (inner && report.tau_tol <= cfg.eps_tau && m.sigma_tol <= cfg.eps_sigma && m.j_tol <= cfg.eps_j &&
            report.eq_tol <= cfg.eps_eq && report.jc_tol <= cfg.eps_j) {
            report.converged = true;
            break;
        }
    }
    if (!report.converged) throw NonConvergence(describe(report, s), report);
    close_step(v, s, fluid, g);
    return report;
}

ConvergenceReport run_timestep(Vessel& v, const CouplingConfig& cfg) {
    return cfg.algorithm == Algorithm::Alg2 ? run_timestep_alg2(v, cfg) : run_timestep_alg3(v, cfg);
}

SimulationResult run_simulation(Vessel& v, const CouplingConfig& cfg,
                                const std::function<void(const Vessel&, const StepInfo&)>& observer) {
    cfg.validate();
    SimulationResult result;
    const bool fresh = v.segments.empty() || v.segments.front().mixture.deviations.t.empty();
    if (fresh) {
        homeostatic_initialize(v, cfg);
        StepInfo info;
        info.report.converged = true;
        result.steps.push_back(info);
        if (observer) observer(v, info);
    }
    const int total = cfg.steps();
    while (v.step < total) {
        StepInfo info;
        try {
            info.report = run_timestep(v, cfg);
        } catch (const NonConvergence& e) {
            result.failure = e.what();
            result.fluid_evaluations = v.fluid_evaluations;
            return result;
        } catch (const EquilibriumNotFound& e) {
            result.failure = std::string("at s = ") + std::to_string(v.time + cfg.ds) + " d: " + e.what();
            result.fluid_evaluations = v.fluid_evaluations;
            return result;
        } catch (const InvalidKinematics& e) {
            result.failure = std::string("at s = ") + std::to_string(v.time + cfg.ds) + " d: " + e.what();
            result.fluid_evaluations = v.fluid_evaluations;
            return result;
        }
        info.step = v.step;
        info.time = v.time;
        result.steps.push_back(info);
        if (observer) observer(v, info);
    }
    result.completed = true;
    result.fluid_evaluations = v.fluid_evaluations;
    return result;
}

} // namespace cmv
