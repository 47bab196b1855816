#include "cmv/kernels.hpp"

#include "cmv/errors.hpp"

#include <cmath>
#include <sstream>

namespace cmv {

double stress_invariant(const Tensor2& sigma, StressInvariant kind) {
    switch (kind) {
    case StressInvariant::Trace:
        return sigma.trace();
    case StressInvariant::InPlane:
        return sigma(1, 1) + sigma(2, 2);
    case StressInvariant::Hoop:
        return sigma(1, 1);
    }
    return sigma.trace();
}

double balanced_production_factor(double k, double ds) {
    const double x = 0.5 * k * ds;
    return x > 0.0 ? std::tanh(x) / x : 1.0;
}

double endpoint_production(const TurnoverParams& p, double base, double weight, double rho_0, double upsilon,
                           double balance) {
    if (p.kind != TurnoverKind::Mechano) return production_rate(p, base, rho_0, upsilon);
    const double floor = p.reference_production > 0.0 ? p.reference_production : rho_0 * p.k_h;
    const double c = weight * p.k_h * upsilon * balance;
    if (c < 1.0) {
        const double rho = base / (1.0 - c);
        if (rho * p.k_h >= floor) return balance * rho * p.k_h * upsilon;
    }
    return balance * floor * upsilon;
}

namespace {

// Production update at a trial stress deviation x, with the wall re-evaluated
// at the resulting densities.
struct EndpointTrial {
    GrowthOutput out;
    double gap = 0.0;  ///< Δσ(x) - x
};

EndpointTrial endpoint_trial(VesselSegment& seg, const GrowthInput& in, double dtau, double x) {
    MixtureState& ms = seg.mixture;
    ms.set_current_deviation(x, dtau);
    const std::vector<double> w = trapezoid_weights(ms.deviations.t);
    const double w_end = w.empty() ? 0.0 : w.back();
    EndpointTrial tr;
    GrowthOutput& out = tr.out;
    out.dtau = dtau;
    out.dsigma = x;
    out.rho = referential_densities(ms);
    out.upsilon.resize(ms.size());
    out.j_target = 0.0;
    for (std::size_t a = 0; a < ms.size(); ++a) {
        ConstituentHistory& ch = ms.constituents[a];
        const TurnoverParams& tp = ch.spec.turnover;
        out.upsilon[a] = stimulus(tp, {x, dtau, in.s});
        Cohort& open = ch.cohorts.back();
        const double base = out.rho[a] - w_end * open.m_r;
        const double b = in.balance_ds > 0.0 ? balanced_production_factor(tp.k_h, in.balance_ds) : 1.0;
        open.m_r = endpoint_production(tp, base, w_end, ch.spec.rho_r0, out.upsilon[a], b);
        out.rho[a] = base + w_end * open.m_r;
        out.j_target += out.rho[a] / ch.spec.rho_hat;
    }
    const WallStress ws = wall_stress(seg, ms.f, in.p_kpa, dtau);
    out.sigma_inv = stress_invariant(ws.sigma, in.invariant);
    out.residual = ws.residual;
    out.laplace = ws.laplace;
    tr.gap = out.sigma_inv / in.sigma_h - 1.0 - x;
    return tr;
}

} // namespace

GrowthOutput growth_kernel(VesselSegment& seg, const GrowthInput& in) {
    MixtureState& ms = seg.mixture;
    if (!(in.sigma_h != 0.0 && in.tau_h > 0.0)) throw InvalidArgument("homeostatic targets must be nonzero");
    const double dtau = in.wss / in.tau_h - 1.0;
    const WallStress start = wall_stress(seg, ms.f, in.p_kpa, dtau);
    double xa = stress_invariant(start.sigma, in.invariant) / in.sigma_h - 1.0;
    EndpointTrial a = endpoint_trial(seg, in, dtau, xa);
    constexpr double tol = 1e-13;
    if (std::abs(a.gap) <= tol) return a.out;

    // The stress deviation must be consistent with the production it drives:
    // secant steps until the root is bracketed, then Illinois false position.
    double xb = xa + a.gap;
    EndpointTrial b = endpoint_trial(seg, in, dtau, xb);
    for (int it = 0; it < 60 && a.gap * b.gap > 0.0; ++it) {
        if (std::abs(b.gap) <= tol) return b.out;
        const double slope = (b.gap - a.gap) / (xb - xa);
        double step = slope != 0.0 && std::isfinite(slope) ? -b.gap / slope : b.gap;
        const double cap = 2.0 * std::max(std::abs(xb - xa), 1e-3);
        if (!(std::abs(step) <= cap) || step * b.gap < 0.0) step = std::copysign(cap, b.gap);
        xa = xb;
        a = b;
        xb = xb + step;
        b = endpoint_trial(seg, in, dtau, xb);
    }
    if (a.gap * b.gap > 0.0) {
        std::ostringstream msg;
        msg << "production update found no consistent stress deviation near " << xb << " (gap " << b.gap << ")";
        throw EquilibriumNotFound(msg.str());
    }
    int side = 0;
    for (int it = 0; it < 200; ++it) {
        const double xc = (xa * b.gap - xb * a.gap) / (b.gap - a.gap);
        EndpointTrial c = endpoint_trial(seg, in, dtau, xc);
        if (std::abs(c.gap) <= tol || std::abs(xb - xa) <= tol * std::max(1.0, std::abs(xc))) return c.out;
        if (c.gap * b.gap > 0.0) {
            xb = xc;
            b = std::move(c);
            if (side == -1) a.gap *= 0.5;
            side = -1;
        } else {
            xa = xc;
            a = std::move(c);
            if (side == 1) b.gap *= 0.5;
            side = 1;
        }
    }
    return endpoint_trial(seg, in, dtau, 0.5 * (xa + xb)).out;
}

void growth_all(std::vector<VesselSegment>& segs, const std::vector<GrowthInput>& in, std::vector<GrowthOutput>& out,
                Execution ex) {
    out.resize(segs.size());
    for_each_index(segs.size(), ex, [&](std::size_t i) { out[i] = growth_kernel(segs[i], in[i]); });
}

Tensor2 solid_kernel(const VesselSegment& seg, const SolidInput& in) {
    if (in.solver == SolidSolver::Newton) {
        NewtonOptions opt;
        opt.stress_scale = in.stress_scale;
        const double lt = solve_equilibrium_newton(seg, in.p_kpa, in.j_target, in.dtau, opt);
        return segment_deformation(lt, in.j_target);
    }
    const LinearizedMaterial mat = linearize_wall(seg, in.p_kpa, in.j_target, in.k_p, in.dtau);
    return solve_equilibrium_linearized(seg, in.p_kpa, mat);
}

void solid_all(const std::vector<VesselSegment>& segs, const std::vector<SolidInput>& in, std::vector<Tensor2>& out,
               Execution ex) {
    out.resize(segs.size());
    for_each_index(segs.size(), ex, [&](std::size_t i) { out[i] = solid_kernel(segs[i], in[i]); });
}

} // namespace cmv
