#include "cmv/membrane.hpp"

#include "cmv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cmv {

void VesselSegment::validate() const {
    if (!(a0 > 0.0 && h0 > 0.0 && length >= 0.0)) throw GeometryError("segment needs a0 > 0, h0 > 0, L >= 0");
    if (!(lambda_theta() > 0.0)) throw InvalidKinematics("segment needs lambda_theta > 0");
}

Tensor2 segment_deformation(double lambda_theta, double j) {
    if (!(lambda_theta > 0.0 && j > 0.0)) throw InvalidKinematics("segment kinematics need lambda_theta > 0 and J > 0");
    return Tensor2::diag(j / lambda_theta, lambda_theta, 1.0);
}

Tensor2 segment_deformation(const VesselSegment& seg, double j) { return segment_deformation(seg.lambda_theta(), j); }

Geometry current_geometry(const VesselSegment& seg, double j) {
    const double lt = seg.lambda_theta();
    return {lt * seg.a0, seg.h0 * j / lt};
}

Geometry current_geometry(const VesselSegment& seg) {
    return {seg.mixture.f(1, 1) * seg.a0, seg.mixture.f(0, 0) * seg.h0};
}

WallStress wall_stress(const VesselSegment& seg, const Tensor2& f, double p_lumen, double delta_tau, bool tangent) {
    WallStress w;
    EvalOptions opt;
    opt.tangent = tangent;
    opt.delta_tau = delta_tau;
    w.response = evaluate_mixture(seg.mixture, f, opt);
    const Tensor2 bar = w.response.sigma_bar + w.response.sigma_active;
    w.p = lagrange_pressure_membrane(bar, p_lumen);
    w.sigma = bar - Tensor2::identity() * w.p;
    const double a = f(1, 1) * seg.a0;
    const double h = f(0, 0) * seg.h0;
    w.laplace = p_lumen * a / h;
    w.residual = w.sigma(1, 1) - w.laplace;
    return w;
}

double equilibrium_residual(const VesselSegment& seg, double p_lumen, double delta_tau) {
    return wall_stress(seg, seg.mixture.f, p_lumen, delta_tau).residual;
}

namespace {

struct ScalarEval {
    double r = 0.0;
    double tol = 0.0;
};

} // namespace

double solve_equilibrium_newton(const VesselSegment& seg, double p_lumen, double j_target, double delta_tau,
                                const NewtonOptions& opt) {
    auto eval = [&](double lt) {
        const WallStress w = wall_stress(seg, segment_deformation(lt, j_target), p_lumen, delta_tau);
        return ScalarEval{w.residual, opt.rel_tol * std::max(opt.stress_scale, std::abs(w.laplace))};
    };

    double lt = std::clamp(seg.lambda_theta(), opt.lo, opt.hi);
    ScalarEval cur = eval(lt);
    for (int it = 0; it < opt.max_iter && std::isfinite(cur.r); ++it) {
        if (std::abs(cur.r) < cur.tol) return lt;
        const double dh = 1e-7 * lt;
        const double slope = (eval(lt + dh).r - eval(lt - dh).r) / (2.0 * dh);
        if (!std::isfinite(slope) || slope == 0.0) break;
        double step = -cur.r / slope;
        bool accepted = false;
        for (int halving = 0; halving <= 10; ++halving) {
            const double trial = lt + step;
            if (trial > 0.0) {
                const ScalarEval next = eval(trial);
                if (std::isfinite(next.r) && std::abs(next.r) < std::abs(cur.r)) {
                    lt = trial;
                    cur = next;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if (!accepted) break;
    }
    if (std::abs(cur.r) < cur.tol) return lt;

    // Bisection on the bracketing interval.
    double lo = opt.lo, hi = opt.hi;
    double r_lo = eval(lo).r, r_hi = eval(hi).r;
    if (!(std::isfinite(r_lo) && std::isfinite(r_hi)) || r_lo * r_hi > 0.0) {
        std::ostringstream msg;
        msg << "no equilibrium in lambda_theta in [" << lo << ", " << hi << "]: residual(" << lo << ") = " << r_lo
            << " kPa, residual(" << hi << ") = " << r_hi << " kPa, P = " << p_lumen << " kPa, J = " << j_target;
        throw EquilibriumNotFound(msg.str());
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const ScalarEval m = eval(mid);
        if (std::abs(m.r) < m.tol || hi - lo < 1e-15) return mid;
        if ((m.r < 0.0) == (r_lo < 0.0)) {
            lo = mid;
            r_lo = m.r;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

LinearizedMaterial linearize_wall(const VesselSegment& seg, double p_lumen, double j_target, double k_p,
                                  double delta_tau) {
    const WallStress w = wall_stress(seg, seg.mixture.f, p_lumen, delta_tau, true);
    LinearizedMaterial mat;
    mat.sigma_bar = w.response.sigma_bar + w.response.sigma_active;
    mat.c_bar = w.response.c_spatial;
    mat.p = w.p;
    mat.j_star = j_target / w.response.j;
    mat.k_p = k_p;
    return mat;
}

Tensor2 solve_equilibrium_linearized(const VesselSegment& seg, double p_lumen, const LinearizedMaterial& mat) {
    const Tensor2& fn = seg.mixture.f;
    const double lr_n = fn(0, 0), lt_n = fn(1, 1);

    auto residual = [&](double mr, double mt, double out[2]) {
        const Tensor2 sigma = linearized_cauchy(mat, Tensor2::diag(mr, mt, 1.0));
        const double a = mt * lt_n * seg.a0;
        const double h = mr * lr_n * seg.h0;
        out[0] = sigma(0, 0) + 0.5 * p_lumen;
        out[1] = sigma(1, 1) - p_lumen * a / h;
    };

    double mr = mat.j_star, mt = 1.0;
    double r[2];
    residual(mr, mt, r);
    for (int it = 0; it < 60; ++it) {
        const double dh = 1e-7;
        double rp[2], rm[2], jac[2][2];
        residual(mr + dh, mt, rp);
        residual(mr - dh, mt, rm);
        jac[0][0] = (rp[0] - rm[0]) / (2 * dh);
        jac[1][0] = (rp[1] - rm[1]) / (2 * dh);
        residual(mr, mt + dh, rp);
        residual(mr, mt - dh, rm);
        jac[0][1] = (rp[0] - rm[0]) / (2 * dh);
        jac[1][1] = (rp[1] - rm[1]) / (2 * dh);
        const double det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if (!std::isfinite(det) || det == 0.0) break;
        const double d_r = -(jac[1][1] * r[0] - jac[0][1] * r[1]) / det;
        const double d_t = -(-jac[1][0] * r[0] + jac[0][0] * r[1]) / det;
        mr += d_r;
        mt += d_t;
        if (!(mr > 0.0 && mt > 0.0)) break;
        residual(mr, mt, r);
        if (std::abs(d_r) < 1e-14 && std::abs(d_t) < 1e-14) {
            return Tensor2::diag(mr * lr_n, mt * lt_n, 1.0);
        }
    }
    if (mr > 0.0 && mt > 0.0 && std::isfinite(r[0]) && std::isfinite(r[1])) {
        const double scale = std::max({1.0, std::abs(p_lumen), max_abs(mat.sigma_bar)});
        if (std::abs(r[0]) < 1e-10 * scale && std::abs(r[1]) < 1e-10 * scale)
            return Tensor2::diag(mr * lr_n, mt * lt_n, 1.0);
    }
    std::ostringstream msg;
    msg << "linearized wall update did not converge: residuals " << r[0] << ", " << r[1] << " kPa";
    throw EquilibriumNotFound(msg.str());
}

} // namespace cmv
