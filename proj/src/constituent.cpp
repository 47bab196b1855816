#include "cmv/constituent.hpp"

#include "cmv/errors.hpp"

#include <cmath>
#include <string>

namespace cmv {

namespace {

double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

// Sylvester's criterion on a symmetric tensor.
void require_spd(const Tensor2& c) {
    const double m1 = c(0, 0);
    const double m2 = c(0, 0) * c(1, 1) - c(0, 1) * c(1, 0);
    const double m3 = c.det();
    if (!c.is_finite() || !(m1 > 0.0 && m2 > 0.0 && m3 > 0.0)) {
        throw InvalidKinematics("constituent Cauchy-Green tensor is not positive definite");
    }
}

double fiber_invariant(const Tensor2& cn, const Tensor2& h) {
    const double i4 = ddot(cn, h);
    if (!(i4 > 0.0)) throw InvalidKinematics("fiber invariant Cn:H must be positive");
    return i4;
}

} // namespace

MaterialModel MaterialModel::neo_hookean(double c) {
    MaterialModel m;
    m.kind = MaterialKind::NeoHookean;
    m.c = c;
    m.validate();
    return m;
}

MaterialModel MaterialModel::fung(double c1, double c2, const Vec3& h0) {
    MaterialModel m;
    m.kind = MaterialKind::Fung;
    m.c1 = c1;
    m.c2 = c2;
    m.h0 = h0;
    m.validate();
    return m;
}

void MaterialModel::validate() const {
    if (kind == MaterialKind::NeoHookean) {
        if (!(c >= 0.0)) throw InvalidArgument("neoHookean modulus c must be >= 0");
        return;
    }
    if (!(c1 >= 0.0)) throw InvalidArgument("Fung c1 must be >= 0");
    if (!(c2 > 0.0)) throw InvalidArgument("Fung c2 must be > 0");
    if (std::abs(norm(h0) - 1.0) > 1e-12) throw InvalidArgument("fiber direction h0 must be a unit vector");
}

DepositionStretch DepositionStretch::diagonal(double g_r, double g_theta, double g_z) {
    DepositionStretch d;
    d.g = Tensor2::diag(g_r, g_theta, g_z);
    d.validate();
    return d;
}

DepositionStretch DepositionStretch::fiber(double g_f, const Vec3& h0) {
    if (!(g_f > 0.0)) throw InvalidArgument("fiber prestretch must be positive");
    const Tensor2 hh = Tensor2::outer(h0, h0);
    DepositionStretch d;
    d.g = hh * g_f + (Tensor2::identity() - hh) * (1.0 / std::sqrt(g_f));
    d.validate();
    return d;
}

void DepositionStretch::validate() const {
    if (max_abs_diff(g, g.transpose()) > 1e-12) throw InvalidArgument("deposition stretch must be symmetric");
    if (std::abs(g.det() - 1.0) > 1e-12) {
        throw InvalidArgument("deposition stretch must be volume preserving (det G = " +
                              std::to_string(g.det()) + ")");
    }
}

void ActiveStressParams::validate() const {
    if (!(t_max >= 0.0)) throw InvalidArgument("T_max must be >= 0");
    if (!(lambda_m > lambda_0 && lambda_0 > 0.0)) throw InvalidArgument("active stress requires lambda_M > lambda_0 > 0");
    if (!(k_act > 0.0)) throw InvalidArgument("k_act must be > 0");
}

Tensor2 structural_tensor(const Vec3& h0, const Tensor2& rotation) {
    const Vec3 h = rotation * h0;
    return Tensor2::outer(h, h);
}

double strain_energy(const MaterialModel& model, const Tensor2& cn, const Tensor2& h) {
    require_spd(cn);
    if (model.kind == MaterialKind::NeoHookean) return 0.5 * model.c * (cn.trace() - 3.0);
    const double e = fiber_invariant(cn, h) - 1.0;
    return model.c1 / (4.0 * model.c2) * (std::exp(model.c2 * e * e) - 1.0);
}

Tensor2 pk2_hat(const MaterialModel& model, const Tensor2& cn, const Tensor2& h) {
    require_spd(cn);
    if (model.kind == MaterialKind::NeoHookean) return Tensor2::identity() * model.c;
    const double e = fiber_invariant(cn, h) - 1.0;
    return h * (model.c1 * e * std::exp(model.c2 * e * e));
}

Tensor4 elasticity_hat(const MaterialModel& model, const Tensor2& cn, const Tensor2& h) {
    require_spd(cn);
    if (model.kind == MaterialKind::NeoHookean) return Tensor4{};
    const double e = fiber_invariant(cn, h) - 1.0;
    const double k = 2.0 * model.c1 * (1.0 + 2.0 * model.c2 * e * e) * std::exp(model.c2 * e * e);
    return dyad(h, h) * k;
}

double activation_factor(const ActiveStressParams& p, double delta_tau) {
    const double c = p.c_b - p.c_s * delta_tau;
    return 1.0 - std::exp(-c * c);
}

double active_length_tension(const ActiveStressParams& p, double lambda_act) {
    if (!(lambda_act > p.lambda_0 && lambda_act <= p.lambda_m)) return 0.0;
    const double x = (p.lambda_m - lambda_act) / (p.lambda_m - p.lambda_0);
    return lambda_act * (1.0 - x * x);
}

Tensor2 active_pk2(const ActiveStressParams& p, double lambda_act, double delta_tau, const Tensor2& h0) {
    return h0 * (p.t_max * activation_factor(p, delta_tau) * active_length_tension(p, lambda_act));
}

Tensor2 active_cauchy(const ActiveStressParams& p, double phi_m, double lambda_act, double delta_tau,
                      const Tensor2& f, const Tensor2& h0) {
    const double j = f.det();
    if (!(j > 0.0)) throw InvalidKinematics("active stress requires det F > 0");
    if (phi_m == 0.0 || p.t_max == 0.0) return Tensor2::zero();
    return (f * active_pk2(p, lambda_act, delta_tau, h0) * f.transpose()) * (phi_m / j);
}

} // namespace cmv
