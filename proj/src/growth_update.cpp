#include "cmv/growth_update.hpp"

#include "cmv/errors.hpp"

#include <algorithm>
#include <cmath>

namespace cmv {

void LinearizedMaterial::validate() const {
    if (!(j_star > 0.0)) throw InvalidArgument("J* must be > 0");
    if (!(k_p > 0.0)) throw InvalidArgument("penalty k_p must be > 0");
}

Tensor2 linearized_cauchy(const LinearizedMaterial& mat, const Tensor2& f_star) {
    mat.validate();
    const double det = f_star.det();
    if (!f_star.is_finite() || !(det > 0.0)) throw InvalidKinematics("linearized update requires det F* > 0");
    const Tensor2 eye = Tensor2::identity();
    const Tensor2 e_star = (f_star.transpose() * f_star * std::pow(det / mat.j_star, -2.0 / 3.0) - eye) * 0.5;
    const double p_star = -mat.k_p * (det - mat.j_star);
    const Tensor2 inner = mat.sigma_bar + ddot(mat.c_bar, e_star);
    return eye * (-(mat.p + p_star)) + (f_star * inner * f_star.transpose()) * (1.0 / mat.j_star);
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

AitkenResult aitken_step(AitkenState& state, const std::vector<double>& d_prev, const std::vector<double>& d_tilde,
                         double omega_initial, double omega_min, double omega_max) {
    if (d_prev.size() != d_tilde.size()) throw InvalidArgument("aitken_step: field sizes differ");
    AitkenResult out;
    out.residual.resize(d_prev.size());
    for (std::size_t i = 0; i < d_prev.size(); ++i) out.residual[i] = d_tilde[i] - d_prev[i];

    double omega = omega_initial;
    if (state.iteration >= 2 && state.r_prev.size() == out.residual.size()) {
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < out.residual.size(); ++i) {
            const double dr = out.residual[i] - state.r_prev[i];
            num += state.r_prev[i] * dr;
            den += dr * dr;
        }
        omega = den > 0.0 ? -state.omega * num / den : state.omega;
        if (!std::isfinite(omega) || omega == 0.0) omega = state.omega;
        omega = std::clamp(omega, omega_min, omega_max);
    }

    out.d_next.resize(d_prev.size());
    for (std::size_t i = 0; i < d_prev.size(); ++i) out.d_next[i] = omega * d_tilde[i] + (1.0 - omega) * d_prev[i];
    out.omega = omega;
    state.omega = omega;
    state.r_prev = out.residual;
    ++state.iteration;
    return out;
}

} // namespace cmv
