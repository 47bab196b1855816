#include "cmv/mixture.hpp"

#include "cmv/errors.hpp"

#include <cmath>

namespace cmv {

void ConstituentSpec::validate() const {
    if (!(rho_hat > 0.0)) throw InvalidArgument("constituent '" + name + "': rho_hat must be > 0");
    if (!(rho_r0 >= 0.0)) throw InvalidArgument("constituent '" + name + "': rho_R(0) must be >= 0");
    material.validate();
    deposition.validate();
    turnover.validate();
    if (active) active->validate();
}

ConstituentHistory::ConstituentHistory(ConstituentSpec s) : spec(std::move(s)) {
    const Cohort c = make_cohort(spec, 0.0, 0.0, Tensor2::identity());
    a_initial = c.a;
    h_initial = c.h;
}

MixtureState::MixtureState(std::vector<ConstituentSpec> specs) {
    int n_active = 0;
    for (auto& s : specs) {
        s.validate();
        if (s.active) ++n_active;
        constituents.emplace_back(std::move(s));
    }
    if (n_active > 1) throw InvalidArgument("at most one constituent may carry active stress");
}

int MixtureState::active_index() const {
    for (std::size_t i = 0; i < constituents.size(); ++i)
        if (constituents[i].spec.active) return static_cast<int>(i);
    return -1;
}

namespace {

double fiber_stretch_at(const MixtureState& ms, const Tensor2& f) {
    const int ia = ms.active_index();
    if (ia < 0) return 1.0;
    const Vec3& h0 = ms.constituents[static_cast<std::size_t>(ia)].spec.material.h0;
    return ddot(f.transpose() * f, Tensor2::outer(h0, h0));
}

} // namespace

void MixtureState::open_step(double s, double dsigma, double dtau, const std::vector<double>& m_r) {
    if (provisional_endpoint) throw InvalidArgument("open_step called while a step is already open");
    if (m_r.size() != constituents.size()) throw InvalidArgument("open_step: one production rate per constituent");
    deviations.push_back(s, dsigma, dtau);
    for (std::size_t i = 0; i < constituents.size(); ++i)
        constituents[i].cohorts.push_back(make_cohort(constituents[i].spec, s, m_r[i], f));
    fiber_stretch.push_back(fiber_stretch_at(*this, f));
    provisional_endpoint = true;
}

void MixtureState::commit_step() {
    if (!provisional_endpoint) throw InvalidArgument("commit_step called with no open step");
    for (auto& c : constituents) {
        Cohort& last = c.cohorts.back();
        last = make_cohort(c.spec, last.tau, last.m_r, f);
    }
    fiber_stretch.back() = fiber_stretch_at(*this, f);
    provisional_endpoint = false;
}

void MixtureState::set_current_deviation(double dsigma, double dtau) {
    if (deviations.t.empty()) throw InvalidArgument("no deviation sample to overwrite");
    deviations.dsigma.back() = dsigma;
    deviations.dtau.back() = dtau;
}

std::vector<double> trapezoid_weights(const std::vector<double>& t) {
    std::vector<double> w(t.size(), 0.0);
    for (std::size_t k = 1; k < t.size(); ++k) {
        const double h = t[k] - t[k - 1];
        w[k - 1] += 0.5 * h;
        w[k] += 0.5 * h;
    }
    return w;
}

std::vector<double> cohort_survival(const TurnoverParams& p, const DeviationHistory& history) {
    const std::vector<double> k = cumulative_removal(p, history);
    std::vector<double> q(k.size(), 1.0);
    if (k.empty()) return q;
    for (std::size_t i = 0; i < k.size(); ++i) q[i] = std::exp(-(k.back() - k[i]));
    return q;
}

namespace {

double initial_survival(const TurnoverParams& p, const DeviationHistory& history, const std::vector<double>& q) {
    switch (p.kind) {
    case TurnoverKind::Mechano:
    case TurnoverKind::Inflammatory:
        return q.empty() ? 1.0 : q.front();
    default:
        return initial_cohort_survival(p, history.t.empty() ? 0.0 : history.t.back(), history);
    }
}

void check_history(const ConstituentHistory& h, const DeviationHistory& history) {
    if (h.cohorts.size() != history.size()) {
        throw InvalidArgument("constituent '" + h.spec.name + "': cohort count does not match the history grid");
    }
}

} // namespace

double referential_density(const ConstituentHistory& h, const DeviationHistory& history) {
    check_history(h, history);
    const std::vector<double> q = cohort_survival(h.spec.turnover, history);
    const std::vector<double> w = trapezoid_weights(history.t);
    double rho = h.spec.rho_r0 * initial_survival(h.spec.turnover, history, q);
    for (std::size_t k = 0; k < h.cohorts.size(); ++k) rho += w[k] * h.cohorts[k].m_r * q[k];
    return rho;
}

std::vector<double> referential_densities(const MixtureState& ms) {
    std::vector<double> rho;
    rho.reserve(ms.size());
    for (const auto& c : ms.constituents) rho.push_back(referential_density(c, ms.deviations));
    return rho;
}

double mixture_volume_ratio(const MixtureState& ms) {
    double j = 0.0;
    for (const auto& c : ms.constituents) j += referential_density(c, ms.deviations) / c.spec.rho_hat;
    return j;
}

Tensor2 deposition_tensor(const DepositionStretch& g, const Tensor2& f_tau) { return g.g * polar_rotation(f_tau); }

Tensor2 cohort_cauchy_green(const Tensor2& a_tau, const Tensor2& c_s) { return a_tau.transpose() * c_s * a_tau; }

Cohort make_cohort(const ConstituentSpec& spec, double tau, double m_r, const Tensor2& f) {
    Cohort c;
    c.tau = tau;
    c.m_r = m_r;
    c.f = f;
    const Tensor2 r = polar_rotation(f);
    c.a = f.inverse() * (spec.deposition.g * r);
    c.h = structural_tensor(spec.material.h0, r.transpose());
    return c;
}

MixtureResponse evaluate_mixture(const MixtureState& ms, const Tensor2& f, const EvalOptions& opt) {
    MixtureResponse out;
    out.j = f.det();
    if (!f.is_finite() || !(out.j > 0.0)) throw InvalidKinematics("mixture evaluation requires det F > 0");
    const Tensor2 c = f.transpose() * f;
    const DeviationHistory& hist = ms.deviations;
    const std::vector<double> w = trapezoid_weights(hist.t);
    const std::size_t n = hist.size();

    out.rho.resize(ms.size(), 0.0);
    for (std::size_t ia = 0; ia < ms.size(); ++ia) {
        const ConstituentHistory& ch = ms.constituents[ia];
        check_history(ch, hist);
        const ConstituentSpec& spec = ch.spec;
        const bool fung = spec.material.kind == MaterialKind::Fung;
        const std::vector<double> q = cohort_survival(spec.turnover, hist);
        const double rho_initial = spec.rho_r0 * initial_survival(spec.turnover, hist, q);
        double rho = rho_initial;

        auto add_cohort = [&](double coeff, const Tensor2& a, const Tensor2& h) {
            const Tensor2 cn = cohort_cauchy_green(a, c);
            const double scale = coeff / spec.rho_hat;
            out.s_bar += (a * pk2_hat(spec.material, cn, h) * a.transpose()) * scale;
            if (opt.tangent && fung) out.c_material += transform(a, elasticity_hat(spec.material, cn, h)) * scale;
        };

        if (rho_initial > 0.0) add_cohort(rho_initial, ch.a_initial, ch.h_initial);
        Cohort open;
        if (ms.provisional_endpoint && n > 0) open = make_cohort(spec, ch.cohorts.back().tau, ch.cohorts.back().m_r, f);
        for (std::size_t k = 0; k < n; ++k) {
            const bool is_open = ms.provisional_endpoint && k + 1 == n;
            const Cohort& co = is_open ? open : ch.cohorts[k];
            const double coeff = w[k] * co.m_r * q[k];
            rho += coeff;
            if (coeff != 0.0) add_cohort(coeff, co.a, co.h);
        }
        out.rho[ia] = rho;
        out.j_target += rho / spec.rho_hat;
    }

    out.sigma_bar = pushforward_stress(f, out.s_bar, out.j);
    if (opt.tangent) out.c_spatial = pushforward_elasticity(f, out.c_material, out.j);

    const int ia = ms.active_index();
    if (ia >= 0) {
        const ConstituentSpec& spec = ms.constituents[static_cast<std::size_t>(ia)].spec;
        std::vector<double> values = ms.fiber_stretch;
        if (values.empty()) values.push_back(fiber_stretch_at(ms, f));
        else if (ms.provisional_endpoint) values.back() = fiber_stretch_at(ms, f);
        std::vector<double> times = hist.t;
        if (times.empty()) times.push_back(0.0);
        out.lambda_act = active_stretch(times, values, spec.active->k_act);
        const Tensor2 h0 = Tensor2::outer(spec.material.h0, spec.material.h0);
        out.sigma_active = active_cauchy(*spec.active, out.rho[static_cast<std::size_t>(ia)] / spec.rho_hat,
                                         out.lambda_act, opt.delta_tau, f, h0);
    }
    return out;
}

Tensor2 mixture_pk2(const MixtureState& ms) { return evaluate_mixture(ms, ms.f).s_bar; }

Tensor2 mixture_cauchy_bar(const MixtureState& ms) { return evaluate_mixture(ms, ms.f).sigma_bar; }

Tensor2 mixture_cauchy_bar_direct(const MixtureState& ms) {
    const Tensor2& f = ms.f;
    const double j = f.det();
    if (!(j > 0.0)) throw InvalidKinematics("mixture evaluation requires det F > 0");
    const Tensor2 c = f.transpose() * f;
    const DeviationHistory& hist = ms.deviations;
    const std::vector<double> w = trapezoid_weights(hist.t);
    const std::size_t n = hist.size();
    Tensor2 sigma;

    for (const auto& ch : ms.constituents) {
        check_history(ch, hist);
        const ConstituentSpec& spec = ch.spec;
        const std::vector<double> q = cohort_survival(spec.turnover, hist);

        // Cohort Cauchy stress weighted by its current volume fraction.
        auto add_cohort = [&](double rho_cohort, double j_tau, const Tensor2& a, const Tensor2& h) {
            const Tensor2 fn = f * a;
            const double jn = fn.det();
            const Tensor2 sn = pk2_hat(spec.material, cohort_cauchy_green(a, c), h);
            sigma += (fn * sn * fn.transpose()) * (rho_cohort / (spec.rho_hat * j_tau * jn));
        };

        const double rho_initial = spec.rho_r0 * initial_survival(spec.turnover, hist, q);
        if (rho_initial > 0.0) add_cohort(rho_initial, 1.0, ch.a_initial, ch.h_initial);
        for (std::size_t k = 0; k < n; ++k) {
            const bool is_open = ms.provisional_endpoint && k + 1 == n;
            const Cohort co = is_open ? make_cohort(spec, ch.cohorts[k].tau, ch.cohorts[k].m_r, f) : ch.cohorts[k];
            const double coeff = w[k] * co.m_r * q[k];
            if (coeff != 0.0) add_cohort(coeff, co.f.det(), co.a, co.h);
        }
    }
    return sigma;
}

Tensor2 mixture_cauchy(const MixtureState& ms, double delta_tau) {
    EvalOptions opt;
    opt.delta_tau = delta_tau;
    const MixtureResponse r = evaluate_mixture(ms, ms.f, opt);
    return r.sigma_bar + r.sigma_active - Tensor2::identity() * ms.p;
}

Tensor4 mixture_material_elasticity(const MixtureState& ms) {
    EvalOptions opt;
    opt.tangent = true;
    return evaluate_mixture(ms, ms.f, opt).c_material;
}

Tensor4 mixture_spatial_elasticity(const MixtureState& ms) {
    EvalOptions opt;
    opt.tangent = true;
    return evaluate_mixture(ms, ms.f, opt).c_spatial;
}

double lagrange_pressure_membrane(const Tensor2& sigma_bar, double p_lumen) { return sigma_bar(0, 0) + 0.5 * p_lumen; }

double active_stretch(const std::vector<double>& times, const std::vector<double>& values, double k_act) {
    if (times.empty() || times.size() != values.size()) throw InvalidArgument("active_stretch needs a non-empty history");
    if (!(k_act > 0.0)) throw InvalidArgument("active_stretch needs k_act > 0");
    const double s = times.back();
    // Kernel k e^{-k(s-τ)} integrated exactly against the piecewise-linear history.
    double acc = values.front() * std::exp(-k_act * (s - times.front()));
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double h = times[i] - times[i - 1];
        const double e1 = std::exp(-k_act * (s - times[i]));
        const double x = k_act * h;
        const double decay = -std::expm1(-x);  // 1 - e^{-kh}
        const double mean_weight = x > 0.0 ? decay / x : 1.0;
        const double v0 = values[i - 1], v1 = values[i];
        acc += v1 * e1 - v0 * e1 * (1.0 - decay) - (v1 - v0) * e1 * mean_weight;
    }
    return acc;
}

} // namespace cmv
