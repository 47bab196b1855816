#include "cmv/turnover.hpp"

#include "cmv/errors.hpp"

#include <algorithm>
#include <cmath>

namespace cmv {

void TurnoverParams::validate() const {
    switch (kind) {
    case TurnoverKind::Mechano:
        if (!(k_h > 0.0)) throw InvalidArgument("mechano-mediated constituents require k_h > 0");
        break;
    case TurnoverKind::Inflammatory:
        if (!(k_h > 0.0)) throw InvalidArgument("inflammatory constituents require k_h > 0");
        if (!(beta > 1.0)) throw InvalidArgument("inflammatory shape beta must be > 1");
        if (!(delta > 0.0)) throw InvalidArgument("inflammatory rate delta must be > 0");
        break;
    case TurnoverKind::Polymer:
        if (!(k_polymer > 0.0 && gamma > 0.0)) throw InvalidArgument("polymer survival requires k > 0 and gamma > 0");
        break;
    case TurnoverKind::PolymerGround:
        if (!(k_h > 0.0)) throw InvalidArgument("ground matrix requires k_h > 0");
        if (!(eps_rmin >= 0.0 && eps_rmin <= 1.0)) throw InvalidArgument("eps_Rmin must lie in [0, 1]");
        break;
    case TurnoverKind::Elastin:
        break;
    }
    if (reference_production < 0.0) throw InvalidArgument("reference production must be >= 0");
}

void DeviationHistory::push_back(double time, double ds, double dt) {
    if (!t.empty() && !(time > t.back())) throw InvalidArgument("deviation history times must increase");
    t.push_back(time);
    dsigma.push_back(ds);
    dtau.push_back(dt);
}

double stimulus_mechano(const TurnoverParams& p, const StimulusInput& in) {
    return std::max(0.1, 1.0 + p.k_sigma * in.dsigma - p.k_tau * in.dtau);
}

double inflammatory_burden(const TurnoverParams& p, double s) {
    if (s <= 0.0) return 0.0;
    // Γ(s)/Γ(s*) with s* = (β-1)/δ, written to avoid overflow of δ^β s^(β-1).
    const double s_peak = (p.beta - 1.0) / p.delta;
    return std::pow(s / s_peak, p.beta - 1.0) * std::exp(-p.delta * (s - s_peak));
}

double stimulus_inflammatory(const TurnoverParams& p, double s) { return p.k_inflam * inflammatory_burden(p, s); }

double stimulus(const TurnoverParams& p, const StimulusInput& in) {
    switch (p.kind) {
    case TurnoverKind::Mechano:
        return stimulus_mechano(p, in);
    case TurnoverKind::Inflammatory:
        return stimulus_inflammatory(p, in.s);
    default:
        return 0.0;
    }
}

double production_rate(const TurnoverParams& p, double rho_now, double rho_0, double upsilon) {
    switch (p.kind) {
    case TurnoverKind::Mechano: {
        const double floor = p.reference_production > 0.0 ? p.reference_production : rho_0 * p.k_h;
        return std::max(rho_now * p.k_h, floor) * upsilon;
    }
    case TurnoverKind::Inflammatory: {
        const double nominal = p.reference_production > 0.0 ? p.reference_production : rho_0 * p.k_h;
        return nominal * upsilon;
    }
    default:
        return 0.0;
    }
}

double removal_rate(const TurnoverParams& p, double t, double dsigma, double dtau) {
    switch (p.kind) {
    case TurnoverKind::Mechano:
        return std::max(0.0, p.k_h * (1.0 + p.k_d_sigma * dsigma + p.k_d_tau * dtau));
    case TurnoverKind::Inflammatory:
        return std::max(0.0, p.k_h * (1.0 + inflammatory_burden(p, t)));
    case TurnoverKind::PolymerGround:
        return p.k_h;
    default:
        return 0.0;
    }
}

namespace {

struct Sample {
    double t, k;
};

// Removal rate at an arbitrary time, interpolating the deviations linearly.
double rate_at(const TurnoverParams& p, const DeviationHistory& h, double t) {
    if (h.t.empty()) return removal_rate(p, t, 0.0, 0.0);
    if (t <= h.t.front()) return removal_rate(p, t, h.dsigma.front(), h.dtau.front());
    if (t >= h.t.back()) return removal_rate(p, t, h.dsigma.back(), h.dtau.back());
    const auto it = std::upper_bound(h.t.begin(), h.t.end(), t);
    const std::size_t i1 = static_cast<std::size_t>(it - h.t.begin());
    const std::size_t i0 = i1 - 1;
    const double w = (t - h.t[i0]) / (h.t[i1] - h.t[i0]);
    return removal_rate(p, t, (1.0 - w) * h.dsigma[i0] + w * h.dsigma[i1], (1.0 - w) * h.dtau[i0] + w * h.dtau[i1]);
}

} // namespace

double survival_fraction(const TurnoverParams& p, double tau, double s, const DeviationHistory& history) {
    if (s < tau) throw InvalidArgument("survival_fraction requires s >= tau");
    if (p.kind == TurnoverKind::Elastin || p.kind == TurnoverKind::Polymer) return 1.0;
    if (s == tau) return 1.0;

    // Integration nodes: τ, every history sample strictly inside (τ, s), and s.
    std::vector<Sample> nodes;
    nodes.push_back({tau, rate_at(p, history, tau)});
    for (double t : history.t)
        if (t > tau && t < s) nodes.push_back({t, rate_at(p, history, t)});
    nodes.push_back({s, rate_at(p, history, s)});

    double integral = 0.0;
    for (std::size_t n = 1; n < nodes.size(); ++n)
        integral += 0.5 * (nodes[n].k + nodes[n - 1].k) * (nodes[n].t - nodes[n - 1].t);
    return std::exp(-integral);
}

std::vector<double> cumulative_removal(const TurnoverParams& p, const DeviationHistory& history) {
    std::vector<double> k(history.size(), 0.0);
    if (history.size() == 0) return k;
    double prev = removal_rate(p, history.t[0], history.dsigma[0], history.dtau[0]);
    for (std::size_t n = 1; n < history.size(); ++n) {
        const double cur = removal_rate(p, history.t[n], history.dsigma[n], history.dtau[n]);
        k[n] = k[n - 1] + 0.5 * (prev + cur) * (history.t[n] - history.t[n - 1]);
        prev = cur;
    }
    return k;
}

double initial_cohort_survival(const TurnoverParams& p, double s, const DeviationHistory& history) {
    switch (p.kind) {
    case TurnoverKind::Elastin:
        return 1.0;
    case TurnoverKind::Polymer: {
        const double k = p.k_polymer;
        return (1.0 + std::exp(-k * p.zeta)) / (1.0 + std::exp(k * p.gamma * (s - p.zeta / p.gamma)));
    }
    case TurnoverKind::PolymerGround:
        if (s < p.s_d) return 1.0;
        return (1.0 - p.eps_rmin) * std::exp(-p.k_h * (s - p.s_d)) + p.eps_rmin;
    case TurnoverKind::Mechano:
    case TurnoverKind::Inflammatory:
        return survival_fraction(p, 0.0, s, history);
    }
    return 1.0;
}

} // namespace cmv
