// Finds the value of one or more tied parameters that puts a scenario's
// s = 0 state in Laplace equilibrium, by bisection on the signed residual.
//
//   cmv-calibrate --scenario ovine-ivc --lo 0.9 --hi 1.1
//       --param constituent_sets.ivc.1.deposition.G_f ...

#include "cmv/errors.hpp"
#include "cmv/scenario.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

using nlohmann::json;

namespace {

struct Probe {
    double residual = 0.0;  ///< σ_θθ - P a/h at F = I [kPa]
    double laplace = 0.0;
    double invariant = 0.0;
};

Probe probe(const json& base, const std::vector<std::string>& params, double value, std::size_t segment) {
    json cfg = base;
    for (const auto& p : params) cmv::set_parameter(cfg, p, value);
    cmv::ScenarioConfig sc = cmv::build_scenario(cfg);
    cmv::Vessel& v = sc.vessel;
    const cmv::HemodynamicField fluid = cmv::evaluate_fluid(v, v.reference);
    cmv::VesselSegment& seg = v.segments.at(segment);
    seg.mixture.open_step(0.0, 0.0, 0.0, std::vector<double>(seg.mixture.size(), 0.0));
    const double dtau = v.homeostasis.mode == cmv::HomeostasisMode::Table ? fluid.wss[segment] / v.homeostasis.tau_h - 1.0
                                                                          : 0.0;
    const cmv::WallStress w =
        cmv::wall_stress(seg, cmv::Tensor2::identity(), fluid.pressure[segment] / cmv::kPaToDynCm2, dtau);
    return {w.residual, w.laplace, cmv::stress_invariant(w.sigma, v.homeostasis.invariant)};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Calibrate a tied parameter so that the initial state is in equilibrium"};
    std::string scenario;
    std::vector<std::string> params;
    std::vector<std::string> sets;
    std::size_t segment = 0;
    double lo = 0.5, hi = 2.0;
    app.add_option("--scenario", scenario, "preset name")->required();
    app.add_option("--param", params, "dotted parameter path(s) tied to one value")->required();
    app.add_option("--set", sets, "extra assignments path=value applied first");
    app.add_option("--segment", segment, "segment whose residual is zeroed")->capture_default_str();
    app.add_option("--lo", lo, "lower bracket")->capture_default_str();
    app.add_option("--hi", hi, "upper bracket")->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    try {
        json base = cmv::resolve_config(json{{"preset", scenario}});
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw cmv::ConfigError("--set expects path=value");
            cmv::set_parameter(base, s.substr(0, eq), std::stod(s.substr(eq + 1)));
        }
        double flo = probe(base, params, lo, segment).residual;
        const double fhi = probe(base, params, hi, segment).residual;
        if (flo * fhi > 0.0) {
            std::cerr << "residual does not change sign on [" << lo << ", " << hi << "]: " << flo << ", " << fhi
                      << "\n";
            return 1;
        }
        for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
            const double mid = 0.5 * (lo + hi);
            const double fm = probe(base, params, mid, segment).residual;
            if ((fm < 0.0) == (flo < 0.0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        const double x = 0.5 * (lo + hi);
        const Probe p = probe(base, params, x, segment);
        std::printf("value %.15g\nresidual %.3e kPa (relative %.3e)\ninvariant %.10g kPa\n", x, p.residual,
                    p.residual / p.laplace, p.invariant);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
