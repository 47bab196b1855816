#include "cmv/scenario.hpp"

#include "cmv/errors.hpp"
#include "cmv/hemodynamics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace cmv {

using nlohmann::json;

namespace {

// Built-in parameter tables. Fiber prestretches and the graft ground-matrix
// modulus are not tabulated in the source tables; the values below make the
// s = 0 state satisfy the Laplace balance (see tools/calibrate.cpp).
constexpr const char* kOvineIvc = R"json({
  "name": "ovine-ivc",
  "description": "Ovine inferior vena cava, one membrane segment. The tabulated h0 = 0.743 cm is thick relative to sigma_h; it is used as given, which forces a compressive fiber prestretch.",
  "geometry": {
    "regions": [
      {"name": "ivc", "length_cm": 0.8573, "segments": 1, "a0_cm": 0.8573, "h0_cm": 0.743, "constituents": "ivc"}
    ]
  },
  "constituent_sets": {
    "ivc": [
      {"name": "elastin", "kind": "elastin", "material": "neo-hookean", "c_kPa": 9.913,
       "phi0": 0.1, "rho_hat_kg_m3": 1050, "deposition": {"G_theta": 1.219, "G_z": 1.428}},
      {"name": "smc", "kind": "mechano", "material": "fung", "c1_kPa": 48.33, "c2": 1.02, "fiber_angle_deg": 90,
       "phi0": 0.081, "rho_hat_kg_m3": 1050, "deposition": {"G_f": @IVC_GF@},
       "k_h_per_day": 0.0125, "K_sigma": 1.0, "K_tau": 5.0, "K_D_sigma": 0.0, "K_D_tau": 0.0},
      {"name": "collagen_circ", "kind": "mechano", "material": "fung", "c1_kPa": 2.696, "c2": 14.92, "fiber_angle_deg": 90,
       "phi0": 0.0139, "rho_hat_kg_m3": 1050, "deposition": {"G_f": @IVC_GF@},
       "k_h_per_day": 0.0125, "K_sigma": 1.0, "K_tau": 5.0, "K_D_sigma": 0.0, "K_D_tau": 0.0},
      {"name": "collagen_axial", "kind": "mechano", "material": "fung", "c1_kPa": 2.696, "c2": 14.92, "fiber_angle_deg": 0,
       "phi0": 0.137, "rho_hat_kg_m3": 1050, "deposition": {"G_f": @IVC_GF@},
       "k_h_per_day": 0.0125, "K_sigma": 1.0, "K_tau": 5.0, "K_D_sigma": 0.0, "K_D_tau": 0.0},
      {"name": "collagen_diag_p", "kind": "mechano", "material": "fung", "c1_kPa": 2.696, "c2": 14.92, "fiber_angle_deg": 41.94,
       "phi0": 0.334, "rho_hat_kg_m3": 1050, "deposition": {"G_f": @IVC_GF@},
       "k_h_per_day": 0.0125, "K_sigma": 1.0, "K_tau": 5.0, "K_D_sigma": 0.0, "K_D_tau": 0.0},
      {"name": "collagen_diag_m", "kind": "mechano", "material": "fung", "c1_kPa": 2.696, "c2": 14.92, "fiber_angle_deg": -41.94,
       "phi0": 0.334, "rho_hat_kg_m3": 1050, "deposition": {"G_f": @IVC_GF@},
       "k_h_per_day": 0.0125, "K_sigma": 1.0, "K_tau": 5.0, "K_D_sigma": 0.0, "K_D_tau": 0.0}
    ]
  },
  "hemodynamics": {"Q_ml_s": 20.0, "R_dyn_s_cm5": 307.5, "mu_poise": 0.04, "window_cm": 0.0,
                   "reference": {"Q_ml_s": 20.0, "R_dyn_s_cm5": 307.5}},
  "homeostasis": {"mode": "measured", "invariant": "trace", "sigma_h_kPa": 0.615, "tau_h_Pa": 0.16166},
  "coupling": {"ds_day": 4, "t_max_day": 720, "n_max": 100, "k_max": 50, "j_max": 50,
               "eps_r": 1e-5, "eps_tau": 1e-4, "eps_sigma": 1e-4, "eps_J": 1e-4, "eps_eq": 1e-7,
               "omega0": 0.5, "omega_min": 0.1, "omega_max": 1.0, "k_p_kPa": 1e4, "ramp": 1.0,
               "project_relaxed": false, "balanced_production": true,
               "algorithm": "alg2", "solid_solver": "linearized", "execution": "serial"},
  "output": {"cadence": 1}
})json";

constexpr const char* kIvcHypertension = R"json({
  "preset": "ovine-ivc",
  "name": "ivc-hypertension",
  "description": "Ovine IVC with the outlet resistance raised 40% (R = 430.5 dyn s/cm^5 at Q = 20 ml/s).",
  "hemodynamics": {"R_dyn_s_cm5": 430.5}
})json";

constexpr const char* kIvcFlow = R"json({
  "preset": "ovine-ivc",
  "name": "ivc-flow",
  "description": "Ovine IVC with inflow raised 20% (Q = 24 ml/s, R = 307.5 dyn s/cm^5). The outlet pressure becomes R Q = 7380 dyn/cm^2.",
  "hemodynamics": {"Q_ml_s": 24.0}
})json";

// Native collagen families pair with graft mechano and inflammatory families
// for the production floor and the nominal inflammatory rate.
constexpr const char* kTevg = R"json({
  "name": "tevg-interposition",
  "description": "Polymeric graft interposed between two native IVC segments (native | graft | native).",
  "geometry": {
    "regions": [
      {"name": "proximal", "length_cm": 1.143066666666667, "segments": 8, "a0_cm": 0.8573, "h0_cm": 0.743, "constituents": "native"},
      {"name": "graft", "length_cm": 1.143066666666667, "segments": 8, "a0_cm": 0.8573, "h0_cm": 0.743, "constituents": "graft"},
      {"name": "distal", "length_cm": 1.143066666666667, "segments": 8, "a0_cm": 0.8573, "h0_cm": 0.743, "constituents": "native"}
    ]
  },
  "constituent_sets": {
    "native": [
      {"name": "elastin", "kind": "elastin", "material": "neo-hookean", "c_kPa": 9.913,
       "phi0": 0.1, "rho_hat_kg_m3": 1050, "deposition": {"G_theta": 1.219, "G_z": 1.428}},
      {"name": "smc", "kind": "mechano", "material": "fung", "c1_kPa": 48.33, "c2": 1.02, "fiber_angle_deg": 90,
       "phi0": 0.081, "rho_hat_kg_m3": 1050, "deposition": {"G_f": @IVC_GF@},
       "k_h_per_day": 0.0125, "K_sigma": 1.0, "K_tau": 5.0, "K_D_sigma": 0.0, "K_D_tau": 0.0},
      {"name": "collagen_circ", "kind": "mechano", "material": "fung", "c1_kPa": 2.696, "c2": 14.92, "fiber_angle_deg": 90,
       "phi0": 0.0139, "rho_hat_kg_m3": 1050, "deposition": {"G_f": @IVC_GF@},
       "k_h_per_day": 0.0125, "K_sigma": 1.0, "K_tau": 5.0, "K_D_sigma": 0.0, "K_D_tau": 0.0},
      {"name": "collagen_axial", "kind": "mechano", "material": "fung", "c1_kPa": 2.696, "c2": 14.92, "fiber_angle_deg": 0,
       "phi0": 0.137, "rho_hat_kg_m3": 1050, "deposition": {"G_f": @IVC_GF@},
       "k_h_per_day": 0.0125, "K_sigma": 1.0, "K_tau": 5.0, "K_D_sigma": 0.0, "K_D_tau": 0.0},
      {"name": "collagen_diag_p", "kind": "mechano", "material": "fung", "c1_kPa": 2.696, "c2": 14.92, "fiber_angle_deg": 41.94,
       "phi0": 0.334, "rho_hat_kg_m3": 1050, "deposition": {"G_f": @IVC_GF@},
       "k_h_per_day": 0.0125, "K_sigma": 1.0, "K_tau": 5.0, "K_D_sigma": 0.0, "K_D_tau": 0.0},
      {"name": "collagen_diag_m", "kind": "mechano", "material": "fung", "c1_kPa": 2.696, "c2": 14.92, "fiber_angle_deg": -41.94,
       "phi0": 0.334, "rho_hat_kg_m3": 1050, "deposition": {"G_f": @IVC_GF@},
       "k_h_per_day": 0.0125, "K_sigma": 1.0, "K_tau": 5.0, "K_D_sigma": 0.0, "K_D_tau": 0.0}
    ],
    "graft": [
      {"name": "polymer_1", "kind": "polymer", "material": "neo-hookean", "c_kPa": 2000000,
       "phi0": 0.15, "rho_hat_kg_m3": 1230, "deposition": {"G_theta": 1.0, "G_z": 1.0},
       "k_per_day": 0.0125, "zeta": 245, "gamma": 4},
      {"name": "polymer_2", "kind": "polymer", "material": "neo-hookean", "c_kPa": 1000,
       "phi0": 0.05, "rho_hat_kg_m3": 1530, "deposition": {"G_theta": 1.0, "G_z": 1.0},
       "k_per_day": 0.1, "zeta": 60, "gamma": 4},
      {"name": "ground", "kind": "polymer-ground", "material": "neo-hookean", "c_kPa": @GND_C@,
       "phi0": 0.8, "rho_hat_kg_m3": 1050, "deposition": {"G_theta": 1.219, "G_z": 1.428},
       "k_h_per_day": 0.0125, "eps_Rmin": 0.1, "s_d_day": 14},
      {"name": "smc", "kind": "mechano", "material": "fung", "c1_kPa": 48.33, "c2": 1.02, "fiber_angle_deg": 90,
       "phi0": 0.0, "rho_hat_kg_m3": 1050, "deposition": {"G_f": @IVC_GF@},
       "k_h_per_day": 0.0125, "K_sigma": 1.0, "K_tau": 5.0, "K_D_sigma": 0.0, "K_D_tau": 0.0,
       "production_reference": "native.smc"},
      {"name": "collagen_circ", "kind": "mechano", "material": "fung", "c1_kPa": 2.696, "c2": 14.92, "fiber_angle_deg": 90,
       "phi0": 0.0, "rho_hat_kg_m3": 1050, "deposition": {"G_f": @IVC_GF@},
       "k_h_per_day": 0.0125, "K_sigma": 1.0, "K_tau": 5.0, "K_D_sigma": 0.0, "K_D_tau": 0.0,
       "production_reference": "native.collagen_circ"},
      {"name": "collagen_axial", "kind": "mechano", "material": "fung", "c1_kPa": 2.696, "c2": 14.92, "fiber_angle_deg": 0,
       "phi0": 0.0, "rho_hat_kg_m3": 1050, "deposition": {"G_f": @IVC_GF@},
       "k_h_per_day": 0.0125, "K_sigma": 1.0, "K_tau": 5.0, "K_D_sigma": 0.0, "K_D_tau": 0.0,
       "production_reference": "native.collagen_axial"},
      {"name": "collagen_diag_p", "kind": "mechano", "material": "fung", "c1_kPa": 2.696, "c2": 14.92, "fiber_angle_deg": 41.94,
       "phi0": 0.0, "rho_hat_kg_m3": 1050, "deposition": {"G_f": @IVC_GF@},
       "k_h_per_day": 0.0125, "K_sigma": 1.0, "K_tau": 5.0, "K_D_sigma": 0.0, "K_D_tau": 0.0,
       "production_reference": "native.collagen_diag_p"},
      {"name": "collagen_diag_m", "kind": "mechano", "material": "fung", "c1_kPa": 2.696, "c2": 14.92, "fiber_angle_deg": -41.94,
       "phi0": 0.0, "rho_hat_kg_m3": 1050, "deposition": {"G_f": @IVC_GF@},
       "k_h_per_day": 0.0125, "K_sigma": 1.0, "K_tau": 5.0, "K_D_sigma": 0.0, "K_D_tau": 0.0,
       "production_reference": "native.collagen_diag_m"},
      {"name": "inflam_circ", "kind": "inflammatory", "material": "fung", "c1_kPa": 80.88, "c2": 14.92, "fiber_angle_deg": 90,
       "phi0": 0.0, "rho_hat_kg_m3": 1050, "deposition": {"G_f": @IVC_GF@},
       "k_h_per_day": 0.3576, "K_i": 26.8196, "delta_per_day": 0.25, "beta": 5.0,
       "production_reference": "native.collagen_circ"},
      {"name": "inflam_axial", "kind": "inflammatory", "material": "fung", "c1_kPa": 80.88, "c2": 14.92, "fiber_angle_deg": 0,
       "phi0": 0.0, "rho_hat_kg_m3": 1050, "deposition": {"G_f": @IVC_GF@},
       "k_h_per_day": 0.3576, "K_i": 26.8196, "delta_per_day": 0.25, "beta": 5.0,
       "production_reference": "native.collagen_axial"},
      {"name": "inflam_diag_p", "kind": "inflammatory", "material": "fung", "c1_kPa": 80.88, "c2": 14.92, "fiber_angle_deg": 41.94,
       "phi0": 0.0, "rho_hat_kg_m3": 1050, "deposition": {"G_f": @IVC_GF@},
       "k_h_per_day": 0.3576, "K_i": 26.8196, "delta_per_day": 0.25, "beta": 5.0,
       "production_reference": "native.collagen_diag_p"},
      {"name": "inflam_diag_m", "kind": "inflammatory", "material": "fung", "c1_kPa": 80.88, "c2": 14.92, "fiber_angle_deg": -41.94,
       "phi0": 0.0, "rho_hat_kg_m3": 1050, "deposition": {"G_f": @IVC_GF@},
       "k_h_per_day": 0.3576, "K_i": 26.8196, "delta_per_day": 0.25, "beta": 5.0,
       "production_reference": "native.collagen_diag_m"}
    ]
  },
  "hemodynamics": {"Q_ml_s": 20.0, "R_dyn_s_cm5": 307.5, "mu_poise": 0.04, "window_cm": 0.0,
                   "reference": {"Q_ml_s": 20.0, "R_dyn_s_cm5": 307.5}},
  "homeostasis": {"mode": "measured", "invariant": "hoop", "sigma_h_kPa": 0.615, "tau_h_Pa": 0.16166},
  "coupling": {"ds_day": 2, "t_max_day": 120, "n_max": 100, "k_max": 50, "j_max": 50,
               "eps_r": 1e-3, "eps_tau": 1e-2, "eps_sigma": 1e-2, "eps_J": 1e-2, "eps_eq": 1e-3,
               "omega0": 0.5, "omega_min": 0.1, "omega_max": 1.0, "k_p_kPa": 1e4, "ramp": 1.0,
               "project_relaxed": true, "balanced_production": true,
               "algorithm": "alg2", "solid_solver": "newton", "execution": "serial"},
  "output": {"cadence": 1}
})json";

// Straight-tube surrogate of the aorta. Collagen family fractions are scaled
// so that they sum to the collagen volume fraction.
constexpr const char* kAorta = R"json({
  "name": "aorta-tube",
  "description": "Straight-tube surrogate of a human aorta under a 40% outlet resistance increase. Arch curvature is not represented.",
  "geometry": {
    "regions": [
      {"name": "aorta", "length_cm": 10.0, "segments": 5, "a0_cm": 1.0, "h0_cm": @AORTA_H0@, "constituents": "aorta"}
    ]
  },
  "constituent_sets": {
    "aorta": [
      {"name": "elastin", "kind": "elastin", "material": "neo-hookean", "c_kPa": 553.287,
       "phi0": 0.1, "rho_hat_kg_m3": 1050, "deposition": {"G_theta": 1.257, "G_z": 1.238}},
      {"name": "smc", "kind": "mechano", "material": "fung", "c1_kPa": 784.3185, "c2": 29.16, "fiber_angle_deg": 90,
       "phi0": 0.0604, "rho_hat_kg_m3": 1050, "deposition": {"G_f": @AORTA_GF@},
       "k_h_per_day": 0.014285714285714285, "K_sigma": 1.0, "K_tau": 1.0, "K_D_sigma": 0.0, "K_D_tau": 0.0,
       "active": {"T_max_kPa": 39.86, "lambda_M": 1.4, "lambda_0": 0.4, "C_B": 0.7, "C_S": 1.2,
                  "k_act_per_day": 0.014285714285714285}},
      {"name": "collagen_axial", "kind": "mechano", "material": "fung", "c1_kPa": 784.3185, "c2": 29.16, "fiber_angle_deg": 0,
       "phi0": 0.066477, "rho_hat_kg_m3": 1050, "deposition": {"G_f": @AORTA_GF@},
       "k_h_per_day": 0.014285714285714285, "K_sigma": 1.0, "K_tau": 1.0, "K_D_sigma": 0.0, "K_D_tau": 0.0},
      {"name": "collagen_diag_p", "kind": "mechano", "material": "fung", "c1_kPa": 784.3185, "c2": 29.16, "fiber_angle_deg": 45,
       "phi0": 0.3865615, "rho_hat_kg_m3": 1050, "deposition": {"G_f": @AORTA_GF@},
       "k_h_per_day": 0.014285714285714285, "K_sigma": 1.0, "K_tau": 1.0, "K_D_sigma": 0.0, "K_D_tau": 0.0},
      {"name": "collagen_diag_m", "kind": "mechano", "material": "fung", "c1_kPa": 784.3185, "c2": 29.16, "fiber_angle_deg": -45,
       "phi0": 0.3865615, "rho_hat_kg_m3": 1050, "deposition": {"G_f": @AORTA_GF@},
       "k_h_per_day": 0.014285714285714285, "K_sigma": 1.0, "K_tau": 1.0, "K_D_sigma": 0.0, "K_D_tau": 0.0}
    ]
  },
  "hemodynamics": {"Q_ml_s": 97.0, "R_dyn_s_cm5": 1924.35, "mu_poise": 0.04, "window_cm": 0.0,
                   "reference": {"Q_ml_s": 97.0, "R_dyn_s_cm5": 1374.53}},
  "homeostasis": {"mode": "table", "invariant": "@AORTA_INV@", "sigma_h_kPa": 13.33, "tau_h_Pa": 0.494},
  "coupling": {"ds_day": 20, "t_max_day": 800, "n_max": 100, "k_max": 50, "j_max": 50,
               "eps_r": 1e-3, "eps_tau": 1e-2, "eps_sigma": 1e-2, "eps_J": 1e-2, "eps_eq": 1e-3,
               "omega0": 0.5, "omega_min": 0.1, "omega_max": 1.0, "k_p_kPa": 1e4, "ramp": 1.0,
               "project_relaxed": false, "balanced_production": true,
               "algorithm": "alg3", "solid_solver": "linearized", "execution": "serial"},
  "output": {"cadence": 1}
})json";

const std::map<std::string, std::string> kSubstitutions = {
    {"@IVC_GF@", "0.986034923439"},
    {"@GND_C@", "1.10136204405"},
    {"@AORTA_H0@", "1.10965679619454"},
    {"@AORTA_GF@", "0.945067489020871"},
    {"@AORTA_INV@", "trace"},
};

std::string substitute(std::string text) {
    for (const auto& [key, value] : kSubstitutions) {
        for (std::size_t pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos))
            text.replace(pos, key.size(), value);
    }
    return text;
}

const std::map<std::string, const char*>& preset_table() {
    static const std::map<std::string, const char*> table = {
        {"ovine-ivc", kOvineIvc},          {"ivc-hypertension", kIvcHypertension},
        {"ivc-flow", kIvcFlow},            {"tevg-interposition", kTevg},
        {"tevg", kTevg},                   {"aorta-tube", kAorta},
    };
    return table;
}

// ---- field access with path-qualified diagnostics ----

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) fail(path, "expected an object");
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) fail(join(path, key), "unknown field");
    }
}

const json& field(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object() || !j.contains(key)) fail(join(path, key), "required field is missing");
    return j.at(key);
}

double number(const json& j, const std::string& key, const std::string& path) {
    const json& v = field(j, key, path);
    if (!v.is_number()) fail(join(path, key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(join(path, key), "must be finite");
    return x;
}

bool flag_or(const json& j, const std::string& key, bool fallback, const std::string& path) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_boolean()) fail(path + "." + key, "expected true or false");
    return j.at(key).get<bool>();
}

double number_or(const json& j, const std::string& key, double fallback, const std::string& path) {
    return j.contains(key) ? number(j, key, path) : fallback;
}

int integer_or(const json& j, const std::string& key, int fallback, const std::string& path) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number_integer()) fail(join(path, key), "expected an integer");
    return v.get<int>();
}

std::string text(const json& j, const std::string& key, const std::string& path) {
    const json& v = field(j, key, path);
    if (!v.is_string()) fail(join(path, key), "expected a string");
    return v.get<std::string>();
}

std::string text_or(const json& j, const std::string& key, const std::string& fallback, const std::string& path) {
    return j.contains(key) ? text(j, key, path) : fallback;
}

double positive(double x, const std::string& path) {
    if (!(x > 0.0)) fail(path, "must be > 0 (got " + std::to_string(x) + ")");
    return x;
}

double non_negative(double x, const std::string& path) {
    if (!(x >= 0.0)) fail(path, "must be >= 0 (got " + std::to_string(x) + ")");
    return x;
}

// ---- constituents ----

struct ParsedSet {
    std::vector<ConstituentSpec> specs;
    std::vector<std::string> references;  ///< production_reference per constituent, may be empty
};

TurnoverKind parse_kind(const std::string& s, const std::string& path) {
    if (s == "mechano") return TurnoverKind::Mechano;
    if (s == "inflammatory") return TurnoverKind::Inflammatory;
    if (s == "elastin") return TurnoverKind::Elastin;
    if (s == "polymer") return TurnoverKind::Polymer;
    if (s == "polymer-ground") return TurnoverKind::PolymerGround;
    fail(path, "unknown kind '" + s + "' (mechano, inflammatory, elastin, polymer, polymer-ground)");
}

ConstituentSpec parse_constituent(const json& c, const std::string& path, std::string& reference) {
    check_keys(c, path,
               {"name", "kind", "material", "c_kPa", "c1_kPa", "c2", "fiber_angle_deg", "phi0", "rho_hat_kg_m3",
                "deposition", "k_h_per_day", "K_sigma", "K_tau", "K_D_sigma", "K_D_tau", "K_i", "delta_per_day",
                "beta", "k_per_day", "zeta", "gamma", "eps_Rmin", "s_d_day", "production_reference", "active"});
    ConstituentSpec spec;
    spec.name = text(c, "name", path);
    const std::string material = text(c, "material", path);
    Vec3 h0{0.0, 1.0, 0.0};
    if (material == "neo-hookean") {
        spec.material = MaterialModel::neo_hookean(non_negative(number(c, "c_kPa", path), join(path, "c_kPa")));
    } else if (material == "fung") {
        const double angle = number(c, "fiber_angle_deg", path) * std::numbers::pi / 180.0;
        h0 = {0.0, std::sin(angle), std::cos(angle)};
        const double c1 = non_negative(number(c, "c1_kPa", path), join(path, "c1_kPa"));
        const double c2 = positive(number(c, "c2", path), join(path, "c2"));
        spec.material = MaterialModel::fung(c1, c2, h0);
    } else {
        fail(join(path, "material"), "unknown material '" + material + "' (neo-hookean, fung)");
    }

    const std::string dpath = join(path, "deposition");
    const json& dep = field(c, "deposition", path);
    check_keys(dep, dpath, {"G_f", "G_r", "G_theta", "G_z"});
    try {
        if (dep.contains("G_f")) {
            if (material != "fung") fail(dpath, "G_f requires a fiber (fung) material");
            spec.deposition = DepositionStretch::fiber(number(dep, "G_f", dpath), h0);
        } else {
            const double gt = positive(number(dep, "G_theta", dpath), join(dpath, "G_theta"));
            const double gz = positive(number(dep, "G_z", dpath), join(dpath, "G_z"));
            const double gr = number_or(dep, "G_r", 1.0 / (gt * gz), dpath);
            spec.deposition = DepositionStretch::diagonal(gr, gt, gz);
        }
    } catch (const InvalidArgument& e) {
        fail(dpath, e.what());
    }

    TurnoverParams& tp = spec.turnover;
    tp.kind = parse_kind(text(c, "kind", path), join(path, "kind"));
    switch (tp.kind) {
    case TurnoverKind::Mechano:
        tp.k_h = positive(number(c, "k_h_per_day", path), join(path, "k_h_per_day"));
        tp.k_sigma = number(c, "K_sigma", path);
        tp.k_tau = number(c, "K_tau", path);
        tp.k_d_sigma = number_or(c, "K_D_sigma", 0.0, path);
        tp.k_d_tau = number_or(c, "K_D_tau", 0.0, path);
        break;
    case TurnoverKind::Inflammatory:
        tp.k_h = positive(number(c, "k_h_per_day", path), join(path, "k_h_per_day"));
        tp.k_inflam = non_negative(number(c, "K_i", path), join(path, "K_i"));
        tp.delta = positive(number(c, "delta_per_day", path), join(path, "delta_per_day"));
        tp.beta = number(c, "beta", path);
        if (!(tp.beta > 1.0)) fail(join(path, "beta"), "must be > 1");
        break;
    case TurnoverKind::Polymer:
        tp.k_polymer = positive(number(c, "k_per_day", path), join(path, "k_per_day"));
        tp.zeta = number(c, "zeta", path);
        tp.gamma = positive(number(c, "gamma", path), join(path, "gamma"));
        break;
    case TurnoverKind::PolymerGround:
        tp.k_h = positive(number(c, "k_h_per_day", path), join(path, "k_h_per_day"));
        tp.eps_rmin = number(c, "eps_Rmin", path);
        if (!(tp.eps_rmin >= 0.0 && tp.eps_rmin <= 1.0)) fail(join(path, "eps_Rmin"), "must lie in [0, 1]");
        tp.s_d = non_negative(number(c, "s_d_day", path), join(path, "s_d_day"));
        break;
    case TurnoverKind::Elastin:
        break;
    }
    reference = text_or(c, "production_reference", "", path);
    if (!reference.empty() && tp.kind != TurnoverKind::Mechano && tp.kind != TurnoverKind::Inflammatory)
        fail(join(path, "production_reference"), "only mechano and inflammatory constituents produce mass");

    spec.rho_hat = positive(number(c, "rho_hat_kg_m3", path), join(path, "rho_hat_kg_m3"));
    spec.rho_r0 = non_negative(number(c, "phi0", path), join(path, "phi0"));  // scaled after the sum check

    if (c.contains("active")) {
        const std::string apath = join(path, "active");
        const json& a = c.at("active");
        check_keys(a, apath, {"T_max_kPa", "lambda_M", "lambda_0", "C_B", "C_S", "k_act_per_day"});
        if (material != "fung") fail(apath, "active stress requires a fiber (fung) constituent");
        ActiveStressParams ap;
        ap.t_max = non_negative(number(a, "T_max_kPa", apath), join(apath, "T_max_kPa"));
        ap.lambda_m = number(a, "lambda_M", apath);
        ap.lambda_0 = number(a, "lambda_0", apath);
        if (!(ap.lambda_m > ap.lambda_0 && ap.lambda_0 > 0.0)) fail(apath, "requires lambda_M > lambda_0 > 0");
        ap.c_b = number(a, "C_B", apath);
        ap.c_s = number(a, "C_S", apath);
        ap.k_act = positive(number(a, "k_act_per_day", apath), join(apath, "k_act_per_day"));
        spec.active = ap;
    }
    return spec;
}

ParsedSet parse_set(const json& arr, const std::string& path) {
    if (!arr.is_array() || arr.empty()) fail(path, "expected a non-empty array of constituents");
    ParsedSet set;
    std::set<std::string> names;
    double phi_sum = 0.0;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string cpath = path + "[" + std::to_string(i) + "]";
        std::string ref;
        set.specs.push_back(parse_constituent(arr[i], cpath, ref));
        set.references.push_back(ref);
        if (!names.insert(set.specs.back().name).second)
            fail(cpath + ".name", "duplicate constituent name '" + set.specs.back().name + "'");
        phi_sum += set.specs.back().rho_r0;
    }
    // Tabulated fractions are rounded to four digits; larger gaps are errors.
    if (std::abs(phi_sum - 1.0) > 1e-3) {
        std::ostringstream os;
        os << "initial volume fractions sum to " << phi_sum << ", expected 1";
        fail(path, os.str());
    }
    int n_active = 0;
    for (auto& s : set.specs) {
        s.rho_r0 = s.rho_r0 / phi_sum * s.rho_hat;
        n_active += s.active ? 1 : 0;
    }
    if (n_active > 1) fail(path, "at most one constituent may carry active stress");
    return set;
}

// ---- top-level blocks ----

CouplingConfig parse_coupling(const json& c) {
    const std::string path = "coupling";
    check_keys(c, path,
               {"ds_day", "t_max_day", "n_max", "k_max", "j_max", "eps_r", "eps_tau", "eps_sigma", "eps_J", "eps_eq",
                "omega0", "omega_min", "omega_max", "k_p_kPa", "ramp", "project_relaxed", "balanced_production",
                "algorithm", "solid_solver", "execution"});
    CouplingConfig cfg;
    cfg.ds = number_or(c, "ds_day", cfg.ds, path);
    cfg.t_max = number_or(c, "t_max_day", cfg.t_max, path);
    cfg.n_max = integer_or(c, "n_max", cfg.n_max, path);
    cfg.k_max = integer_or(c, "k_max", cfg.k_max, path);
    cfg.j_max = integer_or(c, "j_max", cfg.j_max, path);
    cfg.eps_r = number_or(c, "eps_r", cfg.eps_r, path);
    cfg.eps_tau = number_or(c, "eps_tau", cfg.eps_tau, path);
    cfg.eps_sigma = number_or(c, "eps_sigma", cfg.eps_sigma, path);
    cfg.eps_j = number_or(c, "eps_J", cfg.eps_j, path);
    cfg.eps_eq = number_or(c, "eps_eq", cfg.eps_eq, path);
    cfg.omega0 = number_or(c, "omega0", cfg.omega0, path);
    cfg.omega_min = number_or(c, "omega_min", cfg.omega_min, path);
    cfg.omega_max = number_or(c, "omega_max", cfg.omega_max, path);
    cfg.k_p = number_or(c, "k_p_kPa", cfg.k_p, path);
    cfg.ramp = number_or(c, "ramp", cfg.ramp, path);
    cfg.project_relaxed = flag_or(c, "project_relaxed", cfg.project_relaxed, path);
    cfg.balanced_production = flag_or(c, "balanced_production", cfg.balanced_production, path);

    const std::string alg = text_or(c, "algorithm", "alg2", path);
    if (alg == "alg2") cfg.algorithm = Algorithm::Alg2;
    else if (alg == "alg3") cfg.algorithm = Algorithm::Alg3;
    else fail("coupling.algorithm", "expected alg2 or alg3");

    const std::string solid = text_or(c, "solid_solver", "linearized", path);
    if (solid == "linearized") cfg.solid = SolidSolver::Linearized;
    else if (solid == "newton") cfg.solid = SolidSolver::Newton;
    else fail("coupling.solid_solver", "expected linearized or newton");

    const std::string ex = text_or(c, "execution", "serial", path);
    if (ex == "serial") cfg.execution = Execution::Serial;
    else if (ex == "parallel") cfg.execution = Execution::Parallel;
    else fail("coupling.execution", "expected serial or parallel");

    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        fail(path, e.what());
    }
    return cfg;
}

LoadCase parse_load(const json& h, const std::string& path, const LoadCase& base) {
    LoadCase lc = base;
    lc.q = positive(number_or(h, "Q_ml_s", base.q, path), join(path, "Q_ml_s"));
    lc.r_outlet = non_negative(number_or(h, "R_dyn_s_cm5", base.r_outlet, path), join(path, "R_dyn_s_cm5"));
    return lc;
}

void parse_hemodynamics(const json& h, Vessel& v) {
    const std::string path = "hemodynamics";
    check_keys(h, path, {"Q_ml_s", "R_dyn_s_cm5", "mu_poise", "window_cm", "reference"});
    LoadCase applied;
    applied.q = positive(number(h, "Q_ml_s", path), join(path, "Q_ml_s"));
    applied.r_outlet = non_negative(number(h, "R_dyn_s_cm5", path), join(path, "R_dyn_s_cm5"));
    applied.mu = positive(number_or(h, "mu_poise", 0.04, path), join(path, "mu_poise"));
    applied.window = non_negative(number_or(h, "window_cm", 0.0, path), join(path, "window_cm"));
    v.applied = applied;
    v.reference = applied;
    if (h.contains("reference")) {
        check_keys(h.at("reference"), "hemodynamics.reference", {"Q_ml_s", "R_dyn_s_cm5"});
        v.reference = parse_load(h.at("reference"), "hemodynamics.reference", applied);
    }
}

void parse_homeostasis(const json& h, Vessel& v) {
    const std::string path = "homeostasis";
    check_keys(h, path, {"mode", "invariant", "sigma_h_kPa", "tau_h_Pa"});
    const std::string mode = text(h, "mode", path);
    if (mode == "measured") v.homeostasis.mode = HomeostasisMode::Measured;
    else if (mode == "table") v.homeostasis.mode = HomeostasisMode::Table;
    else fail("homeostasis.mode", "expected measured or table");

    const std::string inv = text_or(h, "invariant", "trace", path);
    if (inv == "trace") v.homeostasis.invariant = StressInvariant::Trace;
    else if (inv == "in-plane") v.homeostasis.invariant = StressInvariant::InPlane;
    else if (inv == "hoop") v.homeostasis.invariant = StressInvariant::Hoop;
    else fail("homeostasis.invariant", "expected trace, in-plane or hoop");

    if (v.homeostasis.mode == HomeostasisMode::Table) {
        v.homeostasis.sigma_h = number(h, "sigma_h_kPa", path);
        if (v.homeostasis.sigma_h == 0.0) fail("homeostasis.sigma_h_kPa", "must be nonzero");
        v.homeostasis.tau_h = positive(number(h, "tau_h_Pa", path), "homeostasis.tau_h_Pa") * kPascalToDynCm2;
    } else {
        v.homeostasis.sigma_h = number_or(h, "sigma_h_kPa", 0.0, path);
        v.homeostasis.tau_h = number_or(h, "tau_h_Pa", 0.0, path) * kPascalToDynCm2;
    }
}

} // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const auto& [name, body] : preset_table()) names.push_back(name);
    return names;
}

json preset_json(const std::string& name) {
    const auto& table = preset_table();
    const auto it = table.find(name);
    if (it == table.end()) {
        std::string known;
        for (const auto& [n, body] : table) known += (known.empty() ? "" : ", ") + n;
        throw ConfigError("unknown preset '" + name + "' (known: " + known + ")");
    }
    return json::parse(substitute(it->second));
}

json resolve_config(const json& raw) {
    if (!raw.is_object()) throw ConfigError("configuration must be a JSON object");
    if (!raw.contains("preset")) return raw;
    std::set<std::string> seen;
    json patch = raw;
    json base;
    std::vector<json> chain{patch};
    while (chain.back().contains("preset")) {
        const json& p = chain.back().at("preset");
        if (!p.is_string()) throw ConfigError("preset: expected a string");
        const std::string name = p.get<std::string>();
        if (!seen.insert(name).second) throw ConfigError("preset: inheritance cycle at '" + name + "'");
        chain.push_back(preset_json(name));
    }
    base = chain.back();
    for (auto it = chain.rbegin() + 1; it != chain.rend(); ++it) {
        json layer = *it;
        layer.erase("preset");
        base.merge_patch(layer);
    }
    base.erase("preset");
    return base;
}

ScenarioConfig build_scenario(const json& resolved) {
    if (resolved.contains("preset")) throw ConfigError("build_scenario expects a resolved configuration");
    check_keys(resolved, "",
               {"name", "description", "geometry", "constituent_sets", "hemodynamics", "homeostasis", "coupling",
                "output"});
    ScenarioConfig sc;
    sc.resolved = resolved;
    sc.name = text_or(resolved, "name", "scenario", "");
    sc.coupling = parse_coupling(resolved.contains("coupling") ? resolved.at("coupling") : json::object());

    const json& sets_json = field(resolved, "constituent_sets", "");
    if (!sets_json.is_object() || sets_json.empty()) fail("constituent_sets", "expected a non-empty object");
    std::map<std::string, ParsedSet> sets;
    for (const auto& [name, arr] : sets_json.items()) sets.emplace(name, parse_set(arr, "constituent_sets." + name));

    // Reference production rates, named "<set>.<constituent>".
    for (auto& [set_name, set] : sets) {
        for (std::size_t i = 0; i < set.specs.size(); ++i) {
            const std::string& ref = set.references[i];
            if (ref.empty()) continue;
            const std::string path = "constituent_sets." + set_name + "[" + std::to_string(i) + "].production_reference";
            const auto dot = ref.find('.');
            if (dot == std::string::npos) fail(path, "expected <set>.<constituent>");
            const auto other = sets.find(ref.substr(0, dot));
            if (other == sets.end()) fail(path, "unknown constituent set in '" + ref + "'");
            const ConstituentSpec* target = nullptr;
            for (const auto& s : other->second.specs)
                if (s.name == ref.substr(dot + 1)) target = &s;
            if (!target) fail(path, "unknown constituent '" + ref + "'");
            if (target->turnover.kind != TurnoverKind::Mechano || !(target->rho_r0 > 0.0))
                fail(path, "'" + ref + "' must be a mechano constituent with nonzero initial mass");
            set.specs[i].turnover.reference_production = target->rho_r0 * target->turnover.k_h;
        }
    }

    const json& geometry = field(resolved, "geometry", "");
    check_keys(geometry, "geometry", {"regions"});
    const json& regions = field(geometry, "regions", "geometry");
    if (!regions.is_array() || regions.empty()) fail("geometry.regions", "expected a non-empty array");
    double z0 = 0.0;
    for (std::size_t r = 0; r < regions.size(); ++r) {
        const std::string path = "geometry.regions[" + std::to_string(r) + "]";
        const json& reg = regions[r];
        check_keys(reg, path, {"name", "length_cm", "segments", "a0_cm", "h0_cm", "constituents"});
        const double length = positive(number(reg, "length_cm", path), join(path, "length_cm"));
        const int n = integer_or(reg, "segments", 1, path);
        if (n < 1) fail(join(path, "segments"), "must be >= 1");
        const double a0 = positive(number(reg, "a0_cm", path), join(path, "a0_cm"));
        const double h0 = positive(number(reg, "h0_cm", path), join(path, "h0_cm"));
        const std::string set_name = text(reg, "constituents", path);
        const auto set = sets.find(set_name);
        if (set == sets.end()) fail(join(path, "constituents"), "unknown constituent set '" + set_name + "'");
        for (const auto& s : set->second.specs)
            if (std::find(sc.constituent_names.begin(), sc.constituent_names.end(), s.name) ==
                sc.constituent_names.end())
                sc.constituent_names.push_back(s.name);
        for (int k = 0; k < n; ++k) {
            VesselSegment seg;
            seg.a0 = a0;
            seg.h0 = h0;
            seg.length = length / n;
            seg.z = z0 + (k + 0.5) * seg.length;
            seg.region = static_cast<int>(r);
            seg.mixture = MixtureState(set->second.specs);
            sc.vessel.segments.push_back(std::move(seg));
        }
        z0 += length;
    }

    parse_hemodynamics(field(resolved, "hemodynamics", ""), sc.vessel);
    parse_homeostasis(field(resolved, "homeostasis", ""), sc.vessel);
    if (resolved.contains("output")) {
        check_keys(resolved.at("output"), "output", {"cadence"});
        sc.output_cadence = integer_or(resolved.at("output"), "cadence", 1, "output");
        if (sc.output_cadence < 1) fail("output.cadence", "must be >= 1");
    }
    return sc;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open configuration file '" + path + "'");
    json raw;
    try {
        raw = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
    }
    return build_scenario(resolve_config(raw));
}

ScenarioConfig load_preset(const std::string& name) { return build_scenario(resolve_config(json{{"preset", name}})); }

void set_parameter(json& config, const std::string& path, double value) {
    std::vector<std::string> keys;
    std::stringstream ss(path);
    for (std::string k; std::getline(ss, k, '.');) keys.push_back(k);
    if (keys.empty()) throw ConfigError("empty parameter path");
    json* node = &config;
    for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
        const std::string& k = keys[i];
        if (node->is_array()) {
            const std::size_t idx = std::stoul(k);
            if (idx >= node->size()) throw ConfigError(path + ": index " + k + " out of range");
            node = &(*node)[idx];
        } else if (node->is_object() && node->contains(k)) {
            node = &(*node)[k];
        } else {
            throw ConfigError(path + ": no field '" + k + "'");
        }
    }
    const std::string& last = keys.back();
    if (!node->is_object()) throw ConfigError(path + ": parent is not an object");
    if (node->contains(last)) {
        (*node)[last] = value;
        return;
    }
    std::vector<std::string> matches;
    for (const auto& [key, v] : node->items())
        if (key.rfind(last + "_", 0) == 0) matches.push_back(key);
    if (matches.size() != 1) throw ConfigError(path + ": no unique field matches '" + last + "'");
    (*node)[matches.front()] = value;
}

} // namespace cmv
