// cm-vessel: run, validate and sweep vessel growth and remodeling scenarios.

#include "cmv/errors.hpp"
#include "cmv/output.hpp"
#include "cmv/scenario.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kFailed = 1, kNonConvergence = 2, kIo = 3, kConfig = 4 };

struct Common {
    std::string config;
    std::string scenario;
    std::string out = ".";
    std::string algorithm;
    std::string solver;
    std::string execution;
    std::string seed;
    bool trace = false;
};

json raw_config(const Common& c) {
    json raw = json::object();
    if (!c.config.empty()) {
        std::ifstream in(c.config);
        if (!in) throw cmv::IoError("cannot open configuration file '" + c.config + "'");
        try {
            raw = json::parse(in);
        } catch (const json::parse_error& e) {
            throw cmv::ConfigError("'" + c.config + "' is not valid JSON: " + e.what());
        }
        if (!raw.is_object()) throw cmv::ConfigError("configuration must be a JSON object");
    }
    if (!c.scenario.empty()) {
        if (raw.contains("preset") && raw["preset"] != c.scenario)
            throw cmv::ConfigError("--scenario '" + c.scenario + "' conflicts with the config's preset");
        raw["preset"] = c.scenario;
    }
    if (c.config.empty() && c.scenario.empty()) throw cmv::ConfigError("give --config and/or --scenario");
    json resolved = cmv::resolve_config(raw);
    if (!c.algorithm.empty()) resolved["coupling"]["algorithm"] = c.algorithm;
    if (!c.solver.empty()) resolved["coupling"]["solid_solver"] = c.solver;
    if (!c.execution.empty()) resolved["coupling"]["execution"] = c.execution;
    return resolved;
}

// Prints the metrics of every coupling iteration and the segment with the
// largest equilibrium residual.
void attach_trace(cmv::ScenarioConfig& sc, const Common& c) {
    if (!c.trace) return;
    sc.coupling.on_iteration = [](const cmv::Vessel& v, double s, const cmv::ConvergenceReport& r) {
        std::size_t worst = 0;
        for (std::size_t i = 0; i < v.segments.size(); ++i) {
            const double lt = v.segments[i].lambda_theta(), lw = v.segments[worst].lambda_theta();
            if (std::abs(lt - 1.0) > std::abs(lw - 1.0)) worst = i;
        }
        const cmv::VesselSegment& seg = v.segments[worst];
        std::fprintf(stderr,
                     "s %g it %d/%d r %.3e tau %.3e sigma %.3e J %.3e eq %.3e jc %.3e | seg %zu lt %.8f det %.8f\n", s,
                     r.iterations, r.inner_iterations, r.r_tol, r.tau_tol, r.sigma_tol, r.j_tol, r.eq_tol, r.jc_tol,
                     worst, seg.lambda_theta(), seg.j());
    };
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw cmv::IoError("cannot create output directory '" + dir + "'");
}

struct RunOutcome {
    cmv::SimulationResult result;
    std::string csv;
};

/// Runs one scenario and writes `<stem>.csv`, `<stem>.meta.json` and `<stem>.state.json`.
RunOutcome run_one(cmv::ScenarioConfig& sc, const std::string& dir, const std::string& stem, const std::string& seed,
                   bool quiet) {
    ensure_dir(dir);
    RunOutcome outcome;
    outcome.csv = (fs::path(dir) / (stem + ".csv")).string();
    if (!seed.empty()) {
        std::ifstream in(seed);
        if (!in) throw cmv::IoError("cannot open seed history '" + seed + "'");
        json state;
        try {
            state = json::parse(in);
        } catch (const json::parse_error& e) {
            throw cmv::ConfigError("'" + seed + "' is not valid JSON: " + e.what());
        }
        cmv::state_from_json(state, sc.vessel);
    }
    cmv::TimeSeriesWriter writer(outcome.csv, sc.constituent_names);
    const auto start = std::chrono::steady_clock::now();
    const int cadence = sc.output_cadence;
    const int total = sc.coupling.steps();
    auto observer = [&](const cmv::Vessel& v, const cmv::StepInfo& info) {
        if (v.step % cadence == 0 || v.step == total) writer.write(v, info.report.iterations);
    };
    if (!seed.empty()) writer.write(sc.vessel, 0);
    outcome.result = cmv::run_simulation(sc.vessel, sc.coupling, observer);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    cmv::write_json((fs::path(dir) / (stem + ".meta.json")).string(), cmv::metadata(sc, outcome.result, wall));
    if (outcome.result.completed) cmv::write_json((fs::path(dir) / (stem + ".state.json")).string(),
                                                  cmv::state_to_json(sc.vessel));
    if (!quiet) {
        std::cout << sc.name << ": " << (outcome.result.completed ? "completed" : "stopped") << " at t = "
                  << sc.vessel.time << " d, " << writer.rows() << " rows, " << outcome.result.fluid_evaluations
                  << " fluid evaluations, " << wall << " s -> " << outcome.csv << "\n";
        if (!outcome.result.completed) std::cerr << "non-convergence: " << outcome.result.failure << "\n";
    }
    return outcome;
}

// ---- validate ----

struct Trajectory {
    std::vector<double> t, lambda, j;
    std::vector<int> segment;
};

Trajectory read_trajectory(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw cmv::IoError("cannot open reference '" + path + "'");
    std::string line;
    std::getline(in, line);
    std::vector<std::string> cols;
    {
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
    }
    auto col = [&](const std::string& name) {
        const auto it = std::find(cols.begin(), cols.end(), name);
        if (it == cols.end()) throw cmv::IoError("'" + path + "' has no column " + name);
        return static_cast<std::size_t>(it - cols.begin());
    };
    const std::size_t it = col("t_day"), is = col("segment"), il = col("lambda_theta"), ij = col("J");
    Trajectory tr;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) f.push_back(c);
        if (f.size() != cols.size()) throw cmv::IoError("'" + path + "': ragged row");
        tr.t.push_back(std::stod(f[it]));
        tr.segment.push_back(std::stoi(f[is]));
        tr.lambda.push_back(std::stod(f[il]));
        tr.j.push_back(std::stod(f[ij]));
    }
    return tr;
}

void write_reference(const std::string& path, const Trajectory& tr) {
    std::ofstream out(path);
    if (!out) throw cmv::IoError("cannot create '" + path + "'");
    out << "t_day,segment,lambda_theta,J\n";
    char buf[128];
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.10g,%d,%.12g,%.12g\n", tr.t[i], tr.segment[i], tr.lambda[i], tr.j[i]);
        out << buf;
    }
}

struct Check {
    std::string scenario;
    double lambda_err = 0.0;
    double j_err = 0.0;
    bool completed = false;
};

int validate(const Common& common, const std::string& ref_dir, bool regenerate, double tol) {
    const std::vector<std::string> scenarios{"ovine-ivc", "ivc-hypertension", "ivc-flow"};
    std::vector<Check> checks;
    bool all = true;
    for (const auto& name : scenarios) {
        Common c = common;
        c.config.clear();
        c.scenario = name;
        const std::string ref_path = (fs::path(ref_dir) / (name + ".csv")).string();
        if (regenerate) {
            c.solver = "newton";
            cmv::ScenarioConfig sc = cmv::build_scenario(raw_config(c));
            const RunOutcome r = run_one(sc, common.out, name + ".newton", "", true);
            if (!r.result.completed) throw cmv::IoError("oracle run of " + name + " did not complete");
            ensure_dir(ref_dir);
            write_reference(ref_path, read_trajectory(r.csv));
            std::cout << "wrote " << ref_path << "\n";
            continue;
        }
        const Trajectory ref = read_trajectory(ref_path);
        cmv::ScenarioConfig sc = cmv::build_scenario(raw_config(c));
        const RunOutcome r = run_one(sc, common.out, name, "", true);
        const Trajectory got = read_trajectory(r.csv);
        Check chk;
        chk.scenario = name;
        chk.completed = r.result.completed && got.t.size() == ref.t.size();
        const std::size_t n = std::min(got.t.size(), ref.t.size());
        for (std::size_t i = 0; i < n; ++i) {
            if (got.segment[i] != ref.segment[i] || std::abs(got.t[i] - ref.t[i]) > 1e-9) chk.completed = false;
            chk.lambda_err = std::max(chk.lambda_err, std::abs(got.lambda[i] / ref.lambda[i] - 1.0));
            chk.j_err = std::max(chk.j_err, std::abs(got.j[i] / ref.j[i] - 1.0));
        }
        checks.push_back(chk);
    }
    if (regenerate) return kOk;
    std::printf("%-20s %-9s %-14s %-14s %s\n", "scenario", "complete", "max|dlambda|", "max|dJ|", "result");
    for (const auto& c : checks) {
        const bool pass = c.completed && c.lambda_err <= tol && c.j_err <= tol;
        all = all && pass;
        std::printf("%-20s %-9s %-14.3e %-14.3e %s\n", c.scenario.c_str(), c.completed ? "yes" : "no", c.lambda_err,
                    c.j_err, pass ? "PASS" : "FAIL");
    }
    return all ? kOk : kFailed;
}

// ---- sweep ----

std::vector<double> parse_values(const std::string& list) {
    std::vector<double> v;
    std::stringstream ss(list);
    for (std::string s; std::getline(ss, s, ',');) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(s, &used));
            if (used != s.size()) throw std::invalid_argument(s);
        } catch (const std::exception&) {
            throw cmv::ConfigError("--values: '" + s + "' is not a number");
        }
    }
    if (v.empty()) throw cmv::ConfigError("--values: no values given");
    return v;
}

int sweep(const Common& common, const std::string& param, const std::string& values) {
    const json base = raw_config(common);
    int code = kOk;
    for (double x : parse_values(values)) {
        json cfg = base;
        cmv::set_parameter(cfg, param, x);
        cmv::ScenarioConfig sc = cmv::build_scenario(cfg);
        attach_trace(sc, common);
        std::ostringstream stem;
        stem << sc.name << "_" << param << "=" << x;
        const RunOutcome r = run_one(sc, common.out, stem.str(), common.seed, false);
        if (!r.result.completed) code = kNonConvergence;
    }
    return code;
}

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config, "JSON scenario configuration");
    app->add_option("--scenario", c.scenario, "built-in preset (ovine-ivc, ivc-hypertension, ivc-flow, "
                                              "tevg-interposition, aorta-tube)");
    app->add_option("--out", c.out, "output directory")->capture_default_str();
    app->add_option("--algorithm", c.algorithm, "coupling algorithm")->check(CLI::IsMember({"alg2", "alg3"}));
    app->add_option("--solver", c.solver, "solid solver")->check(CLI::IsMember({"linearized", "newton"}));
    app->add_option("--execution", c.execution, "segment kernels")->check(CLI::IsMember({"serial", "parallel"}));
    app->add_option("--seed-history", c.seed, "final-state dump of an earlier run to continue from");
    app->add_flag("--trace", c.trace, "print every coupling iteration to stderr");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Constrained-mixture vessel growth and remodeling with reduced-order hemodynamics"};
    app.require_subcommand(1);
    Common common;

    auto* run = app.add_subcommand("run", "run one scenario and write CSV + JSON outputs");
    add_common(run, common);

    auto* val = app.add_subcommand("validate", "compare the IVC benchmarks with the committed oracle trajectories");
    add_common(val, common);
    std::string ref_dir = std::string(CMV_SOURCE_DIR) + "/data/reference";
    bool regenerate = false;
    double tol = 5e-3;
    val->add_option("--reference-dir", ref_dir, "directory of reference trajectories")->capture_default_str();
    val->add_flag("--regenerate", regenerate, "rewrite the references with the Newton oracle solver");
    val->add_option("--tolerance", tol, "relative tolerance on lambda_theta and J")->capture_default_str();

    auto* sw = app.add_subcommand("sweep", "run one scenario per value of a parameter");
    add_common(sw, common);
    std::string param, values;
    sw->add_option("--param", param, "dotted parameter path, e.g. hemodynamics.R")->required();
    sw->add_option("--values", values, "comma-separated values")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kConfig;
    }

    try {
        if (run->parsed()) {
            cmv::ScenarioConfig sc = cmv::build_scenario(raw_config(common));
            attach_trace(sc, common);
            const RunOutcome r = run_one(sc, common.out, sc.name, common.seed, false);
            return r.result.completed ? kOk : kNonConvergence;
        }
        if (val->parsed()) return validate(common, ref_dir, regenerate, tol);
        return sweep(common, param, values);
    } catch (const cmv::IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kIo;
    } catch (const cmv::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kConfig;
    } catch (const cmv::InvalidArgument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kConfig;
    } catch (const cmv::NonConvergence& e) {
        std::cerr << "non-convergence: " << e.what() << "\n";
        return kNonConvergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailed;
    }
}
