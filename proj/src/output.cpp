#include "cmv/output.hpp"

#include "cmv/errors.hpp"

#include <algorithm>
#include <cstdio>

namespace cmv {

using nlohmann::json;

namespace {

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

json tensor_json(const Tensor2& t) { return json(t.data()); }

Tensor2 tensor_from(const json& j) {
    if (!j.is_array() || j.size() != 9) throw ConfigError("state: tensor must have 9 components");
    std::array<double, 9> v{};
    for (std::size_t i = 0; i < 9; ++i) v[i] = j[i].get<double>();
    return Tensor2(v);
}

json status_json(const SegmentStatus& s) {
    return json{{"p", s.p},
                {"wss", s.wss},
                {"sigma_inv", s.sigma_inv},
                {"dsigma", s.dsigma},
                {"dtau", s.dtau},
                {"j_target", s.j_target},
                {"residual_rel", s.residual_rel},
                {"j_consistency", s.j_consistency},
                {"rho", s.rho},
                {"upsilon", s.upsilon}};
}

SegmentStatus status_from(const json& j) {
    SegmentStatus s;
    s.p = j.at("p").get<double>();
    s.wss = j.at("wss").get<double>();
    s.sigma_inv = j.at("sigma_inv").get<double>();
    s.dsigma = j.at("dsigma").get<double>();
    s.dtau = j.at("dtau").get<double>();
    s.j_target = j.at("j_target").get<double>();
    s.residual_rel = j.at("residual_rel").get<double>();
    s.j_consistency = j.at("j_consistency").get<double>();
    s.rho = j.at("rho").get<std::vector<double>>();
    s.upsilon = j.at("upsilon").get<std::vector<double>>();
    return s;
}

} // namespace

std::vector<std::string> timeseries_header(const std::vector<std::string>& constituents) {
    std::vector<std::string> h{"t_day",         "segment",     "a_cm", "h_cm", "lambda_theta", "J", "p_dyn_cm2",
                               "wss_dyn_cm2",   "sigma_inv_kPa"};
    for (const auto& n : constituents) h.push_back("rho_R_" + n);
    for (const auto& n : constituents) h.push_back("upsilon_" + n);
    h.push_back("iters");
    return h;
}

TimeSeriesWriter::TimeSeriesWriter(const std::string& path, std::vector<std::string> constituents)
    : path_(path), names_(std::move(constituents)), out_(path) {
    if (!out_) throw IoError("cannot create '" + path + "'");
    const auto header = timeseries_header(names_);
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
}

void TimeSeriesWriter::write(const Vessel& v, int iterations) {
    for (std::size_t i = 0; i < v.segments.size(); ++i) {
        const VesselSegment& seg = v.segments[i];
        const SegmentStatus& st = v.status.at(i);
        const Geometry g = current_geometry(seg);
        out_ << fmt(v.time) << ',' << i << ',' << fmt(g.a) << ',' << fmt(g.h) << ',' << fmt(seg.lambda_theta()) << ','
             << fmt(seg.j()) << ',' << fmt(st.p) << ',' << fmt(st.wss) << ',' << fmt(st.sigma_inv);
        std::vector<double> rho(names_.size(), 0.0), ups(names_.size(), 0.0);
        for (std::size_t a = 0; a < seg.mixture.size(); ++a) {
            const auto it = std::find(names_.begin(), names_.end(), seg.mixture.constituents[a].spec.name);
            const auto k = static_cast<std::size_t>(it - names_.begin());
            if (k < names_.size()) {
                rho[k] = a < st.rho.size() ? st.rho[a] : 0.0;
                ups[k] = a < st.upsilon.size() ? st.upsilon[a] : 0.0;
            }
        }
        for (double x : rho) out_ << ',' << fmt(x);
        for (double x : ups) out_ << ',' << fmt(x);
        out_ << ',' << iterations << '\n';
        ++rows_;
    }
    out_.flush();
    if (!out_) throw IoError("write to '" + path_ + "' failed");
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot create '" + path + "'");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write to '" + path + "' failed");
}

json metadata(const ScenarioConfig& sc, const SimulationResult& result, double wall_seconds) {
    long iterations = 0;
    for (const auto& s : result.steps) iterations += s.report.iterations;
    json m{{"scenario", sc.name},
           {"config", sc.resolved},
           {"completed", result.completed},
           {"steps", result.steps.empty() ? 0 : static_cast<long>(result.steps.size()) - 1},
           {"coupling_iterations", iterations},
           {"fluid_evaluations", result.fluid_evaluations},
           {"wall_clock_s", wall_seconds},
           {"solver",
            {{"program", "cm-vessel"},
             {"version", "1.0.0"},
             {"compiler", __VERSION__},
             {"cxx_standard", static_cast<long>(__cplusplus)}}}};
    if (!result.completed) m["failure"] = result.failure;
    return m;
}

json state_to_json(const Vessel& v) {
    json segs = json::array();
    for (const auto& seg : v.segments) {
        const MixtureState& ms = seg.mixture;
        if (ms.provisional_endpoint) throw InvalidArgument("cannot dump a vessel with an open step");
        json cons = json::array();
        for (const auto& c : ms.constituents) {
            json cohorts = json::array();
            for (const auto& k : c.cohorts) cohorts.push_back({{"tau", k.tau}, {"m_r", k.m_r}, {"f", tensor_json(k.f)}});
            cons.push_back({{"name", c.spec.name}, {"cohorts", cohorts}});
        }
        segs.push_back({{"f", tensor_json(ms.f)},
                        {"p", ms.p},
                        {"t", ms.deviations.t},
                        {"dsigma", ms.deviations.dsigma},
                        {"dtau", ms.deviations.dtau},
                        {"fiber_stretch", ms.fiber_stretch},
                        {"constituents", cons}});
    }
    json status = json::array();
    for (const auto& s : v.status) status.push_back(status_json(s));
    return json{{"time", v.time},
                {"step", v.step},
                {"fluid_evaluations", v.fluid_evaluations},
                {"initial_residual", v.initial_residual},
                {"sigma_h", v.sigma_h},
                {"tau_h", v.tau_h},
                {"status", status},
                {"segments", segs}};
}

void state_from_json(const json& j, Vessel& v) {
    try {
        const json& segs = j.at("segments");
        if (segs.size() != v.segments.size()) throw ConfigError("state: segment count does not match the scenario");
        for (std::size_t i = 0; i < segs.size(); ++i) {
            const json& s = segs[i];
            MixtureState& ms = v.segments[i].mixture;
            const json& cons = s.at("constituents");
            if (cons.size() != ms.size()) throw ConfigError("state: constituent count does not match the scenario");
            ms.f = tensor_from(s.at("f"));
            ms.p = s.at("p").get<double>();
            ms.deviations = DeviationHistory{};
            const auto t = s.at("t").get<std::vector<double>>();
            const auto ds = s.at("dsigma").get<std::vector<double>>();
            const auto dt = s.at("dtau").get<std::vector<double>>();
            if (ds.size() != t.size() || dt.size() != t.size()) throw ConfigError("state: ragged deviation history");
            for (std::size_t k = 0; k < t.size(); ++k) ms.deviations.push_back(t[k], ds[k], dt[k]);
            ms.fiber_stretch = s.at("fiber_stretch").get<std::vector<double>>();
            ms.provisional_endpoint = false;
            for (std::size_t a = 0; a < ms.size(); ++a) {
                ConstituentHistory& ch = ms.constituents[a];
                if (cons[a].at("name").get<std::string>() != ch.spec.name)
                    throw ConfigError("state: constituent '" + ch.spec.name + "' does not match the scenario");
                ch.cohorts.clear();
                for (const auto& k : cons[a].at("cohorts"))
                    ch.cohorts.push_back(make_cohort(ch.spec, k.at("tau").get<double>(), k.at("m_r").get<double>(),
                                                     tensor_from(k.at("f"))));
                if (ch.cohorts.size() != t.size()) throw ConfigError("state: cohort count does not match the history");
            }
        }
        v.time = j.at("time").get<double>();
        v.step = j.at("step").get<int>();
        v.fluid_evaluations = j.at("fluid_evaluations").get<long>();
        v.initial_residual = j.at("initial_residual").get<double>();
        v.sigma_h = j.at("sigma_h").get<std::vector<double>>();
        v.tau_h = j.at("tau_h").get<std::vector<double>>();
        v.status.clear();
        for (const auto& s : j.at("status")) v.status.push_back(status_from(s));
        if (v.sigma_h.size() != v.segments.size() || v.status.size() != v.segments.size())
            throw ConfigError("state: per-segment arrays do not match the scenario");
    } catch (const json::exception& e) {
        throw ConfigError(std::string("state: malformed history: ") + e.what());
    }
}

} // namespace cmv
