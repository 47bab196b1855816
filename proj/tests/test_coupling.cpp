#include "cmv/coupling.hpp"
#include "cmv/errors.hpp"
#include "cmv/scenario.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace cmv;

namespace {

IterationSnapshot one_segment(double d, double wss, double sigma, double j) {
    IterationSnapshot s;
    s.displacement = {d, 0.0};
    s.wss = {wss};
    s.sigma = {sigma};
    s.j = {j};
    return s;
}

ScenarioConfig initialized(const std::string& preset, Algorithm alg = Algorithm::Alg2) {
    ScenarioConfig sc = load_preset(preset);
    sc.coupling.algorithm = alg;
    homeostatic_initialize(sc.vessel, sc.coupling);
    return sc;
}

} // namespace

TEST(FsgCoupling, ConvergenceMetrics) {
    const std::vector<double> sh{0.615}, th{1.6166};
    const IterationSnapshot a = one_segment(0.01, 1.6166, 0.615, 1.0);
    const ConvergenceReport same = convergence_metrics(a, a, sh, th);
    EXPECT_EQ(same.r_tol, 0.0);
    EXPECT_EQ(same.tau_tol, 0.0);
    EXPECT_EQ(same.sigma_tol, 0.0);
    EXPECT_EQ(same.j_tol, 0.0);

    const IterationSnapshot b = one_segment(0.01, 1.1 * 1.6166, 0.615, 1.02);
    const ConvergenceReport r = convergence_metrics(a, b, sh, th);
    EXPECT_NEAR(r.tau_tol, 0.1, 1e-14);
    EXPECT_NEAR(r.j_tol, 0.02, 1e-14);
    EXPECT_THROW(convergence_metrics(a, IterationSnapshot{}, sh, th), InvalidArgument);
}

TEST(FsgCoupling, MeasuredHomeostasisHasZeroDeviations) {
    const ScenarioConfig sc = initialized("ovine-ivc");
    const MixtureState& ms = sc.vessel.segments[0].mixture;
    ASSERT_EQ(ms.deviations.size(), 1u);
    EXPECT_EQ(ms.deviations.dsigma[0], 0.0);
    EXPECT_EQ(ms.deviations.dtau[0], 0.0);
    EXPECT_EQ(sc.vessel.status[0].dsigma, 0.0);
    EXPECT_EQ(sc.vessel.status[0].dtau, 0.0);
}

TEST(FsgCoupling, HomeostaticStepConvergesImmediately) {
    for (Algorithm alg : {Algorithm::Alg2, Algorithm::Alg3}) {
        ScenarioConfig sc = initialized("ovine-ivc", alg);
        const ConvergenceReport r = run_timestep(sc.vessel, sc.coupling);
        EXPECT_TRUE(r.converged);
        EXPECT_EQ(r.iterations, 1);
        EXPECT_LE(r.r_tol, sc.coupling.eps_r);
        EXPECT_LE(r.tau_tol, sc.coupling.eps_tau);
        EXPECT_LE(r.sigma_tol, sc.coupling.eps_sigma);
        EXPECT_LE(r.j_tol, sc.coupling.eps_j);
    }
}

TEST(FsgCoupling, PressureJumpStepConverges) {
    ScenarioConfig sc = initialized("ivc-hypertension");
    ASSERT_EQ(sc.coupling.n_max, 100);
    ASSERT_EQ(sc.coupling.eps_r, 1e-5);
    const ConvergenceReport r = run_timestep_alg2(sc.vessel, sc.coupling);
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.iterations, 100);
    // Outlet pressure plus the Poiseuille drop over the downstream half segment.
    const VesselSegment& seg = sc.vessel.segments[0];
    const double a = current_geometry(seg).a;
    const double drop = 8.0 * 0.04 * 20.0 * (0.5 * seg.length) / (std::numbers::pi * std::pow(a, 4));
    EXPECT_NEAR(sc.vessel.status[0].p, 8610.0 + drop, 1e-6);
    EXPECT_GT(sc.vessel.segments[0].lambda_theta(), 1.0);
}

TEST(FsgCoupling, IterationCapRaisesNonConvergence) {
    for (Algorithm alg : {Algorithm::Alg2, Algorithm::Alg3}) {
        ScenarioConfig sc = initialized("ivc-hypertension", alg);
        sc.coupling.n_max = 1;
        sc.coupling.k_max = 1;
        sc.coupling.j_max = 1;
        EXPECT_THROW(run_timestep(sc.vessel, sc.coupling), NonConvergence);
    }
}

TEST(FsgCoupling, AlgorithmsAgreeOnThePressureJump) {
    ScenarioConfig a = initialized("ivc-hypertension", Algorithm::Alg2);
    ScenarioConfig b = initialized("ivc-hypertension", Algorithm::Alg3);
    for (int k = 0; k < 5; ++k) {
        run_timestep(a.vessel, a.coupling);
        run_timestep(b.vessel, b.coupling);
    }
    EXPECT_NEAR(a.vessel.segments[0].lambda_theta(), b.vessel.segments[0].lambda_theta(), 1e-5);
    EXPECT_NEAR(a.vessel.segments[0].j(), b.vessel.segments[0].j(), 1e-4);
}

TEST(FsgCoupling, StepCounts) {
    EXPECT_EQ(load_preset("ovine-ivc").coupling.steps(), 180);
    EXPECT_EQ(load_preset("tevg-interposition").coupling.steps(), 60);
    EXPECT_EQ(load_preset("aorta-tube").coupling.steps(), 40);

    ScenarioConfig sc = load_preset("ovine-ivc");
    int records = 0;
    const SimulationResult r = run_simulation(sc.vessel, sc.coupling, [&](const Vessel&, const StepInfo&) { ++records; });
    EXPECT_TRUE(r.completed);
    EXPECT_EQ(r.steps.size(), 181u);
    EXPECT_EQ(records, 181);
    EXPECT_NEAR(sc.vessel.time, 720.0, 1e-9);
}

TEST(FsgCoupling, TableModeStartsOutOfHomeostasis) {
    const ScenarioConfig sc = initialized("aorta-tube");
    bool stimulated = false;
    for (const auto& st : sc.vessel.status)
        for (std::size_t a = 0; a < st.upsilon.size(); ++a)
            if (st.upsilon[a] != 0.0 && std::abs(st.upsilon[a] - 1.0) > 1e-6) stimulated = true;
    EXPECT_TRUE(stimulated);
}

TEST(FsgCoupling, ConfigValidation) {
    CouplingConfig c;
    EXPECT_NO_THROW(c.validate());
    c.t_max = 721.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = CouplingConfig{};
    c.omega_min = 0.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = CouplingConfig{};
    c.ramp = 1.5;
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(FsgCoupling, ObserverSeesEveryIteration) {
    ScenarioConfig sc = initialized("ivc-hypertension");
    int calls = 0;
    sc.coupling.on_iteration = [&](const Vessel&, double s, const ConvergenceReport&) {
        EXPECT_EQ(s, 4.0);
        ++calls;
    };
    const ConvergenceReport r = run_timestep(sc.vessel, sc.coupling);
    EXPECT_EQ(calls, r.iterations);
}
