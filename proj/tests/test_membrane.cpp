#include "cmv/coupling.hpp"
#include "cmv/errors.hpp"
#include "cmv/membrane.hpp"
#include "cmv/scenario.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace cmv;

namespace {

VesselSegment isotropic_segment() {
    ConstituentSpec s;
    s.name = "iso";
    s.material = MaterialModel::neo_hookean(9.913);
    s.turnover.kind = TurnoverKind::Elastin;
    s.rho_r0 = 1050.0;
    VesselSegment seg;
    seg.a0 = 0.8573;
    seg.h0 = 0.743;
    seg.mixture = MixtureState({s});
    return seg;
}

ScenarioConfig homeostatic_ivc() {
    ScenarioConfig sc = load_preset("ovine-ivc");
    homeostatic_initialize(sc.vessel, sc.coupling);
    return sc;
}

} // namespace

TEST(VesselMembrane, SegmentDeformation) {
    EXPECT_EQ(max_abs_diff(segment_deformation(1.0, 1.0), Tensor2::identity()), 0.0);
    EXPECT_NEAR(segment_deformation(1.1, 1.0)(0, 0), 0.9091, 1e-4);
    EXPECT_NEAR(segment_deformation(1.0, 1.2)(0, 0), 1.2, 1e-15);
    EXPECT_NEAR(segment_deformation(1.1, 1.3).det(), 1.3, 1e-15);
}

TEST(VesselMembrane, CurrentGeometry) {
    VesselSegment seg = isotropic_segment();
    Geometry g = current_geometry(seg, 1.0);
    EXPECT_EQ(g.a, seg.a0);
    EXPECT_EQ(g.h, seg.h0);
    seg.mixture.f = segment_deformation(1.1, 1.0);
    g = current_geometry(seg, 1.0);
    EXPECT_NEAR(g.a, 1.1 * seg.a0, 1e-15);
    EXPECT_NEAR(g.h, seg.h0 / 1.1, 1e-15);
    seg.mixture.f = Tensor2::identity();
    EXPECT_NEAR(current_geometry(seg, 1.4).h, 1.4 * seg.h0, 1e-15);
}

TEST(VesselMembrane, StressFreeWallAtZeroPressure) {
    const VesselSegment seg = isotropic_segment();
    EXPECT_NEAR(equilibrium_residual(seg, 0.0), 0.0, 1e-14);
    EXPECT_NEAR(solve_equilibrium_newton(seg, 0.0, 1.0), 1.0, 1e-12);
}

TEST(VesselMembrane, LaplaceLoadOfTheIvc) {
    const VesselSegment seg = isotropic_segment();
    const WallStress w = wall_stress(seg, Tensor2::identity(), 0.615);
    EXPECT_NEAR(w.laplace, 0.615 * 0.8573 / 0.743, 1e-15);
    EXPECT_NEAR(w.laplace, 0.70961, 1e-5);
    EXPECT_NEAR(w.sigma(0, 0), -0.3075, 1e-14);
}

TEST(VesselMembrane, HomeostaticInitializationIsInEquilibrium) {
    const ScenarioConfig sc = homeostatic_ivc();
    const Vessel& v = sc.vessel;
    const double p = v.status[0].p / kPaToDynCm2;
    const double r = equilibrium_residual(v.segments[0], p, v.status[0].dtau);
    EXPECT_LT(std::abs(r), 1e-6 * v.sigma_h[0]);
    EXPECT_LT(v.initial_residual, 1e-6);
}

TEST(VesselMembrane, PressureStepDistendsTheWall) {
    const ScenarioConfig sc = homeostatic_ivc();
    const VesselSegment& seg = sc.vessel.segments[0];
    const double p0 = sc.vessel.status[0].p / kPaToDynCm2;
    EXPECT_NEAR(solve_equilibrium_newton(seg, p0, 1.0), 1.0, 1e-8);
    const double lt = solve_equilibrium_newton(seg, 1.4 * p0, 1.0);
    EXPECT_GT(lt, 1.0);
    const WallStress w = wall_stress(seg, segment_deformation(lt, 1.0), 1.4 * p0);
    EXPECT_LT(std::abs(w.residual), 1e-8 * w.laplace);
}

TEST(VesselMembrane, LinearizedUpdateAtEquilibriumIsStationary) {
    const ScenarioConfig sc = homeostatic_ivc();
    const VesselSegment& seg = sc.vessel.segments[0];
    const double p0 = sc.vessel.status[0].p / kPaToDynCm2;
    const LinearizedMaterial mat = linearize_wall(seg, p0, 1.0, 1.0e4);
    const Tensor2 f = solve_equilibrium_linearized(seg, p0, mat);
    EXPECT_LT(max_abs_diff(f, seg.mixture.f), 1e-9);
}

TEST(VesselMembrane, LinearizedUpdateTracksNewtonForSmallSteps) {
    const ScenarioConfig sc = homeostatic_ivc();
    const VesselSegment& seg = sc.vessel.segments[0];
    const double p = 1.05 * sc.vessel.status[0].p / kPaToDynCm2;
    const double lt_newton = solve_equilibrium_newton(seg, p, 1.0);
    const Tensor2 f = solve_equilibrium_linearized(seg, p, linearize_wall(seg, p, 1.0, 1.0e4));
    EXPECT_NEAR(f(1, 1) / lt_newton, 1.0, 5e-3);
}

TEST(VesselMembrane, PenaltyOnlyMaterialEnforcesTargetVolume) {
    const VesselSegment seg = isotropic_segment();
    LinearizedMaterial mat;
    mat.j_star = 1.1;
    mat.k_p = 1.0e4;
    const Tensor2 f = solve_equilibrium_linearized(seg, 0.0, mat);
    EXPECT_NEAR(f.det(), 1.1, 1e-4);
}

TEST(VesselMembrane, SegmentValidation) {
    VesselSegment seg = isotropic_segment();
    seg.h0 = 0.0;
    EXPECT_THROW(seg.validate(), GeometryError);
}
