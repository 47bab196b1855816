#include "cmv/errors.hpp"
#include "cmv/growth_update.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace cmv;

namespace {

LinearizedMaterial sample_material() {
    LinearizedMaterial m;
    m.sigma_bar = Tensor2({1.2, 0.1, 0.0, 0.1, 2.5, 0.05, 0.0, 0.05, 1.7});
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m.c_bar(i, i, j, j) = i == j ? 30.0 : 5.0;
    m.p = 0.4;
    m.j_star = 1.0;
    return m;
}

// Relaxation updates needed before the map x -> 2 + ratio (x - 2) reaches its
// fixed point to within tol.
int iterations_to_converge(double ratio, bool aitken, double tol) {
    const double fixed = 2.0;
    auto g = [&](double x) { return fixed + ratio * (x - fixed); };
    std::vector<double> d{0.0};
    AitkenState st;
    for (int n = 1; n <= 200; ++n) {
        const std::vector<double> d_tilde{g(d[0])};
        if (std::abs(d_tilde[0] - d[0]) < tol) return n - 1;
        if (aitken) {
            d = aitken_step(st, d, d_tilde, 1.0).d_next;
        } else {
            d = d_tilde;
        }
    }
    return 200;
}

} // namespace

TEST(GrowthUpdate, IdentityUpdateReturnsCurrentStress) {
    const LinearizedMaterial m = sample_material();
    const Tensor2 sigma = linearized_cauchy(m, Tensor2::identity());
    EXPECT_LT(max_abs_diff(sigma, m.sigma_bar - Tensor2::identity() * m.p), 1e-15);
}

TEST(GrowthUpdate, PureTargetDilation) {
    LinearizedMaterial m = sample_material();
    m.j_star = 1.3;
    const Tensor2 f = Tensor2::identity() * std::cbrt(1.3);
    // det F* = J*, so p* = 0 while E* = (J*^(2/3) - 1)/2 I remains.
    const Tensor2 e = Tensor2::identity() * (0.5 * (std::pow(1.3, 2.0 / 3.0) - 1.0));
    const Tensor2 expected = (m.sigma_bar + ddot(m.c_bar, e)) * std::pow(1.3, -1.0 / 3.0) - Tensor2::identity() * m.p;
    // det(cbrt(1.3) I) differs from 1.3 by rounding, which k_p = 1e4 amplifies.
    EXPECT_LT(max_abs_diff(linearized_cauchy(m, f), expected), 1e4 * 1e-15);
}

TEST(GrowthUpdate, PenaltyOnlyResponse) {
    LinearizedMaterial m;
    m.p = 0.25;
    m.k_p = 1.0e4;
    const double e = 1e-3;
    const Tensor2 sigma = linearized_cauchy(m, Tensor2::identity() * (1.0 + e));
    const double expected = -m.p + m.k_p * (std::pow(1.0 + e, 3) - 1.0);
    EXPECT_LT(max_abs_diff(sigma, Tensor2::identity() * expected), 1e-10);
}

TEST(GrowthUpdate, MaterialValidation) {
    LinearizedMaterial m;
    m.j_star = 0.0;
    EXPECT_THROW(m.validate(), InvalidArgument);
    m.j_star = 1.0;
    m.k_p = -1.0;
    EXPECT_THROW(m.validate(), InvalidArgument);
}

TEST(GrowthUpdate, AitkenScalarFormula) {
    AitkenState st;
    st.omega = 0.5;
    st.r_prev = {1.0};
    st.iteration = 2;
    const AitkenResult r = aitken_step(st, {0.0}, {0.5});
    EXPECT_NEAR(r.omega, 1.0, 1e-15);
    EXPECT_NEAR(r.d_next[0], 0.5, 1e-15);
}

TEST(GrowthUpdate, AitkenBoundsClipTheFactor) {
    AitkenState st;
    st.omega = 0.5;
    st.r_prev = {1.0};
    st.iteration = 2;
    // Unbounded the formula gives -0.5 * (1 * (1.5 - 1)) / 0.25 = -1.
    AitkenState free = st;
    EXPECT_NEAR(aitken_step(free, {0.0}, {1.5}).omega, -1.0, 1e-15);
    EXPECT_NEAR(aitken_step(st, {0.0}, {1.5}, 0.5, 0.1, 1.0).omega, 0.1, 1e-15);
}

TEST(GrowthUpdate, AitkenFixedPoint) {
    AitkenState st;
    const std::vector<double> d{0.3, -0.2};
    const AitkenResult r = aitken_step(st, d, d);
    EXPECT_EQ(r.d_next, d);
    EXPECT_EQ(max_abs(r.residual), 0.0);
}

TEST(GrowthUpdate, AitkenAcceleratesLinearContraction) {
    const int accelerated = iterations_to_converge(0.5, true, 1e-6);
    const int plain = iterations_to_converge(0.5, false, 1e-6);
    EXPECT_LE(accelerated, 3);
    EXPECT_GE(plain, 20);
}
