#include "cmv/tensor.hpp"

#include "cmv/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace cmv {

Tensor2 Tensor2::outer(const Vec3& a, const Vec3& b) {
    Tensor2 t;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            t(i, j) = a[i] * b[j];
    return t;
}

Tensor2& Tensor2::operator+=(const Tensor2& o) {
    for (std::size_t n = 0; n < 9; ++n) v_[n] += o.v_[n];
    return *this;
}

Tensor2& Tensor2::operator-=(const Tensor2& o) {
    for (std::size_t n = 0; n < 9; ++n) v_[n] -= o.v_[n];
    return *this;
}

Tensor2& Tensor2::operator*=(double a) {
    for (auto& x : v_) x *= a;
    return *this;
}

Tensor2 Tensor2::transpose() const {
    Tensor2 t;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            t(i, j) = (*this)(j, i);
    return t;
}

double Tensor2::trace() const { return v_[0] + v_[4] + v_[8]; }

double Tensor2::det() const {
    const auto& a = v_;
    return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) +
           a[2] * (a[3] * a[7] - a[4] * a[6]);
}

Tensor2 Tensor2::inverse() const {
    const double d = det();
    if (!std::isfinite(d) || std::abs(d) < 1e-300) {
        throw InvalidKinematics("tensor is singular (det = " + std::to_string(d) + ")");
    }
    const auto& a = v_;
    Tensor2 inv({
        a[4] * a[8] - a[5] * a[7], a[2] * a[7] - a[1] * a[8], a[1] * a[5] - a[2] * a[4],
        a[5] * a[6] - a[3] * a[8], a[0] * a[8] - a[2] * a[6], a[2] * a[3] - a[0] * a[5],
        a[3] * a[7] - a[4] * a[6], a[1] * a[6] - a[0] * a[7], a[0] * a[4] - a[1] * a[3],
    });
    inv *= 1.0 / d;
    return inv;
}

bool Tensor2::is_finite() const {
    return std::all_of(v_.begin(), v_.end(), [](double x) { return std::isfinite(x); });
}

Tensor2 operator+(Tensor2 a, const Tensor2& b) { return a += b; }
Tensor2 operator-(Tensor2 a, const Tensor2& b) { return a -= b; }
Tensor2 operator-(const Tensor2& a) { return a * -1.0; }
Tensor2 operator*(Tensor2 a, double s) { return a *= s; }
Tensor2 operator*(double s, Tensor2 a) { return a *= s; }

Tensor2 operator*(const Tensor2& a, const Tensor2& b) {
    Tensor2 c;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < 3; ++k) acc += a(i, k) * b(k, j);
            c(i, j) = acc;
        }
    return c;
}

Vec3 operator*(const Tensor2& a, const Vec3& x) {
    Vec3 y{};
    for (std::size_t i = 0; i < 3; ++i)
        y[i] = a(i, 0) * x[0] + a(i, 1) * x[1] + a(i, 2) * x[2];
    return y;
}

double ddot(const Tensor2& a, const Tensor2& b) {
    double acc = 0.0;
    for (std::size_t n = 0; n < 9; ++n) acc += a.data()[n] * b.data()[n];
    return acc;
}

double max_abs(const Tensor2& a) {
    double m = 0.0;
    for (double x : a.data()) m = std::max(m, std::abs(x));
    return m;
}

double max_abs_diff(const Tensor2& a, const Tensor2& b) { return max_abs(a - b); }

Tensor4& Tensor4::operator+=(const Tensor4& o) {
    for (std::size_t n = 0; n < 81; ++n) v_[n] += o.v_[n];
    return *this;
}

Tensor4& Tensor4::operator*=(double a) {
    for (auto& x : v_) x *= a;
    return *this;
}

bool Tensor4::is_finite() const {
    return std::all_of(v_.begin(), v_.end(), [](double x) { return std::isfinite(x); });
}

Tensor4 operator+(Tensor4 a, const Tensor4& b) { return a += b; }
Tensor4 operator*(Tensor4 a, double s) { return a *= s; }
Tensor4 operator*(double s, Tensor4 a) { return a *= s; }

Tensor4 dyad(const Tensor2& a, const Tensor2& b) {
    Tensor4 t;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t k = 0; k < 3; ++k)
                for (std::size_t l = 0; l < 3; ++l)
                    t(i, j, k, l) = a(i, j) * b(k, l);
    return t;
}

Tensor4 mixed_dyadic(const Tensor2& a, const Tensor2& b) {
    Tensor4 t;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t k = 0; k < 3; ++k)
                for (std::size_t l = 0; l < 3; ++l)
                    t(i, j, k, l) = a(i, k) * b(j, l);
    return t;
}

Tensor2 ddot(const Tensor2& a, const Tensor4& b) {
    Tensor2 c;
    for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t l = 0; l < 3; ++l) {
            double acc = 0.0;
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t j = 0; j < 3; ++j) acc += a(i, j) * b(i, j, k, l);
            c(k, l) = acc;
        }
    return c;
}

Tensor2 ddot(const Tensor4& a, const Tensor2& b) {
    Tensor2 c;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < 3; ++k)
                for (std::size_t l = 0; l < 3; ++l) acc += a(i, j, k, l) * b(k, l);
            c(i, j) = acc;
        }
    return c;
}

Tensor4 ddot(const Tensor4& a, const Tensor4& b) {
    Tensor4 c;
    for (std::size_t ij = 0; ij < 9; ++ij)
        for (std::size_t kl = 0; kl < 9; ++kl) {
            double acc = 0.0;
            for (std::size_t mn = 0; mn < 9; ++mn) acc += a.data()[9 * ij + mn] * b.data()[9 * mn + kl];
            c.data()[9 * ij + kl] = acc;
        }
    return c;
}

Tensor4 transform(const Tensor2& a, const Tensor4& c) {
    // Contract one index at a time: 4 * 81 * 3 multiply-adds.
    Tensor4 t1, t2;
    const auto& cd = c.data();
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t rest = 0; rest < 27; ++rest) {
            double acc = 0.0;
            for (std::size_t m = 0; m < 3; ++m) acc += a(i, m) * cd[27 * m + rest];
            t1.data()[27 * i + rest] = acc;
        }
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t kl = 0; kl < 9; ++kl) {
                double acc = 0.0;
                for (std::size_t n = 0; n < 3; ++n) acc += a(j, n) * t1.data()[27 * i + 9 * n + kl];
                t2.data()[27 * i + 9 * j + kl] = acc;
            }
    for (std::size_t ij = 0; ij < 9; ++ij)
        for (std::size_t k = 0; k < 3; ++k)
            for (std::size_t l = 0; l < 3; ++l) {
                double acc = 0.0;
                for (std::size_t p = 0; p < 3; ++p) acc += a(k, p) * t2.data()[9 * ij + 3 * p + l];
                t1.data()[9 * ij + 3 * k + l] = acc;
            }
    for (std::size_t ijk = 0; ijk < 27; ++ijk)
        for (std::size_t l = 0; l < 3; ++l) {
            double acc = 0.0;
            for (std::size_t q = 0; q < 3; ++q) acc += a(l, q) * t1.data()[3 * ijk + q];
            t2.data()[3 * ijk + l] = acc;
        }
    return t2;
}

double max_abs(const Tensor4& a) {
    double m = 0.0;
    for (double x : a.data()) m = std::max(m, std::abs(x));
    return m;
}

double max_abs_diff(const Tensor4& a, const Tensor4& b) {
    double m = 0.0;
    for (std::size_t n = 0; n < 81; ++n) m = std::max(m, std::abs(a.data()[n] - b.data()[n]));
    return m;
}

namespace {

Eigen::Matrix3d to_eigen(const Tensor2& t) {
    Eigen::Matrix3d m;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m(i, j) = t(i, j);
    return m;
}

Tensor2 from_eigen(const Eigen::Matrix3d& m) {
    Tensor2 t;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) t(i, j) = m(i, j);
    return t;
}

void require_positive_det(const Tensor2& f) {
    const double d = f.det();
    if (!f.is_finite() || !(d > 0.0)) {
        throw InvalidKinematics("deformation gradient must have det > 0 (det = " + std::to_string(d) + ")");
    }
}

} // namespace

Tensor2 right_stretch(const Tensor2& f) {
    require_positive_det(f);
    const Eigen::Matrix3d c = to_eigen(f.transpose() * f);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(c);
    if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0) {
        throw InvalidKinematics("FᵀF is not positive definite");
    }
    const Eigen::Matrix3d v = eig.eigenvectors();
    const Eigen::Vector3d lam = eig.eigenvalues().cwiseSqrt();
    Eigen::Matrix3d u = v * lam.asDiagonal() * v.transpose();
    return from_eigen(0.5 * (u + u.transpose()));
}

Tensor2 polar_rotation(const Tensor2& f) {
    const Tensor2 u = right_stretch(f);
    return f * u.inverse();
}

Tensor2 pushforward_stress(const Tensor2& f, const Tensor2& s, double j) {
    if (!(j > 0.0)) throw InvalidKinematics("pushforward requires J > 0");
    return (f * s * f.transpose()) * (1.0 / j);
}

Tensor2 pullback_stress(const Tensor2& f, const Tensor2& sigma, double j) {
    if (!(j > 0.0)) throw InvalidKinematics("pullback requires J > 0");
    const Tensor2 fi = f.inverse();
    return (fi * sigma * fi.transpose()) * j;
}

Tensor4 pushforward_elasticity(const Tensor2& f, const Tensor4& c, double j) {
    if (!(j > 0.0)) throw InvalidKinematics("pushforward requires J > 0");
    return transform(f, c) * (1.0 / j);
}

} // namespace cmv
