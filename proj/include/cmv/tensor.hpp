#pragma once

// Dense 3D second- and fourth-order tensors for the mixture equations.
//
// Storage is flat and row-major: Tensor2(i,j) -> [3*i + j],
// Tensor4(i,j,k,l) -> [27*i + 9*j + 3*k + l]. Index 0,1,2 map to (r, theta, z)
// for the vessel wall kinematics used elsewhere in the library.

#include <array>
#include <cstddef>

namespace cmv {

using Vec3 = std::array<double, 3>;

class Tensor2 {
public:
    constexpr Tensor2() : v_{} {}
    explicit constexpr Tensor2(const std::array<double, 9>& v) : v_(v) {}

    static constexpr Tensor2 identity() { return diag(1.0, 1.0, 1.0); }
    static constexpr Tensor2 zero() { return Tensor2{}; }
    static constexpr Tensor2 diag(double a, double b, double c) {
        return Tensor2({a, 0, 0, 0, b, 0, 0, 0, c});
    }
    static Tensor2 outer(const Vec3& a, const Vec3& b);

    constexpr double& operator()(std::size_t i, std::size_t j) { return v_[3 * i + j]; }
    constexpr double operator()(std::size_t i, std::size_t j) const { return v_[3 * i + j]; }

    const std::array<double, 9>& data() const { return v_; }

    Tensor2& operator+=(const Tensor2& o);
    Tensor2& operator-=(const Tensor2& o);
    Tensor2& operator*=(double a);

    Tensor2 transpose() const;
    double trace() const;
    double det() const;
    /// Throws InvalidKinematics when |det| underflows.
    Tensor2 inverse() const;
    bool is_finite() const;

private:
    std::array<double, 9> v_;
};

Tensor2 operator+(Tensor2 a, const Tensor2& b);
Tensor2 operator-(Tensor2 a, const Tensor2& b);
Tensor2 operator-(const Tensor2& a);
Tensor2 operator*(Tensor2 a, double s);
Tensor2 operator*(double s, Tensor2 a);
/// Matrix product.
Tensor2 operator*(const Tensor2& a, const Tensor2& b);
Vec3 operator*(const Tensor2& a, const Vec3& x);

/// A : B = A_ij B_ij
double ddot(const Tensor2& a, const Tensor2& b);
double max_abs(const Tensor2& a);
/// Largest componentwise |a - b|.
double max_abs_diff(const Tensor2& a, const Tensor2& b);

class Tensor4 {
public:
    constexpr Tensor4() : v_{} {}

    static constexpr std::size_t index(std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
        return 27 * i + 9 * j + 3 * k + l;
    }

    constexpr double& operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
        return v_[index(i, j, k, l)];
    }
    constexpr double operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
        return v_[index(i, j, k, l)];
    }

    const std::array<double, 81>& data() const { return v_; }
    std::array<double, 81>& data() { return v_; }

    Tensor4& operator+=(const Tensor4& o);
    Tensor4& operator*=(double a);

    bool is_finite() const;

private:
    std::array<double, 81> v_;
};

Tensor4 operator+(Tensor4 a, const Tensor4& b);
Tensor4 operator*(Tensor4 a, double s);
Tensor4 operator*(double s, Tensor4 a);

/// (A ⊗ B)_ijkl = A_ij B_kl
Tensor4 dyad(const Tensor2& a, const Tensor2& b);
/// Mixed dyadic product (A ⊙ B)_ijkl = A_ik B_jl.
Tensor4 mixed_dyadic(const Tensor2& a, const Tensor2& b);

/// (A : 𝔹)_kl = A_ij 𝔹_ijkl
Tensor2 ddot(const Tensor2& a, const Tensor4& b);
/// (𝔸 : B)_ij = 𝔸_ijkl B_kl
Tensor2 ddot(const Tensor4& a, const Tensor2& b);
/// (𝔸 : 𝔹)_ijkl = 𝔸_ijmn 𝔹_mnkl
Tensor4 ddot(const Tensor4& a, const Tensor4& b);

/// Componentwise A_im A_jn A_kp A_lq C_mnpq, i.e. (A⊙A) : C : (Aᵀ⊙Aᵀ),
/// evaluated as four single-index contractions.
Tensor4 transform(const Tensor2& a, const Tensor4& c);

double max_abs(const Tensor4& a);
double max_abs_diff(const Tensor4& a, const Tensor4& b);

/// Rotation factor R of F = R·U. Throws InvalidKinematics unless det F > 0.
Tensor2 polar_rotation(const Tensor2& f);
/// Right stretch U = sqrt(FᵀF).
Tensor2 right_stretch(const Tensor2& f);

/// σ = (1/J) F S Fᵀ
Tensor2 pushforward_stress(const Tensor2& f, const Tensor2& s, double j);
/// S = J F⁻¹ σ F⁻ᵀ
Tensor2 pullback_stress(const Tensor2& f, const Tensor2& sigma, double j);
/// 𝕔 = (1/J) (F⊙F) : ℂ : (Fᵀ⊙Fᵀ)
Tensor4 pushforward_elasticity(const Tensor2& f, const Tensor4& c, double j);

} // namespace cmv
