#pragma once

// Spherical harmonics, Wigner d/D matrices and Euler-angle rotations.
//
// Conventions (all fixed by the rotation rule Y_m(R v) = sum_m' Y_m'(v) D[m, m']):
//   * Y_l^m is the orthonormal complex harmonic with the Condon-Shortley phase.
//   * d^l(beta) is the standard real little-d matrix, d^1_{1,0} = -sin(beta)/sqrt(2).
//   * D[m', m] = exp(-i m' alpha) d[m', m](beta) exp(-i m gamma).
//   * rotation_from_euler composes R_z(-alpha) R_y(beta) R_z(-gamma) (z turns are
//     clockwise), which is the rotation whose action on Y is the D above.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "rotsig/error.hpp"

namespace rotsig {

inline constexpr int kMaxBandLimit = 64;

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar>
using ComplexMatrix = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using RealMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Flat index of (l, m) in an l-major table: l^2 + l + m.
constexpr int lm_index(int l, int m) { return l * l + l + m; }
/// Number of (l, m) pairs with l <= band_limit.
constexpr int lm_count(int band_limit) { return (band_limit + 1) * (band_limit + 1); }

inline void check_band_limit(int band_limit) {
  if (band_limit < 0 || band_limit > kMaxBandLimit) {
    throw ConfigError("band limit " + std::to_string(band_limit) + " outside [0, " +
                      std::to_string(kMaxBandLimit) + "]");
  }
}

template <typename Scalar = double>
class UnitVector {
 public:
  explicit UnitVector(const Vector3<Scalar>& v) {
    if (!v.allFinite()) throw DomainError("UnitVector: non-finite coordinate");
    const Scalar n = v.norm();
    if (!(n > Scalar(0))) throw DomainError("UnitVector: zero-norm vector");
    v_ = v / n;
  }
  UnitVector(Scalar x, Scalar y, Scalar z) : UnitVector(Vector3<Scalar>(x, y, z)) {}

  Scalar x() const { return v_.x(); }
  Scalar y() const { return v_.y(); }
  Scalar z() const { return v_.z(); }
  const Vector3<Scalar>& vector() const { return v_; }

 private:
  Vector3<Scalar> v_;
};

/// ZYZ Euler angles, alpha and gamma in [0, 2pi), beta in [0, pi].
template <typename Scalar = double>
class EulerAngles {
 public:
  EulerAngles() = default;
  EulerAngles(Scalar alpha, Scalar beta, Scalar gamma) : alpha_(alpha), beta_(beta), gamma_(gamma) {
    constexpr Scalar two_pi = 2 * std::numbers::pi_v<Scalar>;
    if (!(alpha >= 0 && alpha < two_pi) || !(gamma >= 0 && gamma < two_pi) ||
        !(beta >= 0 && beta <= std::numbers::pi_v<Scalar>)) {
      throw DomainError("EulerAngles out of range");
    }
  }

  Scalar alpha() const { return alpha_; }
  Scalar beta() const { return beta_; }
  Scalar gamma() const { return gamma_; }

 private:
  Scalar alpha_ = 0;
  Scalar beta_ = 0;
  Scalar gamma_ = 0;
};

/// Y_l^m(v) for 0 <= l <= L, stored l-major (see lm_index).
template <typename Scalar = double>
class SphHarmTable {
 public:
  SphHarmTable(int band_limit, std::vector<std::complex<Scalar>> values)
      : band_limit_(band_limit), values_(std::move(values)) {}

  int band_limit() const { return band_limit_; }
  const std::complex<Scalar>& operator()(int l, int m) const { return values_[lm_index(l, m)]; }
  const std::vector<std::complex<Scalar>>& values() const { return values_; }

 private:
  int band_limit_;
  std::vector<std::complex<Scalar>> values_;
};

/// Degree-l Wigner D matrix; entry (m', m) lives at (m' + l, m + l).
template <typename Scalar = double>
class WignerD {
 public:
  WignerD(int degree, ComplexMatrix<Scalar> entries) : degree_(degree), entries_(std::move(entries)) {}

  int degree() const { return degree_; }
  std::complex<Scalar> operator()(int mp, int m) const { return entries_(mp + degree_, m + degree_); }
  const ComplexMatrix<Scalar>& matrix() const { return entries_; }

 private:
  int degree_;
  ComplexMatrix<Scalar> entries_;
};

namespace detail {

template <typename Scalar>
Scalar log_factorial(int n) {
  return static_cast<Scalar>(std::lgamma(static_cast<double>(n) + 1.0));
}

// Orthonormalised Legendre functions with the sin^m(theta) factor stripped:
// out[lm_index(l, m)] = Nlm P_l^m(x) / (1 - x^2)^{m/2} for m >= 0. Entries with
// m < 0 are left untouched. Nlm = sqrt((2l+1)/(4pi) (l-m)!/(l+m)!).
template <typename Scalar>
void reduced_normalized_legendre(int band_limit, Scalar x, std::vector<Scalar>& out) {
  out.assign(lm_count(band_limit), Scalar(0));
  Scalar pmm = Scalar(1) / std::sqrt(4 * std::numbers::pi_v<Scalar>);
  for (int m = 0; m <= band_limit; ++m) {
    if (m > 0) pmm *= -std::sqrt(Scalar(2 * m + 1) / Scalar(2 * m));
    out[lm_index(m, m)] = pmm;
    if (m == band_limit) break;
    Scalar prev2 = pmm;
    Scalar prev1 = x * std::sqrt(Scalar(2 * m + 3)) * pmm;
    out[lm_index(m + 1, m)] = prev1;
    for (int l = m + 2; l <= band_limit; ++l) {
      const Scalar a = std::sqrt(Scalar(4 * l * l - 1) / Scalar(l * l - m * m));
      const Scalar b = std::sqrt(Scalar((l - 1) * (l - 1) - m * m) / Scalar(4 * (l - 1) * (l - 1) - 1));
      const Scalar cur = a * (x * prev1 - b * prev2);
      out[lm_index(l, m)] = cur;
      prev2 = prev1;
      prev1 = cur;
    }
  }
}

// Jacobi polynomial P_n^{(a,b)}(x) by the standard three-term recurrence.
template <typename Scalar>
Scalar jacobi(int n, int a, int b, Scalar x) {
  if (n == 0) return Scalar(1);
  Scalar p0 = 1;
  Scalar p1 = Scalar(a + 1) + Scalar(a + b + 2) * (x - 1) / 2;
  for (int k = 2; k <= n; ++k) {
    const Scalar s = Scalar(2 * k + a + b);
    const Scalar c1 = 2 * Scalar(k) * Scalar(k + a + b) * (s - 2);
    const Scalar c2 = (s - 1) * (s * (s - 2) * x + Scalar(a * a - b * b));
    const Scalar c3 = 2 * Scalar(k + a - 1) * Scalar(k + b - 1) * s;
    const Scalar p2 = (c2 * p1 - c3 * p0) / c1;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

// d^l_{m',m}(beta) for m' >= |m|.
template <typename Scalar>
Scalar wigner_d_canonical(int l, int mp, int m, Scalar half_sin, Scalar half_cos, Scalar cos_beta) {
  const Scalar log_ratio = (log_factorial<Scalar>(l + mp) + log_factorial<Scalar>(l - mp) -
                            log_factorial<Scalar>(l + m) - log_factorial<Scalar>(l - m)) /
                           2;
  Scalar value = std::exp(log_ratio) * jacobi<Scalar>(l - mp, mp - m, mp + m, cos_beta);
  for (int i = 0; i < mp - m; ++i) value *= half_sin;
  for (int i = 0; i < mp + m; ++i) value *= half_cos;
  return ((mp - m) % 2 == 0) ? value : -value;
}

}  // namespace detail

/// Associated Legendre function P_l^m(x) with the Condon-Shortley phase,
/// e.g. P_1^1(x) = -sqrt(1 - x^2).
template <typename Scalar = double>
Scalar assoc_legendre(int l, int m, Scalar x) {
  if (l < 0 || m < 0 || m > l) throw DomainError("assoc_legendre: need 0 <= m <= l");
  if (!(std::abs(x) <= Scalar(1) + Scalar(1e-12))) throw DomainError("assoc_legendre: |x| > 1");
  if (l > kMaxBandLimit) throw ConfigError("assoc_legendre: degree above supported range");
  x = std::clamp(x, Scalar(-1), Scalar(1));
  std::vector<Scalar> table;
  detail::reduced_normalized_legendre<Scalar>(l, x, table);
  const Scalar log_norm = (std::log(Scalar(2 * l + 1) / (4 * std::numbers::pi_v<Scalar>)) +
                           detail::log_factorial<Scalar>(l - m) - detail::log_factorial<Scalar>(l + m)) /
                          2;
  const Scalar sin_pow = std::pow(std::sqrt(std::max(Scalar(0), Scalar(1) - x * x)), Scalar(m));
  return table[lm_index(l, m)] * sin_pow / std::exp(log_norm);
}

/// Legendre polynomial P_l(x).
template <typename Scalar = double>
Scalar legendre(int l, Scalar x) {
  if (l == 0) return Scalar(1);
  Scalar p0 = 1;
  Scalar p1 = x;
  for (int k = 2; k <= l; ++k) {
    const Scalar p2 = (Scalar(2 * k - 1) * x * p1 - Scalar(k - 1) * p0) / Scalar(k);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

template <typename Scalar = double>
SphHarmTable<Scalar> sph_harm_table(const UnitVector<Scalar>& v, int band_limit) {
  check_band_limit(band_limit);
  std::vector<Scalar> reduced;
  detail::reduced_normalized_legendre<Scalar>(band_limit, v.z(), reduced);

  std::vector<std::complex<Scalar>> values(lm_count(band_limit));
  // (x + iy)^m = sin^m(theta) e^{i m phi}, well defined at the poles.
  const std::complex<Scalar> xy(v.x(), v.y());
  std::complex<Scalar> xy_pow(1, 0);
  for (int m = 0; m <= band_limit; ++m) {
    const Scalar sign = (m % 2 == 0) ? Scalar(1) : Scalar(-1);
    for (int l = m; l <= band_limit; ++l) {
      const std::complex<Scalar> y = reduced[lm_index(l, m)] * xy_pow;
      values[lm_index(l, m)] = y;
      if (m > 0) values[lm_index(l, -m)] = sign * std::conj(y);
    }
    xy_pow *= xy;
  }
  return SphHarmTable<Scalar>(band_limit, std::move(values));
}

/// Real little-d matrix d^l(beta); entry (m', m) at (m' + l, m + l).
template <typename Scalar = double>
RealMatrix<Scalar> wigner_d_small(int l, Scalar beta) {
  check_band_limit(l);
  const Scalar half_sin = std::sin(beta / 2);
  const Scalar half_cos = std::cos(beta / 2);
  const Scalar cos_beta = std::cos(beta);
  RealMatrix<Scalar> d(2 * l + 1, 2 * l + 1);
  for (int mp = -l; mp <= l; ++mp) {
    for (int m = -l; m <= l; ++m) {
      // Reduce to mp >= |m| with d_{a,b} = (-1)^{a-b} d_{b,a} and d_{a,b} = (-1)^{a-b} d_{-a,-b}.
      int a = mp;
      int b = m;
      Scalar sign = 1;
      if (std::abs(b) > std::abs(a)) {
        std::swap(a, b);
        if ((a - b) % 2 != 0) sign = -sign;
      }
      if (a < 0) {
        a = -a;
        b = -b;
        if ((a - b) % 2 != 0) sign = -sign;
      }
      d(mp + l, m + l) = sign * detail::wigner_d_canonical<Scalar>(l, a, b, half_sin, half_cos, cos_beta);
    }
  }
  return d;
}

template <typename Scalar = double>
WignerD<Scalar> wigner_D(int l, const EulerAngles<Scalar>& angles) {
  const RealMatrix<Scalar> d = wigner_d_small<Scalar>(l, angles.beta());
  ComplexMatrix<Scalar> D(2 * l + 1, 2 * l + 1);
  for (int mp = -l; mp <= l; ++mp) {
    const std::complex<Scalar> left = std::polar(Scalar(1), -Scalar(mp) * angles.alpha());
    for (int m = -l; m <= l; ++m) {
      const std::complex<Scalar> right = std::polar(Scalar(1), -Scalar(m) * angles.gamma());
      D(mp + l, m + l) = left * d(mp + l, m + l) * right;
    }
  }
  return WignerD<Scalar>(l, std::move(D));
}

template <typename Scalar = double>
Matrix3<Scalar> rotation_z(Scalar angle) {
  const Scalar c = std::cos(angle);
  const Scalar s = std::sin(angle);
  Matrix3<Scalar> r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

template <typename Scalar = double>
Matrix3<Scalar> rotation_y(Scalar angle) {
  const Scalar c = std::cos(angle);
  const Scalar s = std::sin(angle);
  Matrix3<Scalar> r;
  r << c, 0, s, 0, 1, 0, -s, 0, c;
  return r;
}

template <typename Scalar = double>
Matrix3<Scalar> rotation_from_euler(const EulerAngles<Scalar>& angles) {
  return rotation_z<Scalar>(-angles.alpha()) * rotation_y<Scalar>(angles.beta()) *
         rotation_z<Scalar>(-angles.gamma());
}

}  // namespace rotsig
