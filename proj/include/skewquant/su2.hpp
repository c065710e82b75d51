// Copyright 2026 The skewquant Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <skewquant/core.hpp>

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <complex>
#include <vector>

namespace skewquant {

using Complex = std::complex<double>;
using AlgebraVector = Vec3;  // b  <->  (i/2) sigma.b

inline constexpr double kUnitTolerance = 1e-12;

// g = q0 1 - i (q1 s1 + q2 s2 + q3 s3), stored as a quaternion.
struct SU2Element {
  double q0 = 1.0, q1 = 0.0, q2 = 0.0, q3 = 0.0;

  static SU2Element identity() { return {}; }
  static SU2Element from_scalar_vector(double s, const Vec3& v) { return {s, v.x(), v.y(), v.z()}; }

  [[nodiscard]] Vec3 vec() const { return {q1, q2, q3}; }
  [[nodiscard]] double norm_squared() const { return q0 * q0 + q1 * q1 + q2 * q2 + q3 * q3; }
  [[nodiscard]] bool is_unit(double tol = kUnitTolerance) const { return std::abs(norm_squared() - 1.0) <= tol; }

  [[nodiscard]] SU2Element normalized() const {
    const double n = std::sqrt(norm_squared());
    return {q0 / n, q1 / n, q2 / n, q3 / n};
  }
  [[nodiscard]] SU2Element inverse() const { return {q0, -q1, -q2, -q3}; }
  SU2Element operator-() const { return {-q0, -q1, -q2, -q3}; }

  // 2x2 complex matrix form.
  [[nodiscard]] Eigen::Matrix2cd matrix() const {
    Eigen::Matrix2cd m;
    m << Complex(q0, -q3), Complex(-q2, -q1),
         Complex(q2, -q1), Complex(q0, q3);
    return m;
  }

  // Largest absolute component difference.
  [[nodiscard]] double distance(const SU2Element& o) const {
    return std::max({std::abs(q0 - o.q0), std::abs(q1 - o.q1), std::abs(q2 - o.q2), std::abs(q3 - o.q3)});
  }
  // Distance modulo the centre {+1, -1}.
  [[nodiscard]] double projective_distance(const SU2Element& o) const {
    return std::min(distance(o), distance(-o));
  }
};

// Group product; the Hamilton product of the quaternions.
inline SU2Element operator*(const SU2Element& a, const SU2Element& b) {
  const Vec3 av = a.vec(), bv = b.vec();
  const Vec3 v = a.q0 * bv + b.q0 * av + av.cross(bv);
  return {a.q0 * b.q0 - av.dot(bv), v.x(), v.y(), v.z()};
}

inline SU2Element operator-(const SU2Element& a, const SU2Element& b) {
  return {a.q0 - b.q0, a.q1 - b.q1, a.q2 - b.q2, a.q3 - b.q3};
}

// exp(-(i/2) sigma.v t)
inline SU2Element exp_algebra(const AlgebraVector& v, double t) {
  if (!v.allFinite() || !std::isfinite(t)) throw DomainError("exp_algebra: non-finite generator");
  const double half = 0.5 * v.norm() * t;
  // sin(half)/half stays accurate near zero
  const double sinc = std::abs(half) < 1e-8 ? 1.0 - half * half / 6.0 : std::sin(half) / half;
  return SU2Element::from_scalar_vector(std::cos(half), (0.5 * t * sinc) * v);
}

struct Rotation3 {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();

  Vec3 operator*(const Vec3& v) const { return m * v; }
  Rotation3 operator*(const Rotation3& o) const { return {m * o.m}; }
  [[nodiscard]] bool is_valid(double tol = 1e-10) const {
    return (m.transpose() * m - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= tol &&
           std::abs(m.determinant() - 1.0) <= tol;
  }
};

// phi(g): (phi(g) z).sigma = g (z.sigma) g^-1.
inline Rotation3 covering_map(const SU2Element& g) {
  if (!g.is_unit()) {
    throw DomainError("covering_map: element is not unit norm (|q|^2 = " + std::to_string(g.norm_squared()) + ")");
  }
  const double w = g.q0, x = g.q1, y = g.q2, z = g.q3;
  Rotation3 r;
  r.m << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
         2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
         2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

struct AxisAngle {
  Vec3 axis = Vec3::UnitZ();
  double alpha = 0.0;      // in [0, 4pi)
  bool degenerate = false; // g = +-1, axis arbitrary
};

// g = exp(-(i/2) alpha sigma.n).  Of the two representatives (n, alpha) and
// (-n, 4pi - alpha) the one with n in the upper hemisphere is returned
// (n_z > 0, ties broken by n_y, then n_x).
inline AxisAngle axis_angle_of(const SU2Element& g, double degenerate_tol = 1e-14) {
  if (!g.is_unit(1e-10)) throw DomainError("axis_angle_of: element is not unit norm");
  const Vec3 v = g.vec();
  const double s = v.norm();
  AxisAngle out;
  if (s <= degenerate_tol) {
    out.degenerate = true;
    out.alpha = g.q0 > 0 ? 0.0 : kTwoPi;
    return out;
  }
  out.axis = v / s;
  const bool flip = out.axis.z() != 0 ? out.axis.z() < 0 : (out.axis.y() != 0 ? out.axis.y() < 0 : out.axis.x() < 0);
  if (flip) out.axis = -out.axis;
  out.alpha = reduce_angle(2.0 * std::atan2(flip ? -s : s, g.q0), kFourPi);
  return out;
}

// Rotation angle of g about a prescribed unit axis, in [0, 4pi).  Only
// meaningful when the vector part of g is (anti)parallel to the axis.
inline double angle_about(const SU2Element& g, const Vec3& axis) {
  return reduce_angle(2.0 * std::atan2(g.vec().dot(axis.normalized()), g.q0), kFourPi);
}

inline void require_spin(HalfInt s) {
  if (s.twice() < 0) throw DomainError("spin must be non-negative, got " + s.str());
}

// Spin-s generators S_x, S_y, S_z in the basis m = s, s-1, ..., -s.
struct SpinMatrices {
  Eigen::MatrixXcd x, y, z;
};

inline SpinMatrices spin_matrices(HalfInt s) {
  require_spin(s);
  const int dim = s.twice() + 1;
  const double sv = s.value();
  Eigen::MatrixXcd plus = Eigen::MatrixXcd::Zero(dim, dim);
  Eigen::MatrixXcd sz = Eigen::MatrixXcd::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) {
    const double m = sv - k;
    sz(k, k) = m;
    // <m+1| S+ |m> = sqrt(s(s+1) - m(m+1))
    if (k > 0) plus(k - 1, k) = std::sqrt(sv * (sv + 1) - m * (m + 1));
  }
  const Eigen::MatrixXcd minus = plus.adjoint();
  return {(plus + minus) / 2.0, (plus - minus) / Complex(0, 2), sz};
}

// pi_s(g) = exp(-i alpha n.S), with (n, alpha) taken from g.
inline Eigen::MatrixXcd representation_matrix(HalfInt s, const SU2Element& g) {
  const AxisAngle aa = axis_angle_of(g);
  const SpinMatrices S = spin_matrices(s);
  const Vec3 v = aa.alpha * aa.axis;
  const Eigen::MatrixXcd gen = v.x() * S.x + v.y() * S.y + v.z() * S.z;
  return (Complex(0, -1) * gen).exp();
}

// exp(-i m alpha), m = -s..s, from the axis-angle form.
inline std::vector<Complex> spin_s_rep_eigenphases(HalfInt s, const SU2Element& g) {
  require_spin(s);
  const double alpha = axis_angle_of(g).alpha;
  std::vector<Complex> out;
  for (int tm = -s.twice(); tm <= s.twice(); tm += 2) out.push_back(std::polar(1.0, -0.5 * tm * alpha));
  return out;
}

// Same multiset by diagonalising the representation matrix.
inline std::vector<Complex> spin_s_rep_eigenphases_matrix(HalfInt s, const SU2Element& g) {
  const Eigen::MatrixXcd m = representation_matrix(s, g);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(m, false);
  if (solver.info() != Eigen::Success) throw NumericalError("eigen decomposition of representation matrix failed");
  const Eigen::VectorXcd ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

}  // namespace skewquant
