// Copyright 2026 The skewquant Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <compare>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace skewquant {

using Vec3 = Eigen::Vector3d;
using VecX = Eigen::VectorXd;

// Precondition or admissibility violation (bad input, no bound motion, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// An algorithm failed on admissible input: step underflow, quadrature or
// root-finder non-convergence.  `time` is the integration time when known.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, double time = std::nan(""))
      : std::runtime_error(what), time_(time) {}
  [[nodiscard]] double time() const noexcept { return time_; }

 private:
  double time_;
};

struct PhasePoint {
  VecX p;
  VecX x;

  PhasePoint() = default;
  PhasePoint(VecX p_, VecX x_) : p(std::move(p_)), x(std::move(x_)) {
    if (p.size() != x.size()) throw DomainError("PhasePoint: p and x dimensions differ");
  }
  [[nodiscard]] int dim() const noexcept { return static_cast<int>(x.size()); }
  [[nodiscard]] bool finite() const noexcept { return p.allFinite() && x.allFinite(); }
};

inline PhasePoint make_point(const Vec3& p, const Vec3& x) { return PhasePoint(VecX(p), VecX(x)); }

// Angular momentum x × p of a three-dimensional phase point.
inline Vec3 angular_momentum(const PhasePoint& pt) {
  if (pt.dim() != 3) throw DomainError("angular momentum needs a 3-dimensional phase point");
  return Vec3(pt.x.head<3>()).cross(Vec3(pt.p.head<3>()));
}

// Half-integer quantum number stored as twice its value.
class HalfInt {
 public:
  constexpr HalfInt() = default;
  static constexpr HalfInt from_twice(int twice) { return HalfInt(twice); }
  static constexpr HalfInt integer(int n) { return HalfInt(2 * n); }

  // Accepts values within 1e-9 of a multiple of 1/2.
  static HalfInt from_double(double v) {
    const double t = 2.0 * v;
    const double r = std::round(t);
    if (!std::isfinite(v) || std::abs(t - r) > 1e-9) {
      throw DomainError("value " + std::to_string(v) + " is not a half-integer");
    }
    return HalfInt(static_cast<int>(r));
  }

  [[nodiscard]] constexpr int twice() const noexcept { return twice_; }
  [[nodiscard]] constexpr double value() const noexcept { return 0.5 * twice_; }
  [[nodiscard]] constexpr bool is_integer() const noexcept { return twice_ % 2 == 0; }

  constexpr HalfInt operator-() const { return HalfInt(-twice_); }
  constexpr HalfInt operator+(HalfInt o) const { return HalfInt(twice_ + o.twice_); }
  constexpr HalfInt operator-(HalfInt o) const { return HalfInt(twice_ - o.twice_); }
  constexpr auto operator<=>(const HalfInt&) const = default;

  [[nodiscard]] std::string str() const {
    if (is_integer()) return std::to_string(twice_ / 2);
    return std::to_string(twice_) + "/2";
  }

 private:
  constexpr explicit HalfInt(int twice) : twice_(twice) {}
  int twice_ = 0;
};

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kFourPi = 4.0 * kPi;

// Reduce an angle to [0, period).
inline double reduce_angle(double a, double period) {
  double r = std::fmod(a, period);
  if (r < 0) r += period;
  if (r >= period) r -= period;
  return r;
}

}  // namespace skewquant
