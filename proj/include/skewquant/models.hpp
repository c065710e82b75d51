// Copyright 2026 The skewquant Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <skewquant/model.hpp>

#include <functional>
#include <memory>
#include <optional>
#include <utility>

namespace skewquant {

// ---------------------------------------------------------------------------
// Dirac symbol utilities

struct DiracSymbolParams {
  double m = 1.0, c = 1.0, e = 1.0;
  std::function<double(const Vec3&)> phi = [](const Vec3&) { return 0.0; };
  std::function<Vec3(const Vec3&)> A = [](const Vec3&) { return Vec3::Zero(); };
  // Optional analytic fields; otherwise E = -grad phi and B = curl A by central differences.
  std::function<Vec3(const Vec3&)> E_field;
  std::function<Vec3(const Vec3&)> B_field;
};

enum class Branch { plus, minus };

namespace detail {

inline Vec3 fd_gradient(const std::function<double(const Vec3&)>& f, const Vec3& x) {
  const VecX g = central_gradient([&](const VecX& y) { return f(Vec3(y)); }, VecX(x));
  return Vec3(g);
}

inline Vec3 fd_curl(const std::function<Vec3(const Vec3&)>& A, const Vec3& x) {
  Eigen::Matrix3d J;  // J(i, j) = dA_i / dx_j
  for (int j = 0; j < 3; ++j) {
    const double h = 1e-6 * (1.0 + std::abs(x[j]));
    Vec3 xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    J.col(j) = (A(xp) - A(xm)) / (2.0 * h);
  }
  return {J(2, 1) - J(1, 2), J(0, 2) - J(2, 0), J(1, 0) - J(0, 1)};
}

inline Vec3 kinetic_momentum(const DiracSymbolParams& prm, const Vec3& p, const Vec3& x) {
  return prm.c * p - prm.e * prm.A(x);
}

}  // namespace detail

inline Vec3 electric_field(const DiracSymbolParams& prm, const Vec3& x) {
  return prm.E_field ? prm.E_field(x) : Vec3(-detail::fd_gradient(prm.phi, x));
}

inline Vec3 magnetic_field(const DiracSymbolParams& prm, const Vec3& x) {
  return prm.B_field ? prm.B_field(x) : detail::fd_curl(prm.A, x);
}

// eps = sqrt((c p - e A)^2 + m^2 c^4)
inline double dirac_epsilon(const DiracSymbolParams& prm, const Vec3& p, const Vec3& x) {
  const double mc2 = prm.m * prm.c * prm.c;
  return std::hypot(detail::kinetic_momentum(prm, p, x).norm(), mc2);
}

// (H+, H-) = e phi +- eps; each branch is doubly degenerate in the full symbol.
inline std::pair<double, double> dirac_hamiltonians(const DiracSymbolParams& prm, const PhasePoint& pt) {
  const Vec3 p(pt.p.head<3>()), x(pt.x.head<3>());
  const double eps = dirac_epsilon(prm, p, x);
  const double pot = prm.e * prm.phi(x);
  return {pot + eps, pot - eps};
}

// B = -+ (e c / eps) B + e c / (eps (eps + m c^2)) (c p - e A) x E
inline AlgebraVector dirac_precession_field(const DiracSymbolParams& prm, Branch branch, const PhasePoint& pt) {
  const Vec3 p(pt.p.head<3>()), x(pt.x.head<3>());
  const double eps = dirac_epsilon(prm, p, x);
  const double mc2 = prm.m * prm.c * prm.c;
  const double sign = branch == Branch::plus ? -1.0 : 1.0;
  const Vec3 k = detail::kinetic_momentum(prm, p, x);
  return sign * (prm.e * prm.c / eps) * magnetic_field(prm, x) +
         (prm.e * prm.c / (eps * (eps + mc2))) * k.cross(electric_field(prm, x));
}

// The symbol H+ or H- as a model; gradients by finite differences.
class DiracModel final : public HamiltonianModel {
 public:
  DiracModel(DiracSymbolParams prm, Branch branch) : prm_(std::move(prm)), branch_(branch) {}
  [[nodiscard]] std::string name() const override { return branch_ == Branch::plus ? "dirac+" : "dirac-"; }
  [[nodiscard]] int dimension() const override { return 3; }
  [[nodiscard]] double hamiltonian(const PhasePoint& pt) const override {
    const auto [hp, hm] = dirac_hamiltonians(prm_, pt);
    return branch_ == Branch::plus ? hp : hm;
  }
  [[nodiscard]] AlgebraVector precession_field(const PhasePoint& pt) const override {
    return dirac_precession_field(prm_, branch_, pt);
  }

 private:
  DiracSymbolParams prm_;
  Branch branch_;
};

namespace detail {

inline Eigen::Matrix3d cross_matrix(const Vec3& v) {
  Eigen::Matrix3d m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

// Jacobian of f(p, x) L for a scalar f with the given gradients.
inline FieldJacobian scaled_angular_jacobian(const PhasePoint& pt, double f, const Vec3& df_dp, const Vec3& df_dx) {
  const Vec3 p(pt.p), x(pt.x), L = x.cross(p);
  return {Eigen::MatrixXd(L * df_dp.transpose() + f * cross_matrix(x)),
          Eigen::MatrixXd(L * df_dx.transpose() - f * cross_matrix(p))};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Harmonic oscillator with spin-orbit field B = kappa L

class HarmonicOscillatorModel final : public SphericalModel {
 public:
  HarmonicOscillatorModel(double m, double omega, double kappa) : m_(m), omega_(omega), kappa_(kappa) {
    if (!(m > 0) || !(omega > 0)) throw DomainError("oscillator needs m > 0 and omega > 0");
    if (!std::isfinite(kappa)) throw DomainError("oscillator coupling kappa must be finite");
  }
  // kappa = omega^2 / (2 m c^2), the nonrelativistic Thomas term.
  static HarmonicOscillatorModel thomas(double m, double omega, double c) {
    return {m, omega, omega * omega / (2.0 * m * c * c)};
  }

  [[nodiscard]] std::string name() const override { return "ho"; }
  [[nodiscard]] double mass() const { return m_; }
  [[nodiscard]] double omega() const { return omega_; }
  [[nodiscard]] double kappa() const { return kappa_; }

  [[nodiscard]] double hamiltonian(const PhasePoint& pt) const override {
    return pt.p.squaredNorm() / (2 * m_) + 0.5 * m_ * omega_ * omega_ * pt.x.squaredNorm();
  }
  [[nodiscard]] VecX grad_p(const PhasePoint& pt) const override { return pt.p / m_; }
  [[nodiscard]] VecX grad_x(const PhasePoint& pt) const override { return (m_ * omega_ * omega_) * pt.x; }
  [[nodiscard]] AlgebraVector precession_field(const PhasePoint& pt) const override {
    return kappa_ * angular_momentum(pt);
  }
  [[nodiscard]] FieldJacobian precession_jacobian(const PhasePoint& pt) const override {
    return detail::scaled_angular_jacobian(pt, kappa_, Vec3::Zero(), Vec3::Zero());
  }

  [[nodiscard]] double effective_energy(double L, double r) const override {
    return L * L / (2 * m_ * r * r) + 0.5 * m_ * omega_ * omega_ * r * r;
  }
  // long double: p_r^2 is a small difference of large terms near circular orbits
  [[nodiscard]] double radial_momentum_squared(double E, double L, double r) const override {
    const long double m = m_, w = omega_, rr = static_cast<long double>(r) * r;
    return static_cast<double>(2 * m * E - m * m * w * w * rr - static_cast<long double>(L) * L / rr);
  }

 private:
  double m_, omega_, kappa_;
};

// ---------------------------------------------------------------------------
// Relativistic Kepler problem H = -e^2/r + sqrt(c^2 p^2 + m^2 c^4)

class KeplerModel final : public SphericalModel {
 public:
  KeplerModel(double m, double c, double e, double r_guard = 0.0) : m_(m), c_(c), e_(e), r_guard_(r_guard) {
    if (!(m > 0) || !(c > 0) || !(e > 0)) throw DomainError("Kepler model needs m, c, e > 0");
    if (!(r_guard >= 0)) throw DomainError("Kepler collision guard must be non-negative");
    prm_.m = m, prm_.c = c, prm_.e = e;
    prm_.phi = [e](const Vec3& x) { return -e / x.norm(); };
    prm_.E_field = [e](const Vec3& x) {
      const double r = x.norm();
      return Vec3(-e * x / (r * r * r));
    };
    prm_.B_field = [](const Vec3&) { return Vec3::Zero(); };
  }
  // Natural units m = c = 1 with e^2 = alpha_s.
  static KeplerModel natural(double alpha_s, double r_guard = 0.0) { return {1.0, 1.0, std::sqrt(alpha_s), r_guard}; }

  [[nodiscard]] std::string name() const override { return "kepler"; }
  [[nodiscard]] double mass() const { return m_; }
  [[nodiscard]] double light_speed() const { return c_; }
  [[nodiscard]] double charge() const { return e_; }
  [[nodiscard]] double rest_energy() const { return m_ * c_ * c_; }
  [[nodiscard]] double alpha_s() const { return e_ * e_ / c_; }  // hbar = 1
  [[nodiscard]] const DiracSymbolParams& dirac_params() const { return prm_; }

  [[nodiscard]] double epsilon(const PhasePoint& pt) const { return std::hypot(c_ * pt.p.norm(), rest_energy()); }

  [[nodiscard]] double hamiltonian(const PhasePoint& pt) const override { return -e_ * e_ / pt.x.norm() + epsilon(pt); }
  [[nodiscard]] VecX grad_p(const PhasePoint& pt) const override { return (c_ * c_ / epsilon(pt)) * pt.p; }
  [[nodiscard]] VecX grad_x(const PhasePoint& pt) const override {
    const double r = pt.x.norm();
    return (e_ * e_ / (r * r * r)) * pt.x;
  }
  // e^2 c^2 / (eps (eps + m c^2)) L / r^3, the + branch of the Dirac field.
  [[nodiscard]] AlgebraVector precession_field(const PhasePoint& pt) const override {
    const double eps = epsilon(pt);
    const double r = pt.x.norm();
    return (e_ * e_ * c_ * c_ / (eps * (eps + rest_energy()) * r * r * r)) * angular_momentum(pt);
  }
  [[nodiscard]] FieldJacobian precession_jacobian(const PhasePoint& pt) const override {
    const double eps = epsilon(pt), mc2 = rest_energy();
    const double r = pt.x.norm();
    const double f = e_ * e_ * c_ * c_ / (eps * (eps + mc2) * r * r * r);
    const Vec3 df_dp = -f * (2 * eps + mc2) / (eps * (eps + mc2)) * (c_ * c_ / eps) * Vec3(pt.p);
    const Vec3 df_dx = -3.0 * f / (r * r) * Vec3(pt.x);
    return detail::scaled_angular_jacobian(pt, f, df_dp, df_dx);
  }
  void check_domain(const PhasePoint& pt) const override {
    if (pt.x.norm() < r_guard_) throw DomainError("Kepler orbit entered r < r_min (collision guard)");
  }

  [[nodiscard]] double effective_energy(double L, double r) const override {
    return -e_ * e_ / r + std::hypot(c_ * L / r, rest_energy());
  }
  [[nodiscard]] double radial_momentum_squared(double E, double L, double r) const override {
    const long double mc2 = rest_energy(), c = c_, lr = r;
    const long double u = static_cast<long double>(e_) * e_ / lr;
    const long double lL = L;
    return static_cast<double>((E - mc2 + u) * (E + mc2 + u) / (c * c) - lL * lL / (lr * lr));
  }
  [[nodiscard]] double escape_energy() const override { return rest_energy(); }
  [[nodiscard]] double collision_angular_momentum() const override { return e_ * e_ / c_; }
  [[nodiscard]] double reference_energy() const override { return rest_energy(); }

 private:
  double m_, c_, e_, r_guard_;
  DiracSymbolParams prm_;
};

// ---------------------------------------------------------------------------
// Generators of the angular flows and their fields

// A = |L| with B_L = L/|L|; the flow rotates x and p about L at unit rate.
class AngularMomentumFlow final : public HamiltonianModel {
 public:
  [[nodiscard]] std::string name() const override { return "L"; }
  [[nodiscard]] int dimension() const override { return 3; }
  [[nodiscard]] double hamiltonian(const PhasePoint& pt) const override { return angular_momentum(pt).norm(); }
  [[nodiscard]] VecX grad_p(const PhasePoint& pt) const override {
    return VecX(axis(pt).cross(Vec3(pt.x.head<3>())));
  }
  [[nodiscard]] VecX grad_x(const PhasePoint& pt) const override {
    return VecX(Vec3(pt.p.head<3>()).cross(axis(pt)));
  }
  [[nodiscard]] AlgebraVector precession_field(const PhasePoint& pt) const override { return axis(pt); }
  [[nodiscard]] FieldJacobian precession_jacobian(const PhasePoint& pt) const override {
    const Vec3 n = axis(pt);
    const double len = angular_momentum(pt).norm();
    const Eigen::Matrix3d proj = (Eigen::Matrix3d::Identity() - n * n.transpose()) / len;
    return {Eigen::MatrixXd(proj * detail::cross_matrix(Vec3(pt.x))),
            Eigen::MatrixXd(-proj * detail::cross_matrix(Vec3(pt.p)))};
  }

 private:
  static Vec3 axis(const PhasePoint& pt) {
    const Vec3 L = angular_momentum(pt);
    const double n = L.norm();
    if (n == 0.0) throw DomainError("L flow undefined where L = 0");
    return L / n;
  }
};

// A = L_z with a constant field, e_z by default.  Any other field gives the
// broken control pair.
class AxialFlow final : public HamiltonianModel {
 public:
  explicit AxialFlow(Vec3 field = Vec3::UnitZ()) : field_(std::move(field)) {}
  [[nodiscard]] std::string name() const override { return "M"; }
  [[nodiscard]] int dimension() const override { return 3; }
  [[nodiscard]] double hamiltonian(const PhasePoint& pt) const override { return angular_momentum(pt).z(); }
  [[nodiscard]] VecX grad_p(const PhasePoint& pt) const override {
    VecX g(3);
    g << -pt.x[1], pt.x[0], 0.0;
    return g;
  }
  [[nodiscard]] VecX grad_x(const PhasePoint& pt) const override {
    VecX g(3);
    g << pt.p[1], -pt.p[0], 0.0;
    return g;
  }
  [[nodiscard]] AlgebraVector precession_field(const PhasePoint&) const override { return field_; }
  [[nodiscard]] FieldJacobian precession_jacobian(const PhasePoint&) const override {
    return {Eigen::MatrixXd::Zero(3, 3), Eigen::MatrixXd::Zero(3, 3)};
  }

 private:
  Vec3 field_;
};

// ---------------------------------------------------------------------------
// Closed-form reference data (hbar = 1)

inline double ho_action_hamiltonian(double omega, double I_r, double L) { return omega * (2 * I_r + L); }

inline double ho_energy(double omega, double kappa, int n_r, int l, HalfInt m_s) {
  const double ms = m_s.value();
  return omega * (2 * n_r + l + 1.5) + ms * kappa * (l + 0.5 + ms);
}

struct KeplerOrbitConstants {
  double C = 0.0, A = 0.0, gamma = 0.0;
};

// 1/r = C + A cos(gamma phi), phi measured from perihelion.
inline KeplerOrbitConstants kepler_orbit_constants(double m, double c, double e, double E, double L) {
  const double e2 = e * e, cL2 = c * c * L * L;
  const double k = cL2 - e2 * e2;
  if (!(k > 0)) throw DomainError("collision regime: c L <= e^2");
  const double mc2 = m * c * c;
  KeplerOrbitConstants out;
  out.C = e2 * E / k;
  out.A = std::sqrt(std::max(0.0, cL2 * E * E - k * mc2 * mc2)) / k;
  out.gamma = std::sqrt(k) / (c * L);
  return out;
}

inline double kepler_action_hamiltonian(double m, double c, double e, double I_r, double L) {
  const double a = e * e * e * e / (c * c);
  if (!(L * L > a)) throw DomainError("collision regime: L^2 <= e^4/c^2");
  const double d = I_r + std::sqrt(L * L - a);
  return m * c * c / std::sqrt(1.0 + a / (d * d));
}

inline double fine_structure_energy(int n_r, int l, HalfInt m_s, double alpha_s, double mc2) {
  if (l < 0 || std::abs(m_s.twice()) != 1) throw DomainError("fine structure needs l >= 0 and m_s = +-1/2");
  const double ms = m_s.value();
  const double L = l + 0.5 + ms;
  const double I_r = n_r + 0.5 + ms;
  if (I_r < 0 || !(L > alpha_s)) {
    throw DomainError("inadmissible tuple (n_r=" + std::to_string(n_r) + ", l=" + std::to_string(l) +
                      ", m_s=" + m_s.str() + ")");
  }
  const double d = I_r + std::sqrt(L * L - alpha_s * alpha_s);
  return mc2 / std::sqrt(1.0 + alpha_s * alpha_s / (d * d));
}

inline double sommerfeld_energy(int n_r, int l, double alpha_s, double mc2) {
  if (n_r < 0 || l < 1) throw DomainError("Sommerfeld levels need n_r >= 0 and l >= 1");
  const double d = n_r + std::sqrt(double(l) * l - alpha_s * alpha_s);
  return mc2 / std::sqrt(1.0 + alpha_s * alpha_s / (d * d));
}

}  // namespace skewquant
