// Copyright 2026 The skewquant Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <skewquant/core.hpp>
#include <skewquant/su2.hpp>

#include <limits>
#include <string>

namespace skewquant {

// Central-difference gradient, step 1e-6 (1 + |coordinate|).
template <class F>
VecX central_gradient(F&& f, const VecX& at) {
  VecX g(at.size());
  VecX y = at;
  for (Eigen::Index i = 0; i < at.size(); ++i) {
    const double h = 1e-6 * (1.0 + std::abs(at[i]));
    y[i] = at[i] + h;
    const double fp = f(y);
    y[i] = at[i] - h;
    const double fm = f(y);
    y[i] = at[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// Partial derivatives of the precession field: column i holds dB/dp_i (dB/dx_i).
struct FieldJacobian {
  Eigen::MatrixXd dp;
  Eigen::MatrixXd dx;
};

// A Hamiltonian H(p, x) with a spin precession field B(p, x).
class HamiltonianModel {
 public:
  virtual ~HamiltonianModel() = default;

  [[nodiscard]] virtual std::string name() const = 0;
  [[nodiscard]] virtual int dimension() const = 0;
  [[nodiscard]] virtual double hamiltonian(const PhasePoint& pt) const = 0;

  [[nodiscard]] virtual VecX grad_p(const PhasePoint& pt) const {
    return central_gradient([&](const VecX& p) { return hamiltonian(PhasePoint(p, pt.x)); }, pt.p);
  }
  [[nodiscard]] virtual VecX grad_x(const PhasePoint& pt) const {
    return central_gradient([&](const VecX& x) { return hamiltonian(PhasePoint(pt.p, x)); }, pt.x);
  }
  [[nodiscard]] virtual AlgebraVector precession_field(const PhasePoint&) const { return Vec3::Zero(); }
  [[nodiscard]] virtual FieldJacobian precession_jacobian(const PhasePoint& pt) const {
    const int d = pt.dim();
    FieldJacobian j{Eigen::MatrixXd(3, d), Eigen::MatrixXd(3, d)};
    for (int i = 0; i < d; ++i) {
      for (int block = 0; block < 2; ++block) {
        PhasePoint a = pt, b = pt;
        const double c = block == 0 ? pt.p[i] : pt.x[i];
        const double h = 1e-6 * (1.0 + std::abs(c));
        (block == 0 ? a.p : a.x)[i] += h;
        (block == 0 ? b.p : b.x)[i] -= h;
        (block == 0 ? j.dp : j.dx).col(i) = (precession_field(a) - precession_field(b)) / (2.0 * h);
      }
    }
    return j;
  }

  // Throws DomainError when the point lies in a forbidden region
  // (used for the Kepler near-collision guard).
  virtual void check_domain(const PhasePoint&) const {}
};

// Spherically symmetric model in three dimensions with B = f(r, p) L.
class SphericalModel : public HamiltonianModel {
 public:
  [[nodiscard]] int dimension() const override { return 3; }

  // Energy at p_r = 0: H as a function of (L, r).
  [[nodiscard]] virtual double effective_energy(double L, double r) const = 0;
  // p_r^2 at (E, L, r); negative in the forbidden region.
  [[nodiscard]] virtual double radial_momentum_squared(double E, double L, double r) const = 0;
  // Supremum of bound energies (infinity for confining potentials).
  [[nodiscard]] virtual double escape_energy() const { return std::numeric_limits<double>::infinity(); }
  // Bound tori need L strictly above this value.
  [[nodiscard]] virtual double collision_angular_momentum() const { return 0.0; }
  // Energies are compared relative to |E - reference_energy()|.
  [[nodiscard]] virtual double reference_energy() const { return 0.0; }
};

}  // namespace skewquant
