// Copyright 2026 The skewquant Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <skewquant/dynamics.hpp>
#include <skewquant/model.hpp>
#include <skewquant/su2.hpp>

#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace skewquant {

struct PhaseGradient {
  VecX dp;
  VecX dx;
};

// Scalar observable A(p, x); the gradient is optional.
struct PhaseFunction {
  std::function<double(const PhasePoint&)> value;
  std::function<PhaseGradient(const PhasePoint&)> gradient;
};

using VectorField = std::function<Vec3(const PhasePoint&)>;

inline PhaseFunction observable_of(const HamiltonianModel& m) {
  return {[&m](const PhasePoint& pt) { return m.hamiltonian(pt); },
          [&m](const PhasePoint& pt) { return PhaseGradient{m.grad_p(pt), m.grad_x(pt)}; }};
}

inline VectorField field_of(const HamiltonianModel& m) {
  return [&m](const PhasePoint& pt) { return m.precession_field(pt); };
}

namespace detail {

inline PhaseGradient gradient_of(const PhaseFunction& f, const PhasePoint& pt) {
  if (f.gradient) return f.gradient(pt);
  return {central_gradient([&](const VecX& p) { return f.value(PhasePoint(p, pt.x)); }, pt.p),
          central_gradient([&](const VecX& x) { return f.value(PhasePoint(pt.p, x)); }, pt.x)};
}

// Columns are d/dp_i and d/dx_i of the three field components.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> field_jacobian(const VectorField& B, const PhasePoint& pt) {
  const int d = pt.dim();
  Eigen::MatrixXd jp(3, d), jx(3, d);
  for (int i = 0; i < d; ++i) {
    for (int block = 0; block < 2; ++block) {
      PhasePoint a = pt, b = pt;
      VecX& va = block == 0 ? a.p : a.x;
      VecX& vb = block == 0 ? b.p : b.x;
      const double c = block == 0 ? pt.p[i] : pt.x[i];
      const double h = 1e-6 * (1.0 + std::abs(c));
      va[i] += h;
      vb[i] -= h;
      (block == 0 ? jp : jx).col(i) = (B(a) - B(b)) / (2.0 * h);
    }
  }
  return {jp, jx};
}

inline void require_finite(double v, const PhasePoint& pt, const char* what) {
  if (std::isfinite(v)) return;
  std::string msg = std::string(what) + ": non-finite value at p = (";
  for (int i = 0; i < pt.dim(); ++i) msg += (i ? ", " : "") + std::to_string(pt.p[i]);
  msg += "), x = (";
  for (int i = 0; i < pt.dim(); ++i) msg += (i ? ", " : "") + std::to_string(pt.x[i]);
  throw NumericalError(msg + ")");
}

}  // namespace detail

// {f, g} = sum_i df/dx_i dg/dp_i - df/dp_i dg/dx_i, so {x_i, p_j} = delta_ij.
inline double poisson_bracket(const PhaseFunction& f, const PhaseFunction& g, const PhasePoint& pt) {
  const PhaseGradient a = detail::gradient_of(f, pt), b = detail::gradient_of(g, pt);
  const double v = a.dx.dot(b.dp) - a.dp.dot(b.dx);
  detail::require_finite(v, pt, "poisson_bracket");
  return v;
}

// {B, g} componentwise in the same convention.
inline Vec3 poisson_bracket(const VectorField& B, const PhaseFunction& g, const PhasePoint& pt) {
  const auto [jp, jx] = detail::field_jacobian(B, pt);
  const PhaseGradient b = detail::gradient_of(g, pt);
  const Vec3 v = jx * b.dp - jp * b.dx;
  detail::require_finite(v.sum(), pt, "poisson_bracket");
  return v;
}

// {A_j, B_k} + {B_j, A_k} - B_j x B_k, with brackets in the orientation for
// which dF/dt = {H, F} along the flow of H, i.e. the negative of poisson_bracket.
inline Vec3 spin_involution_residual(const PhaseFunction& A_j, const VectorField& B_j, const PhaseFunction& A_k,
                                     const VectorField& B_k, const PhasePoint& pt) {
  const Vec3 a_bk = poisson_bracket(B_k, A_j, pt);    // {A_j, B_k}
  const Vec3 bj_a = -poisson_bracket(B_j, A_k, pt);   // {B_j, A_k}
  return a_bk + bj_a - B_j(pt).cross(B_k(pt));
}

// Model form; uses the models' own field Jacobians.
inline Vec3 spin_involution_residual(const HamiltonianModel& j, const HamiltonianModel& k, const PhasePoint& pt) {
  const FieldJacobian jj = j.precession_jacobian(pt), jk = k.precession_jacobian(pt);
  const VecX gpj = j.grad_p(pt), gxj = j.grad_x(pt), gpk = k.grad_p(pt), gxk = k.grad_x(pt);
  const Vec3 a_bk = jk.dx * gpj - jk.dp * gxj;  // {A_j, B_k}
  const Vec3 bj_a = jj.dp * gxk - jj.dx * gpk;  // {B_j, A_k}
  const Vec3 r = a_bk + bj_a - j.precession_field(pt).cross(k.precession_field(pt));
  detail::require_finite(r.sum(), pt, "spin_involution_residual");
  return r;
}

// Axis-aligned sampling box in phase space.  Points with |x| < min_radius or
// with p nearly parallel to x are skipped.
struct PhaseBox {
  Vec3 p_lo = Vec3::Constant(-1), p_hi = Vec3::Constant(1);
  Vec3 x_lo = Vec3::Constant(-1), x_hi = Vec3::Constant(1);
  double min_radius = 0.0;

  void validate() const {
    for (int i = 0; i < 3; ++i) {
      if (!(p_lo[i] < p_hi[i]) || !(x_lo[i] < x_hi[i])) throw DomainError("empty sample box");
    }
    if (min_radius < 0) throw DomainError("sample box min_radius must be non-negative");
  }
};

// Halton points in the 6-dimensional box with a seeded random shift.
inline std::vector<PhasePoint> sample_phase_box(const PhaseBox& box, int count, std::uint64_t seed) {
  box.validate();
  if (count <= 0) throw DomainError("sample count must be positive");
  static constexpr int primes[6] = {2, 3, 5, 7, 11, 13};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double shift[6];
  for (double& s : shift) s = uni(rng);
  auto radical_inverse = [](long long n, int base) {
    double inv = 1.0 / base, f = inv, r = 0.0;
    while (n > 0) {
      r += f * double(n % base);
      n /= base;
      f *= inv;
    }
    return r;
  };
  std::vector<PhasePoint> out;
  for (long long n = 1; static_cast<int>(out.size()) < count; ++n) {
    if (n > 1000LL * count) throw DomainError("sample box contains too few admissible points");
    double u[6];
    for (int k = 0; k < 6; ++k) u[k] = std::fmod(radical_inverse(n, primes[k]) + shift[k], 1.0);
    Vec3 p, x;
    for (int i = 0; i < 3; ++i) {
      p[i] = box.p_lo[i] + u[i] * (box.p_hi[i] - box.p_lo[i]);
      x[i] = box.x_lo[i] + u[3 + i] * (box.x_hi[i] - box.x_lo[i]);
    }
    if (x.norm() < box.min_radius) continue;
    if (x.cross(p).norm() < 1e-3 * x.norm() * p.norm() || p.norm() == 0) continue;
    out.push_back(make_point(p, x));
  }
  return out;
}

struct InvolutionReport {
  std::string name;
  std::vector<PhasePoint> points;
  std::vector<double> residuals;  // Euclidean norms
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

inline InvolutionReport involution_report(std::string name, const HamiltonianModel& j, const HamiltonianModel& k,
                                          const std::vector<PhasePoint>& points, double tol) {
  if (points.empty()) throw DomainError("involution check needs at least one sample point");
  InvolutionReport rep;
  rep.name = std::move(name);
  rep.points = points;
  rep.tolerance = tol;
  for (const auto& pt : points) {
    const double r = spin_involution_residual(j, k, pt).norm();
    rep.residuals.push_back(r);
    rep.max_residual = std::max(rep.max_residual, r);
  }
  rep.pass = rep.max_residual < tol;
  return rep;
}

struct DeltaResult {
  double norm = 0.0;            // projective max-component distance
  SU2Element delta;             // first product minus second, sign-aligned
  double base_mismatch = 0.0;   // |phi_j^t' phi_k^t - phi_k^t phi_j^t'| on phase space
};

// Delta(t, t') = d_j(phi_k^t y, t') d_k(y, t) - d_k(phi_j^t' y, t) d_j(y, t').
inline DeltaResult skew_commutator_delta(const HamiltonianModel& model_j, const HamiltonianModel& model_k,
                                         const PhasePoint& pt, double t, double t_prime, double tol = 1e-12) {
  FlowOptions o;
  o.tol = tol;
  o.cocycle = true;
  o.record = false;
  auto leg = [&](const HamiltonianModel& m, const PhasePoint& from, double time) {
    return SkewFlow(m, o, from).run(make_sample(from), time).back().state;
  };
  const SkewState k1 = leg(model_k, pt, t);
  const SkewState j1 = leg(model_j, k1.phase, t_prime);
  const SkewState j2 = leg(model_j, pt, t_prime);
  const SkewState k2 = leg(model_k, j2.phase, t);

  const SU2Element first = j1.cocycle * k1.cocycle;
  const SU2Element second = k2.cocycle * j2.cocycle;
  DeltaResult r;
  const bool flip = first.distance(-second) < first.distance(second);
  r.delta = flip ? first - (-second) : first - second;
  r.norm = first.projective_distance(second);
  r.base_mismatch = std::max((j1.phase.p - k2.phase.p).cwiseAbs().maxCoeff(),
                             (j1.phase.x - k2.phase.x).cwiseAbs().maxCoeff());
  return r;
}

struct HolonomyCheck {
  bool commute = false;
  double max_commutator = 0.0;
  bool common_axis = false;
  Vec3 axis = Vec3::UnitZ();
};

// Pairwise commutators d_j d_k - d_k d_j, and whether all non-central
// elements share one rotation axis (up to sign).
inline HolonomyCheck holonomy_commutativity(const std::vector<SU2Element>& ds, double tol, double axis_tol = 1e-6) {
  if (ds.empty()) throw DomainError("holonomy check needs a non-empty list");
  HolonomyCheck h;
  for (std::size_t a = 0; a < ds.size(); ++a) {
    for (std::size_t b = a + 1; b < ds.size(); ++b) {
      const SU2Element c = ds[a] * ds[b] - ds[b] * ds[a];
      h.max_commutator = std::max(h.max_commutator, std::max({std::abs(c.q0), std::abs(c.q1), std::abs(c.q2),
                                                              std::abs(c.q3)}));
    }
  }
  h.commute = h.max_commutator <= tol;
  h.common_axis = true;
  bool have_axis = false;
  for (const auto& d : ds) {
    const AxisAngle aa = axis_angle_of(d.normalized(), 1e-8);
    if (aa.degenerate) continue;
    if (!have_axis) {
      h.axis = aa.axis;
      have_axis = true;
    } else if (aa.axis.cross(h.axis).norm() > axis_tol) {
      h.common_axis = false;
    }
  }
  return h;
}

}  // namespace skewquant
