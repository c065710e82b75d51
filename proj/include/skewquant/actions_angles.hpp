// Copyright 2026 The skewquant Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <skewquant/dynamics.hpp>
#include <skewquant/model.hpp>
#include <skewquant/models.hpp>
#include <skewquant/su2.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

namespace skewquant {

// Bound energies for fixed L lie in [E_min, E_max); E_min is the circular orbit.
struct BoundWindow {
  double E_min = 0.0;
  double E_max = 0.0;
  double r_circular = 0.0;
};

struct TurningPoints {
  double r_min = 0.0;
  double r_max = 0.0;
  bool circular = false;
};

struct TorusSpec {
  double E = 0.0;
  double L = 0.0;
  double M = 0.0;
};

struct Frequencies {
  double omega_r = 0.0;
  double omega_L = 0.0;
  double ratio = 0.0;  // omega_L / omega_r = -dI_r/dL at fixed E
  double dI_dE = 0.0;
  double dI_dL = 0.0;
};

struct ActionData {
  double I_r = 0.0, I_theta = 0.0, I_phi = 0.0;
  double omega_r = 0.0, omega_L = 0.0;
  int mu_r = 2, mu_theta = 2, mu_phi = 0;
  double alpha_r = 0.0, alpha_L = kTwoPi, alpha_M = kTwoPi;
};

namespace detail {

inline void require_angular_momentum(const SphericalModel& model, double L) {
  if (!std::isfinite(L) || L < 0) throw DomainError("angular momentum L must be finite and non-negative");
  if (!(L > model.collision_angular_momentum())) {
    throw DomainError("L below collision threshold: need L > " + std::to_string(model.collision_angular_momentum()));
  }
}

inline constexpr double kLogRMin = -12.0;  // scan range in log10 r
inline constexpr double kLogRMax = 14.0;

// toms748 on [a, b] with f(a) f(b) <= 0, to full double precision.
template <class F>
double bracketed_root(F&& f, double a, double b, double fa, double fb, const char* what) {
  if (fa == 0) return a;
  if (fb == 0) return b;
  std::uintmax_t iters = 300;
  const auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, boost::math::tools::eps_tolerance<double>(52), iters);
  if (iters >= 300) throw NumericalError(std::string(what) + ": root finder did not converge");
  return 0.5 * (r.first + r.second);
}

}  // namespace detail

inline BoundWindow bound_window(const SphericalModel& model, double L) {
  detail::require_angular_momentum(model, L);
  // Coarse scan of the effective energy over log r, then Brent in log r.
  constexpr int per_decade = 8;
  const int n = static_cast<int>((detail::kLogRMax - detail::kLogRMin) * per_decade);
  int best = -1;
  double best_v = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n; ++i) {
    const double v = model.effective_energy(L, std::pow(10.0, detail::kLogRMin + double(i) / per_decade));
    if (std::isfinite(v) && v < best_v) best_v = v, best = i;
  }
  if (best <= 0 || best >= n) throw DomainError("no bound motion: effective potential has no interior minimum");
  auto f = [&](double lr) { return model.effective_energy(L, std::pow(10.0, lr)); };
  const double lo = detail::kLogRMin + double(best - 1) / per_decade;
  const double hi = detail::kLogRMin + double(best + 1) / per_decade;
  const auto [lr, v] = boost::math::tools::brent_find_minima(f, lo, hi, 52);
  return {v, model.escape_energy(), std::pow(10.0, lr)};
}

inline TurningPoints radial_turning_points(const SphericalModel& model, double E, double L) {
  const BoundWindow w = bound_window(model, L);
  if (!std::isfinite(E)) throw DomainError("energy must be finite");
  if (E >= w.E_max) throw DomainError("no bound motion: energy at or above escape threshold");
  const double rc = w.r_circular;
  auto f = [&](double r) { return model.radial_momentum_squared(E, L, r); };
  if (E < w.E_min - 1e-14 * std::abs(w.E_min)) {
    throw DomainError("no bound motion: energy below the circular-orbit minimum");
  }
  const double peak = f(rc);
  if (peak <= 1e-13 * L * L / (rc * rc)) return {rc, rc, true};

  double a = rc, fa = peak;
  for (int i = 0; fa >= 0; ++i) {
    if (i > 2000 || a < 1e-300) throw DomainError("no bound motion: inner turning point not found (collision)");
    a *= 0.5;
    fa = f(a);
  }
  double b = rc, fb = peak;
  for (int i = 0; fb >= 0; ++i) {
    if (i > 2000 || !std::isfinite(b)) throw DomainError("no bound motion: outer turning point not found (escape)");
    b *= 2.0;
    fb = f(b);
  }
  const double r_min = detail::bracketed_root(f, a, rc, fa, peak, "inner turning point");
  const double r_max = detail::bracketed_root(f, rc, b, peak, fb, "outer turning point");
  return {r_min, r_max, false};
}

// I_r = (1/2pi) closed integral of p_r dr = (1/pi) int_{r_min}^{r_max} p_r dr,
// with r = r_min + (r_max - r_min) sin^2 u removing the endpoint square roots.
inline double radial_action(const SphericalModel& model, double E, double L) {
  const TurningPoints tp = radial_turning_points(model, E, L);
  const double span = tp.r_max - tp.r_min;
  if (tp.circular || span <= 1e-15 * tp.r_max) return 0.0;
  std::size_t nodes = 0;
  auto integrand = [&](double u) {
    ++nodes;
    const double s = std::sin(u);
    const double r = tp.r_min + span * s * s;
    const double pr2 = model.radial_momentum_squared(E, L, r);
    return pr2 > 0 ? std::sqrt(pr2) * span * std::sin(2 * u) : 0.0;
  };
  double err = 0.0, l1 = 0.0;
  const double I = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, kPi / 2, 12, 1e-12,
                                                                                 &err, &l1);
  // The Kronrod estimate is pessimistic for smooth integrands; asking for more
  // only sums round-off in p_r^2 over ever more leaves.
  if (!(err <= 1e-9 * std::abs(I) + 1e-300) || !std::isfinite(I)) {
    throw NumericalError("radial action quadrature did not converge after " + std::to_string(nodes) +
                         " nodes (error estimate " + std::to_string(err) + ")");
  }
  return I / kPi;
}

namespace detail {

// Fourth-order five-point derivative; the stencil is shifted one-sided when
// the central points leave the admissible set.
template <class F, class Ok>
double five_point_derivative(F&& f, double x, double h, Ok&& ok, const char* what) {
  if (ok(x - 2 * h) && ok(x + 2 * h)) {
    return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h);
  }
  for (const double s : {1.0, -1.0}) {
    const double hs = s * h;
    if (ok(x + 4 * hs)) {
      return (-25 * f(x) + 48 * f(x + hs) - 36 * f(x + 2 * hs) + 16 * f(x + 3 * hs) - 3 * f(x + 4 * hs)) / (12 * hs);
    }
  }
  throw NumericalError(std::string(what) + ": no admissible difference stencil");
}

}  // namespace detail

// omega_r = 1/(dI_r/dE), omega_L = -(dI_r/dL)/(dI_r/dE), from differences of
// the numerical radial action.
inline Frequencies frequencies(const SphericalModel& model, double E, double L) {
  const BoundWindow w = bound_window(model, L);
  if (!(E >= w.E_min) || !(E < w.E_max)) throw DomainError("frequencies: energy outside the bound window");
  const double e_span = std::isfinite(w.E_max) ? std::min(w.E_max - E, w.E_max - w.E_min) : std::abs(E);
  const double hE = 1e-3 * e_span;
  const double Lc = model.collision_angular_momentum();
  const double hL = 1e-3 * std::min(L, L - Lc);

  auto admissible = [&](double e, double l) {
    if (!(l > Lc) || !(e < w.E_max)) return false;
    return e >= bound_window(model, l).E_min;
  };
  Frequencies out;
  out.dI_dE = detail::five_point_derivative([&](double e) { return radial_action(model, e, L); }, E, hE,
                                            [&](double e) { return admissible(e, L); }, "dI_r/dE");
  out.dI_dL = detail::five_point_derivative([&](double l) { return radial_action(model, E, l); }, L, hL,
                                            [&](double l) { return admissible(E, l); }, "dI_r/dL");
  if (!(out.dI_dE > 0) || !std::isfinite(out.dI_dL)) {
    throw NumericalError("frequencies: near-degenerate action Jacobian (dI_r/dE = " + std::to_string(out.dI_dE) + ")");
  }
  out.omega_r = 1.0 / out.dI_dE;
  out.ratio = -out.dI_dL;
  out.omega_L = out.ratio * out.omega_r;
  return out;
}

// One radial period starting at perihelion x = (r_min, 0, 0), p = (0, L/r_min, 0),
// so L points along +z.  The period ends at the next p_r sign change from - to +.
struct RadialLoop {
  Trajectory trajectory;  // samples over [0, period]; the last one is at the period
  double period = 0.0;
  int radial_sign_changes = 0;     // turning points of r
  int azimuthal_sign_changes = 0;  // sign changes of p_phi = L_z
};

inline RadialLoop radial_loop(const SphericalModel& model, double E, double L, double tol, bool record = false,
                              double period_guess = 0.0) {
  const TurningPoints tp = radial_turning_points(model, E, L);
  if (tp.circular) throw DomainError("radial loop undefined on a circular torus");
  if (period_guess <= 0) period_guess = kTwoPi / frequencies(model, E, L).omega_r;
  const PhasePoint start = make_point(Vec3(0, L / tp.r_min, 0), Vec3(tp.r_min, 0, 0));

  FlowOptions o;
  o.tol = tol;
  o.cocycle = true;
  o.field_integral = true;
  o.record = record;
  SkewFlow flow(model, o, start);

  auto p_r = [](const Sample& s) { return s.state.phase.x.dot(s.state.phase.p); };
  RadialLoop loop;
  int sign = 1;  // p_r leaves perihelion positive
  int lz_sign = 1;
  bool after_aphelion = false;
  std::optional<std::pair<Sample, Sample>> bracket;
  auto observer = [&](const Sample& prev, const Sample& cur) {
    const double lz = angular_momentum(cur.state.phase).z();
    const int ls = lz > 0 ? 1 : (lz < 0 ? -1 : lz_sign);
    if (ls != lz_sign) ++loop.azimuthal_sign_changes, lz_sign = ls;
    const double v = p_r(cur);
    if (cur.t < 1e-6 * period_guess) return false;  // p_r = 0 at the start
    const int s = v > 0 ? 1 : (v < 0 ? -1 : sign);
    if (s == sign) return false;
    ++loop.radial_sign_changes;
    sign = s;
    if (s < 0) {
      after_aphelion = true;
      return false;
    }
    if (!after_aphelion) return false;
    bracket.emplace(prev, cur);
    return true;
  };
  Trajectory traj = flow.run(make_sample(start), 3.0 * period_guess, observer);
  if (!bracket) throw NumericalError("period detection failure: no second perihelion passage within 3 periods");

  const Sample& a = bracket->first;
  const Sample& b = bracket->second;
  auto g = [&](double t) { return p_r(flow.advance(a, t)); };
  const double t_star = detail::bracketed_root(g, a.t, b.t, p_r(a), p_r(b), "perihelion time");
  const Sample end = flow.advance(a, t_star);
  if (record) traj.samples.back() = end;
  else traj.samples = {make_sample(start), end};
  loop.trajectory = std::move(traj);
  loop.period = t_star;
  return loop;
}

struct RadialRotation {
  double alpha = 0.0;         // in [0, 4pi)
  double signed_alpha = 0.0;  // projection on L/|L| before reduction
  double perpendicular = 0.0; // size of the component normal to L
  Vec3 field_integral = Vec3::Zero();
  double period = 0.0;
  double ratio = 0.0;
  SU2Element holonomy;        // d_H over one radial period
  int radial_sign_changes = 0;
  int azimuthal_sign_changes = 0;
  bool extrapolated = false;  // circular torus: value from nearby eccentric tori
};

// alpha_r from the closed radial loop: the integral of B over one radial period
// minus the frame term 2pi (omega_L/omega_r) L/|L|.  The signed projection on
// L/|L| is kept so that anti-parallel fields keep their sense of rotation.
inline RadialRotation rotation_angle_radial(const SphericalModel& model, double E, double L, double tol = 1e-11) {
  const TurningPoints tp = radial_turning_points(model, E, L);
  if (tp.circular || tp.r_max - tp.r_min < 1e-7 * tp.r_max) {
    const BoundWindow w = bound_window(model, L);
    const double span = std::isfinite(w.E_max) ? w.E_max - w.E_min : std::max(std::abs(w.E_min), 1e-300);
    const double e1 = w.E_min + 1e-6 * span, e2 = w.E_min + 2e-6 * span;
    const RadialRotation r1 = rotation_angle_radial(model, e1, L, tol);
    const RadialRotation r2 = rotation_angle_radial(model, e2, L, tol);
    RadialRotation out = r1;
    out.signed_alpha = r1.signed_alpha + (E - e1) * (r2.signed_alpha - r1.signed_alpha) / (e2 - e1);
    out.alpha = reduce_angle(out.signed_alpha, kFourPi);
    out.extrapolated = true;
    return out;
  }
  const Frequencies fr = frequencies(model, E, L);
  const RadialLoop loop = radial_loop(model, E, L, tol, false, kTwoPi / fr.omega_r);
  const Sample& end = loop.trajectory.back();
  const Vec3 axis = Vec3::UnitZ();
  const Vec3 v = end.field_integral - kTwoPi * fr.ratio * axis;

  RadialRotation out;
  out.signed_alpha = v.dot(axis);
  out.perpendicular = (v - out.signed_alpha * axis).norm();
  out.alpha = reduce_angle(out.signed_alpha, kFourPi);
  out.field_integral = end.field_integral;
  out.period = loop.period;
  out.ratio = fr.ratio;
  out.holonomy = end.state.cocycle;
  out.radial_sign_changes = loop.radial_sign_changes;
  out.azimuthal_sign_changes = loop.azimuthal_sign_changes;
  return out;
}

// Rotation angle of the cocycle of `flow` over time 2pi, about the flow's field at pt.
inline double rotation_angle_cycle(const HamiltonianModel& flow, const PhasePoint& pt, double tol = 1e-11) {
  const SU2Element d = integrate_cocycle(flow, pt, kTwoPi, tol).back().state.cocycle;
  return angle_about(d, flow.precession_field(pt).normalized());
}

// One term omega_j B_j of a field decomposition.
struct FieldTerm {
  double omega = 0.0;
  std::function<Vec3(const PhasePoint&)> field;
};

inline double decomposition_residual(const HamiltonianModel& model, const std::vector<FieldTerm>& terms,
                                     const std::vector<PhasePoint>& points) {
  double worst = 0.0;
  for (const auto& pt : points) {
    Vec3 sum = Vec3::Zero();
    for (const auto& t : terms) sum += t.omega * t.field(pt);
    worst = std::max(worst, (model.precession_field(pt) - sum).cwiseAbs().maxCoeff());
  }
  return worst;
}

// Residual of B = omega_r B_r + omega_L B_L with B_L = L/|L| and
// B_r = (B - omega_L B_L)/omega_r, sampled along one radial period.
inline double consistency_decomposition(const SphericalModel& model, double E, double L, double tol = 1e-10) {
  const Frequencies fr = frequencies(model, E, L);
  const RadialLoop loop = radial_loop(model, E, L, tol, true, kTwoPi / fr.omega_r);
  std::vector<PhasePoint> pts;
  for (const auto& s : loop.trajectory.samples) pts.push_back(s.state.phase);
  auto b_L = [](const PhasePoint& pt) { return Vec3(angular_momentum(pt).normalized()); };
  auto b_r = [&](const PhasePoint& pt) { return Vec3((model.precession_field(pt) - fr.omega_L * b_L(pt)) / fr.omega_r); };
  return decomposition_residual(model, {{fr.omega_r, b_r}, {fr.omega_L, b_L}}, pts);
}

inline ActionData torus_data(const SphericalModel& model, const TorusSpec& spec, double tol = 1e-11) {
  if (!(std::abs(spec.M) <= spec.L)) throw DomainError("torus needs |M| <= L");
  ActionData a;
  a.I_r = radial_action(model, spec.E, spec.L);
  a.I_theta = spec.L - spec.M;
  a.I_phi = spec.M;
  const Frequencies fr = frequencies(model, spec.E, spec.L);
  a.omega_r = fr.omega_r;
  a.omega_L = fr.omega_L;
  const RadialRotation rot = rotation_angle_radial(model, spec.E, spec.L, tol);
  a.alpha_r = rot.alpha;
  if (!rot.extrapolated) {
    a.mu_r = rot.radial_sign_changes;
    a.mu_phi = rot.azimuthal_sign_changes;
  }
  return a;
}

}  // namespace skewquant
