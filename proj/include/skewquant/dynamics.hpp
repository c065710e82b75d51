// Copyright 2026 The skewquant Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <skewquant/model.hpp>
#include <skewquant/su2.hpp>

#include <boost/numeric/odeint.hpp>

#include <cstdio>
#include <functional>
#include <ostream>
#include <vector>

namespace skewquant {

struct SkewState {
  PhasePoint phase;
  SU2Element cocycle;
  Vec3 spin = Vec3::UnitZ();
};

struct Sample {
  double t = 0.0;
  SkewState state;
  Vec3 field_integral = Vec3::Zero();  // integral of B dt since the flow started
};

struct IntegratorStats {
  std::size_t steps = 0;
  std::size_t rejected = 0;
  double max_energy_drift = 0.0;  // max |H(t) - H(0)|
  double max_norm_defect = 0.0;   // max | |d|^2 - 1 | and | |s|^2 - 1 | before projection
};

struct Trajectory {
  std::vector<Sample> samples;
  IntegratorStats stats;
  bool has_cocycle = false;
  bool has_spin = false;

  [[nodiscard]] const Sample& back() const { return samples.back(); }
};

struct FlowOptions {
  double tol = 1e-11;
  bool cocycle = false;
  bool spin = false;
  bool field_integral = false;
  bool record = true;
  std::size_t max_steps = 5'000'000;
};

// Integrates Hamilton's equations together with the optional blocks
//   d' = -(i/2) sigma.B d,   s' = B x s,   J' = B,
// on a rescaled state so one tolerance fits both position and momentum.
class SkewFlow {
 public:
  using State = std::vector<double>;
  // Return true to stop after the current step.
  using Observer = std::function<bool(const Sample& prev, const Sample& cur)>;

  SkewFlow(const HamiltonianModel& model, FlowOptions opts, const PhasePoint& scale_from)
      : model_(model), opts_(opts), d_(model.dimension()) {
    if (!(opts_.tol > 0)) throw DomainError("integrator tolerance must be positive");
    if (scale_from.dim() != d_) throw DomainError("phase point dimension does not match model");
    const double px = scale_from.p.norm(), xx = scale_from.x.norm();
    const double sp = px > 0 ? px : (xx > 0 ? xx : 1.0);
    const double sx = xx > 0 ? xx : sp;
    weights_.assign(size(), 1.0);
    for (int i = 0; i < d_; ++i) {
      weights_[i] = sp;
      weights_[d_ + i] = sx;
    }
  }

  [[nodiscard]] const FlowOptions& options() const { return opts_; }

  Trajectory run(const Sample& from, double t_final, const Observer& observer = {}) const {
    Trajectory traj;
    traj.has_cocycle = opts_.cocycle;
    traj.has_spin = opts_.spin;
    if (opts_.record) traj.samples.push_back(from);
    Sample last = from;
    const double h0 = model_.hamiltonian(from.state.phase);

    if (t_final == from.t) {
      if (!opts_.record) traj.samples.push_back(from);
      return traj;
    }

    const double direction = t_final > from.t ? 1.0 : -1.0;
    State z = pack(from);
    State dzdt(z.size());
    rhs(z, dzdt);
    double t = from.t;
    double dt = direction * initial_step(z, dzdt, std::abs(t_final - t));

    auto stepper = boost::numeric::odeint::make_controlled<boost::numeric::odeint::runge_kutta_dopri5<State>>(
        opts_.tol, opts_.tol);
    auto system = [this](const State& y, State& dy, double) { rhs(y, dy); };

    while (direction * (t_final - t) > 0) {
      if (traj.stats.steps >= opts_.max_steps) throw NumericalError("step limit exceeded", t);
      bool clipped = false;
      if (direction * (t + dt - t_final) >= 0) {
        dt = t_final - t;
        clipped = true;
      }
      const double floor = 1e-14 * std::max(1.0, std::abs(t));
      if (std::abs(dt) < floor && !clipped) throw NumericalError("step size underflow at t = " + fmt(t), t);

      const auto res = stepper.try_step(system, z, dzdt, t, dt);
      if (res == boost::numeric::odeint::fail) {
        ++traj.stats.rejected;
        if (std::abs(dt) < floor) throw NumericalError("step size underflow at t = " + fmt(t), t);
        continue;
      }
      if (clipped) t = t_final;
      ++traj.stats.steps;
      traj.stats.max_norm_defect = std::max(traj.stats.max_norm_defect, project(z));
      rhs(z, dzdt);

      Sample cur = unpack(z, t);
      if (!cur.state.phase.finite()) throw NumericalError("non-finite state at t = " + fmt(t), t);
      try {
        model_.check_domain(cur.state.phase);
      } catch (const DomainError& e) {
        throw NumericalError(std::string(e.what()) + " at t = " + fmt(t), t);
      }
      traj.stats.max_energy_drift =
          std::max(traj.stats.max_energy_drift, std::abs(model_.hamiltonian(cur.state.phase) - h0));
      const bool stop = observer && observer(last, cur);
      if (opts_.record) traj.samples.push_back(cur);
      last = std::move(cur);
      if (stop) break;
    }
    if (!opts_.record) traj.samples.push_back(last);
    return traj;
  }

  Sample advance(const Sample& from, double t_to) const {
    FlowOptions o = opts_;
    o.record = false;
    SkewFlow quiet(model_, o, weights_);
    return quiet.run(from, t_to).back();
  }

 private:
  SkewFlow(const HamiltonianModel& model, FlowOptions opts, std::vector<double> weights)
      : model_(model), opts_(opts), d_(model.dimension()), weights_(std::move(weights)) {}

  [[nodiscard]] std::size_t size() const {
    return 2 * d_ + (opts_.cocycle ? 4 : 0) + (opts_.spin ? 3 : 0) + (opts_.field_integral ? 3 : 0);
  }
  [[nodiscard]] std::size_t cocycle_at() const { return 2 * d_; }
  [[nodiscard]] std::size_t spin_at() const { return cocycle_at() + (opts_.cocycle ? 4 : 0); }
  [[nodiscard]] std::size_t integral_at() const { return spin_at() + (opts_.spin ? 3 : 0); }

  State pack(const Sample& s) const {
    State y(size());
    for (int i = 0; i < d_; ++i) {
      y[i] = s.state.phase.p[i];
      y[d_ + i] = s.state.phase.x[i];
    }
    if (opts_.cocycle) {
      const auto& g = s.state.cocycle;
      const std::size_t k = cocycle_at();
      y[k] = g.q0, y[k + 1] = g.q1, y[k + 2] = g.q2, y[k + 3] = g.q3;
    }
    if (opts_.spin)
      for (int i = 0; i < 3; ++i) y[spin_at() + i] = s.state.spin[i];
    if (opts_.field_integral)
      for (int i = 0; i < 3; ++i) y[integral_at() + i] = s.field_integral[i];
    for (std::size_t i = 0; i < y.size(); ++i) y[i] /= weights_[i];
    return y;
  }

  Sample unpack(const State& z, double t) const {
    Sample s;
    s.t = t;
    VecX p(d_), x(d_);
    for (int i = 0; i < d_; ++i) {
      p[i] = z[i] * weights_[i];
      x[i] = z[d_ + i] * weights_[d_ + i];
    }
    s.state.phase = PhasePoint(std::move(p), std::move(x));
    if (opts_.cocycle) {
      const std::size_t k = cocycle_at();
      s.state.cocycle = {z[k], z[k + 1], z[k + 2], z[k + 3]};
    }
    if (opts_.spin) s.state.spin = Vec3(z[spin_at()], z[spin_at() + 1], z[spin_at() + 2]);
    if (opts_.field_integral) s.field_integral = Vec3(z[integral_at()], z[integral_at() + 1], z[integral_at() + 2]);
    return s;
  }

  void rhs(const State& z, State& dz) const {
    VecX p(d_), x(d_);
    for (int i = 0; i < d_; ++i) {
      p[i] = z[i] * weights_[i];
      x[i] = z[d_ + i] * weights_[d_ + i];
    }
    const PhasePoint pt(std::move(p), std::move(x));
    const VecX hp = model_.grad_p(pt);
    const VecX hx = model_.grad_x(pt);
    for (int i = 0; i < d_; ++i) {
      dz[i] = -hx[i];
      dz[d_ + i] = hp[i];
    }
    if (opts_.cocycle || opts_.spin || opts_.field_integral) {
      const Vec3 b = model_.precession_field(pt);
      if (opts_.cocycle) {
        const std::size_t k = cocycle_at();
        const SU2Element g{z[k], z[k + 1], z[k + 2], z[k + 3]};
        const SU2Element dg = SU2Element::from_scalar_vector(0.0, 0.5 * b) * g;
        dz[k] = dg.q0, dz[k + 1] = dg.q1, dz[k + 2] = dg.q2, dz[k + 3] = dg.q3;
      }
      if (opts_.spin) {
        const std::size_t k = spin_at();
        const Vec3 ds = b.cross(Vec3(z[k], z[k + 1], z[k + 2]));
        for (int i = 0; i < 3; ++i) dz[k + i] = ds[i];
      }
      if (opts_.field_integral)
        for (int i = 0; i < 3; ++i) dz[integral_at() + i] = b[i];
    }
    for (std::size_t i = 0; i < dz.size(); ++i) dz[i] /= weights_[i];
  }

  // Renormalise the cocycle and spin blocks; returns the defect removed.
  double project(State& z) const {
    double defect = 0.0;
    auto normalise = [&](std::size_t k, int n) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += z[k + i] * z[k + i];
      defect = std::max(defect, std::abs(s - 1.0));
      const double inv = 1.0 / std::sqrt(s);
      for (int i = 0; i < n; ++i) z[k + i] *= inv;
    };
    if (opts_.cocycle) normalise(cocycle_at(), 4);
    if (opts_.spin) normalise(spin_at(), 3);
    return defect;
  }

  double initial_step(const State& z, const State& dz, double span) const {
    double rate = 0.0;
    for (std::size_t i = 0; i < 2 * static_cast<std::size_t>(d_); ++i) {
      rate = std::max(rate, std::abs(dz[i]) / std::max(std::abs(z[i]), 1e-3));
    }
    for (std::size_t i = 2 * d_; i < z.size(); ++i) rate = std::max(rate, std::abs(dz[i]));
    const double h = rate > 0 ? 1e-3 / rate : span;
    return std::min(h, span);
  }

  static std::string fmt(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", t);
    return buf;
  }

  const HamiltonianModel& model_;
  FlowOptions opts_;
  int d_;
  std::vector<double> weights_;
};

inline Sample make_sample(const PhasePoint& start, const SU2Element& g = {}, const Vec3& s = Vec3::UnitZ()) {
  return Sample{0.0, SkewState{start, g, s}, Vec3::Zero()};
}

inline void require_unit_spin(const Vec3& s) {
  if (std::abs(s.norm() - 1.0) > 1e-10) throw DomainError("spin vector must have unit length");
}

inline Trajectory integrate_flow(const HamiltonianModel& model, const PhasePoint& start, double t_final, double tol) {
  FlowOptions o;
  o.tol = tol;
  return SkewFlow(model, o, start).run(make_sample(start), t_final);
}

inline Trajectory integrate_cocycle(const HamiltonianModel& model, const PhasePoint& start, double t_final, double tol) {
  FlowOptions o;
  o.tol = tol;
  o.cocycle = true;
  return SkewFlow(model, o, start).run(make_sample(start), t_final);
}

inline Trajectory precess_spin(const HamiltonianModel& model, const PhasePoint& start, const Vec3& s0, double t_final,
                               double tol) {
  require_unit_spin(s0);
  FlowOptions o;
  o.tol = tol;
  o.spin = true;
  return SkewFlow(model, o, start).run(make_sample(start, {}, s0), t_final);
}

// Y^t on (p, x, g, s): the cocycle and the spin are both carried along.
inline SkewState evolve_skew(const HamiltonianModel& model, const SkewState& state, double t_final, double tol) {
  require_unit_spin(state.spin);
  if (!state.cocycle.is_unit(1e-10)) throw DomainError("evolve_skew: cocycle is not unit norm");
  FlowOptions o;
  o.tol = tol;
  o.cocycle = true;
  o.spin = true;
  o.record = false;
  return SkewFlow(model, o, state.phase).run(Sample{0.0, state, Vec3::Zero()}, t_final).back().state;
}

// CSV columns: t, x1..xd, p1..pd, q0..q3, s1..s3 and, for d = 3, r and the
// unwrapped azimuth phi in the xy-plane.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  if (traj.samples.empty()) return;
  const int d = traj.samples.front().state.phase.dim();
  os << "t";
  for (int i = 1; i <= d; ++i) os << ",x" << i;
  for (int i = 1; i <= d; ++i) os << ",p" << i;
  os << ",q0,q1,q2,q3,s1,s2,s3";
  if (d == 3) os << ",r,phi";
  os << '\n';
  char buf[40];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, ",%.17g", v);
    os << buf;
  };
  double phi_prev = 0.0, turns = 0.0;
  bool first = true;
  for (const auto& s : traj.samples) {
    std::snprintf(buf, sizeof buf, "%.17g", s.t);
    os << buf;
    const auto& ph = s.state.phase;
    for (int i = 0; i < d; ++i) put(ph.x[i]);
    for (int i = 0; i < d; ++i) put(ph.p[i]);
    const auto& g = s.state.cocycle;
    put(g.q0), put(g.q1), put(g.q2), put(g.q3);
    put(s.state.spin.x()), put(s.state.spin.y()), put(s.state.spin.z());
    if (d == 3) {
      const double phi = std::atan2(ph.x[1], ph.x[0]);
      if (!first) {
        const double jump = phi - phi_prev;
        if (jump > kPi) turns -= 1.0;
        if (jump < -kPi) turns += 1.0;
      }
      first = false;
      phi_prev = phi;
      put(ph.x.norm());
      put(phi + kTwoPi * turns);
    }
    os << '\n';
  }
}

}  // namespace skewquant
