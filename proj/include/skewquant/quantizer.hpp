// Copyright 2026 The skewquant Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <skewquant/actions_angles.hpp>
#include <skewquant/models.hpp>

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace skewquant {

struct QuantumNumbers {
  int n_r = 0;
  int l = 0;
  int m_l = 0;
  HalfInt m_s;
  HalfInt s;

  [[nodiscard]] HalfInt j() const { return HalfInt::integer(l) + m_s; }
  [[nodiscard]] HalfInt m_j() const { return HalfInt::integer(m_l) + m_s; }
};

// One admissible angular tuple: L = j + 1/2 >= 0, M = m_j.
struct AngularTuple {
  int l = 0;
  HalfInt m_s, j, m_j;
  int m_l = 0;
  double L = 0.0;
  double M = 0.0;
};

inline std::vector<AngularTuple> quantize_angular(HalfInt s, int l_max) {
  require_spin(s);
  if (l_max < 0) throw DomainError("l_max must be non-negative");
  std::vector<AngularTuple> out;
  for (int l = 0; l <= l_max; ++l) {
    for (int tms = -s.twice(); tms <= s.twice(); tms += 2) {
      const HalfInt m_s = HalfInt::from_twice(tms);
      const HalfInt j = HalfInt::integer(l) + m_s;
      if (j.twice() < 0) continue;
      for (int tmj = -j.twice(); tmj <= j.twice(); tmj += 2) {
        const HalfInt m_j = HalfInt::from_twice(tmj);
        AngularTuple a;
        a.l = l;
        a.m_s = m_s;
        a.j = j;
        a.m_j = m_j;
        a.m_l = (m_j - m_s).twice() / 2;
        a.L = j.value() + 0.5;
        a.M = m_j.value();
        out.push_back(a);
      }
    }
  }
  return out;
}

// alpha_r(E, L) in [0, 4pi).
using AlphaProvider = std::function<double(double E, double L)>;

inline AlphaProvider numeric_alpha(const SphericalModel& model, double tol = 1e-11) {
  return [&model, tol](double E, double L) { return rotation_angle_radial(model, E, L, tol).alpha; };
}

struct QuantizeOptions {
  int max_iterations = 100;
  double energy_tol = 1e-10;       // relative to |E - reference energy|
  double admissibility_tol = 1e-9; // targets in (-tol, 0) are treated as I_r = 0
};

struct RadialSolution {
  std::optional<double> energy;  // empty when the line is skipped
  double I_r_target = 0.0;
  double alpha_r = 0.0;
  int iterations = 0;
  std::string diagnostic;
};

namespace detail {

inline double energy_scale(const SphericalModel& model, double E) {
  return std::max(std::abs(E - model.reference_energy()), 1e-300);
}

// Solve I_r(E, L) = target on the bound window; empty when no root exists.
inline std::optional<double> solve_radial_action(const SphericalModel& model, double L, double target,
                                                 const BoundWindow& w) {
  if (target == 0.0) return w.E_min;
  auto f = [&](double E) { return radial_action(model, E, L) - target; };
  double lo = w.E_min, flo = -target;
  double hi = 0.0, fhi = -1.0;
  if (std::isfinite(w.E_max)) {
    for (int k = 1; k <= 60 && fhi < 0; ++k) {
      const double cand = w.E_min + (w.E_max - w.E_min) * (1.0 - std::ldexp(1.0, -k));
      if (!(cand < w.E_max)) break;
      hi = cand;
      fhi = f(hi);
      if (fhi < 0) lo = hi, flo = fhi;
    }
  } else {
    const double step = std::max(std::abs(w.E_min), 1e-300);
    for (int k = 0; k <= 200 && fhi < 0; ++k) {
      hi = w.E_min + step * std::ldexp(1.0, k - 10);
      fhi = f(hi);
      if (fhi < 0) lo = hi, flo = fhi;
    }
  }
  if (fhi < 0) return std::nullopt;
  return bracketed_root(f, lo, hi, flo, fhi, "radial quantisation");
}

}  // namespace detail

// I_r(E, L) = n_r + 1/2 + m_s alpha_r(E, L)/2pi, solved self-consistently
// (hbar = 1, mu_r = 2).
inline RadialSolution quantize_radial(const SphericalModel& model, const AngularTuple& ang, int n_r,
                                      const AlphaProvider& alpha, const QuantizeOptions& opts = {}) {
  RadialSolution out;
  const double L = ang.L;
  if (!(L > model.collision_angular_momentum())) {
    out.diagnostic = "L = " + std::to_string(L) + " is not above the collision threshold";
    return out;
  }
  const BoundWindow w = bound_window(model, L);
  const double base = n_r + 0.5;
  const double ms = ang.m_s.value();

  // Seed energy: the spinless condition, clamped to a positive action.
  auto seed = detail::solve_radial_action(model, L, std::max(base, 0.5), w);
  if (!seed) {
    out.diagnostic = "no root in the bound window for the seed action";
    return out;
  }
  double E = *seed;
  double a = alpha(E, L);
  for (int it = 1; it <= opts.max_iterations; ++it) {
    double target = base + ms * a / kTwoPi;
    out.iterations = it;
    out.alpha_r = a;
    out.I_r_target = target;
    if (target < -opts.admissibility_tol) {
      out.diagnostic = "target radial action " + std::to_string(target) + " is negative";
      return out;
    }
    if (target < opts.admissibility_tol) target = 0.0;
    out.I_r_target = target;
    const auto solved = detail::solve_radial_action(model, L, target, w);
    if (!solved) {
      out.diagnostic = "no root in the bound window for I_r = " + std::to_string(target);
      return out;
    }
    const bool done = it > 1 && std::abs(*solved - E) <= opts.energy_tol * detail::energy_scale(model, *solved);
    E = *solved;
    if (done) {
      out.energy = E;
      return out;
    }
    const double a_new = alpha(E, L);
    a = a_new + kFourPi * std::round((a - a_new) / kFourPi);  // stay on the previous branch
  }
  throw NumericalError("self-consistent radial quantisation did not converge after " +
                       std::to_string(opts.max_iterations) + " iterations");
}

struct SpectralLine {
  QuantumNumbers qn;
  double energy = 0.0;
  int multiplicity = 1;
  double I_r = 0.0;  // quantised radial action
  double L = 0.0;
  int n = 0;         // I_r + L rounded, the principal number for Coulomb-like labels
  int level = 0;     // index of the energy group
};

struct SpectrumRanges {
  int n_r_max = 0;  // admits states with 0 <= I_r < n_r_max + 1
  int l_max = 0;
};

struct Spectrum {
  std::vector<SpectralLine> lines;  // one per state, sorted by energy
  std::vector<std::string> diagnostics;
};

// Sort lines by energy, assign level indices and multiplicities.  Energies
// within rel_tol |E - E_ref| of the first member of a group are merged.
inline void group_levels(std::vector<SpectralLine>& lines, double E_ref, double rel_tol) {
  std::stable_sort(lines.begin(), lines.end(), [](const auto& a, const auto& b) { return a.energy < b.energy; });
  std::size_t i = 0;
  int level = 0;
  while (i < lines.size()) {
    std::size_t k = i + 1;
    const double e0 = lines[i].energy;
    const double tol = rel_tol * std::max(std::abs(e0 - E_ref), 1e-300);
    while (k < lines.size() && lines[k].energy - e0 <= tol) ++k;
    for (std::size_t q = i; q < k; ++q) {
      lines[q].multiplicity = static_cast<int>(k - i);
      lines[q].level = level;
    }
    ++level;
    i = k;
  }
}

// All admissible states for raw labels l <= l_max and actions
// 0 <= I_r < n_r_max + 1.  Labels that describe the same torus (I_r, L, M)
// are merged; the label with non-negative n_r and smallest l is kept.
inline Spectrum build_spectrum(const SphericalModel& model, HalfInt s, const SpectrumRanges& ranges,
                               const AlphaProvider& alpha, double group_tol = 1e-9,
                               const QuantizeOptions& opts = {}) {
  require_spin(s);
  if (ranges.n_r_max < 0 || ranges.l_max < 0) throw DomainError("spectrum ranges must be non-negative");
  Spectrum out;
  const int shift = s.twice() + 2;  // |m_s alpha/2pi| < 2s + 1
  std::map<std::tuple<long long, int, int>, SpectralLine> tori;  // (I_r * 1e8, 2L, 2M)

  for (int l = 0; l <= ranges.l_max; ++l) {
    for (int tms = -s.twice(); tms <= s.twice(); tms += 2) {
      const HalfInt m_s = HalfInt::from_twice(tms);
      const HalfInt j = HalfInt::integer(l) + m_s;
      if (j.twice() < 0) continue;
      AngularTuple ang;
      ang.l = l, ang.m_s = m_s, ang.j = j, ang.L = j.value() + 0.5;
      for (int n_r = -shift; n_r <= ranges.n_r_max + shift; ++n_r) {
        RadialSolution sol;
        try {
          sol = quantize_radial(model, ang, n_r, alpha, opts);
        } catch (const std::exception& e) {
          out.diagnostics.push_back("(n_r=" + std::to_string(n_r) + ", l=" + std::to_string(l) + ", m_s=" + m_s.str() +
                                    "): " + e.what());
          continue;
        }
        if (!sol.energy) continue;  // inadmissible raw label
        if (!(sol.I_r_target < ranges.n_r_max + 1 - 1e-9)) continue;
        for (int tmj = -j.twice(); tmj <= j.twice(); tmj += 2) {
          SpectralLine line;
          line.qn.n_r = n_r;
          line.qn.l = l;
          line.qn.m_s = m_s;
          line.qn.s = s;
          line.qn.m_l = (HalfInt::from_twice(tmj) - m_s).twice() / 2;
          line.energy = *sol.energy;
          line.I_r = sol.I_r_target;
          line.L = ang.L;
          line.n = static_cast<int>(std::lround(sol.I_r_target + ang.L));
          const auto key = std::make_tuple(std::llround(sol.I_r_target * 1e8), j.twice() + 1, tmj);
          auto it = tori.find(key);
          auto rank = [](const SpectralLine& x) { return std::make_tuple(x.qn.n_r < 0, x.qn.l, x.qn.m_s.twice()); };
          if (it == tori.end()) tori.emplace(key, line);
          else if (rank(line) < rank(it->second)) it->second = line;
        }
      }
    }
  }
  for (auto& [key, line] : tori) out.lines.push_back(line);
  group_levels(out.lines, model.reference_energy(), group_tol);
  return out;
}

// Historical levels for n_r >= 0, 1 <= l <= l_max, one state per (n_r, l).
inline std::vector<SpectralLine> sommerfeld_spectrum(int n_r_max, int l_max, double alpha_s, double mc2,
                                                     double group_tol = 1e-9) {
  if (n_r_max < 0 || l_max < 0) throw DomainError("Sommerfeld bounds must be non-negative");
  std::vector<SpectralLine> out;
  for (int n_r = 0; n_r <= n_r_max; ++n_r) {
    for (int l = 1; l <= l_max; ++l) {
      SpectralLine line;
      line.qn.n_r = n_r;
      line.qn.l = l;
      line.energy = sommerfeld_energy(n_r, l, alpha_s, mc2);
      line.I_r = n_r;
      line.L = l;
      line.n = n_r + l;
      out.push_back(line);
    }
  }
  group_levels(out, mc2, group_tol);
  return out;
}

}  // namespace skewquant
