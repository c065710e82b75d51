// Copyright 2026 The skewquant Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <skewquant/actions_angles.hpp>
#include <skewquant/integrability.hpp>
#include <skewquant/models.hpp>
#include <skewquant/quantizer.hpp>

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace skewquant::cli {

using nlohmann::json;

enum ExitCode : int { kOk = 0, kConfigError = 1, kNumericFailure = 2 };

// Invalid or inconsistent configuration; the message names the field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelConfig {
  std::string name = "kepler";
  std::string units = "natural";  // natural | atomic | custom
  double alpha_s = 0.0072973525693;
  double m = 1.0, c = 1.0, e = 1.0;
  double omega = 1.0;
  std::optional<double> kappa;  // empty: Thomas value omega^2/(2 m c^2)
  double r_guard = 0.0;
};

struct RunConfig {
  std::string subcommand;
  ModelConfig model;
  HalfInt spin = HalfInt::from_twice(1);

  // spectrum
  int n_r_max = 3;
  int l_max = 3;
  std::optional<int> n_max;

  // angles: energies are absolute, or binding energies below the escape threshold
  std::vector<double> grid_E;
  std::vector<double> grid_L;
  bool grid_binding = false;

  // orbit: either a torus (E or binding, L) or an explicit phase point
  std::optional<double> orbit_E, orbit_binding, orbit_L;
  std::optional<Vec3> orbit_p, orbit_x;
  double orbit_periods = 3.0;
  std::optional<double> orbit_t_final;
  Vec3 spin0 = Vec3::UnitX();

  // verify
  PhaseBox box;
  int samples = 200;
  int delta_points = 2;
  int delta_grid = 4;
  std::optional<Vec3> broken_field;

  double tol_integrator = 1e-11;
  double tol_residual = 1e-6;
  double tol_group = 1e-9;
  double tol_delta = 1e-6;
  std::uint64_t seed = 20240901;

  std::string out_path;
  std::string summary_path;
};

namespace detail {

template <class T>
T get_field(const json& j, const std::string& key, const std::string& path) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config field '" + path + key + "' is missing or has the wrong type");
  }
}

template <class T>
void read_optional(const json& j, const std::string& key, const std::string& path, T& into) {
  if (j.contains(key)) into = get_field<T>(j, key, path);
}

inline Vec3 read_vec3(const json& j, const std::string& key, const std::string& path) {
  const auto v = get_field<std::vector<double>>(j, key, path);
  if (v.size() != 3) throw ConfigError("config field '" + path + key + "' must have 3 components");
  return {v[0], v[1], v[2]};
}

inline HalfInt read_spin(const json& j) {
  try {
    if (j.is_string()) {
      const std::string s = j.get<std::string>();
      const auto slash = s.find('/');
      if (slash == std::string::npos) return HalfInt::integer(std::stoi(s));
      if (s.substr(slash + 1) != "2") throw ConfigError("config field 'spin' must be a multiple of 1/2");
      return HalfInt::from_twice(std::stoi(s.substr(0, slash)));
    }
    return HalfInt::from_double(j.get<double>());
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("config field 'spin' must be a non-negative multiple of 1/2");
  }
}

// A list [a, b, ...] or {"from": a, "to": b, "count": n}.
inline std::vector<double> read_grid(const json& j, const std::string& key, const std::string& path) {
  const json& g = j.at(key);
  if (g.is_array()) return get_field<std::vector<double>>(j, key, path);
  const double from = get_field<double>(g, "from", path + key + ".");
  const double to = get_field<double>(g, "to", path + key + ".");
  const int count = get_field<int>(g, "count", path + key + ".");
  if (count < 1) throw ConfigError("config field '" + path + key + ".count' must be positive");
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(count == 1 ? from : from + (to - from) * i / (count - 1));
  return out;
}

inline void require_positive(double v, const std::string& field) {
  if (!(v > 0) || !std::isfinite(v)) throw ConfigError("config field '" + field + "' must be positive");
}

}  // namespace detail

inline RunConfig parse_config(const json& j) {
  using namespace detail;
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig rc;
  read_optional(j, "subcommand", "", rc.subcommand);

  if (j.contains("model")) {
    const json& m = j.at("model");
    if (m.is_string()) {
      rc.model.name = m.get<std::string>();
    } else {
      read_optional(m, "name", "model.", rc.model.name);
      read_optional(m, "units", "model.", rc.model.units);
      read_optional(m, "alpha_s", "model.", rc.model.alpha_s);
      read_optional(m, "m", "model.", rc.model.m);
      read_optional(m, "c", "model.", rc.model.c);
      read_optional(m, "e", "model.", rc.model.e);
      read_optional(m, "omega", "model.", rc.model.omega);
      read_optional(m, "r_guard", "model.", rc.model.r_guard);
      if (m.contains("kappa")) {
        const json& k = m.at("kappa");
        if (k.is_string() && k.get<std::string>() == "thomas") rc.model.kappa.reset();
        else rc.model.kappa = get_field<double>(m, "kappa", "model.");
      }
    }
  }
  if (j.contains("spin")) rc.spin = read_spin(j.at("spin"));

  if (j.contains("ranges")) {
    const json& r = j.at("ranges");
    read_optional(r, "n_r_max", "ranges.", rc.n_r_max);
    read_optional(r, "l_max", "ranges.", rc.l_max);
    if (r.contains("n_max")) {
      rc.n_max = get_field<int>(r, "n_max", "ranges.");
      if (!r.contains("n_r_max")) rc.n_r_max = *rc.n_max - 1;
      if (!r.contains("l_max")) rc.l_max = *rc.n_max;
    }
  }
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    if (g.contains("E") && g.contains("binding")) throw ConfigError("config 'grid' takes either 'E' or 'binding'");
    if (g.contains("E")) rc.grid_E = read_grid(g, "E", "grid.");
    if (g.contains("binding")) rc.grid_E = read_grid(g, "binding", "grid."), rc.grid_binding = true;
    if (g.contains("L")) rc.grid_L = read_grid(g, "L", "grid.");
  }
  if (j.contains("orbit")) {
    const json& o = j.at("orbit");
    if (o.contains("E")) rc.orbit_E = get_field<double>(o, "E", "orbit.");
    if (o.contains("binding")) rc.orbit_binding = get_field<double>(o, "binding", "orbit.");
    if (o.contains("L")) rc.orbit_L = get_field<double>(o, "L", "orbit.");
    if (o.contains("p")) rc.orbit_p = read_vec3(o, "p", "orbit.");
    if (o.contains("x")) rc.orbit_x = read_vec3(o, "x", "orbit.");
    if (o.contains("t_final")) rc.orbit_t_final = get_field<double>(o, "t_final", "orbit.");
    read_optional(o, "radial_periods", "orbit.", rc.orbit_periods);
    if (o.contains("spin0")) rc.spin0 = read_vec3(o, "spin0", "orbit.");
  }
  if (j.contains("verify")) {
    const json& v = j.at("verify");
    if (v.contains("box")) {
      const json& b = v.at("box");
      auto range = [&](const char* key, Vec3& lo, Vec3& hi) {
        if (!b.contains(key)) return;
        const auto r = get_field<std::vector<double>>(b, key, "verify.box.");
        if (r.size() != 2) throw ConfigError(std::string("config field 'verify.box.") + key + "' must be [lo, hi]");
        lo = Vec3::Constant(r[0]);
        hi = Vec3::Constant(r[1]);
      };
      range("p", rc.box.p_lo, rc.box.p_hi);
      range("x", rc.box.x_lo, rc.box.x_hi);
      read_optional(b, "min_radius", "verify.box.", rc.box.min_radius);
    }
    read_optional(v, "samples", "verify.", rc.samples);
    read_optional(v, "delta_points", "verify.", rc.delta_points);
    read_optional(v, "delta_grid", "verify.", rc.delta_grid);
    if (v.contains("broken_field")) rc.broken_field = read_vec3(v, "broken_field", "verify.");
  }
  if (j.contains("tolerances")) {
    const json& t = j.at("tolerances");
    read_optional(t, "integrator", "tolerances.", rc.tol_integrator);
    read_optional(t, "residual", "tolerances.", rc.tol_residual);
    read_optional(t, "group", "tolerances.", rc.tol_group);
    read_optional(t, "delta", "tolerances.", rc.tol_delta);
  }
  read_optional(j, "seed", "", rc.seed);
  if (j.contains("output")) {
    const json& o = j.at("output");
    read_optional(o, "path", "output.", rc.out_path);
    read_optional(o, "summary", "output.", rc.summary_path);
  }
  return rc;
}

inline void validate(const RunConfig& rc) {
  using detail::require_positive;
  static const std::vector<std::string> subs = {"spectrum", "verify", "orbit", "angles"};
  if (std::find(subs.begin(), subs.end(), rc.subcommand) == subs.end()) {
    throw ConfigError("config field 'subcommand' must be one of spectrum, verify, orbit, angles");
  }
  if (rc.model.name != "kepler" && rc.model.name != "ho") {
    throw ConfigError("config field 'model.name': unknown model '" + rc.model.name + "'");
  }
  if (rc.model.units != "natural" && rc.model.units != "atomic" && rc.model.units != "custom") {
    throw ConfigError("config field 'model.units' must be natural, atomic or custom");
  }
  require_positive(rc.model.alpha_s, "model.alpha_s");
  require_positive(rc.model.m, "model.m");
  require_positive(rc.model.c, "model.c");
  require_positive(rc.model.e, "model.e");
  require_positive(rc.model.omega, "model.omega");
  if (rc.spin.twice() < 0) throw ConfigError("config field 'spin' must be non-negative");
  if (rc.n_r_max < 0) throw ConfigError("config field 'ranges.n_r_max' must be non-negative");
  if (rc.l_max < 0) throw ConfigError("config field 'ranges.l_max' must be non-negative");
  if (rc.n_max && *rc.n_max < 1) throw ConfigError("config field 'ranges.n_max' must be at least 1");
  require_positive(rc.tol_integrator, "tolerances.integrator");
  require_positive(rc.tol_residual, "tolerances.residual");
  require_positive(rc.tol_group, "tolerances.group");
  require_positive(rc.tol_delta, "tolerances.delta");
  if (rc.samples < 1) throw ConfigError("config field 'verify.samples' must be positive");
  if (rc.delta_points < 0) throw ConfigError("config field 'verify.delta_points' must be non-negative");
  if (rc.delta_grid < 1) throw ConfigError("config field 'verify.delta_grid' must be positive");
  for (int i = 0; i < 3; ++i) {
    if (!(rc.box.p_lo[i] < rc.box.p_hi[i]) || !(rc.box.x_lo[i] < rc.box.x_hi[i])) {
      throw ConfigError("config field 'verify.box': empty sample box");
    }
  }
  if (rc.subcommand == "angles" && (rc.grid_E.empty() || rc.grid_L.empty())) {
    throw ConfigError("config field 'grid' needs non-empty E (or binding) and L lists");
  }
  if (rc.subcommand == "orbit") {
    const bool torus = (rc.orbit_E || rc.orbit_binding) && rc.orbit_L;
    const bool point = rc.orbit_p && rc.orbit_x && rc.orbit_t_final;
    if (!torus && !point) throw ConfigError("config field 'orbit' needs (E or binding, L) or (p, x, t_final)");
    if (rc.orbit_t_final && *rc.orbit_t_final < 0) throw ConfigError("config field 'orbit.t_final' must be >= 0");
    if (std::abs(rc.spin0.norm() - 1.0) > 1e-10) throw ConfigError("config field 'orbit.spin0' must be a unit vector");
  }
}

inline std::unique_ptr<SphericalModel> make_model(const ModelConfig& mc) {
  if (mc.name == "kepler") {
    if (mc.units == "natural") return std::make_unique<KeplerModel>(1.0, 1.0, std::sqrt(mc.alpha_s), mc.r_guard);
    if (mc.units == "atomic") return std::make_unique<KeplerModel>(1.0, 1.0 / mc.alpha_s, 1.0, mc.r_guard);
    return std::make_unique<KeplerModel>(mc.m, mc.c, mc.e, mc.r_guard);
  }
  if (mc.name == "ho") {
    const double c = mc.units == "atomic" ? 1.0 / mc.alpha_s : mc.c;
    const double kappa = mc.kappa ? *mc.kappa : mc.omega * mc.omega / (2.0 * mc.m * c * c);
    return std::make_unique<HarmonicOscillatorModel>(mc.m, mc.omega, kappa);
  }
  throw ConfigError("config field 'model.name': unknown model '" + mc.name + "'");
}

namespace detail {

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path, std::ios::binary);
      if (!file_) throw ConfigError("cannot open output file '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

inline void write_json(const std::string& path, const json& j) {
  Output out(path);
  out.stream() << j.dump(2) << '\n';
}

inline json point_json(const PhasePoint& pt) {
  return {{"p", std::vector<double>(pt.p.data(), pt.p.data() + pt.p.size())},
          {"x", std::vector<double>(pt.x.data(), pt.x.data() + pt.x.size())}};
}

}  // namespace detail

// CSV: n_r,l,m_s,j,m_j,E,multiplicity,n,I_r,L,level
inline int run_spectrum(const RunConfig& rc, std::ostream& log = std::cerr) {
  const auto model = make_model(rc.model);
  const Spectrum sp = build_spectrum(*model, rc.spin, {rc.n_r_max, rc.l_max},
                                     numeric_alpha(*model, rc.tol_integrator), rc.tol_group);
  std::vector<SpectralLine> lines;
  for (const auto& l : sp.lines)
    if (!rc.n_max || l.n <= *rc.n_max) lines.push_back(l);
  group_levels(lines, model->reference_energy(), rc.tol_group);

  detail::Output out(rc.out_path);
  auto& os = out.stream();
  os << "n_r,l,m_s,j,m_j,E,multiplicity,n,I_r,L,level\n";
  for (const auto& l : lines) {
    os << l.qn.n_r << ',' << l.qn.l << ',' << detail::num(l.qn.m_s.value()) << ',' << detail::num(l.qn.j().value())
       << ',' << detail::num(l.qn.m_j().value()) << ',' << detail::num(l.energy) << ',' << l.multiplicity << ','
       << l.n << ',' << detail::num(l.I_r) << ',' << detail::num(l.L) << ',' << l.level << '\n';
  }
  if (!rc.summary_path.empty()) {
    json levels = json::array();
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (i > 0 && lines[i].level == lines[i - 1].level) continue;
      levels.push_back({{"energy", lines[i].energy},
                        {"multiplicity", lines[i].multiplicity},
                        {"n", lines[i].n},
                        {"j", lines[i].qn.j().value()},
                        {"I_r", lines[i].I_r},
                        {"L", lines[i].L}});
    }
    detail::write_json(rc.summary_path, {{"model", model->name()},
                                         {"spin", rc.spin.value()},
                                         {"states", lines.size()},
                                         {"levels", levels},
                                         {"diagnostics", sp.diagnostics}});
  }
  for (const auto& d : sp.diagnostics) log << "spectrum: " << d << '\n';
  return kOk;
}

inline json report_json(const InvolutionReport& rep) {
  json failures = json::array();
  for (std::size_t i = 0; i < rep.points.size(); ++i) {
    if (rep.residuals[i] < rep.tolerance) continue;
    json f = detail::point_json(rep.points[i]);
    f["residual"] = rep.residuals[i];
    failures.push_back(f);
  }
  return {{"pair", rep.name},
          {"samples", rep.points.size()},
          {"max_residual", rep.max_residual},
          {"tolerance", rep.tolerance},
          {"pass", rep.pass},
          {"failures", failures}};
}

// JSON report: involution residuals and skew-commutator norms for the pairs
// (H, L), (H, M), (L, M), plus (L, broken M) when a broken field is configured.
// The broken pair is a negative control and does not enter the overall pass flag.
inline int run_verify(const RunConfig& rc, std::ostream& = std::cerr) {
  const auto model = make_model(rc.model);
  const AngularMomentumFlow flow_L;
  const AxialFlow flow_M;
  std::optional<AxialFlow> broken;
  if (rc.broken_field) broken.emplace(*rc.broken_field);

  const auto points = sample_phase_box(rc.box, rc.samples, rc.seed);
  struct Pair {
    std::string name;
    const HamiltonianModel* j;
    const HamiltonianModel* k;
    bool control = false;
  };
  std::vector<Pair> pairs = {{"H-L", model.get(), &flow_L}, {"H-M", model.get(), &flow_M}, {"L-M", &flow_L, &flow_M}};
  if (broken) pairs.push_back({"L-M(broken)", &flow_L, &*broken, true});

  // Delta checks use the sample points with the least degenerate L.
  std::vector<PhasePoint> delta_points;
  for (const auto& pt : points) {
    if (static_cast<int>(delta_points.size()) >= rc.delta_points) break;
    const Vec3 x(pt.x), p(pt.p);
    if (x.cross(p).norm() >= 0.5 * x.norm() * p.norm()) delta_points.push_back(pt);
  }

  json reports = json::array();
  bool all_pass = true;
  for (const auto& pr : pairs) {
    const InvolutionReport rep = involution_report(pr.name, *pr.j, *pr.k, points, rc.tol_residual);
    json r = report_json(rep);
    double worst = 0.0;
    for (const auto& pt : delta_points) {
      for (int a = 1; a <= rc.delta_grid; ++a) {
        for (int b = 1; b <= rc.delta_grid; ++b) {
          const double t = kTwoPi * a / rc.delta_grid, tp = kTwoPi * b / rc.delta_grid;
          worst = std::max(worst, skew_commutator_delta(*pr.j, *pr.k, pt, t, tp, rc.tol_integrator).norm);
        }
      }
    }
    r["delta_max"] = worst;
    r["delta_tolerance"] = rc.tol_delta;
    r["delta_points"] = delta_points.size();
    r["delta_pass"] = worst < rc.tol_delta;
    r["control"] = pr.control;
    if (!pr.control) all_pass = all_pass && rep.pass && worst < rc.tol_delta;
    reports.push_back(r);
  }
  detail::write_json(rc.out_path, {{"model", model->name()}, {"seed", rc.seed}, {"reports", reports}, {"pass", all_pass}});
  return kOk;
}

// Energy from either an absolute value or a binding energy below escape.
inline double resolve_energy(const SphericalModel& model, std::optional<double> E, std::optional<double> binding) {
  if (E) return *E;
  if (!std::isfinite(model.escape_energy())) throw ConfigError("binding energies need a model with an escape threshold");
  return model.escape_energy() - *binding;
}

// CSV columns as write_trajectory_csv.
inline int run_orbit(const RunConfig& rc, std::ostream& = std::cerr) {
  const auto model = make_model(rc.model);
  PhasePoint start;
  double t_final = 0.0;
  if (rc.orbit_p && rc.orbit_x) {
    start = make_point(*rc.orbit_p, *rc.orbit_x);
    t_final = rc.orbit_t_final.value_or(0.0);
  } else {
    const double E = resolve_energy(*model, rc.orbit_E, rc.orbit_binding);
    const double L = *rc.orbit_L;
    const TurningPoints tp = radial_turning_points(*model, E, L);
    start = make_point(Vec3(0, L / tp.r_min, 0), Vec3(tp.r_min, 0, 0));
    t_final = rc.orbit_t_final ? *rc.orbit_t_final
                               : rc.orbit_periods * kTwoPi / frequencies(*model, E, L).omega_r;
  }
  FlowOptions o;
  o.tol = rc.tol_integrator;
  o.cocycle = true;
  o.spin = true;
  const Trajectory traj = SkewFlow(*model, o, start).run(make_sample(start, {}, rc.spin0), t_final);
  detail::Output out(rc.out_path);
  write_trajectory_csv(out.stream(), traj);
  return kOk;
}

// CSV: E,L,I_r,omega_r,omega_L,alpha_r; grid points without bound motion are
// reported on the log and skipped.
inline int run_angles(const RunConfig& rc, std::ostream& log = std::cerr) {
  const auto model = make_model(rc.model);
  detail::Output out(rc.out_path);
  auto& os = out.stream();
  os << "E,L,I_r,omega_r,omega_L,alpha_r\n";
  int rows = 0;
  for (const double g : rc.grid_E) {
    const double E = rc.grid_binding ? resolve_energy(*model, std::nullopt, g) : g;
    for (const double L : rc.grid_L) {
      try {
        const double I = radial_action(*model, E, L);
        const Frequencies fr = frequencies(*model, E, L);
        const RadialRotation rot = rotation_angle_radial(*model, E, L, rc.tol_integrator);
        os << detail::num(E) << ',' << detail::num(L) << ',' << detail::num(I) << ',' << detail::num(fr.omega_r)
           << ',' << detail::num(fr.omega_L) << ',' << detail::num(rot.alpha) << '\n';
        ++rows;
      } catch (const DomainError& e) {
        log << "angles: skipped E=" << detail::num(E) << " L=" << detail::num(L) << ": " << e.what() << '\n';
      }
    }
  }
  if (rows == 0) throw NumericalError("angles: no grid point admits bound motion");
  return kOk;
}

// Dispatch with the documented exit codes.
inline int run(const RunConfig& rc, std::ostream& log = std::cerr) {
  try {
    validate(rc);
    if (rc.subcommand == "spectrum") return run_spectrum(rc, log);
    if (rc.subcommand == "verify") return run_verify(rc, log);
    if (rc.subcommand == "orbit") return run_orbit(rc, log);
    return run_angles(rc, log);
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DomainError& e) {
    log << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const NumericalError& e) {
    log << "numeric failure: " << e.what() << '\n';
    return kNumericFailure;
  }
}

}  // namespace skewquant::cli
