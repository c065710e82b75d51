// Copyright 2026 The skewquant Authors
// SPDX-License-Identifier: Apache-2.0

#include <skewquant/actions_angles.hpp>
#include <skewquant/models.hpp>

#include <gtest/gtest.h>

using namespace skewquant;

namespace {

// H = p^2/2 - 1/r without a spin field; closed ellipses.
class NewtonKepler final : public SphericalModel {
 public:
  [[nodiscard]] std::string name() const override { return "newton"; }
  [[nodiscard]] double hamiltonian(const PhasePoint& pt) const override {
    return 0.5 * pt.p.squaredNorm() - 1.0 / pt.x.norm();
  }
  [[nodiscard]] double effective_energy(double L, double r) const override { return L * L / (2 * r * r) - 1.0 / r; }
  [[nodiscard]] double radial_momentum_squared(double E, double L, double r) const override {
    return 2.0 * (E + 1.0 / r) - L * L / (r * r);
  }
  [[nodiscard]] double escape_energy() const override { return 0.0; }
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(TurningPoints, OscillatorClosedForm) {
  const double m = 1.4, w = 0.7;
  const HarmonicOscillatorModel ho(m, w, 0.1);
  for (double E : {1.0, 3.0}) {
    for (double L : {0.2, 1.0}) {
      // m^2 w^2 u^2 - 2 m E u + L^2 = 0 with u = r^2
      const double d = std::sqrt(E * E - w * w * L * L);
      const TurningPoints tp = radial_turning_points(ho, E, L);
      EXPECT_LT(rel(tp.r_min, std::sqrt((E - d) / (m * w * w))), 1e-12);
      EXPECT_LT(rel(tp.r_max, std::sqrt((E + d) / (m * w * w))), 1e-12);
    }
  }
}

TEST(TurningPoints, KeplerCircularLimit) {
  const KeplerModel k(1.0, 1.0, 0.5);
  const double L = 0.8;
  const BoundWindow w = bound_window(k, L);
  const TurningPoints tp = radial_turning_points(k, w.E_min, L);
  EXPECT_TRUE(tp.circular);
  EXPECT_NEAR(tp.r_min, tp.r_max, 1e-6 * tp.r_max);
  // Circular radius from e^2 eps r = c^2 L^2 with eps = sqrt(m^2 c^4 + c^2 L^2/r^2).
  const double r = w.r_circular, eps = std::sqrt(1.0 + L * L / (r * r));
  // The minimiser locates r to about sqrt(machine epsilon).
  EXPECT_NEAR(0.25 * eps * r, L * L, 1e-7);
  EXPECT_EQ(radial_action(k, w.E_min, L), 0.0);
}

TEST(TurningPoints, KeplerEscapeThreshold) {
  const KeplerModel k(1.0, 1.0, 0.5);
  double prev = 0.0;
  for (double gap : {1e-2, 1e-3, 1e-4, 1e-5}) {
    const double rmax = radial_turning_points(k, 1.0 - gap, 0.6).r_max;
    EXPECT_GT(rmax, 5.0 * prev);
    prev = rmax;
  }
  EXPECT_THROW(radial_turning_points(k, 1.0, 0.6), DomainError);
  EXPECT_THROW(radial_turning_points(k, 0.5, 0.6), DomainError);
  EXPECT_THROW(radial_turning_points(k, 0.95, 0.2), DomainError);  // c L < e^2
}

TEST(RadialAction, OscillatorClosedForm) {
  const double w = 0.9;
  const HarmonicOscillatorModel ho(1.0, w, 0.0);
  for (double E : {1.5, 4.0, 20.0})
    for (double L : {0.5, 1.5}) EXPECT_LT(rel(radial_action(ho, E, L), (E / w - L) / 2), 1e-10);
}

TEST(RadialAction, NewtonKeplerClosedForm) {
  const NewtonKepler nk;
  for (double E : {-0.45, -0.2, -0.05})
    for (double L : {0.3, 0.9}) {
      if (E <= -0.5 / (L * L)) continue;
      EXPECT_LT(rel(radial_action(nk, E, L), 1.0 / std::sqrt(-2 * E) - L), 1e-10);
    }
}

TEST(Frequencies, Oscillator) {
  const double w = 1.3;
  const HarmonicOscillatorModel ho(1.0, w, 0.4);
  for (double E : {2.0, 6.0}) {
    const Frequencies fr = frequencies(ho, E, 1.1);
    EXPECT_NEAR(fr.omega_r, 2 * w, 1e-7);
    EXPECT_NEAR(fr.omega_L, w, 1e-7);
    EXPECT_NEAR(fr.ratio, 0.5, 1e-8);
  }
}

TEST(Frequencies, KeplerRatioIsInverseGamma) {
  const double c = 1.0, e = 0.5;
  const KeplerModel k(1.0, c, e);
  for (double L : {0.3, 0.6, 1.2}) {
    const BoundWindow w = bound_window(k, L);
    for (double frac : {1e-4, 0.3, 0.9, 0.999}) {
      const double E = w.E_min + frac * (w.E_max - w.E_min);
      const double expected = c * L / std::sqrt(c * c * L * L - e * e * e * e);
      EXPECT_LT(rel(frequencies(k, E, L).ratio, expected), 1e-7) << L << ' ' << frac;
    }
  }
}

TEST(Frequencies, NonrelativisticLimitClosesOrbits) {
  const double L = 1.0;
  for (double c : {10.0, 100.0, 1000.0}) {
    const KeplerModel k(1.0, c, 1.0);
    const BoundWindow w = bound_window(k, L);
    const double ratio = frequencies(k, 0.5 * (w.E_min + w.E_max), L).ratio;
    EXPECT_NEAR(ratio, 1.0, 1.0 / (c * c));
  }
}

TEST(RotationAngle, ZeroFieldClosedOrbitsGiveTwoPi) {
  const NewtonKepler nk;
  const RadialRotation r = rotation_angle_radial(nk, -0.2, 0.8, 1e-11);
  EXPECT_NEAR(r.alpha, kTwoPi, 1e-6);
  EXPECT_LT(r.field_integral.norm(), 1e-15);
}

TEST(RotationAngle, RelativisticKeplerIsTwoPi) {
  const KeplerModel k(1.0, 1.0, 0.5);
  for (double L : {0.3, 0.7, 1.5}) {
    const BoundWindow w = bound_window(k, L);
    for (double frac : {0.0, 0.05, 0.5, 0.95}) {
      const double E = w.E_min + frac * (w.E_max - w.E_min);
      const RadialRotation r = rotation_angle_radial(k, E, L);
      EXPECT_NEAR(r.alpha, kTwoPi, 1e-6) << L << ' ' << frac;
      EXPECT_LT(r.perpendicular, 1e-8);
      EXPECT_EQ(r.extrapolated, frac == 0.0);
    }
  }
}

TEST(RotationAngle, OscillatorFullOrbitCycle) {
  // The orbit closes after 2pi/w; the cocycle there is a rotation by 2pi kappa |L| / w about L.
  const double w = 1.1, kappa = 0.37;
  const HarmonicOscillatorModel ho(1.0, w, kappa);
  const PhasePoint start = make_point(Vec3(0.2, 0.9, -0.3), Vec3(1.0, 0.1, 0.4));
  const Vec3 L = angular_momentum(start);
  const SU2Element d = integrate_cocycle(ho, start, kTwoPi / w, 1e-12).back().state.cocycle;
  EXPECT_NEAR(angle_about(d, L.normalized()), reduce_angle(kTwoPi * kappa * L.norm() / w, kFourPi), 1e-8);

  // The radial cycle takes half of that orbit minus the frame term 2pi (w_L / w_r) = pi.
  const double l = 1.3, E = 4.0;
  EXPECT_NEAR(rotation_angle_radial(ho, E, l).alpha, reduce_angle(kPi * kappa * l / w - kPi, kFourPi), 1e-8);
}

TEST(Decomposition, SphericalModels) {
  const KeplerModel k(1.0, 1.0, 0.5);
  const HarmonicOscillatorModel ho(1.0, 0.8, 0.3);
  EXPECT_LT(consistency_decomposition(k, 0.95, 0.7), 1e-8);
  EXPECT_LT(consistency_decomposition(ho, 3.0, 1.2), 1e-8);
}

TEST(Decomposition, OscillatorSingleAction) {
  const double w = 0.8, kappa = 0.3;
  const HarmonicOscillatorModel ho(1.0, w, kappa);
  std::vector<PhasePoint> pts;
  for (const auto& s : integrate_flow(ho, make_point(Vec3(0.3, 1.0, 0.2), Vec3(1.2, -0.1, 0.3)), 10.0, 1e-10).samples)
    pts.push_back(s.state.phase);
  const FieldTerm one{w, [&](const PhasePoint& pt) { return Vec3(kappa / w * angular_momentum(pt)); }};
  EXPECT_LT(decomposition_residual(ho, {one}, pts), 1e-10);
}

TEST(Decomposition, ZeroFieldHasZeroTerms) {
  const NewtonKepler nk;
  const PhasePoint pt = make_point(Vec3(0.1, 0.9, 0), Vec3(1, 0, 0));
  const FieldTerm zero{1.0, [](const PhasePoint&) { return Vec3::Zero().eval(); }};
  EXPECT_EQ(decomposition_residual(nk, {zero, zero}, {pt}), 0.0);
}

TEST(TorusData, AnglesAndMaslovIndices) {
  const KeplerModel k(1.0, 1.0, 0.5);
  const ActionData a = torus_data(k, {0.95, 0.7, 0.4});
  EXPECT_DOUBLE_EQ(a.I_theta, 0.3);
  EXPECT_DOUBLE_EQ(a.I_phi, 0.4);
  EXPECT_EQ(a.mu_r, 2);
  EXPECT_EQ(a.mu_theta, 2);
  EXPECT_EQ(a.mu_phi, 0);
  EXPECT_NEAR(a.alpha_r, kTwoPi, 1e-6);
  EXPECT_GT(a.I_r, 0.0);
  EXPECT_THROW(torus_data(k, {0.95, 0.7, 0.8}), DomainError);
}
