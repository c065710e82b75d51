// Copyright 2026 The skewquant Authors
// SPDX-License-Identifier: Apache-2.0

#include <skewquant/quantizer.hpp>

#include <gtest/gtest.h>

#include <map>
#include <set>

using namespace skewquant;

namespace {

constexpr double kAlpha = 0.0072973525693;
const HalfInt kHalf = HalfInt::from_twice(1);

AngularTuple tuple(int l, HalfInt m_s) {
  AngularTuple a;
  a.l = l;
  a.m_s = m_s;
  a.j = HalfInt::integer(l) + m_s;
  a.L = a.j.value() + 0.5;
  return a;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(QuantizeAngular, SpinHalfExcludesNegativeJ) {
  const auto tuples = quantize_angular(kHalf, 1);
  std::map<std::pair<int, int>, int> count;  // (l, 2j) -> number of m_j
  for (const auto& t : tuples) {
    EXPECT_GE(t.j.twice(), 0);
    EXPECT_LE(std::abs(t.m_j.twice()), t.j.twice());
    EXPECT_DOUBLE_EQ(t.L, t.l + 0.5 + t.m_s.value());
    ++count[{t.l, t.j.twice()}];
  }
  EXPECT_EQ(count.size(), 3u);
  EXPECT_EQ((count[{0, 1}]), 2);
  EXPECT_EQ((count[{1, 1}]), 2);
  EXPECT_EQ((count[{1, 3}]), 4);
  for (const auto& t : tuples)
    if (t.l == 0) EXPECT_EQ(t.m_s.twice(), 1);
}

TEST(QuantizeAngular, SpinlessReducesToHalfIntegerL) {
  const auto tuples = quantize_angular(HalfInt{}, 3);
  EXPECT_EQ(tuples.size(), 1u + 3u + 5u + 7u);
  for (const auto& t : tuples) {
    EXPECT_DOUBLE_EQ(t.L, t.l + 0.5);
    EXPECT_EQ(t.m_l, t.m_j.twice() / 2);
  }
  EXPECT_THROW(quantize_angular(HalfInt::from_twice(-1), 1), DomainError);
}

TEST(QuantizeRadial, KeplerGroundState) {
  const KeplerModel k = KeplerModel::natural(kAlpha);
  const RadialSolution sol = quantize_radial(k, tuple(1, -kHalf), 0, numeric_alpha(k));
  ASSERT_TRUE(sol.energy.has_value()) << sol.diagnostic;
  EXPECT_LT(rel(*sol.energy, std::sqrt(1.0 - kAlpha * kAlpha)), 1e-8);
  EXPECT_NEAR(sol.alpha_r, kTwoPi, 1e-6);
  EXPECT_NEAR(sol.I_r_target, 0.0, 1e-9);
}

TEST(QuantizeRadial, KeplerMatchesFineStructure) {
  const KeplerModel k = KeplerModel::natural(kAlpha);
  const auto alpha = numeric_alpha(k);
  for (int n_r = 0; n_r <= 2; ++n_r) {
    for (int l = 0; l <= 2; ++l) {
      for (HalfInt m_s : {-kHalf, kHalf}) {
        if (l == 0 && m_s.twice() < 0) continue;
        const RadialSolution sol = quantize_radial(k, tuple(l, m_s), n_r, alpha);
        ASSERT_TRUE(sol.energy) << sol.diagnostic;
        const double exact = fine_structure_energy(n_r, l, m_s, kAlpha, 1.0);
        // Compare binding energies, which carry the physics.
        EXPECT_LT(std::abs(*sol.energy - exact) / (1.0 - exact), 1e-8) << n_r << ' ' << l << ' ' << m_s.str();
      }
    }
  }
}

TEST(QuantizeRadial, NegativeActionIsSkipped) {
  const KeplerModel k = KeplerModel::natural(kAlpha);
  const RadialSolution sol = quantize_radial(k, tuple(0, -kHalf), 0, numeric_alpha(k));
  // L = 0 lies below the collision threshold.
  EXPECT_FALSE(sol.energy);
  EXPECT_FALSE(sol.diagnostic.empty());
  const RadialSolution neg = quantize_radial(k, tuple(2, -kHalf), -1, numeric_alpha(k));
  EXPECT_FALSE(neg.energy);
  EXPECT_NE(neg.diagnostic.find("negative"), std::string::npos);
}

TEST(QuantizeRadial, OscillatorFormula) {
  // alpha_r lies in [0, 4pi): 3pi + pi kappa L / w rather than the value
  // -pi + pi kappa L / w that the closed formula is written with.  The extra
  // 4pi shifts the radial label by 2 m_s.
  const double w = 1.0, kappa = 0.05;
  const HarmonicOscillatorModel ho(1.0, w, kappa);
  const auto alpha = numeric_alpha(ho);
  for (int n_r = 0; n_r <= 2; ++n_r) {
    for (int l = 0; l <= 2; ++l) {
      for (HalfInt m_s : {-kHalf, kHalf}) {
        if (l == 0 && m_s.twice() < 0) continue;
        const RadialSolution sol = quantize_radial(ho, tuple(l, m_s), n_r - m_s.twice(), alpha);
        EXPECT_NEAR(sol.alpha_r, reduce_angle(3 * kPi + kPi * kappa * (l + 0.5 + m_s.value()) / w, kFourPi), 1e-8);
        ASSERT_TRUE(sol.energy) << sol.diagnostic;
        const double exact = w * (2 * n_r + l + 1.5) + m_s.value() * kappa * (l + 0.5 + m_s.value());
        EXPECT_LT(rel(*sol.energy, exact), 1e-8);
      }
    }
  }
}

TEST(QuantizeRadial, ZeroCouplingIgnoresSpin) {
  const HarmonicOscillatorModel ho(1.0, 2.0, 0.0);
  const auto alpha = numeric_alpha(ho);
  for (int l = 1; l <= 2; ++l) {
    const double up = *quantize_radial(ho, tuple(l, kHalf), 0, alpha).energy;
    const double down = *quantize_radial(ho, tuple(l, -kHalf), 2, alpha).energy;
    // Radial labels n_r - 2 m_s with n_r = 1: both land on the spinless line.
    EXPECT_LT(rel(up, 2.0 * (2 + l + 1.5)), 1e-9);
    EXPECT_LT(rel(down, 2.0 * (2 + l + 1.5)), 1e-9);
  }
}

TEST(QuantizeRadial, NonConvergenceIsANumericalError) {
  const HarmonicOscillatorModel ho(1.0, 1.0, 0.1);
  int calls = 0;
  const AlphaProvider flip = [&](double, double) { return (calls++ % 2) ? 0.5 : 2.5; };
  QuantizeOptions o;
  o.max_iterations = 20;
  EXPECT_THROW(quantize_radial(ho, tuple(1, kHalf), 1, flip, o), NumericalError);
}

TEST(GroupLevels, MergesWithinRelativeTolerance) {
  std::vector<SpectralLine> lines(4);
  lines[0].energy = 1.0 + 2e-3;
  lines[1].energy = 1.0 + 1e-3;
  lines[2].energy = 1.0 + 1e-3 * (1 + 1e-12);
  lines[3].energy = 1.0 + 1e-3 * (1 + 1e-6);
  group_levels(lines, 1.0, 1e-9);
  EXPECT_EQ(lines[0].multiplicity, 2);
  EXPECT_EQ(lines[1].multiplicity, 2);
  EXPECT_EQ(lines[0].level, 0);
  EXPECT_EQ(lines[2].level, 1);
  EXPECT_EQ(lines[3].level, 2);
  EXPECT_EQ(lines[3].multiplicity, 1);
}

TEST(BuildSpectrum, KeplerLowLevels) {
  const KeplerModel k = KeplerModel::natural(kAlpha);
  const Spectrum sp = build_spectrum(k, kHalf, {1, 2}, numeric_alpha(k));
  std::vector<SpectralLine> low;
  for (const auto& l : sp.lines)
    if (l.n <= 2) low.push_back(l);
  ASSERT_EQ(low.size(), 8u);
  // (n=1, j=1/2) x 2, (n=2, j=1/2) x 2, (n=2, j=3/2) x 4
  EXPECT_EQ(low[0].multiplicity, 2);
  EXPECT_EQ(low[0].n, 1);
  EXPECT_EQ(low[0].qn.j().twice(), 1);
  EXPECT_LT(rel(low[0].energy, std::sqrt(1 - kAlpha * kAlpha)), 1e-9);
  EXPECT_EQ(low[2].multiplicity, 2);
  EXPECT_EQ(low[2].qn.j().twice(), 1);
  EXPECT_EQ(low[4].multiplicity, 4);
  EXPECT_EQ(low[4].qn.j().twice(), 3);
  EXPECT_GT(low[4].energy, low[2].energy);
  std::set<int> mj;
  for (int i = 0; i < 2; ++i) mj.insert(low[i].qn.m_j().twice());
  EXPECT_EQ(mj, (std::set<int>{-1, 1}));
  EXPECT_TRUE(sp.diagnostics.empty());
}

TEST(BuildSpectrum, SommerfeldSameEnergiesDifferentMultiplicities) {
  const int n_max = 3;
  const KeplerModel k = KeplerModel::natural(kAlpha);
  const Spectrum sp = build_spectrum(k, kHalf, {n_max - 1, n_max}, numeric_alpha(k));
  std::map<int, std::pair<double, int>> spin_levels;  // level -> (E, multiplicity)
  for (const auto& l : sp.lines)
    if (l.n <= n_max) spin_levels[l.level] = {l.energy, l.multiplicity};
  std::vector<SpectralLine> som;
  for (const auto& l : sommerfeld_spectrum(n_max - 1, n_max, kAlpha, 1.0))
    if (l.n <= n_max) som.push_back(l);
  group_levels(som, 1.0, 1e-9);

  std::vector<double> a, b;
  std::vector<int> ma, mb;
  for (const auto& [lvl, em] : spin_levels) a.push_back(em.first), ma.push_back(em.second);
  for (std::size_t i = 0; i < som.size(); ++i)
    if (i == 0 || som[i].level != som[i - 1].level) b.push_back(som[i].energy), mb.push_back(som[i].multiplicity);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_LT(std::abs(a[i] - b[i]) / (1 - b[i]), 1e-7);
  EXPECT_NE(ma, mb);
}

TEST(BuildSpectrum, SpinlessOscillatorShellDegeneracy) {
  const double w = 1.0;
  const HarmonicOscillatorModel ho(1.0, w, 0.0);
  const int shells = 4;
  const Spectrum sp = build_spectrum(ho, HalfInt{}, {shells, 2 * shells}, numeric_alpha(ho));
  std::map<int, int> count;
  for (const auto& l : sp.lines) {
    const int shell = static_cast<int>(std::lround(l.energy / w - 1.5));
    EXPECT_LT(std::abs(l.energy - w * (shell + 1.5)), 1e-8);
    if (shell <= shells) ++count[shell];
  }
  for (int N = 0; N <= shells; ++N) {
    int brute = 0;  // (n_r, l, m_l) with 2 n_r + l = N
    for (int n_r = 0; 2 * n_r <= N; ++n_r) brute += 2 * (N - 2 * n_r) + 1;
    EXPECT_EQ(brute, (N + 1) * (N + 2) / 2);
    EXPECT_EQ(count[N], brute) << N;
  }
}

TEST(Sommerfeld, GroundStateLine) {
  const auto lines = sommerfeld_spectrum(0, 1, kAlpha, 1.0);
  ASSERT_EQ(lines.size(), 1u);
  EXPECT_NEAR(lines[0].energy, std::sqrt(1 - kAlpha * kAlpha), 1e-15);
  EXPECT_EQ(lines[0].multiplicity, 1);
}
