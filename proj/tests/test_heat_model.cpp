#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "bstab/heat_model.hpp"
#include "oracles.hpp"

using namespace bstab;

namespace {

HeatConfig heat(int n, double c2 = 16.0, double b = 0.0) {
  HeatConfig cfg;
  cfg.n = n;
  cfg.c2 = c2;
  cfg.advection_b = b;
  return cfg;
}

double growth(const std::vector<GammaScanRow>& rows, double gamma) {
  std::vector<double> norms;
  for (const auto& r : rows)
    if (r.gamma == gamma) norms.push_back(r.norm);
  return norms.back() / norms.front();
}

VerifyOptions quick_options() {
  VerifyOptions o;
  o.random_forcings = 8;
  return o;
}

}  // namespace

TEST(HeatOperator, StencilEntries) {
  const HeatConfig cfg = heat(8, 3.0, 2.0);
  const CMatrix a = build_heat_operator(cfg).entries();
  const double s = 1.0 / (cfg.h() * cfg.h());
  const double adv = 2.0 / (2.0 * cfg.h());
  for (int i = 0; i < 8; ++i) {
    EXPECT_DOUBLE_EQ(a(i, i).real(), -2.0 * s + 3.0);
    if (i > 0) EXPECT_DOUBLE_EQ(a(i, i - 1).real(), s - adv);
    if (i < 7) EXPECT_DOUBLE_EQ(a(i, i + 1).real(), s + adv);
  }
  EXPECT_EQ(a(0, 2), Complex(0.0, 0.0));
}

TEST(HeatOperator, EigenvaluesWithAdvection) {
  const HeatConfig cfg = heat(32, 16.0, 2.0);
  const SpectralData sd = spectrum(build_heat_operator(cfg));
  std::vector<double> expected;
  for (int k = 1; k <= 32; ++k) expected.push_back(oracle::fd_advection_eigenvalue(16.0, 2.0, 32, k));
  std::sort(expected.rbegin(), expected.rend());
  for (int k = 0; k < 32; ++k) {
    EXPECT_NEAR(sd.eigenvalues(k).real(), expected[static_cast<std::size_t>(k)], 1e-7);
    EXPECT_NEAR(sd.eigenvalues(k).imag(), 0.0, 1e-7);
  }
  EXPECT_EQ(sd.unstable_count, 1);
}

TEST(HeatOperator, LeadingEigenvalueConverges) {
  const SpectralData sd = spectrum(build_heat_operator(heat(64)));
  EXPECT_NEAR(sd.eigenvalues(0).real(), 16.0 - oracle::pi * oracle::pi, 2e-2);
}

TEST(HeatConfig, Validation) {
  EXPECT_THROW(heat(4).validate(), ConfigError);
  EXPECT_THROW(heat(16, oracle::pi * oracle::pi).validate(), ConfigError);
  EXPECT_THROW(heat(16, std::pow(2.0 * oracle::pi + 5e-4, 2)).validate(), ConfigError);
  EXPECT_NO_THROW(heat(16, std::pow(oracle::pi + 2e-3, 2)).validate());
  HeatConfig bad = heat(16);
  bad.epsilon = 0.3;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = heat(16);
  bad.omega_lo = 0.5;
  bad.omega_hi = 0.4;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(DirichletMap, LinearWithoutPotential) {
  const HeatConfig cfg = heat(16, 0.0);
  const GreenMap d = build_dirichlet_map(cfg);
  for (int i = 0; i < 16; ++i) {
    const double x = cfg.node(i);
    EXPECT_NEAR(d.entries()(i, 0).real(), 1.0 - x, 1e-12);
    EXPECT_NEAR(d.entries()(i, 1).real(), x, 1e-12);
    EXPECT_NEAR((d.entries()(i, 0) + d.entries()(i, 1)).real(), 1.0, 1e-12);
  }
  EXPECT_NEAR(d.gamma(), 0.24, 1e-15);
  ASSERT_EQ(d.input_labels().size(), 2U);
}

TEST(DirichletMap, SatisfiesStencilWithBoundaryValues) {
  for (double b : {0.0, 2.0, 5.0}) {
    const HeatConfig cfg = heat(32, 16.0, b);
    const CMatrix d = build_dirichlet_map(cfg).entries();
    const double h = cfg.h();
    for (int col = 0; col < 2; ++col) {
      auto u = [&](int i) -> Complex {
        if (i < 0) return col == 0 ? 1.0 : 0.0;
        if (i >= cfg.n) return col == 1 ? 1.0 : 0.0;
        return d(i, col);
      };
      double worst = 0.0;
      for (int i = 0; i < cfg.n; ++i) {
        const Complex r = (u(i - 1) - 2.0 * u(i) + u(i + 1)) / (h * h) + 16.0 * u(i) + b * (u(i + 1) - u(i - 1)) / (2.0 * h);
        worst = std::max(worst, std::abs(r) * h * h);
      }
      EXPECT_LE(worst, 1e-10) << b << " " << col;
    }
  }
}

TEST(DirichletMap, SecondOrderAgainstHelmholtzLift) {
  auto err = [](int n) {
    const HeatConfig cfg = heat(n);
    const CMatrix d = build_dirichlet_map(cfg).entries();
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = cfg.node(i);
      worst = std::max(worst, std::abs(d(i, 0).real() - oracle::helmholtz_lift(16.0, 1.0, 0.0, x)));
      worst = std::max(worst, std::abs(d(i, 1).real() - oracle::helmholtz_lift(16.0, 0.0, 1.0, x)));
    }
    return worst;
  };
  const double e1 = err(31), e2 = err(63);
  EXPECT_LT(e1, 1e-2);
  EXPECT_NEAR(e1 / e2, 4.0, 0.6);
}

TEST(GammaScan, BoundedBelowQuarterUnboundedAbove) {
  const auto rows = gamma_bound_scan({16, 32, 64, 128}, {0.2, 0.75}, heat(16));
  ASSERT_EQ(rows.size(), 8U);
  EXPECT_LT(growth(rows, 0.2), 1.5);
  EXPECT_GT(growth(rows, 0.75), 4.0);
  EXPECT_THROW(gamma_bound_scan({32, 16}, {0.2}, heat(16)), UsageError);
}

TEST(GammaScan, NonHilbertExponentGivesFiniteBounds) {
  HeatConfig cfg = heat(16);
  cfg.q = 4.0;
  cfg.epsilon = 0.01;
  const auto rows = gamma_bound_scan({16, 32}, {0.1}, cfg);
  for (const auto& r : rows) EXPECT_TRUE(std::isfinite(r.norm) && r.norm > 0.0);
}

TEST(PerturbationBound, StaysBoundedUnderRefinement) {
  std::vector<double> b;
  for (int n : {16, 32, 64}) b.push_back(perturbation_bound(heat(n, 16.0, 2.0)));
  EXPECT_LT(b.back() / b.front(), 1.3);
}

TEST(OmegaWeights, TrapezoidOnMask) {
  const HeatConfig cfg = heat(64);
  const auto mask = omega_mask(cfg);
  const RVector w = omega_weights(cfg);
  for (int i = 0; i < 64; ++i) {
    if (!mask[static_cast<std::size_t>(i)]) EXPECT_EQ(w(i), 0.0);
    EXPECT_GE(cfg.node(i) >= 0.2 && cfg.node(i) <= 0.4, mask[static_cast<std::size_t>(i)]);
  }
  // Trapezoid length of the masked run.
  int first = -1, last = -1;
  for (int i = 0; i < 64; ++i)
    if (mask[static_cast<std::size_t>(i)]) {
      if (first < 0) first = i;
      last = i;
    }
  EXPECT_NEAR(w.sum(), cfg.node(last) - cfg.node(first), 1e-14);
}

TEST(HeatClosedLoop, SpectralPlacementHitsTarget) {
  const HeatConfig cfg = heat(64);
  const SynthesisResult s = synthesize_heat(cfg, FeedbackMode::spectral, std::vector<Complex>{{-2, 0}});
  EXPECT_EQ(s.open_loop.unstable_count, 1);
  EXPECT_TRUE(s.rank.pass);
  const ClosedLoop cl = closed_loop_heat(cfg, s.law);
  const CVector ev = eigenvalues(cl.composed.entries());
  EXPECT_NEAR(spectral_abscissa(cl.composed.entries()), -2.0, 1e-6);
  // Stable modes are untouched.
  for (int k = 1; k < 5; ++k) {
    const double stable = s.open_loop.eigenvalues(k).real();
    EXPECT_LE((ev.array() - stable).abs().minCoeff(), 1e-6);
  }
}

TEST(HeatClosedLoop, LocalizedFeedbackIsSupportedOnOmega) {
  const HeatConfig cfg = heat(64);
  const SynthesisResult s = synthesize_heat(cfg, FeedbackMode::localized);
  const auto mask = omega_mask(cfg);
  for (int i = 0; i < 64; ++i)
    if (!mask[static_cast<std::size_t>(i)]) EXPECT_EQ(s.law.as_matrix.col(i).norm(), 0.0);
  EXPECT_LT(spectral_abscissa(closed_loop_heat(cfg, s.law).composed.entries()), 0.0);
}

TEST(HeatClosedLoop, StableConfigNeedsNoFeedback) {
  const SynthesisResult s = synthesize_heat(heat(16, 4.0), FeedbackMode::spectral);
  EXPECT_EQ(s.open_loop.unstable_count, 0);
  EXPECT_EQ(s.law.as_matrix.norm(), 0.0);
}

TEST(HeatVerify, StabilizedLoopPasses) {
  const HeatConfig cfg = heat(8);
  const SynthesisResult s = synthesize_heat(cfg, FeedbackMode::spectral, std::vector<Complex>{{-2, 0}});
  const VerificationReport rep = verify_stabilization(closed_loop_heat(cfg, s.law), quick_options());
  for (const auto& c : rep.checks) EXPECT_TRUE(c.pass) << c.name << " " << c.value << " " << c.detail;
  EXPECT_TRUE(rep.pass);
  ASSERT_EQ(rep.scans.size(), 3U);
  for (const auto& sc : rep.scans) EXPECT_EQ(sc.verdict, Verdict::plateau);
}

TEST(HeatVerify, FineGridIdentitiesWithoutMaxReg) {
  const HeatConfig cfg = heat(64, 16.0, 2.0);
  const SynthesisResult s = synthesize_heat(cfg, FeedbackMode::spectral, std::vector<Complex>{{-2, 0}});
  VerifyOptions o;
  o.run_maxreg = false;
  const VerificationReport rep = verify_stabilization(closed_loop_heat(cfg, s.law), o);
  for (const auto& c : rep.checks) EXPECT_TRUE(c.pass) << c.name << " " << c.value << " " << c.detail;
}

TEST(HeatVerify, OpenLoopFails) {
  const HeatConfig cfg = heat(8);
  VerifyOptions o = quick_options();
  o.run_maxreg = false;
  const VerificationReport rep = verify_stabilization(closed_loop_heat(cfg, FeedbackLaw::zero(8, 2)), o);
  EXPECT_FALSE(rep.pass);
  ASSERT_NE(rep.first_failure(), nullptr);
  EXPECT_EQ(rep.first_failure()->name, "spectral_abscissa");
}

TEST(HeatVerify, SubcriticalPotentialPassesWithZeroFeedback) {
  const HeatConfig cfg = heat(8, 4.0);
  const VerificationReport rep = verify_stabilization(closed_loop_heat(cfg, FeedbackLaw::zero(8, 2)), quick_options());
  for (const auto& c : rep.checks) EXPECT_TRUE(c.pass) << c.name << " " << c.value << " " << c.detail;
  EXPECT_TRUE(rep.pass);
}
