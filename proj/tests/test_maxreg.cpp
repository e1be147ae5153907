#include <gtest/gtest.h>

#include <cmath>

#include "bstab/heat_model.hpp"
#include "bstab/maxreg.hpp"
#include "oracles.hpp"

using namespace bstab;

namespace {

Operator scalar(double a) { return Operator::diagonal({Complex{a, 0.0}}); }

ForcingSignal unit_forcing(double horizon, double cell = 0.1) {
  return ForcingSignal::constant(CVector::Ones(1), cell, horizon);
}

// Series for the cell integrals, independent of the augmented exponential.
void series_integrals(const CMatrix& a, double h, CMatrix& phi1, CMatrix& phi2) {
  const auto n = a.rows();
  CMatrix power = CMatrix::Identity(n, n);
  phi1 = CMatrix::Zero(n, n);
  phi2 = CMatrix::Zero(n, n);
  double fact1 = h, fact2 = h * h / 2.0;
  for (int k = 0; k < 40; ++k) {
    phi1 += power * fact1;
    phi2 += power * fact2;
    power = power * a;
    fact1 *= h / (k + 2);
    fact2 *= h / (k + 3);
  }
}

}  // namespace

TEST(Forcing, RandomIsSeededAndBounded) {
  const ForcingSignal a = ForcingSignal::random(3, 0.1, 2.0, 7);
  const ForcingSignal b = ForcingSignal::random(3, 0.1, 2.0, 7);
  const ForcingSignal c = ForcingSignal::random(3, 0.1, 2.0, 8);
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, c.values);
  EXPECT_EQ(a.values.cols(), 20);
  EXPECT_LE(a.values.real().cwiseAbs().maxCoeff(), 1.0);
  EXPECT_LE(a.values.imag().cwiseAbs().maxCoeff(), 1.0);
}

TEST(Forcing, ExtensionIsByZero) {
  const ForcingSignal f = unit_forcing(1.0);
  const ForcingSignal g = f.extended(3.0);
  EXPECT_NEAR(g.horizon(), 3.0, 1e-12);
  EXPECT_EQ(g.values.leftCols(10), f.values);
  EXPECT_EQ(g.values.rightCols(20).norm(), 0.0);
  EXPECT_THROW(g.extended(1.0), UsageError);
}

TEST(Forcing, DefaultSetHasRandomAndModes) {
  const SpectralData sd = spectrum(Operator::diagonal({Complex{-1, 0}, Complex{-2, 0}, Complex{-3, 0}}));
  const auto set = default_forcing_set(sd, 4, 1, 0.1, 1.0);
  ASSERT_EQ(set.size(), 7U);
  EXPECT_EQ(set[0].kind, ForcingKind::piecewise_constant_random);
  EXPECT_EQ(set[6].kind, ForcingKind::single_mode);
}

TEST(CellIntegrals, MatchSeries) {
  CMatrix a(3, 3);
  a << -1.0, 2.0, 0.0, 0.5, -3.0, 1.0, Complex{0, 1}, 0.0, -0.5;
  const CellIntegrals ci = cell_integrals(a, 0.05);
  CMatrix phi1, phi2;
  series_integrals(a, 0.05, phi1, phi2);
  EXPECT_LE((ci.phi1 - phi1).norm() / phi1.norm(), 1e-13);
  EXPECT_LE((ci.phi2 - phi2).norm() / phi2.norm(), 1e-13);
  EXPECT_LE((ci.propagator - oracle::expm_taylor(a * 0.05)).norm(), 1e-13);
}

TEST(SolutionMap, ScalarClosedForm) {
  const Trajectory tr = solution_map(scalar(-1.0), unit_forcing(5.0));
  double worst = 0.0;
  for (std::size_t k = 0; k < tr.times.size(); ++k)
    worst = std::max(worst, std::abs(tr.states(0, static_cast<Eigen::Index>(k)) - (1.0 - std::exp(-tr.times[k]))));
  EXPECT_LE(worst, 1e-10);
}

TEST(SolutionMap, CellAveragedResidual) {
  HeatConfig cfg;
  cfg.n = 16;
  const Operator op = build_heat_operator(cfg);
  const ForcingSignal f = ForcingSignal::random(16, 0.1, 1.0, 3);
  const Trajectory tr = solution_map(op, f);
  const double h = tr.times[1] - tr.times[0];
  const long per_cell = std::lround(0.1 / h);
  CMatrix phi1, phi2;
  series_integrals(op.entries(), h, phi1, phi2);
  // y(t+h) - y(t) = A int y + h f, with int y = phi1 y(t) + phi2 f exactly.
  double worst = 0.0;
  for (Eigen::Index k = 0; k + 1 < tr.states.cols(); ++k) {
    const CVector fc = f.values.col(k / per_cell);
    const CVector lhs = (tr.states.col(k + 1) - tr.states.col(k)) / h;
    const CVector rhs = op.entries() * (phi1 * tr.states.col(k) + phi2 * fc) / h + fc;
    worst = std::max(worst, (lhs - rhs).norm() / std::max(1.0, lhs.norm()));
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(SolutionMap, Linearity) {
  CMatrix a(2, 2);
  a << -1.0, 3.0, 0.0, -2.0;
  const Operator op(a);
  const ForcingSignal f = ForcingSignal::random(2, 0.1, 2.0, 1);
  const ForcingSignal g = ForcingSignal::random(2, 0.1, 2.0, 2);
  ForcingSignal sum = f;
  sum.values = f.values + 2.0 * g.values;
  const CMatrix ys = solution_map(op, sum).states;
  const CMatrix yl = solution_map(op, f).states + 2.0 * solution_map(op, g).states;
  EXPECT_LE((ys - yl).norm() / ys.norm(), 1e-10);
}

TEST(SolutionMap, StepTooLargeIsRejected) {
  HeatConfig cfg;
  cfg.n = 16;
  const Operator op = build_heat_operator(cfg);
  SolveOptions o;
  o.step = 0.05;
  try {
    solution_map(op, ForcingSignal::random(16, 0.1, 1.0, 1), o);
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("required step"), std::string::npos);
  }
}

TEST(MaxReg, ScalarConstantForcingMatchesQuadrature) {
  for (double a : {-1.0, -3.0}) {
    const auto r = maxreg_ratios(scalar(a), unit_forcing(10.0), {1.5, 2.0, 4.0}, {1.0, 10.0});
    const std::vector<double> ps{1.5, 2.0, 4.0};
    for (std::size_t ip = 0; ip < 3; ++ip)
      for (std::size_t it = 0; it < 2; ++it) {
        const double T = it == 0 ? 1.0 : 10.0;
        const double ref = oracle::scalar_constant_quotient(a, ps[ip], T);
        EXPECT_NEAR(r[ip][it] / ref, 1.0, 1e-4) << a << " " << ps[ip] << " " << T;
      }
  }
}

TEST(MaxReg, ScalarClosedFormPTwo) {
  // y = 1 - e^{-t}: ||y'||^2 = (1 - e^{-2})/2, ||y||^2 = 1 - 2(1 - e^{-1}) + (1 - e^{-2})/2.
  const double e2 = (1.0 - std::exp(-2.0)) / 2.0;
  const double expected = std::sqrt(e2) + std::sqrt(1.0 - 2.0 * (1.0 - std::exp(-1.0)) + e2);
  const auto r = maxreg_ratios(scalar(-1.0), unit_forcing(1.0), {2.0}, {1.0});
  EXPECT_NEAR(r[0][0], expected, 1e-6);
}

TEST(MaxReg, UnstableScalarRatioIsLarge) {
  const auto r = maxreg_ratios(scalar(1.0), unit_forcing(5.0), {2.0}, {5.0});
  EXPECT_GE(r[0][0], std::exp(5.0) / 2.0);
  EXPECT_NEAR(r[0][0] / oracle::scalar_constant_quotient(1.0, 2.0, 5.0), 1.0, 1e-4);
}

TEST(MaxReg, MonotoneUnderZeroExtension) {
  const Operator op = scalar(-0.5);
  const ForcingSignal f = ForcingSignal::random(1, 0.1, 5.0, 4);
  const double short_ratio = maxreg_ratios(op, f, {2.0}, {5.0})[0][0];
  const double long_ratio = maxreg_ratios(op, f.extended(20.0), {2.0}, {20.0})[0][0];
  EXPECT_GE(long_ratio, short_ratio * (1.0 - 1e-9));
}

TEST(MaxReg, InvalidInputs) {
  ForcingSignal zero = unit_forcing(1.0);
  zero.values.setZero();
  EXPECT_THROW(maxreg_ratios(scalar(-1.0), zero, {2.0}, {1.0}), UsageError);
  EXPECT_THROW(ForcingSignal::constant(CVector::Zero(2), 0.1, 1.0), UsageError);
  EXPECT_THROW(maxreg_ratios(scalar(-1.0), unit_forcing(1.0), {1.0}, {1.0}), UsageError);
  EXPECT_THROW(maxreg_ratios(scalar(-1.0), unit_forcing(1.0), {2.0}, {2.0}), UsageError);
  EXPECT_THROW(maxreg_ratios(scalar(-1.0), unit_forcing(1.0), {2.0}, {0.5337}), UsageError);
}

TEST(Classify, Rules) {
  EXPECT_EQ(classify({1.0, 1.2, 1.22}), Verdict::plateau);
  EXPECT_EQ(classify({1.0, 10.0, 100.0}), Verdict::growth);
  EXPECT_EQ(classify({1.0, 1.5, 2.0}), Verdict::inconclusive);
  EXPECT_EQ(classify({1.0, 10.0, 11.0}), Verdict::inconclusive);
}

TEST(PlateauScan, StableScalarPlateausUnstableGrows) {
  const std::vector<double> T{10.0, 20.0, 40.0};
  const std::vector<ForcingSignal> set{unit_forcing(40.0), ForcingSignal::random(1, 0.1, 40.0, 2)};
  for (const auto& r : plateau_scan(scalar(-1.0), {1.5, 2.0, 4.0}, T, set)) EXPECT_EQ(r.verdict, Verdict::plateau) << r.p;
  for (const auto& r : plateau_scan(scalar(0.5), {1.5, 2.0, 4.0}, T, set)) EXPECT_EQ(r.verdict, Verdict::growth) << r.p;
}

TEST(PlateauScan, ParallelMatchesSerial) {
  HeatConfig cfg;
  cfg.n = 8;
  cfg.c2 = 0.0;
  const Operator op = build_heat_operator(cfg);
  const auto set = default_forcing_set(spectrum(op), 3, 5, 0.1, 4.0);
  MaxRegOptions serial, parallel;
  parallel.parallel = 3;
  const auto a = plateau_scan(op, {2.0}, {1.0, 2.0, 4.0}, set, serial);
  const auto b = plateau_scan(op, {2.0}, {1.0, 2.0, 4.0}, set, parallel);
  EXPECT_EQ(a[0].C_estimates, b[0].C_estimates);
}

TEST(ImaginaryAxis, StableExamplesStayBelowOne) {
  const auto grid = logspace(1e-3, 1e3, 60);
  const double s = imaginary_axis_bound(scalar(-1.0), grid);
  EXPECT_LT(s, 1.0);
  EXPECT_NEAR(s, 1e3 / std::sqrt(1e6 + 1.0), 1e-12);
  EXPECT_LT(imaginary_axis_bound(Operator::diagonal({Complex{-1, 0}, Complex{-10, 0}}), grid), 1.0);
}

TEST(ImaginaryAxis, UnstableOrMarginalThrows) {
  const auto grid = logspace(1e-3, 1e3, 60);
  EXPECT_THROW(imaginary_axis_bound(scalar(1.0), grid), SingularityError);
  EXPECT_THROW(imaginary_axis_bound(Operator::diagonal({Complex{0, 2}, Complex{-1, 0}}), grid), SingularityError);
  EXPECT_THROW(imaginary_axis_bound(scalar(-1.0), logspace(1e-1, 1e2, 10)), UsageError);
}

TEST(Duality, ScalarGapMatchesOracle) {
  const std::vector<double> T{10.0, 20.0, 40.0};
  const DualityResult d = duality_check(scalar(-1.0), 4.0, T, {unit_forcing(40.0)});
  const double ref =
      std::abs(std::log(oracle::scalar_constant_quotient(-1.0, 4.0, 40.0) / oracle::scalar_constant_quotient(-1.0, 4.0 / 3.0, 40.0)));
  EXPECT_NEAR(d.gap, ref, 1e-3);
  EXPECT_TRUE(d.verdicts_agree());
  EXPECT_EQ(d.primal, Verdict::plateau);
}

TEST(Duality, SelfAdjointStableVerdictsAgree) {
  HeatConfig cfg;
  cfg.n = 8;
  cfg.c2 = 0.0;
  const Operator op = build_heat_operator(cfg);
  const auto set = default_forcing_set(spectrum(op), 4, 1, 0.1, 40.0);
  const DualityResult d = duality_check(op, 2.0, {10.0, 20.0, 40.0}, set);
  EXPECT_TRUE(d.verdicts_agree());
  // p = 2 and the generator is Hermitian: primal and dual runs coincide.
  EXPECT_LE(d.gap, 1e-10);
}

TEST(Duality, DualSetUsesAdjointModes) {
  CMatrix a(2, 2);
  a << -1.0, 5.0, 0.0, -2.0;
  const Operator op(a);
  const auto set = default_forcing_set(spectrum(op), 1, 1, 0.1, 1.0);
  const SpectralData adj = spectrum(op.adjoint());
  const auto dual = dual_forcing_set(set, adj);
  ASSERT_EQ(dual.size(), 3U);
  EXPECT_EQ(dual[0].values, set[0].values.conjugate());
  for (int i = 0; i < 2; ++i) {
    const CVector v = dual[static_cast<std::size_t>(i) + 1].values.col(0);
    EXPECT_LE((a.adjoint() * v - adj.eigenvalues(i) * v).norm(), 1e-12);
  }
}
