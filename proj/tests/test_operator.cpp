#include <gtest/gtest.h>

#include <random>

#include "bstab/heat_model.hpp"
#include "bstab/operator.hpp"
#include "oracles.hpp"

using namespace bstab;

namespace {

CMatrix random_matrix(int n, std::uint64_t seed, double shift = 0.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  CMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = Complex{u(gen), u(gen)};
  m.diagonal().array() += shift;
  return m;
}

CMatrix heat_matrix(int n, double c2) {
  HeatConfig cfg;
  cfg.n = n;
  cfg.c2 = c2;
  return build_heat_operator(cfg).entries();
}

}  // namespace

TEST(Operator, RejectsNonSquareAndNonFinite) {
  EXPECT_THROW(Operator(CMatrix::Zero(2, 3)), UsageError);
  CMatrix m = CMatrix::Identity(2, 2);
  m(0, 1) = Complex{std::nan(""), 0.0};
  EXPECT_THROW(Operator{m}, UsageError);
  EXPECT_THROW(Operator(CMatrix(0, 0)), UsageError);
}

TEST(Operator, GreenMapGammaMustBeInOpenInterval) {
  EXPECT_THROW(GreenMap(CMatrix::Ones(3, 1), 0.0), UsageError);
  EXPECT_THROW(GreenMap(CMatrix::Ones(3, 1), 1.0), UsageError);
  EXPECT_NO_THROW(GreenMap(CMatrix::Ones(3, 1), 0.24));
}

TEST(Spectrum, LaplacianMatchesClosedForm) {
  for (int n : {8, 33, 64}) {
    const double c2 = 16.0;
    const SpectralData sd = spectrum(Operator(heat_matrix(n, c2)));
    const auto expected = oracle::fd_spectrum(c2, n);
    for (int k = 0; k < n; ++k) EXPECT_NEAR(sd.eigenvalues(k).real(), expected[static_cast<std::size_t>(k)], 1e-8) << n;
  }
}

TEST(Spectrum, DiagonalExample) {
  const SpectralData sd = spectrum(Operator::diagonal({Complex{-1, 0}, Complex{1, 0}}));
  EXPECT_EQ(sd.unstable_count, 1);
  EXPECT_NEAR(sd.eigenvalues(0).real(), 1.0, 1e-14);
  EXPECT_NEAR(sd.eigenvalues(1).real(), -1.0, 1e-14);
  EXPECT_TRUE((sd.left_vectors.adjoint() * sd.right_vectors).isIdentity(1e-12));
}

TEST(Spectrum, HeatUnstableCountAndLeadingEigenvalue) {
  const SpectralData sd = spectrum(Operator(heat_matrix(64, 16.0)));
  EXPECT_EQ(sd.unstable_count, 1);
  EXPECT_NEAR(sd.eigenvalues(0).real(), 16.0 - oracle::pi * oracle::pi, 2e-2);
}

TEST(Spectrum, BiorthogonalAndOrdered) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const SpectralData sd = spectrum(Operator(random_matrix(7, seed)));
    const CMatrix gram = sd.left_vectors.adjoint() * sd.right_vectors;
    EXPECT_LE((gram - CMatrix::Identity(7, 7)).cwiseAbs().maxCoeff(), 1e-8);
    int unstable = 0;
    for (Eigen::Index i = 0; i < sd.dim(); ++i) {
      if (i > 0) EXPECT_GE(sd.eigenvalues(i - 1).real(), sd.eigenvalues(i).real());
      if (sd.eigenvalues(i).real() >= -kDefaultUnstableTol) ++unstable;
      EXPECT_NEAR(sd.right_vectors.col(i).norm(), 1.0, 1e-12);
    }
    EXPECT_EQ(sd.unstable_count, unstable);
  }
}

TEST(Spectrum, MarginalEigenvalueCountsAsUnstable) {
  const SpectralData sd = spectrum(Operator::diagonal({Complex{0, 0}, Complex{-3, 0}}));
  EXPECT_EQ(sd.unstable_count, 1);
}

TEST(Spectrum, DefectiveMatrixIsFlagged) {
  CMatrix j(2, 2);
  j << 1.0, 1.0, 0.0, 1.0;
  const SpectralData sd = spectrum(Operator(j));
  EXPECT_TRUE(sd.defective || sd.ill_conditioned);
  EXPECT_FALSE(sd.warnings.empty());
}

TEST(Resolvent, ScalarAndDiagonalExamples) {
  EXPECT_NEAR(std::abs(resolvent(Operator::zero(1), Complex{2, 0}).entries()(0, 0) - 0.5), 0.0, 1e-15);
  const Complex i{0, 1};
  const CMatrix r = resolvent(Operator::diagonal({Complex{-1, 0}, Complex{-2, 0}}), i).entries();
  EXPECT_NEAR(std::abs(r(0, 0) - 1.0 / (i + 1.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(r(1, 1) - 1.0 / (i + 2.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(r(0, 1)), 0.0, 1e-15);
}

TEST(Resolvent, ResidualOnRandomStableMatrix) {
  const CMatrix a = random_matrix(5, 11, -4.0);
  const Complex lambda{3, 4};
  const CMatrix r = resolvent(Operator(a), lambda).entries();
  CMatrix shifted = -a;
  shifted.diagonal().array() += lambda;
  EXPECT_LE(spectral_norm(shifted * r - CMatrix::Identity(5, 5)), 1e-10);
}

TEST(Resolvent, NearSpectrumNamesTheEigenvalue) {
  const Operator op = Operator::diagonal({Complex{2, 0}, Complex{-1, 0}});
  try {
    resolvent(op, Complex{2.0 + 1e-13, 0.0});
    FAIL() << "expected SingularityError";
  } catch (const SingularityError& e) {
    EXPECT_NEAR(std::abs(e.offending() - Complex{2, 0}), 0.0, 1e-12);
  }
}

TEST(Semigroup, Examples) {
  const Operator a(random_matrix(4, 3));
  EXPECT_EQ(semigroup_apply(a, 0.0).entries(), CMatrix::Identity(4, 4));
  EXPECT_NEAR(semigroup_apply(Operator::diagonal({Complex{-1, 0}}), 1.0).entries()(0, 0).real(), 0.36787944117144233,
              1e-15);
  CMatrix nil(2, 2);
  nil << 0.0, 1.0, 0.0, 0.0;
  CMatrix expected(2, 2);
  expected << 1.0, 1.0, 0.0, 1.0;
  EXPECT_LE((semigroup_apply(Operator(nil), 1.0).entries() - expected).norm(), 1e-15);
  EXPECT_THROW(semigroup_apply(a, -1.0), UsageError);
}

TEST(Semigroup, MatchesTaylorOracle) {
  const CMatrix a = random_matrix(6, 5);
  for (double t : {0.1, 0.7, 2.0}) {
    const CMatrix mine = semigroup_apply(Operator(a), t).entries();
    const CMatrix ref = oracle::expm_taylor(a * t);
    EXPECT_LE((mine - ref).norm() / ref.norm(), 1e-12) << t;
  }
}

TEST(Semigroup, OverflowIsReported) {
  EXPECT_THROW(semigroup_apply(Operator::diagonal({Complex{1000, 0}}), 10.0), NumericalError);
}

TEST(Semigroup, SemigroupProperty) {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(1e-3, 2.0);
  const Operator a(heat_matrix(16, 16.0) * 0.01);
  for (int trial = 0; trial < 10; ++trial) {
    const double t = u(gen), s = u(gen);
    const CMatrix lhs = semigroup_apply(a, t + s).entries();
    const CMatrix rhs = semigroup_apply(a, t).entries() * semigroup_apply(a, s).entries();
    EXPECT_LE(spectral_norm(lhs - rhs), 1e-8 * spectral_norm(lhs));
  }
}

TEST(Semigroup, GeneratorConsistency) {
  const CMatrix a = random_matrix(5, 21);
  const Operator op(a);
  auto err = [&](double h) {
    return spectral_norm((semigroup_apply(op, h).entries() - CMatrix::Identity(5, 5)) / h - a);
  };
  const double ratio = err(1e-3) / err(1e-4);
  EXPECT_NEAR(ratio, 10.0, 3.0);
}

TEST(FractionalPower, DiagonalExamples) {
  EXPECT_NEAR(fractional_power(Operator::diagonal({Complex{4, 0}}), 0.5).entries()(0, 0).real(), 2.0, 1e-14);
  const CMatrix p = fractional_power(Operator::diagonal({Complex{1, 0}, Complex{16, 0}}), 0.25).entries();
  EXPECT_NEAR(p(0, 0).real(), 1.0, 1e-14);
  EXPECT_NEAR(p(1, 1).real(), 2.0, 1e-14);
}

TEST(FractionalPower, SquareRootOfLaplacian) {
  const Operator a(-heat_matrix(32, 0.0));
  const CMatrix r = fractional_power(a, 0.5).entries();
  EXPECT_LE((r * r - a.entries()).cwiseAbs().maxCoeff() / a.entries().cwiseAbs().maxCoeff(), 1e-8);
}

TEST(FractionalPower, SemigroupLaw) {
  HeatConfig cfg;
  cfg.n = 24;
  cfg.advection_b = 3.0;
  const Operator op = build_heat_operator(cfg);
  const Operator a = op.translated(translation_constant(op));
  for (double theta : {0.25, 0.5, 0.75}) {
    const CMatrix prod = fractional_power(a, theta).entries() * fractional_power(a, 1.0 - theta).entries();
    EXPECT_LE(spectral_norm(prod - a.entries()), 1e-6 * spectral_norm(a.entries())) << theta;
  }
}

TEST(FractionalPower, RequiresRightHalfPlane) {
  EXPECT_THROW(fractional_power(Operator::diagonal({Complex{-1, 0}, Complex{2, 0}}), 0.5), UsageError);
  EXPECT_THROW(fractional_power(Operator::diagonal({Complex{1, 0}}), 1.5), UsageError);
}

TEST(TranslationConstant, GivesMarginOne) {
  const Operator op(heat_matrix(16, 16.0));
  const double k = translation_constant(op);
  const SpectralData sd = spectrum(op.translated(k));
  EXPECT_NEAR(sd.eigenvalues(sd.dim() - 1).real(), 1.0, 1e-9);
  EXPECT_EQ(translation_constant(Operator::diagonal({Complex{-5, 0}})), 1.0);
}

TEST(Linalg, MatchingDistanceAgreesWithBruteForce) {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Complex> a, b;
    for (int i = 0; i < 6; ++i) {
      a.emplace_back(u(gen), u(gen));
      b.emplace_back(u(gen), u(gen));
    }
    EXPECT_NEAR(matching_distance(a, b), oracle::matching_brute(a, b), 1e-14);
  }
}

TEST(Linalg, FormatComplexRoundTripsDigits) {
  EXPECT_EQ(format_complex(Complex{1.5, -2.0}), "1.5-2i");
}
