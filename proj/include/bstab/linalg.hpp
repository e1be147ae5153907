#pragma once

#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bstab {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

// Error taxonomy. Every numerical failure is reported by throwing; nothing
// degrades silently.

/// Bad arguments or preconditions violated by the caller.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid model or experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iteration failure, overflow, or loss of accuracy.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point that lies on (or within tolerance of) a spectrum.
class SingularityError : public NumericalError {
 public:
  SingularityError(const std::string& what, Complex offending)
      : NumericalError(what), offending_(offending) {}
  [[nodiscard]] Complex offending() const { return offending_; }

 private:
  Complex offending_;
};

/// A structural identity that should hold to rounding failed to do so.
class IdentityViolation : public NumericalError {
 public:
  IdentityViolation(const std::string& what, double residual)
      : NumericalError(what), residual_(residual) {}
  [[nodiscard]] double residual() const { return residual_; }

 private:
  double residual_;
};

/// Spectral (operator 2-) norm: largest singular value.
double spectral_norm(const CMatrix& m);

/// Smallest singular value; zero for an empty matrix.
double smallest_singular_value(const CMatrix& m);

/// 2-norm condition number, +inf when singular.
double condition_number(const CMatrix& m);

bool all_finite(const CMatrix& m);

/// Spectral abscissa max Re(lambda).
double spectral_abscissa(const CMatrix& m);

/// Eigenvalues of a general complex matrix (unsorted).
CVector eigenvalues(const CMatrix& m);

std::string format_complex(Complex z);

/// Optimal one-to-one matching distance between two equally sized point
/// sets: min over permutations of max |a_i - b_pi(i)| (bottleneck assignment).
double matching_distance(std::span<const Complex> a, std::span<const Complex> b);

/// Least-squares line fit y = intercept + slope * x.
struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// n logarithmically spaced points from lo to hi inclusive.
std::vector<double> logspace(double lo, double hi, int n);

/// n equally spaced points from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, int n);

}  // namespace bstab
