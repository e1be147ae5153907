#include "bstab/operator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <unsupported/Eigen/MatrixFunctions>

namespace bstab {

namespace {

constexpr double kResolventResidualTol = 1e-8;
constexpr double kFractionalResidualTol = 1e-6;

// Sort permutation: decreasing real part, ties broken by decreasing imaginary
// part so that conjugate pairs come out in a fixed order.
std::vector<Eigen::Index> spectral_order(const CVector& ev) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(ev.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (ev(a).real() != ev(b).real()) return ev(a).real() > ev(b).real();
    return ev(a).imag() > ev(b).imag();
  });
  return idx;
}

// Unit 2-norm with the largest-modulus entry rotated onto the positive real
// axis, so eigenvectors of real eigenvalues of real matrices come out real.
void normalize_phase(Eigen::Ref<CVector> v) {
  const double nrm = v.norm();
  if (nrm == 0.0) return;
  v /= nrm;
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  const Complex phase = v(imax) / std::abs(v(imax));
  v *= std::conj(phase);
}

void drop_negligible_imaginary(CMatrix& m, double scale) {
  const double tol = 1e-12 * std::max(scale, 1.0);
  if (m.imag().cwiseAbs().maxCoeff() <= tol) m = m.real().cast<Complex>();
}

}  // namespace

Operator::Operator(CMatrix entries, std::string label, std::optional<GridMeta> grid)
    : entries_(std::move(entries)), label_(std::move(label)), grid_(std::move(grid)) {
  if (entries_.rows() != entries_.cols())
    throw UsageError("Operator '" + label_ + "' must be square, got " + std::to_string(entries_.rows()) + "x" +
                     std::to_string(entries_.cols()));
  if (entries_.rows() == 0) throw UsageError("Operator '" + label_ + "' must have positive dimension");
  if (!all_finite(entries_)) throw UsageError("Operator '" + label_ + "' has non-finite entries");
}

Operator Operator::zero(Eigen::Index dim, std::string label) {
  return Operator(CMatrix::Zero(dim, dim), std::move(label));
}

Operator Operator::identity(Eigen::Index dim, std::string label) {
  return Operator(CMatrix::Identity(dim, dim), std::move(label));
}

Operator Operator::diagonal(const std::vector<Complex>& values, std::string label) {
  CVector d(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) d(static_cast<Eigen::Index>(i)) = values[i];
  return Operator(d.asDiagonal().toDenseMatrix(), std::move(label));
}

Operator Operator::adjoint() const { return Operator(entries_.adjoint(), label_ + "*", grid_); }

Operator Operator::translated(double k) const {
  CMatrix m = -entries_;
  m.diagonal().array() += k;
  return Operator(std::move(m), "kI-" + label_, grid_);
}

bool Operator::is_real() const { return entries_.imag().cwiseAbs().maxCoeff() == 0.0; }

GreenMap::GreenMap(CMatrix entries, double gamma, std::vector<std::string> input_labels)
    : entries_(std::move(entries)), gamma_(gamma), input_labels_(std::move(input_labels)) {
  if (entries_.rows() < 1 || entries_.cols() < 1) throw UsageError("GreenMap needs n >= 1 and m >= 1");
  if (!all_finite(entries_)) throw UsageError("GreenMap has non-finite entries");
  if (!(gamma_ > 0.0 && gamma_ < 1.0)) throw UsageError("GreenMap exponent gamma must lie in (0,1)");
  if (input_labels_.empty())
    for (Eigen::Index j = 0; j < entries_.cols(); ++j) input_labels_.push_back("u" + std::to_string(j));
  if (static_cast<Eigen::Index>(input_labels_.size()) != entries_.cols())
    throw UsageError("GreenMap: one label per input column required");
}

std::optional<double> SpectralData::first_stable_real_part() const {
  if (unstable_count >= eigenvalues.size()) return std::nullopt;
  return eigenvalues(unstable_count).real();
}

SpectralData spectrum(const Operator& op, double tol_unstable) {
  const CMatrix& a = op.entries();
  Eigen::ComplexEigenSolver<CMatrix> es(a, /*computeEigenvectors=*/true);
  if (es.info() != Eigen::Success)
    throw NumericalError("spectrum: eigenvalue iteration did not converge for '" + op.label() + "'");

  const auto order = spectral_order(es.eigenvalues());
  const Eigen::Index n = a.rows();
  SpectralData sd;
  sd.eigenvalues.resize(n);
  sd.right_vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    sd.eigenvalues(k) = es.eigenvalues()(src);
    sd.right_vectors.col(k) = es.eigenvectors().col(src);
    normalize_phase(sd.right_vectors.col(k));
  }
  sd.unstable_count = static_cast<int>(
      std::count_if(sd.eigenvalues.begin(), sd.eigenvalues.end(), [&](Complex z) { return z.real() >= -tol_unstable; }));

  sd.cond_estimate = std::max(1.0, condition_number(sd.right_vectors));
  if (sd.cond_estimate <= kConditioningLimit) {
    sd.left_vectors = sd.right_vectors.inverse().adjoint();
    return sd;
  }

  // Numerically defective: take left vectors from the adjoint eigenproblem and
  // biorthogonalize them against the right basis through the Gram matrix.
  sd.ill_conditioned = true;
  sd.defective = true;
  std::ostringstream msg;
  msg << "eigenvector basis condition " << sd.cond_estimate << " exceeds " << kConditioningLimit
      << "; left basis taken from the adjoint eigenproblem";
  sd.warnings.push_back(msg.str());

  Eigen::ComplexEigenSolver<CMatrix> adj(a.adjoint(), true);
  if (adj.info() != Eigen::Success) throw NumericalError("spectrum: adjoint eigenvalue iteration did not converge");
  CMatrix w0(n, n);
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Complex target = std::conj(sd.eigenvalues(k));
    Eigen::Index best = -1;
    double best_d = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      const double d = std::abs(adj.eigenvalues()(j) - target);
      if (best < 0 || d < best_d) {
        best = j;
        best_d = d;
      }
    }
    used[static_cast<std::size_t>(best)] = 1;
    w0.col(k) = adj.eigenvectors().col(best);
    normalize_phase(w0.col(k));
  }
  const CMatrix gram = w0.adjoint() * sd.right_vectors;
  Eigen::FullPivLU<CMatrix> lu(gram);
  const double gram_cond = condition_number(gram);
  if (gram_cond > kConditioningLimit) {
    std::ostringstream g;
    g << "biorthogonalization Gram matrix condition " << gram_cond << " exceeds " << kConditioningLimit;
    sd.warnings.push_back(g.str());
  }
  sd.left_vectors = w0 * lu.inverse().adjoint();
  return sd;
}

Operator resolvent(const Operator& op, Complex lambda) {
  const CMatrix& a = op.entries();
  const CVector ev = eigenvalues(a);
  double scale = 1.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) scale = std::max(scale, std::abs(ev(i)));
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (std::abs(lambda - ev(i)) <= 1e-10 * scale)
      throw SingularityError("resolvent: lambda = " + format_complex(lambda) + " lies on eigenvalue " +
                                 format_complex(ev(i)) + " of '" + op.label() + "'",
                             ev(i));

  CMatrix shifted = -a;
  shifted.diagonal().array() += lambda;
  Eigen::PartialPivLU<CMatrix> lu(shifted);
  CMatrix r = lu.inverse();
  const double residual = (shifted * r - CMatrix::Identity(a.rows(), a.cols())).norm();
  if (!all_finite(r) || residual > kResolventResidualTol) {
    Eigen::Index imin = 0;
    (ev.array() - lambda).abs().minCoeff(&imin);
    throw SingularityError("resolvent: residual " + std::to_string(residual) + " at lambda = " +
                               format_complex(lambda) + " (nearest eigenvalue " + format_complex(ev(imin)) + ")",
                           ev(imin));
  }
  return Operator(std::move(r), "R(" + format_complex(lambda) + "," + op.label() + ")", op.grid());
}

Operator semigroup_apply(const Operator& op, double t) {
  if (!std::isfinite(t) || t < 0.0) throw UsageError("semigroup_apply: t must be finite and >= 0");
  const Eigen::Index n = op.dim();
  if (t == 0.0) return Operator(CMatrix::Identity(n, n), "I", op.grid());
  const CMatrix scaled = op.entries() * t;
  CMatrix e = scaled.exp();
  if (!all_finite(e)) {
    std::ostringstream msg;
    msg << "semigroup_apply: e^{op t} overflowed at t = " << t << " (||op|| = " << spectral_norm(op.entries())
        << ", spectral abscissa = " << spectral_abscissa(op.entries()) << ")";
    throw NumericalError(msg.str());
  }
  if (op.is_real()) e = e.real().cast<Complex>();
  return Operator(std::move(e), "exp(" + op.label() + "*t)", op.grid());
}

Operator fractional_power(const Operator& op, double theta, const SpectralData& sd) {
  if (!(theta > 0.0 && theta < 1.0)) throw UsageError("fractional_power: theta must lie in (0,1)");
  if (sd.dim() != op.dim()) throw UsageError("fractional_power: spectral data does not match operator");
  for (Eigen::Index i = 0; i < sd.eigenvalues.size(); ++i) {
    if (sd.eigenvalues(i).real() <= 0.0)
      throw UsageError("fractional_power: eigenvalue " + format_complex(sd.eigenvalues(i)) +
                       " is not in the open right half-plane; translate (kI - op) first");
  }
  if (sd.cond_estimate > kConditioningLimit)
    throw NumericalError("fractional_power: eigenbasis condition " + std::to_string(sd.cond_estimate) +
                         " too large for a reliable spectral calculus");

  const CMatrix& v = sd.right_vectors;
  const CMatrix wh = sd.left_vectors.adjoint();
  auto power = [&](double s) {
    CVector d(sd.eigenvalues.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = std::pow(sd.eigenvalues(i), s);
    return CMatrix(v * d.asDiagonal() * wh);
  };
  CMatrix p = power(theta);
  const CMatrix q = power(1.0 - theta);
  const double scale = spectral_norm(op.entries());
  const double residual = spectral_norm(p * q - op.entries()) / std::max(scale, 1e-300);
  if (residual > kFractionalResidualTol)
    throw NumericalError("fractional_power: A^theta A^(1-theta) deviates from A by relative " +
                         std::to_string(residual));
  if (op.is_real()) drop_negligible_imaginary(p, spectral_norm(p));
  return Operator(std::move(p), op.label() + "^" + std::to_string(theta), op.grid());
}

Operator fractional_power(const Operator& op, double theta) { return fractional_power(op, theta, spectrum(op)); }

double translation_constant(const Operator& op) { return std::max(0.0, spectral_abscissa(op.entries())) + 1.0; }

}  // namespace bstab
