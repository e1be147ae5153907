#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bstab/linalg.hpp"

namespace bstab {

struct GridMeta {
  double h = 0.0;
  std::string domain;
};

/// A finite-dimensional realization of a (generator) operator on the state
/// space. Square, finite entries.
class Operator {
 public:
  Operator() = default;
  explicit Operator(CMatrix entries, std::string label = {}, std::optional<GridMeta> grid = std::nullopt);

  static Operator zero(Eigen::Index dim, std::string label = "zero");
  static Operator identity(Eigen::Index dim, std::string label = "identity");
  static Operator diagonal(const std::vector<Complex>& values, std::string label = "diag");

  [[nodiscard]] const CMatrix& entries() const { return entries_; }
  [[nodiscard]] Eigen::Index dim() const { return entries_.rows(); }
  [[nodiscard]] const std::string& label() const { return label_; }
  [[nodiscard]] const std::optional<GridMeta>& grid() const { return grid_; }

  /// Conjugate transpose.
  [[nodiscard]] Operator adjoint() const;
  /// kI - this.
  [[nodiscard]] Operator translated(double k) const;
  /// True if every entry has zero imaginary part.
  [[nodiscard]] bool is_real() const;

 private:
  CMatrix entries_;
  std::string label_;
  std::optional<GridMeta> grid_;
};

/// Boundary-input-to-state lifting G (or a Dirichlet map D) with the
/// fractional exponent gamma such that A^gamma G is bounded.
class GreenMap {
 public:
  GreenMap() = default;
  GreenMap(CMatrix entries, double gamma, std::vector<std::string> input_labels = {});

  [[nodiscard]] const CMatrix& entries() const { return entries_; }
  [[nodiscard]] Eigen::Index state_dim() const { return entries_.rows(); }
  [[nodiscard]] Eigen::Index input_dim() const { return entries_.cols(); }
  [[nodiscard]] double gamma() const { return gamma_; }
  [[nodiscard]] const std::vector<std::string>& input_labels() const { return input_labels_; }

 private:
  CMatrix entries_;
  double gamma_ = 0.5;
  std::vector<std::string> input_labels_;
};

struct SpectralData {
  CVector eigenvalues;   // decreasing real part
  CMatrix right_vectors; // columns phi_i, unit 2-norm
  CMatrix left_vectors;  // columns psi_i with psi_i^H phi_j = delta_ij
  int unstable_count = 0;
  double cond_estimate = 1.0;
  bool ill_conditioned = false;
  bool defective = false;
  std::vector<std::string> warnings;

  [[nodiscard]] Eigen::Index dim() const { return eigenvalues.size(); }
  /// Re(lambda_{N+1}), or nullopt when every eigenvalue is unstable.
  [[nodiscard]] std::optional<double> first_stable_real_part() const;
};

inline constexpr double kDefaultUnstableTol = 1e-9;
inline constexpr double kConditioningLimit = 1e8;

/// Full eigendecomposition sorted by decreasing real part with a biorthogonal
/// left basis. Eigenvalues with Re >= -tol_unstable count as unstable.
SpectralData spectrum(const Operator& op, double tol_unstable = kDefaultUnstableTol);

/// (lambda I - op)^{-1}. Throws SingularityError when lambda is within 1e-10
/// (relative) of the spectrum.
Operator resolvent(const Operator& op, Complex lambda);

/// e^{op t}, t >= 0, by scaling and squaring with a degree-13 Pade approximant.
Operator semigroup_apply(const Operator& op, double t);

/// Principal-branch op^theta for op with spectrum in the open right half-plane.
Operator fractional_power(const Operator& op, double theta, const SpectralData& spectral);
Operator fractional_power(const Operator& op, double theta);

/// k = max(0, spectral abscissa) + 1, the shift making kI - op sectorial with margin 1.
double translation_constant(const Operator& op);

}  // namespace bstab
