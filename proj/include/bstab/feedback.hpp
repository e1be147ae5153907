#pragma once

#include <string>
#include <vector>

#include "bstab/linalg.hpp"

namespace bstab {

enum class FeedbackMode { spectral, localized };

std::string to_string(FeedbackMode mode);
FeedbackMode parse_feedback_mode(const std::string& text);

/// Finite-rank feedback F y = sum_k <y, c_k> g_k.
///
/// In spectral mode the functionals are combinations of left eigenvectors,
/// so F factors through the unstable projection. In localized mode they are
/// L2(omega) inner products against observation vectors w_k supported on the
/// mask. `profiles` holds the output vectors g_k column-wise: boundary-input
/// vectors for a boundary feedback, interior state vectors for an interior
/// one.
struct FeedbackLaw {
  FeedbackMode mode = FeedbackMode::spectral;
  CMatrix gain;                 // K x N
  CMatrix observation_vectors;  // n x K, localized mode (w_k)
  CMatrix spectral_functionals; // n x K, spectral mode (p_k)
  CMatrix profiles;             // m x K (g_k)
  std::vector<bool> omega_mask; // n, localized mode
  RVector weights;              // n quadrature weights for <.,.>_{L2(omega)}
  CMatrix as_matrix;            // m x n realized operator

  [[nodiscard]] Eigen::Index rank() const { return profiles.cols(); }
  [[nodiscard]] Eigen::Index state_dim() const { return as_matrix.cols(); }
  [[nodiscard]] Eigen::Index output_dim() const { return as_matrix.rows(); }

  /// n x K matrix whose columns c_k satisfy functional_k(y) = c_k^H y.
  [[nodiscard]] CMatrix functionals() const;

  /// Recomputes as_matrix from the factors.
  void realize();

  /// Support and factorization invariants; throws IdentityViolation.
  void check_invariants() const;

  /// The zero law between an n-dimensional state and m outputs.
  static FeedbackLaw zero(Eigen::Index state_dim, Eigen::Index output_dim);
};

}  // namespace bstab
