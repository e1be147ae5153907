#include "bstab/feedback.hpp"

#include <cmath>

namespace bstab {

std::string to_string(FeedbackMode mode) { return mode == FeedbackMode::spectral ? "spectral" : "localized"; }

FeedbackMode parse_feedback_mode(const std::string& text) {
  if (text == "spectral") return FeedbackMode::spectral;
  if (text == "localized") return FeedbackMode::localized;
  throw ConfigError("unknown feedback mode '" + text + "' (expected spectral | localized)");
}

CMatrix FeedbackLaw::functionals() const {
  if (mode == FeedbackMode::spectral) return spectral_functionals;
  CMatrix c = observation_vectors;
  for (Eigen::Index i = 0; i < c.rows(); ++i) c.row(i) *= weights(i);
  return c;
}

void FeedbackLaw::realize() { as_matrix = profiles * functionals().adjoint(); }

void FeedbackLaw::check_invariants() const {
  if (mode == FeedbackMode::localized) {
    for (Eigen::Index i = 0; i < observation_vectors.rows(); ++i) {
      if (omega_mask[static_cast<std::size_t>(i)]) continue;
      for (Eigen::Index k = 0; k < observation_vectors.cols(); ++k)
        if (observation_vectors(i, k) != Complex{0.0, 0.0})
          throw IdentityViolation("observation vector " + std::to_string(k) + " is nonzero off the mask at node " +
                                      std::to_string(i),
                                  std::abs(observation_vectors(i, k)));
    }
  }
  const CMatrix rebuilt = profiles * functionals().adjoint();
  const double residual = (rebuilt - as_matrix).cwiseAbs().maxCoeff();
  if (residual > 1e-12 * std::max(1.0, as_matrix.cwiseAbs().maxCoeff()))
    throw IdentityViolation("feedback matrix differs from its rank-K factorization", residual);
}

FeedbackLaw FeedbackLaw::zero(Eigen::Index state_dim, Eigen::Index output_dim) {
  FeedbackLaw f;
  f.mode = FeedbackMode::spectral;
  f.gain = CMatrix::Zero(1, 0);
  f.spectral_functionals = CMatrix::Zero(state_dim, 1);
  f.profiles = CMatrix::Zero(output_dim, 1);
  f.weights = RVector::Ones(state_dim);
  f.omega_mask.assign(static_cast<std::size_t>(state_dim), false);
  f.as_matrix = CMatrix::Zero(output_dim, state_dim);
  return f;
}

}  // namespace bstab
