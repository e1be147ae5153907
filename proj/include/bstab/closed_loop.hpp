#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bstab/feedback.hpp"
#include "bstab/operator.hpp"

namespace bstab {

/// The closed-loop generator  A_F = Oseen (I - G F) + B  with every factor kept.
///
/// `principal` is the unperturbed generator (-A) and `perturbation` the
/// lower-order term A_o, so that oseen = principal + perturbation. The
/// perturbation is (A^{1-epsilon})-bounded with exponent `perturbation_epsilon`.
struct ClosedLoop {
  std::string model;
  Operator principal;
  Operator perturbation;
  Operator oseen;
  GreenMap green;
  FeedbackLaw feedback;
  Operator interior_B;
  Operator composed;
  double perturbation_epsilon = 0.5;

  [[nodiscard]] Eigen::Index dim() const { return composed.dim(); }
};

struct OseenSplit {
  Operator principal;
  Operator perturbation;
  double epsilon = 0.5;
};

/// Assembles oseen (I - G F) + B. Without a split the whole oseen operator
/// is treated as principal and A_o = 0.
ClosedLoop compose_closed_loop(const Operator& oseen, const GreenMap& green, const FeedbackLaw& feedback,
                               const std::optional<Operator>& interior_B = std::nullopt,
                               const std::optional<OseenSplit>& split = std::nullopt, std::string model = {});

/// Entrywise residual of composed against its recomposition from the factors,
/// relative to ||composed||.
double composition_residual(const ClosedLoop& cl);

/// The three adjoint terms (plus B*) whose sum must equal A_F^*.
struct AdjointTerms {
  CMatrix minus_a_star;        // -A*
  CMatrix feedback_term;       // [F* G* A*^gamma] A*^(1-gamma)
  CMatrix perturbation_term;   // (I - GF)* (A^-(1-eps) A_o)* A*^(1-eps)
  CMatrix interior_term;       // B*
  double translation = 0.0;    // k used when A itself needed a shift
  double relative_residual = 0.0;

  [[nodiscard]] CMatrix sum() const { return minus_a_star + feedback_term + perturbation_term + interior_term; }
};

AdjointTerms adjoint_decomposition(const ClosedLoop& cl);

/// Conjugate transpose of the composed operator; verifies the fractional-power
/// decomposition against it and throws IdentityViolation above 1e-8.
Operator adjoint_closed_loop(const ClosedLoop& cl);

/// || [I + R(l,Oseen)(Oseen G F - B)]^{-1} R(l,Oseen) - R(l,A_F) || / ||R(l,A_F)||.
double resolvent_perturbation_residual(const ClosedLoop& cl, Complex lambda);

struct RayPoint {
  double modulus = 0.0;
  double value = 0.0;
};

/// || (lambda + Ahat)^{-1} Ahat^{1-gamma} || along the real ray, where -Ahat
/// generates; Ahat = kI - Oseen must have spectrum in the right half-plane.
std::vector<RayPoint> ray_decay_check(const Operator& oseen_translated, double gamma,
                                      const std::vector<double>& lambda_grid);

/// Least-squares slope of log(value) against log(|lambda|).
double log_log_slope(const std::vector<RayPoint>& table);

struct DecayFit {
  double M = 1.0;
  double delta = 0.0;
};

/// Fits log ||e^{op t}|| = log M - delta t over the tail half of t_grid.
DecayFit decay_estimate(const Operator& op, const std::vector<double>& t_grid);

}  // namespace bstab
