#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bstab/feedback.hpp"
#include "bstab/operator.hpp"

namespace bstab {

/// Thrown when no stabilizing law can be built from the given data
/// (uncontrollable pair, singular masked Gramian, ...).
class SynthesisFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// The unstable part of the control system in left/right eigen-coordinates:
/// z' = lambda_n z - b_n u.
struct ReducedPair {
  CMatrix lambda_n;                   // N x N, diagonal
  CMatrix b_n;                        // N x m, b_n(i,j) = <input_j, psi_i>
  std::vector<double> hautus_margins; // one per unstable eigenvalue
  std::vector<int> group;             // eigenvalue cluster id per row

  [[nodiscard]] Eigen::Index size() const { return lambda_n.rows(); }
  [[nodiscard]] Complex eigenvalue(Eigen::Index i) const { return lambda_n(i, i); }
};

struct RankReport {
  bool pass = false;
  std::vector<Complex> eigenvalues;
  std::vector<double> margins;
  double tol = 1e-8;
  int first_failing = 0; // 1-based index of the first failing eigenvalue, 0 if none

  [[nodiscard]] std::string summary() const;
};

/// P_N = sum_{i<=N} phi_i psi_i^H. The zero operator when N = 0 (nothing to
/// stabilize, which is a valid outcome).
Operator unstable_projection(const SpectralData& spectral);

/// Projected pair for the closed loop oseen - (oseen G) F.
ReducedPair reduce(const SpectralData& spectral, const Operator& oseen, const GreenMap& green);

/// Projected pair for a generic input matrix: closed loop op - input * u.
ReducedPair reduce_input(const SpectralData& spectral, const CMatrix& input_matrix);

/// Restricts the input channels: b_n <- b_n * profiles, margins recomputed.
ReducedPair with_profiles(const ReducedPair& rp, const CMatrix& profiles);

RankReport rank_check(const ReducedPair& rp, double tol = 1e-8);
RankReport rank_check(const std::vector<Complex>& eigenvalues, const std::vector<double>& margins, double tol = 1e-8);

/// Observability margins through the masked route: for each unstable
/// eigenvalue cluster, the square root of the smallest eigenvalue of the
/// Gramian <m psi_i, psi_j>_{L2}. Monotone in the mask.
std::vector<double> masked_observability_margins(const SpectralData& spectral, const std::vector<bool>& mask,
                                                 const RVector& weights);

/// Maximum geometric multiplicity over the unstable eigenvalues.
int choose_K(const SpectralData& spectral, double tol = 1e-8);

/// target_i = -|Re lambda_{N+1}| - i, i = 1..N.
std::vector<Complex> default_targets(const SpectralData& spectral);

/// Gain (channels x N) with spec(lambda_n - b_n gain) = targets.
CMatrix place_poles(const ReducedPair& rp, const std::vector<Complex>& targets, bool require_conjugate_closed = false);

struct FeedbackSpec {
  FeedbackMode mode = FeedbackMode::spectral;
  std::vector<bool> omega_mask; // localized mode
  RVector weights;              // quadrature weights for L2(omega)
  CMatrix profiles;             // m x K
  bool real_model = true;
};

/// Realizes F from a gain computed by place_poles on with_profiles(rp, profiles).
FeedbackLaw build_feedback(const ReducedPair& rp, const CMatrix& gain, const SpectralData& spectral,
                           const FeedbackSpec& spec);

/// g_k = w_(k mod m) e_(k mod m): canonical input directions scaled by the
/// boundary quadrature weights.
CMatrix default_profiles(Eigen::Index inputs, int K, const std::vector<double>& boundary_weights = {});

}  // namespace bstab
