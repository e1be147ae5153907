#pragma once

#include <optional>
#include <vector>

#include "bstab/closed_loop.hpp"
#include "bstab/synthesis.hpp"
#include "bstab/verify.hpp"

namespace bstab {

/// Two coupled 1-D diffusion equations on n interior nodes each. State rows
/// 0..n-1 are the fluid component, n..2n-1 the thermal component.
///
///   w_f' = nu w_f'' + c2_f w_f + ye w_f' + gamma w_h + J w
///   w_h' = kappa w_h'' + c2_h w_h + ye w_h' - theta_e(x) w_f,  w_h|boundary = F w
struct CoupledConfig {
  int n = 32;
  double nu = 1.0;
  double kappa = 0.5;
  double gamma_buoy = 0.5;
  std::vector<double> theta_e_profile; // empty: constant theta_e
  double theta_e = 1.0;
  double ye_advect = 1.0;
  double c2_f = 16.0;
  double c2_h = 16.0;
  double omega_lo = 0.2;
  double omega_hi = 0.6;
  double q = 2.0;
  double epsilon = 0.01;

  [[nodiscard]] double h() const { return 1.0 / (n + 1); }
  [[nodiscard]] double node(int i) const { return (i + 1) * h(); }
  [[nodiscard]] RVector theta_profile() const;
  void validate() const;
};

/// [[A_f, gamma I], [-diag(theta_e), A_h]].
Operator build_block_operator(const CoupledConfig& cfg);

/// Block-diagonal principal part diag(nu Lap + c2_f, kappa Lap + c2_h).
Operator coupled_principal(const CoupledConfig& cfg);

/// Advection and coupling: the block operator minus its principal part.
Operator coupled_lower_order(const CoupledConfig& cfg);

/// Thermal Dirichlet map of kappa Lap + c2_h embedded as [0; D_h].
GreenMap build_thermal_dirichlet_map(const CoupledConfig& cfg);

/// Fluid-block indicator bumps on omega, orthonormal in L2 (n x K).
CMatrix interior_profiles(const CoupledConfig& cfg, int K);

struct CoupledLoop {
  ClosedLoop loop;
  CMatrix a_hat;       // principal (I - D F)
  CMatrix pi;          // lower order + [J; 0]
  double split_residual = 0.0; // entrywise, relative to max |A_F|
};

/// A_F = A + [J w; 0] - principal D F. F maps the 2n state to the two
/// thermal boundary values; J maps it to the n fluid rows and must be
/// supported on omega.
CoupledLoop compose_coupled_loop(const CoupledConfig& cfg, const FeedbackLaw& F, const FeedbackLaw& J);

struct CoupledSynthesis {
  SpectralData open_loop;
  RankReport rank;
  std::vector<Complex> targets;
  FeedbackLaw F;
  FeedbackLaw J;
  int K = 0;
};

/// target_i = Re lambda_{N+1} * i / (N + 1): closed-loop abscissa strictly
/// between Re lambda_{N+1} and 0.
std::vector<Complex> coupled_targets(const SpectralData& sd);

/// Hautus check of the unstable modes against the thermal boundary inputs
/// and, if enabled, the interior fluid inputs.
RankReport coupled_rank_check(const CoupledConfig& cfg, bool use_interior);

/// Joint placement over boundary and interior channels. With use_interior
/// false J is the zero law. Throws SynthesisFailure.
CoupledSynthesis synthesize_coupled(const CoupledConfig& cfg, bool use_interior = true,
                                    const std::optional<std::vector<Complex>>& targets = std::nullopt);

/// verify_loop with the decay rate required to lie in (Re lambda_{N+1}, 0)
/// of the open loop.
VerificationReport verify_coupled_stabilization(const CoupledLoop& cl, const SpectralData& open_loop,
                                                VerifyOptions options);

/// Synthesis followed by verification. A failed rank check yields a FAIL
/// report carrying the Hautus margins instead of throwing.
VerificationReport run_coupled_pipeline(const CoupledConfig& cfg, bool use_interior, const VerifyOptions& options);

/// ||F^* D^* (A^*)^gamma|| with A = -diag(nu Lap, kappa Lap).
double adjoint_feedback_bound(const CoupledConfig& cfg, const FeedbackLaw& F);

}  // namespace bstab
