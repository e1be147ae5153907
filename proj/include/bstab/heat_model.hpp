#pragma once

#include <optional>
#include <vector>

#include "bstab/closed_loop.hpp"
#include "bstab/synthesis.hpp"
#include "bstab/verify.hpp"

namespace bstab {

/// y_t = y_xx + c2 y + b y_x on (0,1) with Dirichlet boundary control,
/// discretized on n interior nodes x_i = i h, h = 1/(n+1).
struct HeatConfig {
  int n = 64;
  double c2 = 16.0;
  double advection_b = 0.0;
  double omega_lo = 0.2;
  double omega_hi = 0.4;
  double q = 2.0;
  double epsilon = 0.01;

  [[nodiscard]] double h() const { return 1.0 / (n + 1); }
  [[nodiscard]] double node(int i) const { return (i + 1) * h(); }
  /// Throws ConfigError.
  void validate() const;
};

/// Second-order Laplacian + c2 I + b * centered first difference.
Operator build_heat_operator(const HeatConfig& cfg);

/// Principal part Laplacian_h and perturbation c2 I + b D1 (A^{1/2}-bounded).
OseenSplit heat_split(const HeatConfig& cfg);

/// Columns: discrete solutions of the full interior operator with unit
/// boundary value at x = 0 and at x = 1. gamma = 1/(2q) - epsilon.
GreenMap build_dirichlet_map(const HeatConfig& cfg);

/// Nodes of omega.
std::vector<bool> omega_mask(const HeatConfig& cfg);
/// Trapezoid weights of L2(omega) on the masked nodes (zero elsewhere are
/// irrelevant; weights are h with halves at the ends of the masked run).
RVector omega_weights(const HeatConfig& cfg);

struct GammaScanRow {
  int n = 0;
  double gamma = 0.0;
  double norm = 0.0;
};

/// ||(kI - A)^gamma D|| from the boundary space into the q-weighted nodal
/// space, for every (n, gamma).
std::vector<GammaScanRow> gamma_bound_scan(const std::vector<int>& grids, const std::vector<double>& gamma_list,
                                           const HeatConfig& cfg);

/// ||A_o A^{-1/2}|| with A = -Laplacian_h.
double perturbation_bound(const HeatConfig& cfg);

/// A_F = A(I - DF), interior B = 0.
ClosedLoop closed_loop_heat(const HeatConfig& cfg, const FeedbackLaw& feedback);

struct SynthesisResult {
  SpectralData open_loop;
  RankReport rank;
  std::vector<Complex> targets;
  FeedbackLaw law;
  int K = 0;
};

/// Rank check, pole placement on the unstable modes and realization of F.
/// N = 0 yields the zero law. Throws SynthesisFailure.
SynthesisResult synthesize_heat(const HeatConfig& cfg, FeedbackMode mode,
                                const std::optional<std::vector<Complex>>& targets = std::nullopt);

VerificationReport verify_stabilization(const ClosedLoop& cl, const VerifyOptions& options);

}  // namespace bstab
