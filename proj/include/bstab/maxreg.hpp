#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "bstab/closed_loop.hpp"

namespace bstab {

enum class ForcingKind { piecewise_constant_random, single_mode, constant };

std::string to_string(ForcingKind kind);

/// Piecewise-constant forcing f on [0, horizon): column j of `values` holds
/// the state-space vector on the cell [j*cell_width, (j+1)*cell_width).
struct ForcingSignal {
  ForcingKind kind = ForcingKind::constant;
  CMatrix values;
  double cell_width = 0.1;
  std::uint64_t seed = 0;
  int mode_index = -1;

  [[nodiscard]] double horizon() const { return cell_width * static_cast<double>(values.cols()); }
  [[nodiscard]] Eigen::Index dim() const { return values.rows(); }

  /// Extension by zero to a longer horizon.
  [[nodiscard]] ForcingSignal extended(double new_horizon) const;
  [[nodiscard]] ForcingSignal conjugated() const;

  static ForcingSignal constant(const CVector& value, double cell_width, double horizon);
  static ForcingSignal single_mode(const SpectralData& spectral, int index, double cell_width, double horizon);
  /// Entries uniform on [-1, 1], drawn from a 64-bit Mersenne twister.
  static ForcingSignal random(Eigen::Index dim, double cell_width, double horizon, std::uint64_t seed);
};

/// Default forcing family: `random_count` seeded random forcings followed by
/// one single-mode forcing per eigenvector of `spectral`.
std::vector<ForcingSignal> default_forcing_set(const SpectralData& spectral, int random_count, std::uint64_t seed,
                                               double cell_width, double horizon);

struct Trajectory {
  std::vector<double> times;
  CMatrix states; // n x nodes
};

struct SolveOptions {
  double step = 0.0; // 0 selects the largest admissible step
};

/// Integration step limit 0.1 / max|lambda(op)|.
double max_admissible_step(const Operator& op);

/// y' = A y + f, y(0) = 0, integrated exactly per step with the
/// augmented-matrix exponential. Nodes at multiples of the step.
Trajectory solution_map(const Operator& generator, const ForcingSignal& f, const SolveOptions& options = {});
Trajectory solution_map(const ClosedLoop& cl, const ForcingSignal& f, const SolveOptions& options = {});

/// Cell integral int_0^h e^{A s} ds (phi1) and int_0^h int_0^s e^{A r} dr ds (phi2).
struct CellIntegrals {
  CMatrix propagator;
  CMatrix phi1;
  CMatrix phi2;
};
CellIntegrals cell_integrals(const CMatrix& a, double h);

enum class Verdict { plateau, growth, inconclusive };
std::string to_string(Verdict v);

struct MaxRegOptions {
  int min_nodes = 2000;        // per horizon
  double refine_tol = 0.005;   // relative change accepted between resolutions
  int max_refinements = 4;
  int parallel = 1;
};

/// Ratios (||y_t||_p + ||A y||_p) / ||f||_p indexed [p][T] for one forcing.
std::vector<std::vector<double>> maxreg_ratios(const Operator& generator, const ForcingSignal& f,
                                               const std::vector<double>& p_list, const std::vector<double>& T_list,
                                               const MaxRegOptions& options = {});

/// Lower bound on C_{p,T}: max of the ratio over the forcing set.
double maxreg_constant(const ClosedLoop& cl, double p, double T, const std::vector<ForcingSignal>& forcing_set,
                       const MaxRegOptions& options = {});

struct MaxRegReport {
  double p = 2.0;
  std::vector<double> T_grid;
  std::vector<double> C_estimates;
  double imag_axis_sup = std::numeric_limits<double>::quiet_NaN();
  double duality_gap = std::numeric_limits<double>::quiet_NaN();
  Verdict verdict = Verdict::inconclusive;
};

inline constexpr double kPlateauRelTol = 0.05;
inline constexpr double kGrowthLogStep = 1.0;

Verdict classify(const std::vector<double>& C_estimates);

/// One report per p; all (p, T) pairs come from a single pass per forcing.
std::vector<MaxRegReport> plateau_scan(const Operator& generator, const std::vector<double>& p_list,
                                       const std::vector<double>& T_grid, const std::vector<ForcingSignal>& forcing_set,
                                       const MaxRegOptions& options = {});
MaxRegReport plateau_scan(const ClosedLoop& cl, double p, const std::vector<double>& T_grid,
                          const std::vector<ForcingSignal>& forcing_set, const MaxRegOptions& options = {});

/// sup over +-t_grid of ||t R(it, A)||. Requires a negative spectral abscissa.
double imaginary_axis_bound(const Operator& generator, const std::vector<double>& t_grid);
double imaginary_axis_bound(const ClosedLoop& cl, const std::vector<double>& t_grid);

struct DualityResult {
  double gap = 0.0; // |log C - log C*| at the last horizon
  Verdict primal = Verdict::inconclusive;
  Verdict dual = Verdict::inconclusive;
  [[nodiscard]] bool verdicts_agree() const { return primal == dual; }
};

/// Forcings for the adjoint run: random forcings are conjugated, single-mode
/// forcings are replaced by the same-index eigenvector of the adjoint.
std::vector<ForcingSignal> dual_forcing_set(const std::vector<ForcingSignal>& forcing_set,
                                            const SpectralData& adjoint_spectral);

/// Compares A at exponent p with A^* at p' = p/(p-1) over the dual forcing set.
DualityResult duality_check(const Operator& generator, double p, const std::vector<double>& T_grid,
                            const std::vector<ForcingSignal>& forcing_set, const MaxRegOptions& options = {});
DualityResult duality_check(const ClosedLoop& cl, double p, const std::vector<double>& T_grid,
                            const std::vector<ForcingSignal>& forcing_set, const MaxRegOptions& options = {});

}  // namespace bstab
