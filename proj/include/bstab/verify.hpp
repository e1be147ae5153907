#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bstab/closed_loop.hpp"
#include "bstab/maxreg.hpp"

namespace bstab {

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;
  std::string detail;
};

struct VerifyOptions {
  std::vector<double> decay_t_grid = linspace(1.0, 10.0, 10);
  std::vector<double> p_list{1.5, 2.0, 4.0};
  std::vector<double> T_grid{10.0, 20.0, 40.0};
  int random_forcings = 32;
  std::uint64_t seed = 1;
  double cell_width = 0.1;
  std::vector<double> imag_grid = logspace(1e-3, 1e3, 60);
  // Decay rate must reach this fraction of the expected margin.
  double decay_fraction = 0.9;
  // Expected decay margin; defaults to minus the spectral abscissa.
  std::optional<double> target_margin;
  // Open interval the fitted -delta and the abscissa must lie in.
  std::optional<std::pair<double, double>> rate_window;
  bool identity_checks = true;
  int resolvent_samples = 5;
  bool run_maxreg = true;
  MaxRegOptions maxreg;
};

struct VerificationReport {
  std::string model;
  bool pass = false;
  std::vector<CheckResult> checks;
  double abscissa = 0.0;
  DecayFit decay;
  std::vector<MaxRegReport> scans;

  [[nodiscard]] const CheckResult* first_failure() const;
  void add(CheckResult c);
};

/// Deterministic sample points for the resolvent identity, kept away from
/// the spectrum of both the open and closed loop.
std::vector<Complex> resolvent_sample_points(const ClosedLoop& cl, int count, std::uint64_t seed);

/// Decay fit, maximal-regularity plateau per p, imaginary-axis bound and the
/// structural identities for one closed loop.
VerificationReport verify_loop(const ClosedLoop& cl, const VerifyOptions& options);

}  // namespace bstab
