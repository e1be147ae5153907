#include "bstab/heat_model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/LU>

namespace bstab {

namespace {

constexpr double kResonanceGuard = 1e-3;

CMatrix laplacian(int n, double h) {
  CMatrix l = CMatrix::Zero(n, n);
  const double s = 1.0 / (h * h);
  for (int i = 0; i < n; ++i) {
    l(i, i) = -2.0 * s;
    if (i > 0) l(i, i - 1) = s;
    if (i + 1 < n) l(i, i + 1) = s;
  }
  return l;
}

CMatrix first_difference(int n, double h) {
  CMatrix d = CMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    if (i > 0) d(i, i - 1) = -0.5 / h;
    if (i + 1 < n) d(i, i + 1) = 0.5 / h;
  }
  return d;
}

GridMeta grid_of(const HeatConfig& cfg) { return GridMeta{cfg.h(), "(0,1)"}; }

}  // namespace

void HeatConfig::validate() const {
  if (n < 8) throw ConfigError("heat: n must be >= 8, got " + std::to_string(n));
  if (!std::isfinite(c2) || !std::isfinite(advection_b)) throw ConfigError("heat: c2 and advection_b must be finite");
  if (!(omega_lo > 0.0 && omega_lo < omega_hi && omega_hi < 1.0))
    throw ConfigError("heat: omega must be a nonempty interval strictly inside (0,1)");
  if (!(q > 1.0) || !std::isfinite(q)) throw ConfigError("heat: q must lie in (1, inf)");
  if (!(epsilon > 0.0) || epsilon >= 1.0 / (2.0 * q)) throw ConfigError("heat: epsilon must lie in (0, 1/(2q))");
  if (c2 > 0.0) {
    const double c = std::sqrt(c2);
    const double k = std::round(c / std::numbers::pi);
    if (k >= 1.0 && std::abs(c - k * std::numbers::pi) < kResonanceGuard) {
      std::ostringstream msg;
      msg << "heat: c = " << c << " is resonant (within " << kResonanceGuard << " of " << k
          << " pi); the Dirichlet map is not defined";
      throw ConfigError(msg.str());
    }
  }
}

Operator build_heat_operator(const HeatConfig& cfg) {
  cfg.validate();
  const double h = cfg.h();
  CMatrix a = laplacian(cfg.n, h);
  a.diagonal().array() += cfg.c2;
  if (cfg.advection_b != 0.0) a += cfg.advection_b * first_difference(cfg.n, h);
  return Operator(std::move(a), "heat", grid_of(cfg));
}

OseenSplit heat_split(const HeatConfig& cfg) {
  cfg.validate();
  const double h = cfg.h();
  CMatrix ao = cfg.advection_b * first_difference(cfg.n, h);
  ao.diagonal().array() += cfg.c2;
  return OseenSplit{Operator(laplacian(cfg.n, h), "laplacian", grid_of(cfg)), Operator(std::move(ao), "A_o"), 0.5};
}

GreenMap build_dirichlet_map(const HeatConfig& cfg) {
  const Operator op = build_heat_operator(cfg);
  const int n = cfg.n;
  const double h = cfg.h();
  // Boundary values enter the first and last rows through the stencil.
  CMatrix r = CMatrix::Zero(n, 2);
  r(0, 0) = 1.0 / (h * h) - cfg.advection_b / (2.0 * h);
  r(n - 1, 1) = 1.0 / (h * h) + cfg.advection_b / (2.0 * h);
  const double cond = condition_number(op.entries());
  if (!std::isfinite(cond) || cond > 1e12)
    throw SingularityError("build_dirichlet_map: interior operator is singular (resonant c2), condition " +
                               std::to_string(cond),
                           Complex{0.0, 0.0});
  Eigen::PartialPivLU<CMatrix> lu(op.entries());
  CMatrix d = -lu.solve(r);
  const double residual = (op.entries() * d + r).cwiseAbs().maxCoeff() / r.cwiseAbs().maxCoeff();
  if (residual > 1e-10)
    throw NumericalError("build_dirichlet_map: solve residual " + std::to_string(residual));
  return GreenMap(std::move(d), 1.0 / (2.0 * cfg.q) - cfg.epsilon, {"x=0", "x=1"});
}

std::vector<bool> omega_mask(const HeatConfig& cfg) {
  std::vector<bool> mask(static_cast<std::size_t>(cfg.n), false);
  for (int i = 0; i < cfg.n; ++i) {
    const double x = cfg.node(i);
    mask[static_cast<std::size_t>(i)] = x >= cfg.omega_lo && x <= cfg.omega_hi;
  }
  return mask;
}

RVector omega_weights(const HeatConfig& cfg) {
  const auto mask = omega_mask(cfg);
  RVector w = RVector::Zero(cfg.n);
  int first = -1, last = -1;
  for (int i = 0; i < cfg.n; ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    if (first < 0) first = i;
    last = i;
    w(i) = cfg.h();
  }
  if (first >= 0 && last > first) {
    w(first) *= 0.5;
    w(last) *= 0.5;
  }
  return w;
}

std::vector<GammaScanRow> gamma_bound_scan(const std::vector<int>& grids, const std::vector<double>& gamma_list,
                                           const HeatConfig& cfg) {
  for (std::size_t i = 1; i < grids.size(); ++i)
    if (grids[i] <= grids[i - 1]) throw UsageError("gamma_bound_scan: grids must increase");
  std::vector<GammaScanRow> rows;
  for (int n : grids) {
    HeatConfig c = cfg;
    c.n = n;
    const Operator op = build_heat_operator(c);
    const Operator shifted = op.translated(translation_constant(op));
    const SpectralData sd = spectrum(shifted);
    const CMatrix d = build_dirichlet_map(c).entries();
    const double scale = std::pow(c.h(), 1.0 / c.q);
    for (double gamma : gamma_list) {
      const CMatrix m = gamma == 0.0 ? d : CMatrix(fractional_power(shifted, gamma, sd).entries() * d);
      double norm = 0.0;
      if (c.q == 2.0) {
        norm = scale * spectral_norm(m);
      } else {
        // Lower bound of the induced q-norm over a few boundary data.
        const std::vector<std::pair<double, double>> probes{{1, 0}, {0, 1}, {1, 1}, {1, -1}};
        for (auto [a, b] : probes) {
          CVector g(2);
          g << a, b;
          const double in = std::pow(std::pow(std::abs(a), c.q) + std::pow(std::abs(b), c.q), 1.0 / c.q);
          const CVector v = m * g;
          double s = 0.0;
          for (Eigen::Index i = 0; i < v.size(); ++i) s += std::pow(std::abs(v(i)), c.q);
          norm = std::max(norm, scale * std::pow(s, 1.0 / c.q) / in);
        }
      }
      rows.push_back({n, gamma, norm});
    }
  }
  return rows;
}

double perturbation_bound(const HeatConfig& cfg) {
  const OseenSplit split = heat_split(cfg);
  const Operator a(-split.principal.entries(), "A");
  const CMatrix a_half = fractional_power(a, 0.5).entries();
  const CMatrix a_neg_half = Eigen::PartialPivLU<CMatrix>(a_half).solve(CMatrix::Identity(cfg.n, cfg.n));
  return spectral_norm(split.perturbation.entries() * a_neg_half);
}

ClosedLoop closed_loop_heat(const HeatConfig& cfg, const FeedbackLaw& feedback) {
  return compose_closed_loop(build_heat_operator(cfg), build_dirichlet_map(cfg), feedback, std::nullopt,
                             heat_split(cfg), "heat");
}

SynthesisResult synthesize_heat(const HeatConfig& cfg, FeedbackMode mode,
                                const std::optional<std::vector<Complex>>& targets) {
  const Operator op = build_heat_operator(cfg);
  const GreenMap d = build_dirichlet_map(cfg);
  SynthesisResult out;
  out.open_loop = spectrum(op);
  const int nu = out.open_loop.unstable_count;
  if (nu == 0) {
    out.rank = rank_check(std::vector<Complex>{}, std::vector<double>{});
    out.law = FeedbackLaw::zero(cfg.n, 2);
    return out;
  }
  const ReducedPair rp = reduce(out.open_loop, op, d);
  out.rank = rank_check(rp);
  if (!out.rank.pass) throw SynthesisFailure("synthesize: Hautus rank check failed\n" + out.rank.summary());

  out.targets = targets ? *targets : default_targets(out.open_loop);
  out.K = choose_K(out.open_loop);
  FeedbackSpec spec;
  spec.mode = mode;
  spec.profiles = default_profiles(2, out.K);
  spec.real_model = op.is_real();
  if (mode == FeedbackMode::localized) {
    spec.omega_mask = omega_mask(cfg);
    spec.weights = omega_weights(cfg);
  }
  const ReducedPair restricted = with_profiles(rp, spec.profiles);
  const CMatrix gain = place_poles(restricted, out.targets, spec.real_model);
  out.law = build_feedback(restricted, gain, out.open_loop, spec);
  return out;
}

VerificationReport verify_stabilization(const ClosedLoop& cl, const VerifyOptions& options) {
  return verify_loop(cl, options);
}

}  // namespace bstab
