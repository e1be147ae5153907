#include "bstab/coupled_model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/LU>

namespace bstab {

namespace {

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

void check_resonance(double c2, double diffusivity, const char* name) {
  if (c2 <= 0.0) return;
  const double c = std::sqrt(c2 / diffusivity);
  const double k = std::round(c / std::numbers::pi);
  if (k >= 1.0 && std::abs(c - k * std::numbers::pi) < 1e-3)
    throw ConfigError(std::string("coupled: ") + name + " is resonant; the Dirichlet map is not defined");
}

GridMeta grid_of(const CoupledConfig& cfg) { return GridMeta{cfg.h(), "(0,1) x {fluid, thermal}"}; }

std::vector<bool> fluid_omega(const CoupledConfig& cfg) {
  std::vector<bool> mask(static_cast<std::size_t>(cfg.n), false);
  for (int i = 0; i < cfg.n; ++i) mask[static_cast<std::size_t>(i)] = cfg.node(i) >= cfg.omega_lo && cfg.node(i) <= cfg.omega_hi;
  return mask;
}

OseenSplit coupled_split(const CoupledConfig& cfg) {
  const int n = cfg.n;
  CMatrix p = CMatrix::Zero(2 * n, 2 * n);
  p.topLeftCorner(n, n) = cfg.nu * laplacian(n, cfg.h());
  p.bottomRightCorner(n, n) = cfg.kappa * laplacian(n, cfg.h());
  const Operator block = build_block_operator(cfg);
  return OseenSplit{Operator(p, "diffusion", grid_of(cfg)), Operator(block.entries() - p, "A_o"), 0.5};
}

// Closed-loop input matrix for the boundary channels: principal * D.
CMatrix boundary_input(const CoupledConfig& cfg) {
  return coupled_principal(cfg).entries() * build_thermal_dirichlet_map(cfg).entries();
}

CMatrix interior_input(const CoupledConfig& cfg, int K) {
  CMatrix u = CMatrix::Zero(2 * cfg.n, K);
  u.topRows(cfg.n) = -interior_profiles(cfg, K);
  return u;
}

}  // namespace

RVector CoupledConfig::theta_profile() const {
  if (theta_e_profile.empty()) return RVector::Constant(n, theta_e);
  return Eigen::Map<const RVector>(theta_e_profile.data(), static_cast<Eigen::Index>(theta_e_profile.size()));
}

void CoupledConfig::validate() const {
  if (n < 8) throw ConfigError("coupled: n must be >= 8, got " + std::to_string(n));
  if (!(nu > 0.0) || !(kappa > 0.0)) throw ConfigError("coupled: nu and kappa must be positive");
  if (!std::isfinite(gamma_buoy) || !std::isfinite(ye_advect) || !std::isfinite(c2_f) || !std::isfinite(c2_h) ||
      !std::isfinite(theta_e))
    throw ConfigError("coupled: coefficients must be finite");
  if (!theta_e_profile.empty()) {
    if (static_cast<int>(theta_e_profile.size()) != n)
      throw ConfigError("coupled: theta_e_profile has " + std::to_string(theta_e_profile.size()) +
                        " entries, expected n = " + std::to_string(n));
    for (double v : theta_e_profile)
      if (!std::isfinite(v)) throw ConfigError("coupled: theta_e_profile must be finite");
  }
  if (!(omega_lo > 0.0 && omega_lo < omega_hi && omega_hi < 1.0))
    throw ConfigError("coupled: omega must be a nonempty interval strictly inside (0,1)");
  if (!(q > 1.0) || !std::isfinite(q)) throw ConfigError("coupled: q must lie in (1, inf)");
  if (!(epsilon > 0.0) || epsilon >= 1.0 / (2.0 * q)) throw ConfigError("coupled: epsilon must lie in (0, 1/(2q))");
  check_resonance(c2_h, kappa, "c2_h");
}

Operator build_block_operator(const CoupledConfig& cfg) {
  cfg.validate();
  const int n = cfg.n;
  const double h = cfg.h();
  const CMatrix adv = cfg.ye_advect * first_difference(n, h);
  CMatrix a = CMatrix::Zero(2 * n, 2 * n);
  a.topLeftCorner(n, n) = cfg.nu * laplacian(n, h) + adv;
  a.topLeftCorner(n, n).diagonal().array() += cfg.c2_f;
  a.bottomRightCorner(n, n) = cfg.kappa * laplacian(n, h) + adv;
  a.bottomRightCorner(n, n).diagonal().array() += cfg.c2_h;
  a.topRightCorner(n, n).diagonal().setConstant(cfg.gamma_buoy);
  a.bottomLeftCorner(n, n).diagonal() = -cfg.theta_profile().cast<Complex>();
  return Operator(std::move(a), "coupled", grid_of(cfg));
}

Operator coupled_principal(const CoupledConfig& cfg) {
  cfg.validate();
  const int n = cfg.n;
  CMatrix p = CMatrix::Zero(2 * n, 2 * n);
  p.topLeftCorner(n, n) = cfg.nu * laplacian(n, cfg.h());
  p.topLeftCorner(n, n).diagonal().array() += cfg.c2_f;
  p.bottomRightCorner(n, n) = cfg.kappa * laplacian(n, cfg.h());
  p.bottomRightCorner(n, n).diagonal().array() += cfg.c2_h;
  return Operator(std::move(p), "principal", grid_of(cfg));
}

Operator coupled_lower_order(const CoupledConfig& cfg) {
  return Operator(build_block_operator(cfg).entries() - coupled_principal(cfg).entries(), "Pi");
}

GreenMap build_thermal_dirichlet_map(const CoupledConfig& cfg) {
  cfg.validate();
  const int n = cfg.n;
  const double h = cfg.h();
  CMatrix ph = cfg.kappa * laplacian(n, h);
  ph.diagonal().array() += cfg.c2_h;
  CMatrix r = CMatrix::Zero(n, 2);
  r(0, 0) = cfg.kappa / (h * h);
  r(n - 1, 1) = cfg.kappa / (h * h);
  const double cond = condition_number(ph);
  if (!std::isfinite(cond) || cond > 1e12)
    throw SingularityError("build_thermal_dirichlet_map: thermal operator is singular (resonant c2_h)",
                           Complex{0.0, 0.0});
  CMatrix d = CMatrix::Zero(2 * n, 2);
  d.bottomRows(n) = -Eigen::PartialPivLU<CMatrix>(ph).solve(r);
  return GreenMap(std::move(d), 1.0 / (2.0 * cfg.q) - cfg.epsilon, {"thermal x=0", "thermal x=1"});
}

CMatrix interior_profiles(const CoupledConfig& cfg, int K) {
  if (K < 1) throw UsageError("interior_profiles: K must be positive");
  const auto mask = fluid_omega(cfg);
  std::vector<int> nodes;
  for (int i = 0; i < cfg.n; ++i)
    if (mask[static_cast<std::size_t>(i)]) nodes.push_back(i);
  if (static_cast<int>(nodes.size()) < K)
    throw ConfigError("coupled: omega holds " + std::to_string(nodes.size()) + " nodes, fewer than K = " +
                      std::to_string(K));
  // Split omega into K consecutive runs; disjoint indicators are orthogonal,
  // so orthonormalization reduces to scaling.
  CMatrix u = CMatrix::Zero(cfg.n, K);
  const std::size_t per = nodes.size() / static_cast<std::size_t>(K);
  for (int k = 0; k < K; ++k) {
    const std::size_t lo = static_cast<std::size_t>(k) * per;
    const std::size_t hi = k + 1 == K ? nodes.size() : lo + per;
    for (std::size_t j = lo; j < hi; ++j) u(nodes[j], k) = 1.0;
    u.col(k) /= std::sqrt(cfg.h() * static_cast<double>(hi - lo));
  }
  return u;
}

CoupledLoop compose_coupled_loop(const CoupledConfig& cfg, const FeedbackLaw& F, const FeedbackLaw& J) {
  const int n = cfg.n;
  const Operator block = build_block_operator(cfg);
  const GreenMap d = build_thermal_dirichlet_map(cfg);
  if (J.as_matrix.rows() != n || J.as_matrix.cols() != 2 * n)
    throw UsageError("compose_coupled_loop: J must map the " + std::to_string(2 * n) + "-dimensional state to the " +
                     std::to_string(n) + " fluid rows");
  const auto mask = fluid_omega(cfg);
  for (Eigen::Index k = 0; k < J.profiles.cols(); ++k)
    for (int i = 0; i < n; ++i)
      if (!mask[static_cast<std::size_t>(i)] && J.profiles(i, k) != Complex{0.0, 0.0})
        throw ConfigError("compose_coupled_loop: interior profile " + std::to_string(k) +
                          " is nonzero outside omega at node " + std::to_string(i));
  if (F.as_matrix.cols() != 2 * n || F.as_matrix.rows() != 2)
    throw UsageError("compose_coupled_loop: F must map the " + std::to_string(2 * n) +
                     "-dimensional state to the two thermal boundary values");

  const CMatrix principal = coupled_principal(cfg).entries();
  const CMatrix lower = block.entries() - principal;
  CMatrix j_block = CMatrix::Zero(2 * n, 2 * n);
  j_block.topRows(n) = J.as_matrix;
  const CMatrix df = d.entries() * F.as_matrix;

  // Written against the generic loop Oseen (I - G F) + B: the lower-order
  // part acting on D F is returned to B.
  const Operator interior(j_block + lower * df, "B");
  CoupledLoop out;
  out.loop = compose_closed_loop(block, d, F, interior, coupled_split(cfg), "coupled");
  out.a_hat = principal - principal * df;
  out.pi = lower + j_block;
  const double scale = std::max(1.0, out.loop.composed.entries().cwiseAbs().maxCoeff());
  out.split_residual = (out.a_hat + out.pi - out.loop.composed.entries()).cwiseAbs().maxCoeff() / scale;
  return out;
}

std::vector<Complex> coupled_targets(const SpectralData& sd) {
  const auto next = sd.first_stable_real_part();
  if (!next) throw SynthesisFailure("coupled_targets: no stable eigenvalue to bound the closed-loop rate");
  const int nu = sd.unstable_count;
  std::vector<Complex> t;
  for (int i = 1; i <= nu; ++i) t.emplace_back(*next * i / (nu + 1.0), 0.0);
  return t;
}

RankReport coupled_rank_check(const CoupledConfig& cfg, bool use_interior) {
  const SpectralData sd = spectrum(build_block_operator(cfg));
  if (sd.unstable_count == 0) return rank_check(std::vector<Complex>{}, std::vector<double>{});
  CMatrix input = boundary_input(cfg);
  if (use_interior) {
    const int K = choose_K(sd);
    CMatrix both(input.rows(), input.cols() + K);
    both << input, interior_input(cfg, K);
    input = both;
  }
  return rank_check(reduce_input(sd, input));
}

CoupledSynthesis synthesize_coupled(const CoupledConfig& cfg, bool use_interior,
                                    const std::optional<std::vector<Complex>>& targets) {
  const int n = cfg.n;
  const Operator block = build_block_operator(cfg);
  CoupledSynthesis out;
  out.open_loop = spectrum(block);
  out.J = FeedbackLaw::zero(2 * n, n);
  if (out.open_loop.unstable_count == 0) {
    out.rank = rank_check(std::vector<Complex>{}, std::vector<double>{});
    out.F = FeedbackLaw::zero(2 * n, 2);
    return out;
  }
  out.K = choose_K(out.open_loop);
  const int kj = use_interior ? out.K : 0;
  CMatrix input(2 * n, 2 + kj);
  input.leftCols(2) = boundary_input(cfg);
  if (kj > 0) input.rightCols(kj) = interior_input(cfg, kj);
  const ReducedPair rp = reduce_input(out.open_loop, input);
  out.rank = rank_check(rp);
  if (!out.rank.pass) throw SynthesisFailure("synthesize: Hautus rank check failed\n" + out.rank.summary());

  out.targets = targets ? *targets : coupled_targets(out.open_loop);
  const CMatrix g_f = default_profiles(2, out.K);
  CMatrix profiles = CMatrix::Zero(2 + kj, out.K + kj);
  profiles.topLeftCorner(2, out.K) = g_f;
  if (kj > 0) profiles.bottomRightCorner(kj, kj) = CMatrix::Identity(kj, kj);
  const ReducedPair restricted = with_profiles(rp, profiles);
  const bool real = block.is_real();
  const CMatrix gain = place_poles(restricted, out.targets, real);

  FeedbackSpec fs;
  fs.mode = FeedbackMode::spectral;
  fs.profiles = g_f;
  fs.real_model = real;
  out.F = build_feedback(restricted, gain.topRows(out.K), out.open_loop, fs);
  if (kj > 0) {
    FeedbackSpec js = fs;
    js.profiles = interior_profiles(cfg, kj);
    out.J = build_feedback(restricted, gain.bottomRows(kj), out.open_loop, js);
  }
  return out;
}

VerificationReport verify_coupled_stabilization(const CoupledLoop& cl, const SpectralData& open_loop,
                                                VerifyOptions options) {
  if (open_loop.unstable_count > 0) {
    const auto next = open_loop.first_stable_real_part();
    if (next) options.rate_window = std::make_pair(*next, 0.0);
  }
  VerificationReport rep = verify_loop(cl.loop, options);
  rep.add({"block_split_residual", cl.split_residual <= 1e-12, cl.split_residual, "A_hat_F + Pi vs A_F"});
  return rep;
}

VerificationReport run_coupled_pipeline(const CoupledConfig& cfg, bool use_interior, const VerifyOptions& options) {
  const RankReport rank = coupled_rank_check(cfg, use_interior);
  if (!rank.pass) {
    VerificationReport rep;
    rep.model = "coupled";
    rep.abscissa = spectral_abscissa(build_block_operator(cfg).entries());
    double worst = std::numeric_limits<double>::infinity();
    for (double m : rank.margins) worst = std::min(worst, m);
    std::ostringstream d;
    d << "eigenvalue " << rank.first_failing << " ("
      << format_complex(rank.eigenvalues[static_cast<std::size_t>(rank.first_failing - 1)])
      << ") unreachable: Hautus margin " << rank.margins[static_cast<std::size_t>(rank.first_failing - 1)];
    rep.add({"hautus_rank", false, worst, d.str()});
    return rep;
  }
  const CoupledSynthesis syn = synthesize_coupled(cfg, use_interior);
  const CoupledLoop loop = compose_coupled_loop(cfg, syn.F, syn.J);
  VerificationReport rep = verify_coupled_stabilization(loop, syn.open_loop, options);
  double worst = std::numeric_limits<double>::infinity();
  for (double m : rank.margins) worst = std::min(worst, m);
  rep.add({"hautus_rank", true, rank.margins.empty() ? 0.0 : worst, "all unstable modes reachable"});
  return rep;
}

double adjoint_feedback_bound(const CoupledConfig& cfg, const FeedbackLaw& F) {
  const int n = cfg.n;
  CMatrix a = CMatrix::Zero(2 * n, 2 * n);
  a.topLeftCorner(n, n) = -cfg.nu * laplacian(n, cfg.h());
  a.bottomRightCorner(n, n) = -cfg.kappa * laplacian(n, cfg.h());
  const GreenMap d = build_thermal_dirichlet_map(cfg);
  const Operator a_star(a.adjoint(), "A*");
  const CMatrix power = fractional_power(a_star, d.gamma()).entries();
  return spectral_norm(F.as_matrix.adjoint() * d.entries().adjoint() * power);
}

}  // namespace bstab
