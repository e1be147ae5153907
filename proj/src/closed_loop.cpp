#include "bstab/closed_loop.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/LU>

namespace bstab {

namespace {

constexpr double kAdjointTol = 1e-8;

}  // namespace

ClosedLoop compose_closed_loop(const Operator& oseen, const GreenMap& green, const FeedbackLaw& feedback,
                               const std::optional<Operator>& interior_B, const std::optional<OseenSplit>& split,
                               std::string model) {
  const Eigen::Index n = oseen.dim();
  if (green.state_dim() != n)
    throw UsageError("compose_closed_loop: green map has " + std::to_string(green.state_dim()) +
                     " rows, oseen operator has dimension " + std::to_string(n));
  if (feedback.as_matrix.cols() != n)
    throw UsageError("compose_closed_loop: feedback acts on dimension " + std::to_string(feedback.as_matrix.cols()) +
                     ", state dimension is " + std::to_string(n));
  if (feedback.as_matrix.rows() != green.input_dim())
    throw UsageError("compose_closed_loop: feedback produces " + std::to_string(feedback.as_matrix.rows()) +
                     " inputs, green map expects " + std::to_string(green.input_dim()));
  if (interior_B && interior_B->dim() != n)
    throw UsageError("compose_closed_loop: interior_B has dimension " + std::to_string(interior_B->dim()) +
                     ", expected " + std::to_string(n));

  ClosedLoop cl;
  cl.model = std::move(model);
  cl.oseen = oseen;
  cl.green = green;
  cl.feedback = feedback;
  cl.interior_B = interior_B ? *interior_B : Operator::zero(n, "B");
  if (split) {
    if (split->principal.dim() != n || split->perturbation.dim() != n)
      throw UsageError("compose_closed_loop: split operators must match the oseen dimension");
    const double mismatch = (split->principal.entries() + split->perturbation.entries() - oseen.entries()).norm();
    if (mismatch > 1e-12 * std::max(1.0, oseen.entries().norm()))
      throw UsageError("compose_closed_loop: principal + perturbation does not reproduce the oseen operator");
    cl.principal = split->principal;
    cl.perturbation = split->perturbation;
    cl.perturbation_epsilon = split->epsilon;
  } else {
    cl.principal = oseen;
    cl.perturbation = Operator::zero(n, "A_o");
  }

  const CMatrix gf = green.entries() * feedback.as_matrix;
  CMatrix composed = oseen.entries() - oseen.entries() * gf;
  composed += cl.interior_B.entries();
  cl.composed = Operator(std::move(composed), "A_F", oseen.grid());
  return cl;
}

double composition_residual(const ClosedLoop& cl) {
  const Eigen::Index n = cl.dim();
  const CMatrix rebuilt =
      cl.oseen.entries() * (CMatrix::Identity(n, n) - cl.green.entries() * cl.feedback.as_matrix) +
      cl.interior_B.entries();
  const double scale = std::max(cl.composed.entries().cwiseAbs().maxCoeff(), 1e-300);
  return (rebuilt - cl.composed.entries()).cwiseAbs().maxCoeff() / scale;
}

AdjointTerms adjoint_decomposition(const ClosedLoop& cl) {
  const Eigen::Index n = cl.dim();
  const double gamma = cl.green.gamma();
  const double eps = cl.perturbation_epsilon;
  if (!(eps > 0.0 && eps < 1.0)) throw UsageError("adjoint_decomposition: epsilon must lie in (0,1)");

  // A = -principal. Fractional powers need it sectorial; shifting A and A_o by
  // the same k leaves -A + A_o unchanged.
  AdjointTerms terms;
  CMatrix a = -cl.principal.entries();
  CMatrix a_o = cl.perturbation.entries();
  const double abscissa_minus_a = spectral_abscissa(-a);
  if (abscissa_minus_a >= 0.0) {
    terms.translation = abscissa_minus_a + 1.0;
    a.diagonal().array() += terms.translation;
    a_o.diagonal().array() += terms.translation;
  }
  const Operator a_op(a, "A");
  const Operator a_star(a.adjoint(), "A*");
  const SpectralData a_star_spec = spectrum(a_star);

  const CMatrix a_star_gamma = fractional_power(a_star, gamma, a_star_spec).entries();
  const CMatrix a_star_1mg = fractional_power(a_star, 1.0 - gamma, a_star_spec).entries();
  const CMatrix a_star_1me = fractional_power(a_star, 1.0 - eps, a_star_spec).entries();
  // A^{-(1-eps)} from the primal operator, independently of the A* route.
  const CMatrix a_1me = fractional_power(a_op, 1.0 - eps).entries();
  const CMatrix a_neg_1me = Eigen::PartialPivLU<CMatrix>(a_1me).solve(CMatrix::Identity(n, n));

  const CMatrix& g = cl.green.entries();
  const CMatrix& f = cl.feedback.as_matrix;
  const CMatrix i_minus_gf = CMatrix::Identity(n, n) - g * f;

  terms.minus_a_star = -a_star.entries();
  terms.feedback_term = (f.adjoint() * g.adjoint() * a_star_gamma) * a_star_1mg;
  terms.perturbation_term = i_minus_gf.adjoint() * (a_neg_1me * a_o).adjoint() * a_star_1me;
  terms.interior_term = cl.interior_B.entries().adjoint();

  const CMatrix target = cl.composed.entries().adjoint();
  terms.relative_residual =
      spectral_norm(terms.sum() - target) / std::max(spectral_norm(cl.composed.entries()), 1e-300);
  return terms;
}

Operator adjoint_closed_loop(const ClosedLoop& cl) {
  const AdjointTerms terms = adjoint_decomposition(cl);
  if (terms.relative_residual > kAdjointTol) {
    std::ostringstream msg;
    msg << "adjoint decomposition residual " << terms.relative_residual << " exceeds " << kAdjointTol;
    throw IdentityViolation(msg.str(), terms.relative_residual);
  }
  return cl.composed.adjoint();
}

double resolvent_perturbation_residual(const ClosedLoop& cl, Complex lambda) {
  const Eigen::Index n = cl.dim();
  const CMatrix r_oseen = resolvent(cl.oseen, lambda).entries();
  const CMatrix r_closed = resolvent(cl.composed, lambda).entries();
  const CMatrix perturb = cl.oseen.entries() * cl.green.entries() * cl.feedback.as_matrix - cl.interior_B.entries();
  const CMatrix middle = CMatrix::Identity(n, n) + r_oseen * perturb;
  const double cond = condition_number(middle);
  if (!std::isfinite(cond) || cond > 1e12)
    throw SingularityError("resolvent_perturbation_residual: I + R(lambda, Oseen)(Oseen G F - B) is singular at " +
                               format_complex(lambda),
                           lambda);
  const CMatrix rhs = Eigen::PartialPivLU<CMatrix>(middle).solve(r_oseen);
  return spectral_norm(rhs - r_closed) / spectral_norm(r_closed);
}

std::vector<RayPoint> ray_decay_check(const Operator& oseen_translated, double gamma,
                                      const std::vector<double>& lambda_grid) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw UsageError("ray_decay_check: gamma must lie in (0,1)");
  const Operator power = fractional_power(oseen_translated, 1.0 - gamma);
  const Operator generator(-oseen_translated.entries(), "-Ahat");
  std::vector<RayPoint> table;
  table.reserve(lambda_grid.size());
  for (double lambda : lambda_grid) {
    const CMatrix r = resolvent(generator, Complex{lambda, 0.0}).entries();
    table.push_back({std::abs(lambda), spectral_norm(r * power.entries())});
  }
  return table;
}

double log_log_slope(const std::vector<RayPoint>& table) {
  std::vector<double> x, y;
  for (const auto& p : table) {
    x.push_back(std::log(p.modulus));
    y.push_back(std::log(p.value));
  }
  return fit_line(x, y).slope;
}

DecayFit decay_estimate(const Operator& op, const std::vector<double>& t_grid) {
  if (t_grid.size() < 4) throw UsageError("decay_estimate: need at least 4 time points");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > 0.0)) throw UsageError("decay_estimate: times must be positive");
    if (i > 0 && !(t_grid[i] > t_grid[i - 1])) throw UsageError("decay_estimate: times must be strictly increasing");
  }
  const std::size_t start = t_grid.size() / 2;
  std::vector<double> ts, logs;
  for (std::size_t i = start; i < t_grid.size(); ++i) {
    ts.push_back(t_grid[i]);
    logs.push_back(std::log(spectral_norm(semigroup_apply(op, t_grid[i]).entries())));
  }
  const LineFit fit = fit_line(ts, logs);
  return DecayFit{std::exp(fit.intercept), -fit.slope};
}

}  // namespace bstab
