#include "bstab/verify.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace bstab {

const CheckResult* VerificationReport::first_failure() const {
  for (const auto& c : checks)
    if (!c.pass) return &c;
  return nullptr;
}

void VerificationReport::add(CheckResult c) {
  checks.push_back(std::move(c));
  pass = first_failure() == nullptr;
}

std::vector<Complex> resolvent_sample_points(const ClosedLoop& cl, int count, std::uint64_t seed) {
  const CVector open = eigenvalues(cl.oseen.entries());
  const CVector closed = eigenvalues(cl.composed.entries());
  const double radius = std::max({1.0, open.cwiseAbs().maxCoeff(), closed.cwiseAbs().maxCoeff()});
  // Sample in a box scaled to the low end of the spectrum; the top of the
  // spectrum of a discretized Laplacian is not where the identity is tested.
  const double box = std::min(radius, 50.0);
  std::mt19937_64 gen(seed);
  auto uniform = [&gen] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
  std::vector<Complex> out;
  while (static_cast<int>(out.size()) < count) {
    const Complex z{box * (2.0 * uniform() - 1.0), box * (2.0 * uniform() - 1.0)};
    double gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < open.size(); ++i) gap = std::min(gap, std::abs(z - open(i)));
    for (Eigen::Index i = 0; i < closed.size(); ++i) gap = std::min(gap, std::abs(z - closed(i)));
    if (gap > 0.1) out.push_back(z);
  }
  return out;
}

VerificationReport verify_loop(const ClosedLoop& cl, const VerifyOptions& opt) {
  VerificationReport rep;
  rep.model = cl.model;
  rep.pass = true;
  rep.abscissa = spectral_abscissa(cl.composed.entries());

  {
    std::ostringstream d;
    d << "max Re lambda(A_F) = " << rep.abscissa;
    bool ok = rep.abscissa < 0.0;
    if (opt.rate_window) {
      ok = ok && rep.abscissa > opt.rate_window->first && rep.abscissa < opt.rate_window->second;
      d << ", window (" << opt.rate_window->first << ", " << opt.rate_window->second << ")";
    }
    rep.add({"spectral_abscissa", ok, rep.abscissa, d.str()});
  }

  rep.decay = decay_estimate(cl.composed, opt.decay_t_grid);
  {
    const double margin = opt.target_margin ? *opt.target_margin : -rep.abscissa;
    std::ostringstream d;
    d << "fitted M = " << rep.decay.M << ", delta = " << rep.decay.delta;
    bool ok = rep.decay.delta > 0.0 && rep.decay.delta >= opt.decay_fraction * margin;
    d << ", required delta >= " << opt.decay_fraction * margin;
    if (opt.rate_window) {
      const double rate = -rep.decay.delta;
      ok = ok && rate > opt.rate_window->first && rate < opt.rate_window->second;
      d << ", -delta in window";
    }
    rep.add({"decay", ok, rep.decay.delta, d.str()});
  }

  if (opt.run_maxreg) {
    const SpectralData sd = spectrum(cl.composed);
    const auto forcings =
        default_forcing_set(sd, opt.random_forcings, opt.seed, opt.cell_width, opt.T_grid.back());
    try {
      rep.scans = plateau_scan(cl.composed, opt.p_list, opt.T_grid, forcings, opt.maxreg);
      for (const auto& s : rep.scans) {
        std::ostringstream name, d;
        name << "maxreg_p" << s.p;
        d << "verdict " << to_string(s.verdict) << ", C(T_last) = " << s.C_estimates.back();
        rep.add({name.str(), s.verdict == Verdict::plateau, s.C_estimates.back(), d.str()});
      }
    } catch (const NumericalError& e) {
      rep.add({"maxreg", false, std::numeric_limits<double>::infinity(), e.what()});
    }
  }

  double sup = std::numeric_limits<double>::infinity();
  try {
    sup = imaginary_axis_bound(cl.composed, opt.imag_grid);
    rep.add({"imaginary_axis", std::isfinite(sup), sup, "sup ||t R(it, A_F)||"});
  } catch (const SingularityError& e) {
    rep.add({"imaginary_axis", false, sup, e.what()});
  }
  for (auto& s : rep.scans) s.imag_axis_sup = sup;

  if (opt.identity_checks) {
    const double comp = composition_residual(cl);
    rep.add({"composition_residual", comp <= 1e-12, comp, "A_F vs Oseen(I - GF) + B"});
    try {
      const AdjointTerms terms = adjoint_decomposition(cl);
      rep.add({"adjoint_residual", terms.relative_residual <= 1e-8, terms.relative_residual,
               "fractional-power adjoint decomposition"});
    } catch (const NumericalError& e) {
      rep.add({"adjoint_residual", false, std::numeric_limits<double>::infinity(), e.what()});
    }
    double worst = 0.0;
    std::string detail = "max over sampled lambda";
    try {
      for (const Complex& z : resolvent_sample_points(cl, opt.resolvent_samples, opt.seed))
        worst = std::max(worst, resolvent_perturbation_residual(cl, z));
    } catch (const NumericalError& e) {
      worst = std::numeric_limits<double>::infinity();
      detail = e.what();
    }
    rep.add({"resolvent_residual", worst <= 1e-8, worst, detail});
  }
  return rep;
}

}  // namespace bstab
