#include "bstab/maxreg.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>

#include <Eigen/LU>
#include <unsupported/Eigen/MatrixFunctions>

namespace bstab {

namespace {

// Running sum of w_i |v_i|^p kept as scale^p * sum to survive the
// astronomically large norms produced by unstable generators.
class LpAccumulator {
 public:
  explicit LpAccumulator(double p = 2.0) : p_(p) {}

  void add(double weight, double value) {
    if (value == 0.0 || weight == 0.0) return;
    if (value > scale_) {
      sum_ *= std::pow(scale_ / value, p_);
      scale_ = value;
    }
    sum_ += weight * std::pow(value / scale_, p_);
  }

  [[nodiscard]] double log_norm() const {
    if (sum_ == 0.0) return -std::numeric_limits<double>::infinity();
    return std::log(scale_) + std::log(sum_) / p_;
  }

 private:
  double p_;
  double scale_ = 0.0;
  double sum_ = 0.0;
};

struct QuotientAccumulator {
  LpAccumulator yt, ay, f;
  explicit QuotientAccumulator(double p = 2.0) : yt(p), ay(p), f(p) {}

  [[nodiscard]] double ratio() const {
    const double lf = f.log_norm();
    if (!std::isfinite(lf)) throw UsageError("maxreg: forcing has zero L^p norm on the horizon");
    return std::exp(yt.log_norm() - lf) + std::exp(ay.log_norm() - lf);
  }
};

// One pass over the horizon with s substeps per forcing cell; fills fine
// (every node) and coarse (every other node) ratios per [p][T].
struct PassResult {
  std::vector<std::vector<double>> fine;
  std::vector<std::vector<double>> coarse;
};

PassResult integrate_pass(const CMatrix& a, const ForcingSignal& f, const std::vector<double>& p_list,
                          const std::vector<double>& T_list, long substeps) {
  const Eigen::Index n = a.rows();
  const double h = f.cell_width / static_cast<double>(substeps);
  const CellIntegrals ci = cell_integrals(a, h);

  std::vector<long> stop_nodes;
  for (double T : T_list) {
    const double nodes = T / h;
    const long k = std::lround(nodes);
    if (std::abs(nodes - static_cast<double>(k)) > 1e-7 * std::max(1.0, nodes))
      throw UsageError("maxreg: horizon T = " + std::to_string(T) + " is not a multiple of the forcing cell width");
    stop_nodes.push_back(k);
  }
  const long last_node = *std::max_element(stop_nodes.begin(), stop_nodes.end());

  const std::size_t np = p_list.size();
  std::vector<QuotientAccumulator> fine, coarse;
  for (double p : p_list) {
    fine.emplace_back(p);
    coarse.emplace_back(p);
  }
  PassResult out;
  out.fine.assign(np, std::vector<double>(T_list.size(), 0.0));
  out.coarse = out.fine;

  CVector y = CVector::Zero(n), ay = CVector::Zero(n), y_next(n), phif(n), yt(n);
  long node = 0;
  double yt_left = 0.0, ay_left = 0.0;
  double yt_coarse_left = 0.0, ay_coarse_left = 0.0;
  while (node < last_node) {
    const Eigen::Index cell = static_cast<Eigen::Index>(node / substeps);
    const auto fc = f.values.col(cell);
    const double fnorm = fc.norm();
    phif.noalias() = ci.phi1 * fc;
    if (node % substeps == 0) {
      // Right limits at the start of the cell.
      yt = ay + fc;
      yt_left = yt.norm();
      ay_left = ay.norm();
      yt_coarse_left = yt_left;
      ay_coarse_left = ay_left;
    }
    y_next.noalias() = ci.propagator * y;
    y_next += phif;
    y.swap(y_next);
    ay.noalias() = a * y;
    yt = ay + fc;
    const double yt_right = yt.norm();
    const double ay_right = ay.norm();
    if (!std::isfinite(yt_right) || !std::isfinite(ay_right))
      throw NumericalError("maxreg: trajectory overflowed at t = " + std::to_string(static_cast<double>(node + 1) * h));
    ++node;

    for (std::size_t ip = 0; ip < np; ++ip) {
      auto& acc = fine[ip];
      acc.yt.add(0.5 * h, yt_left);
      acc.yt.add(0.5 * h, yt_right);
      acc.ay.add(0.5 * h, ay_left);
      acc.ay.add(0.5 * h, ay_right);
      acc.f.add(h, fnorm);
      if (node % 2 == 0) {
        auto& c = coarse[ip];
        c.yt.add(h, yt_coarse_left);
        c.yt.add(h, yt_right);
        c.ay.add(h, ay_coarse_left);
        c.ay.add(h, ay_right);
        c.f.add(2.0 * h, fnorm);
      }
    }
    yt_left = yt_right;
    ay_left = ay_right;
    if (node % 2 == 0) {
      yt_coarse_left = yt_right;
      ay_coarse_left = ay_right;
    }
    for (std::size_t it = 0; it < stop_nodes.size(); ++it) {
      if (stop_nodes[it] != node) continue;
      for (std::size_t ip = 0; ip < np; ++ip) {
        out.fine[ip][it] = fine[ip].ratio();
        out.coarse[ip][it] = coarse[ip].ratio();
      }
    }
  }
  return out;
}

template <typename Task>
void run_parallel(std::size_t count, int workers, Task task) {
  const int threads = std::max(1, std::min<int>(workers, static_cast<int>(count)));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < count; i = next++) task(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

double dual_exponent(double p) { return p / (p - 1.0); }

}  // namespace

std::string to_string(ForcingKind kind) {
  switch (kind) {
    case ForcingKind::piecewise_constant_random: return "piecewise_constant_random";
    case ForcingKind::single_mode: return "single_mode";
    case ForcingKind::constant: return "constant";
  }
  return "unknown";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::plateau: return "plateau";
    case Verdict::growth: return "growth";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

ForcingSignal ForcingSignal::extended(double new_horizon) const {
  const auto cells = static_cast<Eigen::Index>(std::llround(new_horizon / cell_width));
  if (cells < values.cols()) throw UsageError("ForcingSignal::extended: new horizon is shorter");
  ForcingSignal out = *this;
  out.values = CMatrix::Zero(values.rows(), cells);
  out.values.leftCols(values.cols()) = values;
  return out;
}

ForcingSignal ForcingSignal::conjugated() const {
  ForcingSignal out = *this;
  out.values = values.conjugate();
  return out;
}

namespace {

Eigen::Index cell_count(double cell_width, double horizon) {
  if (!(cell_width > 0.0) || !(horizon > 0.0)) throw UsageError("ForcingSignal: cell width and horizon must be positive");
  const double cells = horizon / cell_width;
  const auto k = static_cast<Eigen::Index>(std::llround(cells));
  if (k < 1 || std::abs(cells - static_cast<double>(k)) > 1e-9 * std::max(1.0, cells))
    throw UsageError("ForcingSignal: horizon must be a positive multiple of the cell width");
  return k;
}

}  // namespace

ForcingSignal ForcingSignal::constant(const CVector& value, double cell_width, double horizon) {
  if (value.norm() == 0.0) throw UsageError("ForcingSignal: forcing must be nonzero");
  ForcingSignal f;
  f.kind = ForcingKind::constant;
  f.cell_width = cell_width;
  f.values = value.replicate(1, cell_count(cell_width, horizon));
  return f;
}

ForcingSignal ForcingSignal::single_mode(const SpectralData& spectral, int index, double cell_width, double horizon) {
  if (index < 0 || index >= spectral.dim()) throw UsageError("ForcingSignal: mode index out of range");
  ForcingSignal f = constant(spectral.right_vectors.col(index), cell_width, horizon);
  f.kind = ForcingKind::single_mode;
  f.mode_index = index;
  return f;
}

ForcingSignal ForcingSignal::random(Eigen::Index dim, double cell_width, double horizon, std::uint64_t seed) {
  ForcingSignal f;
  f.kind = ForcingKind::piecewise_constant_random;
  f.cell_width = cell_width;
  f.seed = seed;
  const Eigen::Index cells = cell_count(cell_width, horizon);
  f.values.resize(dim, cells);
  std::mt19937_64 gen(seed);
  for (Eigen::Index j = 0; j < cells; ++j)
    for (Eigen::Index i = 0; i < dim; ++i) {
      // 53 random bits mapped to [-1, 1]; independent of the library's
      // distribution implementations.
      const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
      f.values(i, j) = Complex{2.0 * u - 1.0, 0.0};
    }
  return f;
}

std::vector<ForcingSignal> default_forcing_set(const SpectralData& spectral, int random_count, std::uint64_t seed,
                                               double cell_width, double horizon) {
  std::vector<ForcingSignal> out;
  for (int k = 0; k < random_count; ++k)
    out.push_back(ForcingSignal::random(spectral.dim(), cell_width, horizon, seed + static_cast<std::uint64_t>(k)));
  for (int i = 0; i < spectral.dim(); ++i) out.push_back(ForcingSignal::single_mode(spectral, i, cell_width, horizon));
  return out;
}

double max_admissible_step(const Operator& op) {
  const CVector ev = eigenvalues(op.entries());
  const double rho = ev.cwiseAbs().maxCoeff();
  return rho > 0.0 ? 0.1 / rho : std::numeric_limits<double>::infinity();
}

CellIntegrals cell_integrals(const CMatrix& a, double h) {
  const Eigen::Index n = a.rows();
  CMatrix aug = CMatrix::Zero(3 * n, 3 * n);
  aug.topLeftCorner(n, n) = a * h;
  aug.block(0, n, n, n).diagonal().setConstant(h);
  aug.block(n, 2 * n, n, n).diagonal().setConstant(h);
  // exp of h*[[A, I, 0], [0, 0, I], [0, 0, 0]]: blocks e^{Ah}, int e^{As} ds, int int.
  const CMatrix e = aug.exp();
  if (!all_finite(e)) throw NumericalError("cell_integrals: exponential overflowed");
  CellIntegrals ci;
  ci.propagator = e.topLeftCorner(n, n);
  ci.phi1 = e.block(0, n, n, n);
  ci.phi2 = e.block(0, 2 * n, n, n);
  return ci;
}

Trajectory solution_map(const Operator& generator, const ForcingSignal& f, const SolveOptions& options) {
  const CMatrix& a = generator.entries();
  if (f.dim() != generator.dim()) throw UsageError("solution_map: forcing dimension does not match the generator");
  const double h_max = max_admissible_step(generator);
  double step = options.step;
  if (step <= 0.0) {
    const double s = std::ceil(f.cell_width / std::min(h_max, f.cell_width) - 1e-12);
    step = f.cell_width / s;
  } else if (step > h_max * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "solution_map: step " << step << " does not resolve the fastest mode; required step <= " << h_max;
    throw NumericalError(msg.str());
  }
  const double per_cell = f.cell_width / step;
  const long substeps = std::lround(per_cell);
  if (std::abs(per_cell - static_cast<double>(substeps)) > 1e-9 * per_cell)
    throw UsageError("solution_map: step must divide the forcing cell width");

  const CellIntegrals ci = cell_integrals(a, step);
  const long nodes = static_cast<long>(f.values.cols()) * substeps;
  Trajectory tr;
  tr.times.resize(static_cast<std::size_t>(nodes + 1));
  tr.states.resize(a.rows(), nodes + 1);
  tr.states.col(0).setZero();
  tr.times[0] = 0.0;
  CVector y = CVector::Zero(a.rows());
  for (long k = 0; k < nodes; ++k) {
    const auto fc = f.values.col(static_cast<Eigen::Index>(k / substeps));
    y = ci.propagator * y + ci.phi1 * fc;
    tr.states.col(k + 1) = y;
    tr.times[static_cast<std::size_t>(k + 1)] = static_cast<double>(k + 1) * step;
  }
  if (!all_finite(tr.states)) throw NumericalError("solution_map: trajectory overflowed");
  return tr;
}

Trajectory solution_map(const ClosedLoop& cl, const ForcingSignal& f, const SolveOptions& options) {
  return solution_map(cl.composed, f, options);
}

std::vector<std::vector<double>> maxreg_ratios(const Operator& generator, const ForcingSignal& f,
                                               const std::vector<double>& p_list, const std::vector<double>& T_list,
                                               const MaxRegOptions& options) {
  if (p_list.empty() || T_list.empty()) throw UsageError("maxreg: empty p or T list");
  for (double p : p_list)
    if (!(p > 1.0) || !std::isfinite(p)) throw UsageError("maxreg: p must lie in (1, inf)");
  if (f.dim() != generator.dim()) throw UsageError("maxreg: forcing dimension does not match the generator");
  if (f.values.norm() == 0.0) throw UsageError("maxreg: zero forcing");
  const double t_min = *std::min_element(T_list.begin(), T_list.end());
  const double t_max = *std::max_element(T_list.begin(), T_list.end());
  if (!(t_min > 0.0)) throw UsageError("maxreg: horizons must be positive");
  if (t_max > f.horizon() * (1.0 + 1e-12)) throw UsageError("maxreg: forcing horizon shorter than T");

  const double h = std::min({max_admissible_step(generator), f.cell_width, t_min / options.min_nodes});
  long substeps = static_cast<long>(std::ceil(f.cell_width / h - 1e-12));
  if (substeps % 2 != 0) ++substeps;

  PassResult pass;
  for (int attempt = 0;; ++attempt) {
    pass = integrate_pass(generator.entries(), f, p_list, T_list, substeps);
    double worst = 0.0;
    for (std::size_t i = 0; i < p_list.size(); ++i)
      for (std::size_t j = 0; j < T_list.size(); ++j)
        worst = std::max(worst, std::abs(pass.fine[i][j] - pass.coarse[i][j]) / pass.fine[i][j]);
    if (worst < options.refine_tol || attempt >= options.max_refinements) break;
    substeps *= 2;
  }
  return pass.fine;
}

double maxreg_constant(const ClosedLoop& cl, double p, double T, const std::vector<ForcingSignal>& forcing_set,
                       const MaxRegOptions& options) {
  if (forcing_set.empty()) throw UsageError("maxreg_constant: empty forcing set");
  std::vector<double> ratios(forcing_set.size());
  run_parallel(forcing_set.size(), options.parallel, [&](std::size_t i) {
    ratios[i] = maxreg_ratios(cl.composed, forcing_set[i], {p}, {T}, options)[0][0];
  });
  return *std::max_element(ratios.begin(), ratios.end());
}

Verdict classify(const std::vector<double>& c) {
  if (c.size() < 2) return Verdict::inconclusive;
  const double last = c[c.size() - 1], prev = c[c.size() - 2];
  if (std::abs(last - prev) / prev < kPlateauRelTol) return Verdict::plateau;
  bool growth = true;
  for (std::size_t i = 1; i < c.size(); ++i)
    if (!(std::log(c[i]) - std::log(c[i - 1]) > kGrowthLogStep)) growth = false;
  return growth ? Verdict::growth : Verdict::inconclusive;
}

std::vector<MaxRegReport> plateau_scan(const Operator& generator, const std::vector<double>& p_list,
                                       const std::vector<double>& T_grid, const std::vector<ForcingSignal>& forcing_set,
                                       const MaxRegOptions& options) {
  if (T_grid.size() < 3) throw UsageError("plateau_scan: need at least 3 horizons");
  for (std::size_t i = 1; i < T_grid.size(); ++i)
    if (!(T_grid[i] > T_grid[i - 1])) throw UsageError("plateau_scan: horizons must increase");
  if (forcing_set.empty()) throw UsageError("plateau_scan: empty forcing set");

  std::vector<std::vector<std::vector<double>>> per_forcing(forcing_set.size());
  run_parallel(forcing_set.size(), options.parallel, [&](std::size_t i) {
    per_forcing[i] = maxreg_ratios(generator, forcing_set[i], p_list, T_grid, options);
  });

  std::vector<MaxRegReport> reports;
  for (std::size_t ip = 0; ip < p_list.size(); ++ip) {
    MaxRegReport r;
    r.p = p_list[ip];
    r.T_grid = T_grid;
    r.C_estimates.assign(T_grid.size(), 0.0);
    for (const auto& table : per_forcing)
      for (std::size_t it = 0; it < T_grid.size(); ++it) r.C_estimates[it] = std::max(r.C_estimates[it], table[ip][it]);
    r.verdict = classify(r.C_estimates);
    reports.push_back(std::move(r));
  }
  return reports;
}

MaxRegReport plateau_scan(const ClosedLoop& cl, double p, const std::vector<double>& T_grid,
                          const std::vector<ForcingSignal>& forcing_set, const MaxRegOptions& options) {
  return plateau_scan(cl.composed, std::vector<double>{p}, T_grid, forcing_set, options).front();
}

double imaginary_axis_bound(const Operator& generator, const std::vector<double>& t_grid) {
  if (t_grid.size() < 2) throw UsageError("imaginary_axis_bound: grid too small");
  const auto [lo, hi] = std::minmax_element(t_grid.begin(), t_grid.end());
  if (!(*lo > 0.0)) throw UsageError("imaginary_axis_bound: grid must be positive");
  if (*hi / *lo < 1e6 * (1.0 - 1e-9)) throw UsageError("imaginary_axis_bound: grid must span at least 6 decades");

  const CVector ev = eigenvalues(generator.entries());
  Eigen::Index imax = 0;
  ev.real().maxCoeff(&imax);
  if (ev(imax).real() >= 0.0)
    throw SingularityError("imaginary_axis_bound: eigenvalue " + format_complex(ev(imax)) +
                               " is not in the open left half-plane; the imaginary axis meets or borders the spectrum",
                           ev(imax));

  const Eigen::Index n = generator.dim();
  double sup = 0.0;
  for (double t : t_grid) {
    for (double s : {t, -t}) {
      CMatrix shifted = -generator.entries();
      shifted.diagonal().array() += Complex{0.0, s};
      const CMatrix r = Eigen::PartialPivLU<CMatrix>(shifted).solve(CMatrix::Identity(n, n));
      sup = std::max(sup, std::abs(s) * spectral_norm(r));
    }
  }
  return sup;
}

double imaginary_axis_bound(const ClosedLoop& cl, const std::vector<double>& t_grid) {
  return imaginary_axis_bound(cl.composed, t_grid);
}

std::vector<ForcingSignal> dual_forcing_set(const std::vector<ForcingSignal>& forcing_set,
                                            const SpectralData& adjoint_spectral) {
  std::vector<ForcingSignal> out;
  out.reserve(forcing_set.size());
  for (const auto& f : forcing_set) {
    if (f.kind == ForcingKind::single_mode)
      out.push_back(ForcingSignal::single_mode(adjoint_spectral, f.mode_index, f.cell_width, f.horizon()));
    else
      out.push_back(f.conjugated());
  }
  return out;
}

DualityResult duality_check(const Operator& generator, double p, const std::vector<double>& T_grid,
                            const std::vector<ForcingSignal>& forcing_set, const MaxRegOptions& options) {
  const std::vector<ForcingSignal> conj_set = dual_forcing_set(forcing_set, spectrum(generator.adjoint()));
  const MaxRegReport primal = plateau_scan(generator, std::vector<double>{p}, T_grid, forcing_set, options).front();
  const MaxRegReport dual =
      plateau_scan(generator.adjoint(), std::vector<double>{dual_exponent(p)}, T_grid, conj_set, options).front();
  DualityResult out;
  out.gap = std::abs(std::log(primal.C_estimates.back()) - std::log(dual.C_estimates.back()));
  out.primal = primal.verdict;
  out.dual = dual.verdict;
  return out;
}

DualityResult duality_check(const ClosedLoop& cl, double p, const std::vector<double>& T_grid,
                            const std::vector<ForcingSignal>& forcing_set, const MaxRegOptions& options) {
  return duality_check(cl.composed, p, T_grid, forcing_set, options);
}

}  // namespace bstab
