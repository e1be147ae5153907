#include "bstab/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

namespace bstab {

namespace {

constexpr double kClusterTol = 1e-6;
constexpr double kPlacementTol = 1e-6;

std::vector<int> cluster_unstable(const SpectralData& sd) {
  const int n = sd.unstable_count;
  std::vector<int> group(static_cast<std::size_t>(n), -1);
  int next = 0;
  for (int i = 0; i < n; ++i) {
    if (group[static_cast<std::size_t>(i)] >= 0) continue;
    group[static_cast<std::size_t>(i)] = next;
    for (int j = i + 1; j < n; ++j) {
      const double scale = std::max(1.0, std::abs(sd.eigenvalues(i)));
      if (group[static_cast<std::size_t>(j)] < 0 && std::abs(sd.eigenvalues(i) - sd.eigenvalues(j)) <= kClusterTol * scale)
        group[static_cast<std::size_t>(j)] = next;
    }
    ++next;
  }
  return group;
}

std::vector<Eigen::Index> members(const std::vector<int>& group, int id) {
  std::vector<Eigen::Index> out;
  for (std::size_t i = 0; i < group.size(); ++i)
    if (group[i] == id) out.push_back(static_cast<Eigen::Index>(i));
  return out;
}

CMatrix take_rows(const CMatrix& m, const std::vector<Eigen::Index>& rows) {
  CMatrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = m.row(rows[r]);
  return out;
}

// Row-rank margin of a (g x m) block: its g-th singular value, zero when the
// block has fewer columns than rows.
double row_rank_margin(const CMatrix& block) {
  if (block.cols() < block.rows()) return 0.0;
  return smallest_singular_value(block);
}

void fill_margins(ReducedPair& rp) {
  rp.hautus_margins.assign(static_cast<std::size_t>(rp.size()), 0.0);
  const int groups = rp.group.empty() ? 0 : *std::max_element(rp.group.begin(), rp.group.end()) + 1;
  for (int g = 0; g < groups; ++g) {
    const auto rows = members(rp.group, g);
    const double margin = row_rank_margin(take_rows(rp.b_n, rows));
    for (auto r : rows) rp.hautus_margins[static_cast<std::size_t>(r)] = margin;
  }
}

void make_real_if_negligible(CMatrix& m) {
  if (m.size() == 0) return;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (m.imag().cwiseAbs().maxCoeff() <= 1e-10 * scale) m = m.real().cast<Complex>();
}

bool conjugate_closed(const std::vector<Complex>& values) {
  for (const Complex& z : values) {
    if (std::abs(z.imag()) <= 1e-12 * std::max(1.0, std::abs(z))) continue;
    const bool found = std::any_of(values.begin(), values.end(), [&](Complex w) {
      return std::abs(w - std::conj(z)) <= 1e-10 * std::max(1.0, std::abs(z));
    });
    if (!found) return false;
  }
  return true;
}

}  // namespace

std::string RankReport::summary() const {
  std::ostringstream out;
  out << (pass ? "PASS" : "FAIL") << " (tol " << tol << ")\n";
  out << "k,eigenvalue,hautus_margin,status\n";
  for (std::size_t i = 0; i < margins.size(); ++i)
    out << (i + 1) << ',' << format_complex(eigenvalues[i]) << ',' << margins[i] << ','
        << (margins[i] > tol ? "ok" : "deficient") << '\n';
  return out.str();
}

Operator unstable_projection(const SpectralData& sd) {
  const Eigen::Index n = sd.dim();
  const Eigen::Index nu = sd.unstable_count;
  if (nu == 0) return Operator::zero(n, "P_0");
  if (sd.cond_estimate > kConditioningLimit)
    throw NumericalError("unstable_projection: eigenbasis condition " + std::to_string(sd.cond_estimate) +
                         " too large");
  CMatrix p = sd.right_vectors.leftCols(nu) * sd.left_vectors.leftCols(nu).adjoint();
  return Operator(std::move(p), "P_" + std::to_string(nu));
}

ReducedPair reduce_input(const SpectralData& sd, const CMatrix& input_matrix) {
  if (sd.unstable_count < 1) throw UsageError("reduce: no unstable eigenvalues");
  if (input_matrix.rows() != sd.dim()) throw UsageError("reduce: input matrix rows do not match the state dimension");
  const Eigen::Index nu = sd.unstable_count;
  ReducedPair rp;
  rp.lambda_n = sd.eigenvalues.head(nu).asDiagonal().toDenseMatrix();
  rp.b_n = sd.left_vectors.leftCols(nu).adjoint() * input_matrix;
  rp.group = cluster_unstable(sd);
  fill_margins(rp);
  return rp;
}

ReducedPair reduce(const SpectralData& sd, const Operator& oseen, const GreenMap& green) {
  if (green.state_dim() != oseen.dim()) throw UsageError("reduce: green map does not match the operator dimension");
  return reduce_input(sd, oseen.entries() * green.entries());
}

ReducedPair with_profiles(const ReducedPair& rp, const CMatrix& profiles) {
  if (profiles.rows() != rp.b_n.cols()) throw UsageError("with_profiles: profile length does not match the inputs");
  ReducedPair out = rp;
  out.b_n = rp.b_n * profiles;
  fill_margins(out);
  return out;
}

RankReport rank_check(const std::vector<Complex>& eigenvalues, const std::vector<double>& margins, double tol) {
  if (eigenvalues.size() != margins.size()) throw UsageError("rank_check: one margin per eigenvalue required");
  RankReport report;
  report.eigenvalues = eigenvalues;
  report.margins = margins;
  report.tol = tol;
  report.pass = true;
  for (std::size_t i = 0; i < margins.size(); ++i) {
    if (!(margins[i] > tol)) {
      report.pass = false;
      report.first_failing = static_cast<int>(i) + 1;
      break;
    }
  }
  return report;
}

RankReport rank_check(const ReducedPair& rp, double tol) {
  std::vector<Complex> ev;
  for (Eigen::Index i = 0; i < rp.size(); ++i) ev.push_back(rp.eigenvalue(i));
  return rank_check(ev, rp.hautus_margins, tol);
}

std::vector<double> masked_observability_margins(const SpectralData& sd, const std::vector<bool>& mask,
                                                 const RVector& weights) {
  const Eigen::Index n = sd.dim();
  if (static_cast<Eigen::Index>(mask.size()) != n || weights.size() != n)
    throw UsageError("masked_observability_margins: mask/weights length must equal the state dimension");
  const auto group = cluster_unstable(sd);
  std::vector<double> out(group.size(), 0.0);
  const int groups = group.empty() ? 0 : *std::max_element(group.begin(), group.end()) + 1;
  RVector mw(n);
  for (Eigen::Index i = 0; i < n; ++i) mw(i) = mask[static_cast<std::size_t>(i)] ? weights(i) : 0.0;
  for (int g = 0; g < groups; ++g) {
    const auto idx = members(group, g);
    CMatrix psi(n, static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) psi.col(static_cast<Eigen::Index>(c)) = sd.left_vectors.col(idx[c]);
    const CMatrix gram = psi.adjoint() * mw.asDiagonal() * psi;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(gram);
    const double margin = std::sqrt(std::max(0.0, es.eigenvalues().minCoeff()));
    for (auto i : idx) out[static_cast<std::size_t>(i)] = margin;
  }
  return out;
}

int choose_K(const SpectralData& sd, double tol) {
  if (sd.unstable_count < 1) return 0;
  const auto group = cluster_unstable(sd);
  const int groups = *std::max_element(group.begin(), group.end()) + 1;
  int best = 1;
  for (int g = 0; g < groups; ++g) {
    const auto idx = members(group, g);
    CMatrix v(sd.dim(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) v.col(static_cast<Eigen::Index>(c)) = sd.right_vectors.col(idx[c]);
    Eigen::JacobiSVD<CMatrix> svd(v);
    const RVector s = svd.singularValues();
    int rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
      if (s(i) > tol * s(0)) ++rank;
    best = std::max(best, rank);
  }
  return best;
}

std::vector<Complex> default_targets(const SpectralData& sd) {
  const auto next = sd.first_stable_real_part();
  const double base = next ? std::abs(*next) : 0.0;
  std::vector<Complex> targets;
  for (int i = 1; i <= sd.unstable_count; ++i) targets.emplace_back(-base - i, 0.0);
  return targets;
}

CMatrix place_poles(const ReducedPair& rp, const std::vector<Complex>& targets, bool require_conjugate_closed) {
  const Eigen::Index nu = rp.size();
  const Eigen::Index channels = rp.b_n.cols();
  if (static_cast<Eigen::Index>(targets.size()) != nu)
    throw UsageError("place_poles: " + std::to_string(targets.size()) + " targets for " + std::to_string(nu) +
                     " unstable eigenvalues");
  for (const Complex& t : targets)
    if (!(t.real() < 0.0)) throw UsageError("place_poles: target " + format_complex(t) + " is not in the open left half-plane");
  if (require_conjugate_closed && !conjugate_closed(targets))
    throw UsageError("place_poles: targets must be closed under conjugation for a real model");
  if (channels < 1) throw UsageError("place_poles: no input channels");

  const double scale = std::max(1.0, rp.b_n.cwiseAbs().maxCoeff());
  bool distinct = true;
  for (std::size_t g = 0; g < rp.group.size(); ++g)
    if (std::count(rp.group.begin(), rp.group.end(), rp.group[g]) > 1) distinct = false;

  CMatrix gain = CMatrix::Zero(channels, nu);
  if (channels == 1 && distinct) {
    // Modal Ackermann formula for a diagonal single-input pair:
    // b_i k_i = prod_j (lambda_i - t_j) / prod_{j != i} (lambda_i - lambda_j).
    for (Eigen::Index i = 0; i < nu; ++i) {
      const Complex li = rp.eigenvalue(i);
      if (std::abs(rp.b_n(i, 0)) <= 1e-12 * scale)
        throw SynthesisFailure("place_poles: eigenvalue " + format_complex(li) + " (index " + std::to_string(i + 1) +
                               ") is not reachable from the input");
      Complex num{1.0, 0.0}, den{1.0, 0.0};
      for (Eigen::Index j = 0; j < nu; ++j) {
        num *= li - targets[static_cast<std::size_t>(j)];
        if (j != i) den *= li - rp.eigenvalue(j);
      }
      gain(0, i) = num / (den * rp.b_n(i, 0));
    }
  } else {
    // Successive rank-one deflation: move one eigenvalue at a time along its
    // left eigenvector, leaving the rest of the spectrum in place.
    CMatrix closed = rp.lambda_n;
    for (Eigen::Index j = 0; j < nu; ++j) {
      const Complex lambda = rp.eigenvalue(j);
      CMatrix shifted = closed;
      shifted.diagonal().array() -= lambda;
      Eigen::JacobiSVD<CMatrix> svd(shifted, Eigen::ComputeFullU);
      const CVector w = svd.matrixU().col(nu - 1);
      const Eigen::RowVectorXcd reach = w.adjoint() * rp.b_n;
      Eigen::Index k = 0;
      const double best = reach.cwiseAbs().maxCoeff(&k);
      if (best <= 1e-12 * scale)
        throw SynthesisFailure("place_poles: eigenvalue " + format_complex(lambda) + " (index " +
                               std::to_string(j + 1) + ") is not reachable from any input");
      const Complex c = (lambda - targets[static_cast<std::size_t>(j)]) / reach(k);
      const Eigen::RowVectorXcd row = c * w.adjoint();
      closed -= rp.b_n.col(k) * row;
      gain.row(k) += row;
    }
  }

  const CMatrix closed = rp.lambda_n - rp.b_n * gain;
  const CVector achieved = eigenvalues(closed);
  std::vector<Complex> got(achieved.data(), achieved.data() + achieved.size());
  const double miss = matching_distance(got, targets);
  double tscale = 1.0;
  for (const Complex& t : targets) tscale = std::max(tscale, std::abs(t));
  if (miss > kPlacementTol * tscale)
    throw SynthesisFailure("place_poles: achieved spectrum misses the targets by " + std::to_string(miss));
  return gain;
}

FeedbackLaw build_feedback(const ReducedPair& rp, const CMatrix& gain, const SpectralData& sd, const FeedbackSpec& spec) {
  const Eigen::Index n = sd.dim();
  const Eigen::Index nu = rp.size();
  if (gain.cols() != nu) throw UsageError("build_feedback: gain has the wrong number of columns");
  if (spec.profiles.cols() != gain.rows())
    throw UsageError("build_feedback: one profile per gain row required");

  FeedbackLaw law;
  law.mode = spec.mode;
  law.gain = gain;
  law.profiles = spec.profiles;
  law.weights = spec.weights.size() == n ? spec.weights : RVector::Ones(n);
  law.omega_mask = spec.omega_mask.empty() ? std::vector<bool>(static_cast<std::size_t>(n), false) : spec.omega_mask;
  if (static_cast<Eigen::Index>(law.omega_mask.size()) != n) throw UsageError("build_feedback: mask length mismatch");

  const CMatrix left_n = sd.left_vectors.leftCols(nu);
  if (spec.mode == FeedbackMode::spectral) {
    law.spectral_functionals = left_n * gain.adjoint();
    law.observation_vectors = CMatrix::Zero(n, gain.rows());
  } else {
    CMatrix psi = left_n;
    bool any = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (law.omega_mask[static_cast<std::size_t>(i)])
        any = true;
      else
        psi.row(i).setZero();
    }
    if (!any) throw SynthesisFailure("build_feedback: observation mask is empty (masked Gramian condition inf)");
    // Masked Gramian M_ji = <phi_i, m psi_j>_{L2}.
    const CMatrix gram = psi.adjoint() * law.weights.asDiagonal() * sd.right_vectors.leftCols(nu);
    const double cond = condition_number(gram);
    if (!std::isfinite(cond) || cond > kConditioningLimit)
      throw SynthesisFailure("build_feedback: masked observation Gramian is singular (condition " +
                             std::to_string(cond) + ")");
    const CMatrix m_inv_h = Eigen::FullPivLU<CMatrix>(gram).inverse().adjoint();
    law.observation_vectors = psi * m_inv_h * gain.adjoint();
    for (Eigen::Index i = 0; i < n; ++i)
      if (!law.omega_mask[static_cast<std::size_t>(i)]) law.observation_vectors.row(i).setZero();
    law.spectral_functionals = CMatrix::Zero(n, gain.rows());
  }

  if (spec.real_model) {
    law.realize();
    const double scale = std::max(1.0, law.as_matrix.cwiseAbs().maxCoeff());
    if (law.as_matrix.imag().cwiseAbs().maxCoeff() <= 1e-10 * scale) {
      make_real_if_negligible(law.spectral_functionals);
      make_real_if_negligible(law.observation_vectors);
      make_real_if_negligible(law.profiles);
    }
  }
  law.realize();
  law.check_invariants();
  return law;
}

CMatrix default_profiles(Eigen::Index inputs, int K, const std::vector<double>& boundary_weights) {
  if (inputs < 1 || K < 1) throw UsageError("default_profiles: need at least one input and one profile");
  CMatrix g = CMatrix::Zero(inputs, K);
  for (int k = 0; k < K; ++k) {
    const Eigen::Index j = k % inputs;
    const double w = boundary_weights.empty() ? 1.0 : boundary_weights[static_cast<std::size_t>(j)];
    g(j, k) = w;
  }
  return g;
}

}  // namespace bstab
