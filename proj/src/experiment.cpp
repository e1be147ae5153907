#include "bstab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include <Eigen/Core>

#include "bstab/matrix_io.hpp"

namespace bstab {

namespace {

constexpr const char* kVersion = "1.0.0";

std::string csv_safe(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

ModelKind parse_model(const std::string& s, const ConfigFile& file) {
  if (s == "heat") return ModelKind::heat;
  if (s == "coupled") return ModelKind::coupled;
  if (s == "abstract") return ModelKind::abstract;
  throw ConfigError(file.source() + ": unknown model '" + s + "' (expected heat | coupled | abstract)");
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

void require_pair(const std::vector<double>& v, const std::string& key) {
  if (v.size() != 2) throw ConfigError(key + ": expected two comma-separated numbers");
}

std::string mode_label(const ExperimentConfig& cfg, const ModelLoop& ml) {
  if (!ml.synthesized) return "open_loop";
  return to_string(cfg.mode);
}

// Zero law when nothing is unstable; otherwise the generic pipeline on
// the input matrix oseen * G.
FeedbackLaw synthesize_abstract(const Operator& oseen, const GreenMap& green, const ExperimentConfig& cfg,
                                ModelLoop& ml) {
  ml.open_loop = spectrum(oseen);
  const int nu = ml.open_loop.unstable_count;
  if (nu == 0) {
    ml.rank = rank_check(std::vector<Complex>{}, std::vector<double>{});
    return FeedbackLaw::zero(oseen.dim(), green.input_dim());
  }
  const ReducedPair rp = reduce(ml.open_loop, oseen, green);
  ml.rank = rank_check(rp);
  if (!ml.rank.pass) throw SynthesisFailure("synthesize: Hautus rank check failed\n" + ml.rank.summary());
  ml.targets = cfg.targets ? *cfg.targets : default_targets(ml.open_loop);
  FeedbackSpec spec;
  spec.mode = FeedbackMode::spectral;
  spec.profiles = default_profiles(green.input_dim(), choose_K(ml.open_loop));
  spec.real_model = oseen.is_real() && green.entries().imag().cwiseAbs().maxCoeff() == 0.0;
  const ReducedPair restricted = with_profiles(rp, spec.profiles);
  const CMatrix gain = place_poles(restricted, ml.targets, spec.real_model);
  return build_feedback(restricted, gain, ml.open_loop, spec);
}

VerifyOptions verify_options(const ExperimentConfig& cfg, int parallel) {
  VerifyOptions o;
  o.decay_t_grid = linspace(cfg.decay_t[0], cfg.decay_t[1], 10);
  o.p_list = cfg.p_grid;
  o.T_grid = cfg.T_grid;
  o.random_forcings = cfg.forcings;
  o.seed = cfg.seed;
  o.cell_width = cfg.cell_width;
  o.maxreg.parallel = parallel;
  return o;
}

std::string manifest(const std::string& command, const ExperimentConfig& cfg, const std::filesystem::path& config_path) {
  std::ostringstream m;
  m << "command = " << command << "\n";
  m << "config = " << config_path.string() << "\n";
  m << "bstab_version = " << kVersion << "\n";
  m << "eigen_version = " << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION << "." << EIGEN_MINOR_VERSION << "\n";
  m << "compiler = " << __VERSION__ << "\n";
  m << "seed = " << cfg.seed << "\n";
  m << "forcings = " << cfg.forcings << "\n";
  m << "parallel = " << cfg.parallel << "\n";
  m << "\n# config echo\n" << cfg.config_text;
  if (!cfg.config_text.empty() && cfg.config_text.back() != '\n') m << "\n";
  return m.str();
}

std::string spectrum_csv(const SpectralData& sd) {
  std::ostringstream s;
  s << "k,re_lambda,im_lambda,unstable\n";
  for (Eigen::Index i = 0; i < sd.dim(); ++i)
    s << (i + 1) << ',' << format_number(sd.eigenvalues(i).real()) << ',' << format_number(sd.eigenvalues(i).imag())
      << ',' << (i < sd.unstable_count ? 1 : 0) << '\n';
  return s.str();
}

std::string hautus_csv(const RankReport& r) {
  std::ostringstream s;
  s << "k,re_lambda,im_lambda,hautus_margin,status\n";
  for (std::size_t i = 0; i < r.margins.size(); ++i)
    s << (i + 1) << ',' << format_number(r.eigenvalues[i].real()) << ',' << format_number(r.eigenvalues[i].imag())
      << ',' << format_number(r.margins[i]) << ',' << (r.margins[i] > r.tol ? "ok" : "deficient") << '\n';
  return s.str();
}

std::string maxreg_csv(const std::string& model, const std::string& mode, const std::vector<MaxRegReport>& scans) {
  std::ostringstream s;
  s << "model,mode,p,T,C_estimate,imag_sup,verdict\n";
  for (const auto& r : scans)
    for (std::size_t i = 0; i < r.T_grid.size(); ++i)
      s << model << ',' << mode << ',' << format_number(r.p) << ',' << format_number(r.T_grid[i]) << ','
        << format_number(r.C_estimates[i]) << ',' << format_number(r.imag_axis_sup) << ',' << to_string(r.verdict)
        << '\n';
  return s.str();
}

std::string verify_csv(const VerificationReport& rep) {
  std::ostringstream s;
  s << "check,pass,value,detail\n";
  for (const auto& c : rep.checks)
    s << c.name << ',' << (c.pass ? "PASS" : "FAIL") << ',' << format_number(c.value) << ',' << csv_safe(c.detail)
      << '\n';
  s << "overall," << (rep.pass ? "PASS" : "FAIL") << ",,\n";
  return s.str();
}

struct Context {
  std::string command;
  ExperimentConfig cfg;
  std::filesystem::path config_path;
  std::ostream& out;
  std::ostream& err;

  [[nodiscard]] std::filesystem::path file(const std::string& name) const { return cfg.output_dir / name; }
  void write(const std::string& name, const std::string& content) const { write_file_atomic(file(name), content); }
};

int cmd_spectrum(const Context& ctx) {
  const ModelLoop ml = [&] {
    ExperimentConfig open = ctx.cfg;
    open.synthesize = false;
    return build_model_loop(open);
  }();
  ctx.write("spectrum.csv", spectrum_csv(ml.open_loop));
  ctx.out << "unstable eigenvalues: " << ml.open_loop.unstable_count << "\n";
  for (const auto& w : ml.open_loop.warnings) ctx.err << "warning: " << w << "\n";
  return kExitOk;
}

int cmd_dirichlet_map(const Context& ctx) {
  ExperimentConfig open = ctx.cfg;
  open.synthesize = false;
  const ModelLoop ml = build_model_loop(open);
  ctx.write("dirichlet_map.txt", format_matrix(ml.loop.green.entries()));
  std::ostringstream s;
  s << "gamma = " << format_number(ml.loop.green.gamma()) << "\n";
  ctx.write("dirichlet_map_meta.txt", s.str());
  ctx.out << "green map " << ml.loop.green.state_dim() << "x" << ml.loop.green.input_dim() << ", gamma "
          << format_number(ml.loop.green.gamma()) << "\n";
  return kExitOk;
}

void write_synthesis(const Context& ctx, const ModelLoop& ml) {
  ctx.write("hautus.csv", hautus_csv(ml.rank));
  ctx.write("feedback.txt", format_matrix(ml.loop.feedback.as_matrix));
  ctx.write("feedback_profiles.txt", format_matrix(ml.loop.feedback.profiles));
  ctx.write("feedback_functionals.txt", format_matrix(ml.loop.feedback.functionals()));
  if (ml.coupled) ctx.write("interior_feedback.txt", format_matrix(ml.J.as_matrix));

  const CVector closed = eigenvalues(ml.loop.composed.entries());
  std::ostringstream s;
  s << "k,mode,target_re,target_im,achieved_re,achieved_im\n";
  for (std::size_t k = 0; k < ml.targets.size(); ++k) {
    Eigen::Index best = 0;
    (closed.array() - ml.targets[k]).abs().minCoeff(&best);
    s << (k + 1) << ',' << to_string(ml.loop.feedback.mode) << ',' << format_number(ml.targets[k].real()) << ',' << format_number(ml.targets[k].imag()) << ','
      << format_number(closed(best).real()) << ',' << format_number(closed(best).imag()) << '\n';
  }
  ctx.write("achieved_poles.csv", s.str());
}

int cmd_synthesize(const Context& ctx) {
  ExperimentConfig cfg = ctx.cfg;
  cfg.synthesize = true;
  const ModelLoop ml = build_model_loop(cfg);
  write_synthesis(ctx, ml);
  ctx.out << "placed " << ml.targets.size() << " poles; closed-loop abscissa "
          << format_number(spectral_abscissa(ml.loop.composed.entries())) << "\n";
  return kExitOk;
}

int cmd_simulate(const Context& ctx) {
  const ModelLoop ml = build_model_loop(ctx.cfg);
  const ForcingSignal f = ForcingSignal::random(ml.loop.dim(), ctx.cfg.cell_width, ctx.cfg.T_grid.back(), ctx.cfg.seed);
  const Trajectory tr = solution_map(ml.loop, f);
  const std::size_t per_cell = (tr.times.size() - 1) / static_cast<std::size_t>(f.values.cols());
  std::ostringstream s;
  s << "t,y_norm\n";
  for (std::size_t k = 0; k < tr.times.size(); k += per_cell)
    s << format_number(tr.times[k]) << ',' << format_number(tr.states.col(static_cast<Eigen::Index>(k)).norm()) << '\n';
  ctx.write("trajectory.csv", s.str());
  ctx.out << "simulated " << tr.times.size() - 1 << " steps to T = " << format_number(tr.times.back()) << "\n";
  return kExitOk;
}

int cmd_maxreg(const Context& ctx) {
  const ModelLoop ml = build_model_loop(ctx.cfg);
  const SpectralData sd = spectrum(ml.loop.composed);
  const auto forcings = default_forcing_set(sd, ctx.cfg.forcings, ctx.cfg.seed, ctx.cfg.cell_width, ctx.cfg.T_grid.back());
  MaxRegOptions opt;
  opt.parallel = ctx.cfg.parallel;
  auto scans = plateau_scan(ml.loop.composed, ctx.cfg.p_grid, ctx.cfg.T_grid, forcings, opt);
  double sup = std::numeric_limits<double>::infinity();
  try {
    sup = imaginary_axis_bound(ml.loop, logspace(1e-3, 1e3, 60));
  } catch (const SingularityError& e) {
    ctx.err << "imaginary axis: " << e.what() << "\n";
  }
  for (auto& s : scans) s.imag_axis_sup = sup;
  ctx.write("maxreg.csv", maxreg_csv(to_string(ctx.cfg.model), mode_label(ctx.cfg, ml), scans));
  for (const auto& s : scans) ctx.out << "p = " << format_number(s.p) << ": " << to_string(s.verdict) << "\n";
  return kExitOk;
}

VerificationReport run_verification(const Context& ctx, ModelLoop& ml_out, bool& have_loop) {
  const VerifyOptions opt = verify_options(ctx.cfg, ctx.cfg.parallel);
  if (ctx.cfg.model == ModelKind::coupled && ctx.cfg.synthesize) {
    const RankReport rank = coupled_rank_check(ctx.cfg.coupled, ctx.cfg.use_interior);
    if (!rank.pass) {
      have_loop = false;
      ctx.write("hautus.csv", hautus_csv(rank));
      return run_coupled_pipeline(ctx.cfg.coupled, ctx.cfg.use_interior, opt);
    }
  }
  ml_out = build_model_loop(ctx.cfg);
  have_loop = true;
  if (ml_out.coupled) return verify_coupled_stabilization(*ml_out.coupled, ml_out.open_loop, opt);
  return verify_loop(ml_out.loop, opt);
}

int cmd_verify(const Context& ctx) {
  ModelLoop ml;
  bool have_loop = false;
  const VerificationReport rep = run_verification(ctx, ml, have_loop);
  ctx.write("verify.csv", verify_csv(rep));
  if (have_loop)
    ctx.write("maxreg.csv", maxreg_csv(to_string(ctx.cfg.model), mode_label(ctx.cfg, ml), rep.scans));
  ctx.out << "verification " << (rep.pass ? "PASS" : "FAIL") << "\n";
  if (const CheckResult* f = rep.first_failure()) ctx.out << "first failing check: " << f->name << " (" << f->detail << ")\n";
  return rep.pass ? kExitOk : kExitFail;
}

int cmd_report(const Context& ctx) {
  cmd_spectrum(ctx);
  ModelLoop ml;
  bool have_loop = false;
  const VerificationReport rep = run_verification(ctx, ml, have_loop);
  ctx.write("verify.csv", verify_csv(rep));
  std::ostringstream r;
  r << "model: " << to_string(ctx.cfg.model) << "\n";
  r << "open-loop unstable eigenvalues: " << ml.open_loop.unstable_count << "\n";
  if (have_loop) {
    write_synthesis(ctx, ml);
    ctx.write("maxreg.csv", maxreg_csv(to_string(ctx.cfg.model), mode_label(ctx.cfg, ml), rep.scans));
    r << "feedback: " << mode_label(ctx.cfg, ml) << "\n";
  }
  r << "closed-loop spectral abscissa: " << format_number(rep.abscissa) << "\n";
  for (const auto& c : rep.checks)
    r << (c.pass ? "PASS " : "FAIL ") << c.name << " = " << format_number(c.value) << "  " << c.detail << "\n";
  r << "overall: " << (rep.pass ? "PASS" : "FAIL") << "\n";
  ctx.write("report.txt", r.str());
  ctx.out << r.str();
  return rep.pass ? kExitOk : kExitFail;
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::heat: return "heat";
    case ModelKind::coupled: return "coupled";
    case ModelKind::abstract: return "abstract";
  }
  return "unknown";
}

ExperimentConfig parse_experiment(const ConfigFile& f, const std::filesystem::path& base_dir) {
  f.check_sections({"experiment", "heat", "coupled", "abstract", "synthesis", "maxreg"});
  f.check_keys("experiment", {"model", "output_dir", "parallel"});
  f.check_keys("heat", {"n", "c2", "advection_b", "omega", "q", "epsilon"});
  f.check_keys("coupled", {"n", "nu", "kappa", "gamma_buoy", "theta_e", "theta_e_profile", "ye_advect", "c2_f", "c2_h",
                           "omega", "q", "epsilon"});
  f.check_keys("abstract", {"oseen", "green", "feedback", "interior_B", "principal", "gamma", "epsilon"});
  f.check_keys("synthesis", {"enabled", "mode", "targets", "use_interior"});
  f.check_keys("maxreg", {"p_grid", "T_grid", "forcings", "seed", "cell_width", "decay_t"});

  ExperimentConfig c;
  c.config_text = f.text();
  if (!f.has("experiment", "model")) throw ConfigError(f.source() + ": [experiment] model is required");
  c.model = parse_model(f.get_string("experiment", "model", "heat"), f);
  c.output_dir = resolve({}, f.get_string("experiment", "output_dir", "out"));
  c.parallel = f.get_int("experiment", "parallel", 1);
  if (c.parallel < 1) throw ConfigError(f.source() + ": parallel must be >= 1");

  HeatConfig& h = c.heat;
  h.n = f.get_int("heat", "n", h.n);
  h.c2 = f.get_double("heat", "c2", h.c2);
  h.advection_b = f.get_double("heat", "advection_b", h.advection_b);
  const auto hw = f.get_doubles("heat", "omega", {h.omega_lo, h.omega_hi});
  require_pair(hw, "heat.omega");
  h.omega_lo = hw[0];
  h.omega_hi = hw[1];
  h.q = f.get_double("heat", "q", h.q);
  h.epsilon = f.get_double("heat", "epsilon", h.epsilon);

  CoupledConfig& k = c.coupled;
  k.n = f.get_int("coupled", "n", k.n);
  k.nu = f.get_double("coupled", "nu", k.nu);
  k.kappa = f.get_double("coupled", "kappa", k.kappa);
  k.gamma_buoy = f.get_double("coupled", "gamma_buoy", k.gamma_buoy);
  k.theta_e = f.get_double("coupled", "theta_e", k.theta_e);
  k.theta_e_profile = f.get_doubles("coupled", "theta_e_profile", {});
  k.ye_advect = f.get_double("coupled", "ye_advect", k.ye_advect);
  k.c2_f = f.get_double("coupled", "c2_f", k.c2_f);
  k.c2_h = f.get_double("coupled", "c2_h", k.c2_h);
  const auto kw = f.get_doubles("coupled", "omega", {k.omega_lo, k.omega_hi});
  require_pair(kw, "coupled.omega");
  k.omega_lo = kw[0];
  k.omega_hi = kw[1];
  k.q = f.get_double("coupled", "q", k.q);
  k.epsilon = f.get_double("coupled", "epsilon", k.epsilon);

  AbstractModel& a = c.abstract_model;
  a.oseen = resolve(base_dir, f.get_string("abstract", "oseen", ""));
  a.green = resolve(base_dir, f.get_string("abstract", "green", ""));
  a.feedback = resolve(base_dir, f.get_string("abstract", "feedback", ""));
  a.interior_B = resolve(base_dir, f.get_string("abstract", "interior_B", ""));
  a.principal = resolve(base_dir, f.get_string("abstract", "principal", ""));
  a.gamma = f.get_double("abstract", "gamma", a.gamma);
  a.epsilon = f.get_double("abstract", "epsilon", a.epsilon);

  c.synthesize = f.get_bool("synthesis", "enabled", true);
  c.mode = parse_feedback_mode(f.get_string("synthesis", "mode", "spectral"));
  if (f.has("synthesis", "targets")) c.targets = f.get_complexes("synthesis", "targets");
  c.use_interior = f.get_bool("synthesis", "use_interior", true);

  c.p_grid = f.get_doubles("maxreg", "p_grid", c.p_grid);
  c.T_grid = f.get_doubles("maxreg", "T_grid", c.T_grid);
  c.forcings = f.get_int("maxreg", "forcings", c.forcings);
  c.seed = static_cast<std::uint64_t>(f.get_int("maxreg", "seed", static_cast<int>(c.seed)));
  c.cell_width = f.get_double("maxreg", "cell_width", c.cell_width);
  c.decay_t = f.get_doubles("maxreg", "decay_t", c.decay_t);
  require_pair(c.decay_t, "maxreg.decay_t");

  if (c.p_grid.empty()) throw ConfigError(f.source() + ": p_grid must not be empty");
  for (double p : c.p_grid)
    if (!(p > 1.0)) throw ConfigError(f.source() + ": every p must exceed 1");
  if (c.T_grid.size() < 3) throw ConfigError(f.source() + ": T_grid needs at least 3 horizons");
  for (std::size_t i = 1; i < c.T_grid.size(); ++i)
    if (!(c.T_grid[i] > c.T_grid[i - 1])) throw ConfigError(f.source() + ": T_grid must increase");
  if (c.forcings < 0) throw ConfigError(f.source() + ": forcings must be >= 0");
  if (!(c.cell_width > 0.0)) throw ConfigError(f.source() + ": cell_width must be positive");
  if (!(c.decay_t[0] > 0.0 && c.decay_t[1] > c.decay_t[0])) throw ConfigError(f.source() + ": decay_t must be 0 < a < b");

  switch (c.model) {
    case ModelKind::heat: c.heat.validate(); break;
    case ModelKind::coupled: c.coupled.validate(); break;
    case ModelKind::abstract:
      if (a.oseen.empty() || a.green.empty())
        throw ConfigError(f.source() + ": [abstract] needs oseen and green matrix files");
      for (const auto& p : {a.oseen, a.green, a.feedback, a.interior_B, a.principal})
        if (!p.empty() && !std::filesystem::exists(p)) throw ConfigError(f.source() + ": missing file " + p.string());
      break;
  }
  return c;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  const ConfigFile f = ConfigFile::load(path);
  return parse_experiment(f, path.parent_path());
}

ModelLoop build_model_loop(const ExperimentConfig& cfg) {
  ModelLoop ml;
  switch (cfg.model) {
    case ModelKind::heat: {
      if (cfg.synthesize) {
        SynthesisResult s = synthesize_heat(cfg.heat, cfg.mode, cfg.targets);
        ml.open_loop = std::move(s.open_loop);
        ml.rank = std::move(s.rank);
        ml.targets = std::move(s.targets);
        ml.loop = closed_loop_heat(cfg.heat, s.law);
        ml.synthesized = true;
      } else {
        ml.open_loop = spectrum(build_heat_operator(cfg.heat));
        ml.loop = closed_loop_heat(cfg.heat, FeedbackLaw::zero(cfg.heat.n, 2));
      }
      return ml;
    }
    case ModelKind::coupled: {
      const int n = cfg.coupled.n;
      FeedbackLaw F = FeedbackLaw::zero(2 * n, 2), J = FeedbackLaw::zero(2 * n, n);
      if (cfg.synthesize) {
        CoupledSynthesis s = synthesize_coupled(cfg.coupled, cfg.use_interior, cfg.targets);
        ml.open_loop = std::move(s.open_loop);
        ml.rank = std::move(s.rank);
        ml.targets = std::move(s.targets);
        F = std::move(s.F);
        J = std::move(s.J);
        ml.synthesized = true;
      } else {
        ml.open_loop = spectrum(build_block_operator(cfg.coupled));
      }
      ml.coupled = compose_coupled_loop(cfg.coupled, F, J);
      ml.loop = ml.coupled->loop;
      ml.J = J;
      return ml;
    }
    case ModelKind::abstract: {
      const AbstractModel& a = cfg.abstract_model;
      const Operator oseen(read_matrix(a.oseen), "oseen");
      const GreenMap green(read_matrix(a.green), a.gamma);
      std::optional<Operator> interior;
      if (!a.interior_B.empty()) interior = Operator(read_matrix(a.interior_B), "B");
      std::optional<OseenSplit> split;
      if (!a.principal.empty()) {
        const CMatrix p = read_matrix(a.principal);
        if (p.rows() != oseen.dim() || p.cols() != oseen.dim())
          throw ConfigError("abstract: principal matrix must match the oseen dimension");
        split = OseenSplit{Operator(p, "principal"), Operator(oseen.entries() - p, "A_o"), a.epsilon};
      }
      FeedbackLaw law;
      if (!a.feedback.empty()) {
        const CMatrix fm = read_matrix(a.feedback);
        law = FeedbackLaw::zero(fm.cols(), fm.rows());
        law.profiles = CMatrix::Identity(fm.rows(), fm.rows());
        law.spectral_functionals = fm.adjoint();
        law.gain = CMatrix::Zero(fm.rows(), 0);
        law.realize();
        ml.open_loop = spectrum(oseen);
      } else if (cfg.synthesize) {
        law = synthesize_abstract(oseen, green, cfg, ml);
        ml.synthesized = true;
      } else {
        ml.open_loop = spectrum(oseen);
        law = FeedbackLaw::zero(oseen.dim(), green.input_dim());
      }
      ml.loop = compose_closed_loop(oseen, green, law, interior, split, "abstract");
      return ml;
    }
  }
  throw UsageError("unknown model");
}

int run_command(const std::string& command, const std::filesystem::path& config_path, const RunOptions& options,
                std::ostream& out, std::ostream& err) {
  static const std::vector<std::string> commands{"spectrum", "dirichlet-map", "synthesize", "simulate",
                                                 "maxreg",   "verify",        "report"};
  if (std::find(commands.begin(), commands.end(), command) == commands.end()) {
    err << "error: unknown command '" << command << "'\n";
    return kExitConfig;
  }
  try {
    ExperimentConfig cfg = load_experiment(config_path);
    if (options.out) cfg.output_dir = *options.out;
    if (options.seed) cfg.seed = *options.seed;
    if (options.parallel) {
      if (*options.parallel < 1) throw ConfigError("--parallel must be >= 1");
      cfg.parallel = *options.parallel;
    }
    const Context ctx{command, cfg, config_path, out, err};
    ctx.write("manifest.txt", manifest(command, cfg, config_path));
    if (command == "spectrum") return cmd_spectrum(ctx);
    if (command == "dirichlet-map") return cmd_dirichlet_map(ctx);
    if (command == "synthesize") return cmd_synthesize(ctx);
    if (command == "simulate") return cmd_simulate(ctx);
    if (command == "maxreg") return cmd_maxreg(ctx);
    if (command == "verify") return cmd_verify(ctx);
    return cmd_report(ctx);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SynthesisFailure& e) {
    err << "synthesis failed: " << e.what() << "\n";
    return kExitFail;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::runtime_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace bstab
