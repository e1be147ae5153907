#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bstab/config.hpp"
#include "bstab/coupled_model.hpp"
#include "bstab/heat_model.hpp"

namespace bstab {

enum class ModelKind { heat, coupled, abstract };

std::string to_string(ModelKind kind);

/// Matrices of a user-supplied model, resolved relative to the config file.
struct AbstractModel {
  std::filesystem::path oseen;
  std::filesystem::path green;
  std::filesystem::path feedback;   // optional: fixed F instead of synthesis
  std::filesystem::path interior_B; // optional
  std::filesystem::path principal;  // optional: split oseen = principal + A_o
  double gamma = 0.5;
  double epsilon = 0.5;
};

struct ExperimentConfig {
  ModelKind model = ModelKind::heat;
  HeatConfig heat;
  CoupledConfig coupled;
  AbstractModel abstract_model;

  bool synthesize = true;
  FeedbackMode mode = FeedbackMode::spectral;
  std::optional<std::vector<Complex>> targets;
  bool use_interior = true;

  std::vector<double> p_grid{1.5, 2.0, 4.0};
  std::vector<double> T_grid{10.0, 20.0, 40.0};
  int forcings = 32;
  std::uint64_t seed = 1;
  double cell_width = 0.1;
  std::vector<double> decay_t{1.0, 10.0};

  std::filesystem::path output_dir = "out";
  int parallel = 1;
  std::string config_text;
};

ExperimentConfig parse_experiment(const ConfigFile& file, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment(const std::filesystem::path& path);

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitFail = 4;

struct RunOptions {
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> parallel;
};

/// Assembled closed loop of the configured model (open loop when synthesis
/// is disabled).
struct ModelLoop {
  ClosedLoop loop;
  SpectralData open_loop;
  std::optional<CoupledLoop> coupled;
  RankReport rank;
  std::vector<Complex> targets;
  bool synthesized = false;
  FeedbackLaw J;
};

ModelLoop build_model_loop(const ExperimentConfig& cfg);

/// Subcommands: spectrum | dirichlet-map | synthesize | simulate | maxreg |
/// verify | report. Returns the process exit code.
int run_command(const std::string& command, const std::filesystem::path& config_path, const RunOptions& options,
                std::ostream& out, std::ostream& err);

}  // namespace bstab
