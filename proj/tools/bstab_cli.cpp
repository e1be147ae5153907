// Command-line front end: bstab <command> --config PATH [--out DIR] [--seed N] [--parallel K]

#include <iostream>

#include <CLI11.hpp>

#include "bstab/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Boundary feedback stabilization experiments"};
  app.require_subcommand(1, 1);

  std::string config;
  std::string out_dir;
  std::uint64_t seed = 0;
  int parallel = 1;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"spectrum", "open-loop spectrum CSV"},
      {"dirichlet-map", "write the boundary-to-interior map"},
      {"synthesize", "rank check, pole placement, feedback files"},
      {"simulate", "closed-loop trajectory under a seeded forcing"},
      {"maxreg", "maximal-regularity constant scan"},
      {"verify", "consolidated PASS/FAIL verification"},
      {"report", "spectrum, synthesis and verification in one run"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "experiment configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
    sub->add_option("--seed", seed, "forcing seed (overrides the config)");
    sub->add_option("--parallel", parallel, "worker threads for scans")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : bstab::kExitConfig;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  bstab::RunOptions options;
  if (chosen->count("--out")) options.out = out_dir;
  if (chosen->count("--seed")) options.seed = seed;
  if (chosen->count("--parallel")) options.parallel = parallel;
  return bstab::run_command(chosen->get_name(), config, options, std::cout, std::cerr);
}
