// gplab command-line front end.
//
//   gplab run --config scenario.json [--threads N] [--verbose]
//   gplab report DIR... [--output summary.csv]
//   gplab scatter|gp-evolve|gp-groundstate|manybody|hierarchy|power-counting --config scenario.json

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "gplab/cli.hpp"
#include "gplab/errors.hpp"

namespace {

// Runs a config whose experiment must match the subcommand.
int run_as(const std::string& experiment, const std::string& path, const gplab::cli::RunOptions& opts) {
  try {
    const auto config = gplab::cli::load_config(path);
    if (config.experiment != experiment) {
      std::cerr << "config error: " << path << " describes experiment '" << config.experiment
                << "', not '" << experiment << "'\n";
      return gplab::cli::kConfigError;
    }
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return gplab::cli::kConfigError;
  }
  return gplab::cli::run(path, opts);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gplab: scattering, GP dynamics, many-boson marginals and hierarchy diagnostics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", gplab::cli::kToolVersion);

  gplab::cli::RunOptions opts;
  app.add_option("--threads", opts.threads, "worker threads (results are reproducible at 1)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_flag("--verbose", opts.verbose, "progress messages on stderr");

  std::string config;
  auto* run = app.add_subcommand("run", "run the experiment named in a config");
  run->add_option("--config", config, "scenario JSON")->required();

  std::vector<std::string> dirs;
  std::string output = "summary.csv";
  auto* report = app.add_subcommand("report", "merge result CSVs of several run directories");
  report->add_option("dirs", dirs, "run directories");
  report->add_option("--output", output, "summary CSV")->capture_default_str();

  const std::vector<std::pair<std::string, std::string>> aliases{
      {"scatter", "scatter"},         {"gp-evolve", "gp_evolve"}, {"gp-groundstate", "gp_groundstate"},
      {"manybody", "manybody"},       {"hierarchy", "hierarchy"}, {"power-counting", "power_counting"}};
  std::vector<CLI::App*> alias_cmds;
  for (const auto& [name, experiment] : aliases) {
    auto* sub = app.add_subcommand(name, "run a " + experiment + " config");
    sub->add_option("--config", config, "scenario JSON")->required();
    alias_cmds.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : gplab::cli::kConfigError;
  }

  if (*run) return gplab::cli::run(config, opts);
  if (*report) {
    try {
      std::vector<std::filesystem::path> paths(dirs.begin(), dirs.end());
      gplab::cli::report(paths, output);
      return gplab::cli::kSuccess;
    } catch (const std::exception& e) {
      std::cerr << "report failed: " << e.what() << '\n';
      return gplab::cli::kConfigError;
    }
  }
  for (std::size_t i = 0; i < aliases.size(); ++i) {
    if (*alias_cmds[i]) return run_as(aliases[i].second, config, opts);
  }
  return gplab::cli::kConfigError;
}
