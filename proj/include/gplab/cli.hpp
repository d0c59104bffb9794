#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gplab/grid.hpp"
#include "gplab/potential.hpp"

namespace gplab::cli {

inline constexpr const char* kSchemaVersion = "1";
inline constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int { kSuccess = 0, kConfigError = 2, kNumericalError = 3 };

struct PotentialSpec {
  std::string kind = "zero";  ///< zero | barrier | gaussian | table
  std::string id;             ///< label in scatter output; defaults to kind
  double height = 0.0;
  double radius = 0.0;
  double width = 0.0;
  double cutoff = 0.0;
  std::vector<double> radii;
  std::vector<double> values;
  std::string file;  ///< radius,value CSV for table potentials
};

struct InitialSpec {
  std::string kind = "gaussian";  ///< gaussian | plane_wave | random_smooth | ground_state
  double width = 1.0;
  std::array<double, 3> center{};
  std::array<double, 3> momentum{};
  std::array<int, 3> modes{};
  bool correlated = false;  ///< manybody: Jastrow factor from the scaled potential
};

struct TimeSpec {
  double t_final = 1.0;
  double dt = 1e-3;
  int sample_every = 1;
};

struct CouplingSpec {
  std::string mode = "from_scattering";  ///< from_scattering | born | explicit
  std::optional<double> value;
};

struct OutputSpec {
  std::filesystem::path dir = ".";
  std::string prefix = "run";
  bool binary_snapshots = false;
};

struct SolverSpec {
  double tol = 1e-10;
  int max_iterations = 200000;
};

struct HierarchySpec {
  int k_max = 2;
  int residual_stride = 10;
  int samples = 5;
  int dyson_terms = 3;
  int quad_points = 16;
};

struct PowerCountingSpec {
  int k_max = 10;
  int m_max = 10;
};

struct ScenarioConfig {
  std::string schema_version;
  std::string experiment;
  std::optional<PotentialSpec> potential;
  TrapModel trap;
  GridSpec grid;
  int particles = 2;
  std::vector<long> scaling_N;
  TimeSpec time;
  CouplingSpec coupling;
  OutputSpec output;
  std::uint64_t seed = 0;
  InitialSpec initial;
  SolverSpec solver;
  HierarchySpec hierarchy;
  PowerCountingSpec power_counting;
  std::vector<std::filesystem::path> inputs;  ///< report: run directories
  nlohmann::json source;                      ///< the document as parsed
};

/// Strict parse: unknown keys, wrong types and out-of-range values throw ConfigError.
ScenarioConfig parse_config(const nlohmann::json& doc);
ScenarioConfig load_config(const std::filesystem::path& path);

PotentialModel build_potential(const PotentialSpec& spec);

/// FNV-1a 64 of the canonical (sorted-key, compact) dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& doc);

/// Formats a double with 17 significant digits.
std::string format_number(double x);

/// RFC-4180 field quoting.
std::string csv_field(const std::string& s);

struct RunOptions {
  int threads = 1;
  bool verbose = false;
};

/// Loads, runs and writes `<prefix>_results.csv` and `<prefix>_manifest.json`
/// (plus snapshots). Returns an ExitCode; diagnostics go to stderr.
int run(const std::filesystem::path& config_path, const RunOptions& options = {});

/// Runs an already parsed config; throws on failure. Returns the written files.
std::vector<std::filesystem::path> run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

/// Merges the results of every run directory into one CSV keyed by config hash.
/// Directories without a manifest are skipped with a warning. Returns the output path.
std::filesystem::path report(const std::vector<std::filesystem::path>& run_dirs,
                             const std::filesystem::path& output);

}  // namespace gplab::cli
