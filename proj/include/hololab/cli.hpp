#pragma once

#include "hololab/experiment.hpp"
#include "hololab/verify.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hololab::cli {

/// Exit statuses shared by every subcommand.
enum ExitCode : int { kSuccess = 0, kNumericalFailure = 1, kUsageError = 2 };

struct LoopConfig {
  enum class Kind { Rect, Polyline, Family, Random };

  Kind kind = Kind::Polyline;
  std::string label;
  std::vector<Vector> points;                        // Rect: {from, to}; Polyline: vertices
  std::vector<std::vector<std::string>> family_points;  // Family: vertex expressions in s
  std::optional<int> family_index;                   // Family: index into the entry's families
  double s_max = 1.0;
  int count = 0;                                     // Random
};

struct Tolerances {
  IntegratorOptions integrator;
  double rank_tol = 1e-8;
  double classify_tol = 1e-6;
  double log_radius = 0.5;
  double check_scale = 1.0;
};

struct RunConfig {
  std::optional<std::string> catalog;                // resolved entry name
  std::optional<ExpressionManifoldSpec> custom;
  std::optional<Vector> basepoint;                   // custom manifolds
  std::optional<Box> region;
  ConnectionKind connection = ConnectionKind::Weighted;
  std::vector<LoopConfig> loops;
  std::vector<std::string> tasks;
  std::uint64_t seed = 1;
  Tolerances tolerances;
  std::optional<std::string> output;

  // algebra
  int random_loops = 40;
  bool use_families = true;
  bool use_self_duality = true;
  bool conjecture = false;
  std::optional<int> expect_dim;
  std::optional<std::string> expect_tag;

  // verify
  std::vector<std::string> checks;
  std::vector<std::string> entries;
  int points = 50;
  int paths = 20;
  int check_loops = 20;

  // curvature
  std::vector<Vector> curvature_points;
};

/// Throws ConfigError (or a parse error) on malformed input. `seed_override`
/// replaces the configured seed.
RunConfig parse_run_config(const nlohmann::json& j, std::optional<std::uint64_t> seed_override = std::nullopt);
RunConfig load_run_config(const std::string& path, std::optional<std::uint64_t> seed_override = std::nullopt);

/// HOLOLAB_SEED, when set to an unsigned integer.
std::optional<std::uint64_t> seed_from_env();

/// Catalog entry or custom manifold named by the config.
CatalogEntry resolve_entry(const RunConfig& config);

/// Loops and families of the config, in input order.
struct ResolvedLoops {
  std::vector<std::string> labels;
  std::vector<Loop> loops;
  std::vector<std::string> family_labels;
  std::vector<LoopFamily> families;
};
ResolvedLoops resolve_loops(const RunConfig& config, const CatalogEntry& entry);

struct CommandResult {
  int exit_code = kSuccess;
  nlohmann::json report;
  std::string summary;  // human-readable lines
};

CommandResult cmd_run_example(const std::string& name);
CommandResult cmd_holonomy(const RunConfig& config, const std::optional<std::string>& plot_path = std::nullopt,
                           int plot_samples = 50);
CommandResult cmd_algebra(const RunConfig& config);
CommandResult cmd_curvature(const RunConfig& config);
CommandResult cmd_verify(const std::optional<RunConfig>& config, std::uint64_t default_seed = 1);
CommandResult cmd_catalog_list();

/// Runs the config's task list in order and merges the reports.
CommandResult cmd_run(const RunConfig& config);

/// Adds "schema" and "command"; the timestamp is added separately so reports
/// compare byte for byte without it.
nlohmann::json versioned(nlohmann::json report, const std::string& command);
void stamp(nlohmann::json& report);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

/// {message, code, offset} for a caught exception.
nlohmann::json error_to_json(const std::exception& e);

/// Usage-stage errors map to 2, numerical ones to 1.
int exit_code_for(ErrorCode code);

}  // namespace hololab::cli
