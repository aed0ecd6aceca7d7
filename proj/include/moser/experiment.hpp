#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "moser/green.hpp"
#include "moser/grid.hpp"
#include "moser/maximize.hpp"

namespace moser {

/// Validated experiment configuration.  Parsed strictly: unknown keys,
/// duplicate keys and out-of-range values are rejected with a path-qualified
/// message.  Every field has a documented default, so {"n": 2} is a complete
/// configuration.
struct ExperimentConfig {
  int n = 2;
  double rmax = 0.0;          ///< 0 = per-command default
  int grid_inner = 96;
  int grid_outer = 128;
  double inner_scale = 0.0;   ///< 0 = rmax / 100
  double tol = 1e-6;
  std::uint64_t seed = 1234;
  std::string out_dir = "out";
  double r_inner = 1e-4;      ///< Green solve matching radius
  double beta_factor = 0.9;   ///< maximize: beta = beta_factor * alpha_n
  double alpha_factor = 1.05; ///< sharpness: alpha = alpha_factor * alpha_n
  std::vector<double> c_schedule = {1.0, 2.0, 3.0, 4.0};
  std::vector<double> b_schedule = {4.0, 6.0, 8.0};
  std::vector<double> eps_schedule = {1e-4, 1e-6, 1e-8};
  std::vector<double> r_schedule = {4.0, 8.0, 16.0};
  std::vector<double> beta_fractions = {0.90, 0.97, 1.0};
  int max_iters = 40000;

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

/// FNV-1a hash of the canonical JSON dump, as a 16-digit hex string.
std::string config_hash(const ExperimentConfig& cfg);

/// Locale-independent full-precision formatting used in every CSV/JSON we
/// write, so identical runs produce byte-identical files.
std::string format_double(double x);

/// One pass/fail line of an experiment.
struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::string note;
};

/// Serialized record of one CLI experiment.
struct ExperimentReport {
  std::string command;
  std::string version;
  std::string config_hash;
  std::uint64_t seed = 0;
  int n = 0;
  std::vector<Check> checks;
  std::vector<std::string> flags;
  std::vector<std::string> artifacts;
  nlohmann::json extra;

  bool all_pass() const;
  nlohmann::json to_json() const;
  void write(const std::filesystem::path& path) const;
};

// --- file writers ---------------------------------------------------------

/// CSV with header "r,value" plus a JSON sidecar {n, R, boundary_kind, grading}.
void write_radial_csv(const RadialFunction& f, const std::filesystem::path& csv_path);

/// Green profile CSV plus {n, A, r_inner, R_max, tol, flux_residual_max}.
void write_green(const GreenSolution& sol, const std::filesystem::path& csv_path);

/// Maximizer profile CSV + JSON sidecar + JSON-lines iteration log.
void write_maximizer(const MaximizerResult& res, const std::filesystem::path& csv_path);

/// Generic CSV writer: header + rows of preformatted cells.
void write_csv(const std::filesystem::path& path, const std::string& header,
               const std::vector<std::vector<std::string>>& rows);

}  // namespace moser
