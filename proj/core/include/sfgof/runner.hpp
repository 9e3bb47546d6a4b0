#pragma once

// Command layer: configuration documents, the five commands, and JSON reports.

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sfgof/resampling.hpp"

namespace sfgof::run {

inline constexpr const char* kVersion = "0.1.0";

struct RunConfig {
  std::string command;  // fit, test, simulate, efficiency, replicate

  // Data (fit, test, efficiency).
  std::string data;
  std::vector<std::string> columns;  // name=role
  bool cost = false;
  bool intercept = true;

  // Model and test.
  std::string family = "normal_gamma";
  std::string estimator = "cols";
  std::optional<double> gamma;  // defaults: 1 for data, 4 for simulation
  std::vector<double> gammas;   // simulate: several gammas on common draws
  std::optional<double> fixed_alpha;
  std::size_t grid_points = std::size_t{1} << 14;
  std::optional<double> grid_lower;
  std::optional<double> grid_upper;

  // Resampling.
  std::size_t B = 100;
  std::size_t M = 1000;
  std::size_t n = 100;
  double level = 0.05;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 0;
  nlohmann::json generator;  // simulate

  // Replicate.
  std::string table;
  double scale = 1.0;
  std::vector<double> only_param;  // restrict cells to these p / alpha values
  std::vector<std::size_t> only_n;
  std::string csv;  // optional table output

  static RunConfig from_json(const nlohmann::json& doc);
  nlohmann::ordered_json to_json() const;
  void validate() const;
};

/// Parses a generator document such as {"type": "normal_gamma", "sigma_v2": 1, "p": 1, "c": 1}.
rs::DataGenerator parse_generator(const nlohmann::json& doc);
nlohmann::ordered_json generator_to_json(const rs::DataGenerator& gen);
nlohmann::ordered_json params_to_json(const ErrorParams& params);

nlohmann::ordered_json run_fit(const RunConfig& config);
nlohmann::ordered_json run_test(const RunConfig& config);
nlohmann::ordered_json run_simulate(const RunConfig& config);
nlohmann::ordered_json run_efficiency(const RunConfig& config);
nlohmann::ordered_json run_replicate(const RunConfig& config);

/// One replicate-table cell before post-processing.
struct ReplicateCell {
  std::string label;  // e.g. "p=1" or "alpha=1.9"
  double param = 0.0;
  std::size_t n = 0;
  rs::WarpSpeedConfig design;
};

/// The cells of a replicate table at full size (M before scaling).
std::vector<ReplicateCell> replicate_cells(const std::string& table);

/// Dispatches on config.command and wraps the results in a report with
/// software, command, config echo and timing.
nlohmann::ordered_json run(const RunConfig& config);

/// Replicate results as CSV (one row per cell and gamma).
std::string replicate_csv(const nlohmann::ordered_json& report);

}  // namespace sfgof::run
