#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vartherm/diagnostics.hpp"
#include "vartherm/models.hpp"
#include "vartherm/nsf1d.hpp"

namespace vartherm::cli {

struct OutputPaths {
  std::string csv;
  std::string report;
};

/// A parsed and validated config file. Exactly one of `lumped` and `fluid`
/// is set.
struct RunConfig {
  std::string source;
  std::string scenario;
  std::optional<Scenario> lumped;
  std::optional<nsf1d::FluidProblem> fluid;
  OutputPaths output;
  DiagnosticsOptions diagnostics;

  bool is_fluid() const { return fluid.has_value(); }
  const IntegratorConfig& integrator() const { return fluid ? fluid->integrator : lumped->integrator; }
  double t_end() const { return fluid ? fluid->t_end : lumped->t_end; }
};

/// Command-line overrides applied on top of the file.
struct Overrides {
  std::optional<double> t_end;
  std::optional<double> dt;
  std::optional<std::string> integrator;
  std::optional<double> sample_every;
};

/// Scenario names accepted in the "scenario" field.
std::vector<std::string> config_scenario_names();

/// Builds a RunConfig from JSON. Unknown keys, wrong types and model
/// validation failures throw Error(config) with a field path in the message.
RunConfig parse_config(const nlohmann::json& j, const Overrides& ov = {}, const std::string& origin = "");

/// Reads and parses a file. A missing file is an io error, bad JSON a config error.
RunConfig load_config(const std::string& path, const Overrides& ov = {});

/// Lumped scenarios only.
Scenario load_scenario(const std::string& path);

/// Closest candidate by edit distance, or "" when nothing is close.
std::string suggest(const std::string& key, const std::vector<std::string>& candidates);

std::size_t edit_distance(const std::string& a, const std::string& b);

}  // namespace vartherm::cli
