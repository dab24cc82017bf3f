#pragma once

// Batch scenarios: JSON config parsing with explicit defaults, regime-chain
// simulation and task execution with CSV + manifest output.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "gbesq/finance_apps.hpp"
#include "gbesq/model_adapters.hpp"
#include "gbesq/samplers.hpp"

namespace gbesq {

constexpr int kSchemaVersion = 1;

/// Bad or inconsistent configuration (exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Continuous-time chain on states 1..K with per-state (alpha, sigma).
struct MarkovChainSpec {
  std::vector<std::vector<double>> generator;
  int initial_state = 1;
  std::vector<double> alpha;
  std::vector<double> sigma;

  void validate() const;
  std::size_t size() const { return generator.size(); }
};

/// Exponential holding times and the embedded jump chain, truncated at horizon.
/// RegimePath states are 0-based.
RegimePath simulate_regime_path(const MarkovChainSpec& chain, double horizon, RngStream& rng);

// JSON forms of the time structures.
nlohmann::json to_json(const PiecewiseFn& f);
PiecewiseFn piecewise_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RadonMeasure& mu);
RadonMeasure measure_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GbesqSpec& spec);
GbesqSpec spec_from_json(const nlohmann::json& j);

struct ModelConfig {
  std::string kind;  // gbesq | ou | cir | cev | extended_cir | sv
  GbesqSpec gbesq;   // gbesq, and the variance process of sv
  double mu = 0.0, sigma = 0.0, alpha = 0.0, beta = 0.0, rho = 0.0, x0 = 0.0;
  double r0 = 0.0;
  std::optional<RegimePath> regimes;
  std::optional<MarkovChainSpec> chain;
  PiecewiseFn drift;  // sv log-price drift
  double s0 = 1.0;
};

struct NumericConfig {
  std::uint64_t seed = 1;
  std::size_t n_paths = 10000;
  std::size_t n_chain_paths = 1000;
  int threads = 0;
  double quantile_tol = 1e-10;
  double mixture_tol = 1e-12;
  int n_max = 400;
};

struct OutputConfig {
  std::string csv = "gbesq_out.csv";
  int precision = 17;
};

struct ScenarioConfig {
  int schema_version = kSchemaVersion;
  std::string task;
  ModelConfig model;
  nlohmann::json params;  // task parameters with every default filled in
  NumericConfig numeric;
  OutputConfig output;
  nlohmann::json resolved;  // the whole config as parsed, defaults explicit

  SamplerOptions sampler() const;
  MonteCarloConfig monte_carlo() const;
};

const std::vector<std::string>& task_names();

/// Validates and fills defaults; throws ConfigError.
ScenarioConfig parse_config(const nlohmann::json& j);
ScenarioConfig load_config(const std::string& path);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

std::string format_number(double v, int precision);

/// Runs the task and returns its table without touching the filesystem.
/// Throws ConfigError for task/model mismatches, other exceptions for numeric
/// failures. `log` receives progress lines (the validate task prints there).
Table execute(const ScenarioConfig& cfg, std::ostream* log = nullptr);

/// execute + CSV + "<csv>.manifest.json". Returns 0, 2 or 3; diagnostics on `err`.
int run(const ScenarioConfig& cfg, std::ostream& err, std::ostream* log = nullptr);

}  // namespace gbesq
