#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "hyperlq/models.hpp"
#include "hyperlq/spectral_core.hpp"

namespace hyperlq::cli {

/// Validation failure. `field` is a dotted path such as "model.a".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct IntervalModel {
  int n_modes = 0;
  Region control = Region::Full();
  Region observation = Region::Full();
};

struct StarModel {
  std::vector<double> lengths;
  int controlled_edge = 0;
  int observed_edge = 1;
  double lambda_max = 0.0;
  int n_control_basis = 0;
};

struct RectangleModel {
  double a = 0.0;
  double b = 0.0;
  double max_frequency = 0.0;
};

struct SyntheticModel {
  double rho = 0.0;  // kInfinity allowed
  double eta = 0.0;
  int n_modes = 0;
  std::vector<double> spectrum;  // empty: lambda_n = n
};

struct SyntheticExponentialModel {
  double alpha = 0.0;
  double beta = 0.0;
  int n_modes = 0;
};

using ModelConfig =
    std::variant<IntervalModel, StarModel, RectangleModel, SyntheticModel, SyntheticExponentialModel>;

struct ObservabilityExperiment {
  double horizon = 0.0;
  std::vector<double> shells;
  bool use_control = true;
};

struct BoundsExperiment {
  std::string method = "dre_limit";
  NormScale weak = NormScale::Energy();
  NormScale strong = NormScale::Energy();
  int n_random_probes = 200;
};

struct DecayExperiment {
  bool riccati = false;
  double horizon = 0.0;
  double dt = 0.25;
  double k = 1.0;  // collocated: data in D(A^k)
  double s = 1.0;  // riccati: decay parameter of the data class
  double eps = 0.1;
  double data_exponent = 0.0;  // energy coefficients +-lambda^{-data_exponent}
  std::optional<std::pair<double, double>> window;
  std::string integrator = "exact";
  std::string method = "dre_limit";
  NormScale norm = NormScale::Energy();
};

struct NullControlExperiment {
  double t0 = 0.0;
  int n_samples = 0;
  double data_exponent = 1.0;
};

struct TurnpikeExperiment {
  std::vector<double> horizons;
  std::vector<double> z;  // explicit target, one entry per mode; empty: power law below
  double z_exponent = 2.0;
  double z_scale = 1.0;
  double data_exponent = 0.0;
  double k = 1.0;
  double ktilde = 1.0;
  double rho = 0.0;
  double eta = 0.0;
  double dt = 0.0;
};

using ExperimentConfig = std::variant<ObservabilityExperiment, BoundsExperiment, DecayExperiment,
                                      NullControlExperiment, TurnpikeExperiment>;

struct ExperimentItem {
  std::string name;
  ExperimentConfig experiment;
};

struct RunConfig {
  std::string name;
  std::uint64_t seed = 0;
  std::string output_dir;
  ModelConfig model;
  std::vector<ExperimentItem> items;  // a single unnamed item for "experiment"
  nlohmann::json resolved;            // normalized document with defaults filled in
};

/// Parses and validates a config document. Throws ConfigError.
RunConfig ParseConfig(const nlohmann::json& doc);
/// Reads `path`; JSON syntax errors are reported with line and column.
RunConfig LoadConfig(const std::string& path);

/// Name of the experiment kind as written in configs.
std::string ExperimentKind(const ExperimentConfig& e);

SpectralSystem BuildModel(const ModelConfig& model);

}  // namespace hyperlq::cli
