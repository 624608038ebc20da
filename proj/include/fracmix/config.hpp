#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fracmix/baselines.hpp"
#include "fracmix/moments.hpp"

namespace fracmix {

struct RunConfig {
  std::string model = "duffing";
  /// Overrides for the model's configuration (see dynamics.hpp for keys).
  nlohmann::json model_params = nlohmann::json::object();
  SamplerConfig sampler;
  ConvergenceConfig convergence;
  std::vector<double> orders = default_orders();
  /// Empty selects the model's default thresholds.
  std::vector<double> thresholds;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  std::string output_dir = "out";
  std::size_t fit_restarts = 24;
  std::size_t curve_points = 400;
  std::size_t mcs_samples = 10000;
  SubsetOptions subset;

  /// Thresholds actually used: `thresholds`, or 7 for duffing and 95, 80, 67 (mm) for the frame.
  std::vector<double> effective_thresholds() const;

  void validate() const;
  nlohmann::json to_json() const;
  /// Missing keys keep their defaults; unknown keys raise ConfigError.
  static RunConfig from_json(const nlohmann::json& j);
  /// FNV-1a of the canonical JSON without workers and output_dir, as 16 hex digits.
  std::string hash() const;
};

}  // namespace fracmix
