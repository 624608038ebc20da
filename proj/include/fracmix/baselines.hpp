#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fracmix/model.hpp"

namespace fracmix {

struct SubsetLevel {
  std::size_t level = 0;
  /// Intermediate threshold that defines the next level (the target threshold on the last level).
  double threshold = 0.0;
  double conditional_probability = 0.0;
  /// Model evaluations spent producing this level's population.
  std::size_t evaluations = 0;
  /// Acceptance rate of the chains that produced this level (0 on level 0).
  double acceptance_rate = 0.0;
};

struct BaselineResult {
  std::string method;
  double threshold = 0.0;
  double pf = 0.0;
  /// NaN when undefined (no failures observed).
  double cov = 0.0;
  std::size_t evaluations = 0;
  /// False when subset simulation hit the level cap before reaching the threshold.
  bool reached = true;
  std::vector<SubsetLevel> levels;

  nlohmann::json to_json() const;
};

/// Physical input of MCS sample j.
std::vector<double> mcs_sample_point(const ExtremeResponseModel& model, std::uint64_t seed, std::size_t j);

/// Responses of N independent samples; sample j draws from its own stream (seed, j).
std::vector<std::vector<double>> mcs_run(const ExtremeResponseModel& model, std::size_t n, std::uint64_t seed,
                                         std::size_t workers);

/// Fraction of values strictly above the threshold, with the binomial COV.
BaselineResult mcs_estimate(std::span<const double> values, double threshold);

BaselineResult mcs_pf(const ExtremeResponseModel& model, std::size_t n, double threshold, std::uint64_t seed,
                      std::size_t workers, std::size_t response);

struct SubsetOptions {
  std::size_t n_per_level = 1000;
  double p0 = 0.1;
  std::size_t max_levels = 20;
  /// Half-width of the uniform component proposal in standard-normal space.
  double proposal_width = 1.0;
};

/// Subset simulation in the standard-normal image of the input space, using
/// component-wise modified Metropolis chains grown from the seeds of each level.
BaselineResult subset_sim_pf(const ExtremeResponseModel& model, double threshold, const SubsetOptions& options,
                             std::uint64_t seed, std::size_t workers, std::size_t response);

}  // namespace fracmix
