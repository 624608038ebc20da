#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fracmix/model.hpp"

namespace fracmix {

/// Orders (2/8) * [1..8].
std::vector<double> default_orders();

struct FractionalMomentSet {
  std::vector<double> orders;
  std::vector<double> estimates;
  std::size_t sample_count = 0;
  double mean = 0.0;
  double std_dev = 0.0;
  /// Set when M^2 - (M^1)^2 came out negative and was floored at 0.
  bool variance_floored = false;

  /// Estimate at an order present in `orders`; throws std::out_of_range otherwise.
  double at(double order) const;
};

/// M^r = sum_k w_k Z_k^r. Pairs are summed in a canonical sorted order with
/// compensated addition, so any permutation of the input gives bit-identical results.
FractionalMomentSet estimate_moments(std::span<const double> values, std::span<const double> weights,
                                     std::span<const double> orders);

struct ConvergenceConfig {
  double epsilon = 0.015;
  std::size_t batch = 8;
  std::size_t max_batches = 500;
  std::size_t bootstrap_replicates = 100;
};

struct SamplerConfig {
  std::uint64_t initial_size = 1;
  std::uint64_t refinement_factor = 1;
};

struct ConvergenceRecord {
  std::size_t batch = 0;
  std::size_t samples = 0;
  double m1 = 0.0;
  double m2 = 0.0;
  double cov_m2 = 0.0;
};

struct AdaptiveResult {
  /// One moment set per model response; index model.primary drives convergence.
  std::vector<FractionalMomentSet> moments;
  /// responses[k] holds every response of committed sample k.
  std::vector<std::vector<double>> responses;
  std::vector<double> weights;
  std::vector<ConvergenceRecord> trace;
  std::size_t evaluations = 0;
  bool converged = false;

  std::vector<double> response_column(std::size_t j) const;
};

/// Evaluates a batch of unit-cube points, writing results in index order.
std::vector<std::vector<double>> evaluate_batch(const ExtremeResponseModel& model,
                                                const std::vector<std::vector<double>>& unit_points,
                                                std::size_t workers);

/// Grows an RLSS design batch by batch until the bootstrap COV of M^2 of the
/// primary response drops below epsilon or max_batches is reached.
AdaptiveResult adaptive_estimate(const ExtremeResponseModel& model, const SamplerConfig& sampler,
                                 const ConvergenceConfig& convergence, std::span<const double> orders,
                                 std::size_t workers, std::uint64_t seed);

/// Largest relative gap between analytic moments and quadrature of
/// int z^r f(z) dz, computed on the log axis around (center, scale).
struct MomentCheck {
  double max_rel_discrepancy = 0.0;
  bool quadrature_converged = true;
};

MomentCheck two_sided_moment_check(const std::function<double(double)>& log_pdf,
                                   const std::function<double(double)>& analytic_moment, std::span<const double> orders,
                                   double log_center, double log_scale);

}  // namespace fracmix
