#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "fracmix/distributions.hpp"
#include "fracmix/fitting.hpp"
#include "fracmix/moments.hpp"

namespace fracmix {

/// Probability that the extreme exceeds b_lim under the fitted mixture.
double first_passage(const MixtureParams& fit, double b_lim);

/// max_i Z_i / b_i; the system fails exactly when the result exceeds 1.
double equivalent_extreme(std::span<const double> responses, std::span<const double> thresholds);
std::vector<double> equivalent_extremes(const std::vector<std::vector<double>>& responses,
                                        std::span<const double> thresholds);

struct CurveTable {
  std::vector<double> z;
  std::vector<double> pdf;
  std::vector<double> cdf;
  std::vector<double> poe;
};

/// Tabulates pdf/cdf/poe. POE is accumulated from the upper end by integrating
/// the pdf over each grid cell, so it is nonincreasing; cdf = 1 - poe.
CurveTable curve_grid(const MixtureParams& fit, double z_min, double z_max, std::size_t n_points, bool log_spacing);

/// 400 log-spaced points on [mean / 10, sqrt(M2 / 1e-7)].
CurveTable default_curve_grid(const MixtureParams& fit, double mean, double m2);

/// CSV text with a leading "# config_hash=..." line and header z,pdf,cdf,poe.
std::string curves_csv(const CurveTable& table, const std::string& config_hash);
std::string convergence_csv(const std::vector<ConvergenceRecord>& trace, const std::string& config_hash);

struct ThresholdResult {
  double threshold;
  double pf;
};

struct ResponseReport {
  std::string label;
  FitResult fit;
  FractionalMomentSet moments;
  std::vector<ThresholdResult> first_passage;
};

struct ReliabilityReport {
  static constexpr int kSchemaVersion = 1;
  std::string model;
  nlohmann::json config;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::size_t sample_count = 0;
  std::size_t evaluations = 0;
  bool converged = false;
  std::vector<ConvergenceRecord> trace;
  std::vector<ResponseReport> responses;

  nlohmann::json to_json() const;
  /// Parses a report and recomputes every stored first-passage probability from
  /// the stored fit; NumericError if any differs by more than 1e-12.
  static ReliabilityReport from_json(const nlohmann::json& j);
};

}  // namespace fracmix
