#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fracmix/distributions.hpp"

namespace fracmix {

struct InitialValues {
  double eta0 = 1.0;
  double a0 = 0.0;
  double b0 = 0.0;
  double c0 = 0.0;
  double d0 = 0.0;
  double theta0 = 0.0;
  double tau0 = 0.0;
};

/// Moment-matching starting point from the sample mean and standard deviation.
InitialValues closed_form_init(double mean, double std_dev);

struct EigdStageResult {
  EigdParams params;
  double residual_norm;
  bool converged;
  /// b / a above 1e6: the targets look like a constant variable.
  bool near_deterministic;
};

struct LesndStageResult {
  LesndParams params;
  double residual_norm;
  bool converged;
};

/// Matches EIGD moments at orders {1/2, 1, 3/2}.
EigdStageResult stage1_eigd(std::span<const double> targets, const InitialValues& init);

/// Matches LESND moments at orders {1/2, 1, 3/2, 2}.
LesndStageResult stage2_lesnd(std::span<const double> targets, const InitialValues& init);

inline constexpr std::array<double, 3> kStage1Orders{0.5, 1.0, 1.5};
inline constexpr std::array<double, 4> kStage2Orders{0.5, 1.0, 1.5, 2.0};

struct FitOptions {
  double tolerance = 1e-6;
  std::size_t max_restarts = 24;
  std::size_t max_iterations = 400;
  std::uint64_t seed = 0;
};

struct FitResult {
  MixtureParams params;
  double residual_norm;
  std::vector<double> residuals;
  bool converged;
  InitialValues init;
  std::vector<double> orders;
  std::vector<double> target_moments;
  std::vector<double> fitted_moments;
  std::size_t starts_used;

  nlohmann::json to_json() const;
  static FitResult from_json(const nlohmann::json& j);
};

/// sqrt(sum_i ((target_i - M(r_i)) / target_i)^2) for the mixture at `params`.
double moment_residual_norm(const MixtureParams& params, std::span<const double> orders,
                            std::span<const double> targets, std::vector<double>* per_order = nullptr);

/// Fits the eight-parameter mixture to fractional moments by least squares on
/// log-moment residuals, starting from the two-stage component fits with equal
/// weights and falling back to deterministic restarts when the tolerance is missed.
FitResult fit_mixture(std::span<const double> orders, std::span<const double> targets, double mean, double std_dev,
                      const FitOptions& options = {});

}  // namespace fracmix
