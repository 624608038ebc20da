#pragma once

#include <string>
#include <vector>

#include "fracmix/baselines.hpp"
#include "fracmix/config.hpp"
#include "fracmix/model.hpp"
#include "fracmix/report.hpp"

namespace fracmix {

struct PipelineResult {
  ReliabilityReport report;
  AdaptiveResult adaptive;
  std::vector<CurveTable> curves;
};

/// Adaptive moment estimation, one mixture fit per model response, and
/// first-passage probabilities at every configured threshold. Exceptions keep
/// their type and carry a "[stage] " message prefix.
PipelineResult run_pipeline(const RunConfig& config);
PipelineResult run_pipeline(const RunConfig& config, const ExtremeResponseModel& model);

/// The two halves of run_pipeline.
AdaptiveResult estimate_stage(const RunConfig& config, const ExtremeResponseModel& model);
PipelineResult fit_stage(const RunConfig& config, const ExtremeResponseModel& model, AdaptiveResult adaptive);

/// True when sampling converged and every mixture fit met its tolerance.
bool pipeline_converged(const PipelineResult& result);

/// Writes report.json, curves_<label>.csv and convergence.csv into `dir`.
void write_pipeline_outputs(const PipelineResult& result, const std::string& dir);
/// Writes convergence.csv.partial after a failure past the sampling stage.
void write_partial_outputs(const AdaptiveResult& adaptive, const std::string& config_hash, const std::string& dir);

enum class BaselineMethod { kMcs, kSubset };

/// Runs a baseline at every effective threshold on the model's primary response.
std::vector<BaselineResult> run_baseline(const RunConfig& config, BaselineMethod method);
std::vector<BaselineResult> run_baseline(const RunConfig& config, BaselineMethod method,
                                         const ExtremeResponseModel& model);

}  // namespace fracmix
