#include "fracmix/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <cmath>
#include <algorithm>

#include "fracmix/dynamics.hpp"
#include "fracmix/errors.hpp"

namespace fracmix {

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

template <class Fn>
auto tagged(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  const std::string tag = "[" + stage + "] ";
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw ConfigError(tag + e.what());
  } catch (const DomainError& e) {
    throw DomainError(tag + e.what());
  } catch (const RangeError& e) {
    throw RangeError(tag + e.what());
  } catch (const NumericError& e) {
    throw NumericError(tag + e.what());
  } catch (const std::logic_error& e) {
    throw std::logic_error(tag + e.what());
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(tag + e.what());
  }
}

}  // namespace

PipelineResult run_pipeline(const RunConfig& config) {
  tagged("config", [&] { config.validate(); });
  auto model = tagged("model", [&] { return make_model(config.model, config.model_params); });
  return run_pipeline(config, model);
}

PipelineResult run_pipeline(const RunConfig& config, const ExtremeResponseModel& model) {
  return fit_stage(config, model, estimate_stage(config, model));
}

AdaptiveResult estimate_stage(const RunConfig& config, const ExtremeResponseModel& model) {
  tagged("config", [&] { config.validate(); });
  return tagged("sampling", [&] {
    return adaptive_estimate(model, config.sampler, config.convergence, config.orders, config.workers, config.seed);
  });
}

bool pipeline_converged(const PipelineResult& result) {
  if (!result.report.converged) return false;
  return std::all_of(result.report.responses.begin(), result.report.responses.end(),
                     [](const ResponseReport& r) { return r.fit.converged; });
}

PipelineResult fit_stage(const RunConfig& config, const ExtremeResponseModel& model, AdaptiveResult adaptive) {
  PipelineResult out;
  out.adaptive = std::move(adaptive);
  ReliabilityReport& rep = out.report;
  rep.model = model.name;
  rep.config = config.to_json();
  rep.config.erase("workers");
  rep.config.erase("output_dir");
  rep.config_hash = config.hash();
  rep.seed = config.seed;
  rep.sample_count = out.adaptive.responses.size();
  rep.evaluations = out.adaptive.evaluations;
  rep.converged = out.adaptive.converged;
  rep.trace = out.adaptive.trace;
  FitOptions fo;
  fo.seed = config.seed;
  fo.max_restarts = config.fit_restarts;
  std::vector<double> thresholds = config.effective_thresholds();
  for (std::size_t j = 0; j < model.response_count(); ++j) {
    const FractionalMomentSet& m = out.adaptive.moments[j];
    const std::string& label = model.labels[j];
    if (!(m.std_dev > 0.0)) throw NumericError("[fit:" + label + "] zero sample variance");
    FitResult fit = tagged("fit:" + label, [&] { return fit_mixture(m.orders, m.estimates, m.mean, m.std_dev, fo); });
    ResponseReport rr{label, fit, m, {}};
    tagged("report:" + label, [&] {
      for (double b : thresholds) rr.first_passage.push_back({b, first_passage(fit.params, b)});
      double m2 = m.mean * m.mean + m.std_dev * m.std_dev;
      out.curves.push_back(curve_grid(fit.params, m.mean / 10.0, std::max(std::sqrt(m2 / 1e-7), m.mean / 5.0),
                                      config.curve_points, true));
    });
    rep.responses.push_back(std::move(rr));
  }
  return out;
}

void write_pipeline_outputs(const PipelineResult& result, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::filesystem::path root(dir);
  write_text(root / "report.json", result.report.to_json().dump(2) + "\n");
  for (std::size_t j = 0; j < result.curves.size(); ++j) {
    write_text(root / ("curves_" + result.report.responses[j].label + ".csv"),
               curves_csv(result.curves[j], result.report.config_hash));
  }
  write_text(root / "convergence.csv", convergence_csv(result.report.trace, result.report.config_hash));
}

void write_partial_outputs(const AdaptiveResult& adaptive, const std::string& config_hash, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_text(std::filesystem::path(dir) / "convergence.csv.partial", convergence_csv(adaptive.trace, config_hash));
}

std::vector<BaselineResult> run_baseline(const RunConfig& config, BaselineMethod method) {
  config.validate();
  return run_baseline(config, method, make_model(config.model, config.model_params));
}

std::vector<BaselineResult> run_baseline(const RunConfig& config, BaselineMethod method,
                                         const ExtremeResponseModel& model) {
  config.validate();
  std::vector<BaselineResult> out;
  std::vector<double> thresholds = config.effective_thresholds();
  if (method == BaselineMethod::kMcs) {
    auto rows = mcs_run(model, config.mcs_samples, config.seed, config.workers);
    std::vector<double> z(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) z[k] = rows[k].at(model.primary);
    for (double b : thresholds) out.push_back(mcs_estimate(z, b));
  } else {
    for (double b : thresholds) {
      out.push_back(subset_sim_pf(model, b, config.subset, config.seed, config.workers, model.primary));
    }
  }
  return out;
}

}  // namespace fracmix
