// Command-line front end: fit, baseline mcs|sus, curves.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fracmix/config.hpp"
#include "fracmix/dynamics.hpp"
#include "fracmix/errors.hpp"
#include "fracmix/pipeline.hpp"
#include "fracmix/report.hpp"

namespace {

using namespace fracmix;
namespace fs = std::filesystem;

enum Exit { kOk = 0, kConfig = 2, kConvergence = 3, kNumeric = 4 };

struct Overrides {
  std::string config_path;
  std::string model;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  double epsilon = 0.0;
  std::size_t batch = 0;
  std::vector<double> thresholds;
  std::string out;
  long debug_trace = -1;
  bool speedup = false;
};

void log(const std::string& msg) { std::cerr << "fracmix: " << msg << "\n"; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
}

RunConfig load_config(const Overrides& o, CLI::App& app) {
  RunConfig c;
  if (!o.config_path.empty()) {
    std::ifstream is(o.config_path);
    if (!is) throw ConfigError("cannot open config " + o.config_path);
    nlohmann::json j;
    try {
      is >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    c = RunConfig::from_json(j);
  }
  if (app.count("--model")) c.model = o.model;
  if (app.count("--seed")) c.seed = o.seed;
  if (app.count("--workers")) c.workers = o.workers;
  if (app.count("--epsilon")) c.convergence.epsilon = o.epsilon;
  if (app.count("--batch")) c.convergence.batch = o.batch;
  if (app.count("--threshold")) c.thresholds = o.thresholds;
  if (app.count("--out")) c.output_dir = o.out;
  c.validate();
  return c;
}

void write_debug_trace(const ExtremeResponseModel& model, const RunConfig& c, std::size_t index) {
  std::vector<double> u = mcs_sample_point(model, c.seed, index);
  std::ostringstream os;
  os << "# config_hash=" << c.hash() << " sample=" << index << "\n";
  os.precision(17);
  if (model.name == "duffing") {
    Trajectory tr = duffing_trace(u, duffing_config_from_json(c.model_params));
    os << "t,y,v\n";
    for (std::size_t k = 0; k < tr.t.size(); ++k) os << tr.t[k] << "," << tr.y[k] << "," << tr.v[k] << "\n";
  } else {
    FrameTrace tr = frame_trace(u, frame_config_from_json(c.model_params));
    os << "t,ground";
    for (std::size_t s = 0; s < tr.drift_mm.size(); ++s) os << ",drift_mm_" << (s + 1);
    os << "\n";
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
      os << tr.t[k] << "," << tr.ground[k];
      for (const auto& d : tr.drift_mm) os << "," << d[k];
      os << "\n";
    }
  }
  fs::path path = fs::path(c.output_dir) / ("trace_" + std::to_string(index) + ".csv");
  write_file(path, os.str());
  log("wrote " + path.string());
}

// T(1)/T(W) on one batch of model evaluations.
void log_speedup(const ExtremeResponseModel& model, const RunConfig& c, std::size_t count) {
  auto t0 = std::chrono::steady_clock::now();
  mcs_run(model, count, c.seed, 1);
  double t1 = seconds_since(t0);
  t0 = std::chrono::steady_clock::now();
  mcs_run(model, count, c.seed, c.workers);
  double tw = seconds_since(t0);
  std::ostringstream os;
  os << "speedup T(1)/T(" << c.workers << ") = " << (t1 / tw) << " over " << count << " evaluations (" << t1
     << " s vs " << tw << " s)";
  log(os.str());
}

int cmd_fit(const RunConfig& c, const Overrides& o) {
  ExtremeResponseModel model = make_model(c.model, c.model_params);
  if (o.debug_trace >= 0) write_debug_trace(model, c, static_cast<std::size_t>(o.debug_trace));
  auto t0 = std::chrono::steady_clock::now();
  AdaptiveResult adaptive = estimate_stage(c, model);
  log("sampling: " + std::to_string(adaptive.evaluations) + " evaluations, " + std::to_string(seconds_since(t0)) +
      " s" + (adaptive.converged ? "" : " (convergence cap reached)"));
  PipelineResult result;
  try {
    result = fit_stage(c, model, adaptive);
  } catch (...) {
    write_partial_outputs(adaptive, c.hash(), c.output_dir);
    log("wrote partial artifacts to " + c.output_dir);
    throw;
  }
  write_pipeline_outputs(result, c.output_dir);
  for (const auto& r : result.report.responses) {
    for (const auto& t : r.first_passage) {
      std::ostringstream os;
      os.precision(6);
      os << r.label << ": p_f(" << t.threshold << ") = " << t.pf;
      log(os.str());
    }
  }
  log("total " + std::to_string(seconds_since(t0)) + " s; wrote " + c.output_dir);
  if (o.speedup) log_speedup(model, c, std::min<std::size_t>(adaptive.evaluations, 64));
  return pipeline_converged(result) ? kOk : kConvergence;
}

int cmd_baseline(const RunConfig& c, const Overrides& o, const std::string& method_name) {
  BaselineMethod method = method_name == "mcs" ? BaselineMethod::kMcs : BaselineMethod::kSubset;
  ExtremeResponseModel model = make_model(c.model, c.model_params);
  if (o.debug_trace >= 0) write_debug_trace(model, c, static_cast<std::size_t>(o.debug_trace));
  auto t0 = std::chrono::steady_clock::now();
  std::vector<BaselineResult> results = run_baseline(c, method, model);
  double wall = seconds_since(t0);
  nlohmann::json j;
  j["method"] = method_name;
  j["model"] = model.name;
  j["response"] = model.labels[model.primary];
  j["config_hash"] = c.hash();
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["wall_seconds"] = wall;
  std::size_t evaluations = 0;
  bool reached = true;
  for (const auto& r : results) {
    j["results"].push_back(r.to_json());
    evaluations += r.evaluations;
    reached = reached && r.reached;
  }
  // MCS reuses one sample set for every threshold.
  if (method == BaselineMethod::kMcs && !results.empty()) evaluations = results.front().evaluations;
  j["evaluations"] = evaluations;
  fs::path path = fs::path(c.output_dir) / ("baseline_" + method_name + ".json");
  write_file(path, j.dump(2) + "\n");
  for (const auto& r : results) {
    std::ostringstream os;
    os.precision(6);
    os << method_name << ": p_f(" << r.threshold << ") = " << r.pf << " cov " << r.cov;
    log(os.str());
  }
  log(std::to_string(evaluations) + " evaluations in " + std::to_string(wall) + " s; wrote " + path.string());
  if (o.speedup) log_speedup(model, c, std::min<std::size_t>(evaluations, 64));
  return reached ? kOk : kConvergence;
}

int cmd_curves(const RunConfig& c, const std::string& report_path, std::size_t points, double z_min, double z_max,
               bool linear) {
  fs::path path = report_path.empty() ? fs::path(c.output_dir) / "report.json" : fs::path(report_path);
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open report " + path.string());
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("report is not valid JSON: ") + e.what());
  }
  ReliabilityReport rep = ReliabilityReport::from_json(j);
  for (const auto& r : rep.responses) {
    double m2 = r.moments.mean * r.moments.mean + r.moments.std_dev * r.moments.std_dev;
    double lo = z_min > 0.0 ? z_min : r.moments.mean / 10.0;
    double hi = z_max > 0.0 ? z_max : std::max(std::sqrt(m2 / 1e-7), r.moments.mean / 5.0);
    if (!(lo < hi)) throw ConfigError("curves: z_min must be below z_max");
    CurveTable t = curve_grid(r.fit.params, lo, hi, points, !linear);
    fs::path out = fs::path(c.output_dir) / ("curves_" + r.label + ".csv");
    write_file(out, curves_csv(t, rep.config_hash));
    log("wrote " + out.string());
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extreme-value reliability from adaptive fractional moments"};
  app.require_subcommand(1);
  app.fallthrough();
  Overrides o;
  app.add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--model", o.model, "duffing | bouc_wen_frame");
  app.add_option("--seed", o.seed, "Master seed");
  app.add_option("--workers", o.workers, "Evaluation threads");
  app.add_option("--epsilon", o.epsilon, "COV threshold on the second-order moment");
  app.add_option("--batch", o.batch, "Samples added per extension");
  app.add_option("--threshold", o.thresholds, "Safe threshold b_lim (repeatable)");
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--debug-trace", o.debug_trace, "Dump the response history of MCS sample K");
  app.add_flag("--speedup", o.speedup, "Log T(1)/T(workers) on a calibration batch");

  auto* fit = app.add_subcommand("fit", "Adaptive sampling, mixture fit and first-passage report");
  auto* baseline = app.add_subcommand("baseline", "Monte Carlo or subset simulation reference");
  std::string method;
  baseline->add_option("method", method, "mcs | sus")->required()->check(CLI::IsMember({"mcs", "sus"}));
  auto* curves = app.add_subcommand("curves", "Re-tabulate pdf/cdf/poe curves from a stored report");
  std::string report_path;
  std::size_t points = 400;
  double z_min = 0.0, z_max = 0.0;
  bool linear = false;
  curves->add_option("--report", report_path, "Report path (default <out>/report.json)");
  curves->add_option("--points", points, "Grid points")->check(CLI::Range(2, 1000000));
  curves->add_option("--z-min", z_min, "Lower grid end");
  curves->add_option("--z-max", z_max, "Upper grid end");
  curves->add_flag("--linear", linear, "Linear instead of log spacing");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    RunConfig c = load_config(o, app);
    if (*fit) return cmd_fit(c, o);
    if (*baseline) return cmd_baseline(c, o, method);
    if (*curves) return cmd_curves(c, report_path, points, z_min, z_max, linear);
  } catch (const ConfigError& e) {
    log(std::string("config error: ") + e.what());
    return kConfig;
  } catch (const NumericError& e) {
    log(std::string("numeric error: ") + e.what());
    return kNumeric;
  } catch (const DomainError& e) {
    log(std::string("numeric error: ") + e.what());
    return kNumeric;
  } catch (const RangeError& e) {
    log(std::string("numeric error: ") + e.what());
    return kNumeric;
  } catch (const std::exception& e) {
    log(std::string("error: ") + e.what());
    return kNumeric;
  }
  return kOk;
}
