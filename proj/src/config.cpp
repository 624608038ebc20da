#include "fracmix/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "fracmix/errors.hpp"

namespace fracmix {

std::vector<double> RunConfig::effective_thresholds() const {
  if (!thresholds.empty()) return thresholds;
  if (model == "bouc_wen_frame") return {95.0, 80.0, 67.0};
  return {7.0};
}

void RunConfig::validate() const {
  if (model != "duffing" && model != "bouc_wen_frame") throw ConfigError("unknown model '" + model + "'");
  if (!model_params.is_object()) throw ConfigError("model_params must be an object");
  if (sampler.initial_size < 1 || sampler.refinement_factor < 1) throw ConfigError("sampler: N and delta must be positive");
  if (!(convergence.epsilon > 0.0)) throw ConfigError("convergence: epsilon must be positive");
  if (convergence.batch < 1 || convergence.max_batches < 1) throw ConfigError("convergence: batch and max_batches must be positive");
  if (convergence.bootstrap_replicates < 2) throw ConfigError("convergence: at least two bootstrap replicates");
  if (orders.size() < 2) throw ConfigError("orders: at least two fractional orders");
  for (double r : orders) {
    if (!(r > 0.0) || !std::isfinite(r)) throw ConfigError("orders must be positive");
  }
  for (double b : thresholds) {
    if (!(b > 0.0) || !std::isfinite(b)) throw ConfigError("thresholds must be positive");
  }
  if (workers < 1) throw ConfigError("workers must be at least 1");
  if (curve_points < 2) throw ConfigError("curve_points must be at least 2");
  if (mcs_samples < 1) throw ConfigError("mcs_samples must be positive");
  if (!(subset.p0 > 0.0 && subset.p0 < 1.0) || subset.n_per_level < 2) throw ConfigError("subset: invalid p0 or n_per_level");
}

nlohmann::json RunConfig::to_json() const {
  return {{"model", model},
          {"model_params", model_params},
          {"sampler", {{"initial_size", sampler.initial_size}, {"refinement_factor", sampler.refinement_factor}}},
          {"convergence",
           {{"epsilon", convergence.epsilon},
            {"batch", convergence.batch},
            {"max_batches", convergence.max_batches},
            {"bootstrap_replicates", convergence.bootstrap_replicates}}},
          {"orders", orders},
          {"thresholds", thresholds},
          {"seed", seed},
          {"workers", workers},
          {"output_dir", output_dir},
          {"fit_restarts", fit_restarts},
          {"curve_points", curve_points},
          {"mcs_samples", mcs_samples},
          {"subset",
           {{"n_per_level", subset.n_per_level},
            {"p0", subset.p0},
            {"max_levels", subset.max_levels},
            {"proposal_width", subset.proposal_width}}}};
}

namespace {

class Reader {
 public:
  Reader(const nlohmann::json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    if (!j_.contains(key)) return;
    seen_.emplace_back(key);
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
  }

  const nlohmann::json* sub(const char* key) {
    if (!j_.contains(key)) return nullptr;
    seen_.emplace_back(key);
    return &j_.at(key);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end()) {
        throw ConfigError(where_ + ": unknown key '" + it.key() + "'");
      }
    }
  }

 private:
  const nlohmann::json& j_;
  std::string where_;
  std::vector<std::string> seen_;
};

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig c;
  Reader top(j, "config");
  top.get("model", c.model);
  if (const auto* p = top.sub("model_params")) c.model_params = *p;
  if (const auto* s = top.sub("sampler")) {
    Reader r(*s, "sampler");
    r.get("initial_size", c.sampler.initial_size);
    r.get("refinement_factor", c.sampler.refinement_factor);
    r.finish();
  }
  if (const auto* s = top.sub("convergence")) {
    Reader r(*s, "convergence");
    r.get("epsilon", c.convergence.epsilon);
    r.get("batch", c.convergence.batch);
    r.get("max_batches", c.convergence.max_batches);
    r.get("bootstrap_replicates", c.convergence.bootstrap_replicates);
    r.finish();
  }
  top.get("orders", c.orders);
  top.get("thresholds", c.thresholds);
  top.get("seed", c.seed);
  top.get("workers", c.workers);
  top.get("output_dir", c.output_dir);
  top.get("fit_restarts", c.fit_restarts);
  top.get("curve_points", c.curve_points);
  top.get("mcs_samples", c.mcs_samples);
  if (const auto* s = top.sub("subset")) {
    Reader r(*s, "subset");
    r.get("n_per_level", c.subset.n_per_level);
    r.get("p0", c.subset.p0);
    r.get("max_levels", c.subset.max_levels);
    r.get("proposal_width", c.subset.proposal_width);
    r.finish();
  }
  top.finish();
  c.validate();
  return c;
}

std::string RunConfig::hash() const {
  nlohmann::json canonical = to_json();
  canonical.erase("workers");
  canonical.erase("output_dir");
  std::string text = canonical.dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace fracmix
