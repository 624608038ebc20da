#include "fracmix/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "fracmix/errors.hpp"
#include "fracmix/parallel.hpp"
#include "fracmix/random.hpp"

namespace fracmix {

nlohmann::json BaselineResult::to_json() const {
  nlohmann::json lv = nlohmann::json::array();
  for (const auto& l : levels) {
    lv.push_back({{"level", l.level},
                  {"threshold", l.threshold},
                  {"conditional_probability", l.conditional_probability},
                  {"evaluations", l.evaluations},
                  {"acceptance_rate", l.acceptance_rate}});
  }
  nlohmann::json j = {{"method", method}, {"threshold", threshold}, {"pf", pf},
                      {"evaluations", evaluations}, {"reached", reached}, {"levels", lv}};
  j["cov"] = std::isfinite(cov) ? nlohmann::json(cov) : nlohmann::json(nullptr);
  return j;
}

std::vector<double> mcs_sample_point(const ExtremeResponseModel& model, std::uint64_t seed, std::size_t j) {
  RandomStream rng(seed, stream_id({stream_tag::kMonteCarlo, j}));
  std::vector<double> u(model.dimension());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = model.marginals[i].from_unit(rng.uniform_open());
  return u;
}

std::vector<std::vector<double>> mcs_run(const ExtremeResponseModel& model, std::size_t n, std::uint64_t seed,
                                         std::size_t workers) {
  if (n < 1) throw ConfigError("mcs: N must be positive");
  std::vector<std::vector<double>> out(n);
  parallel_for(n, workers, [&](std::size_t j) { out[j] = model.evaluate(mcs_sample_point(model, seed, j)); });
  return out;
}

BaselineResult mcs_estimate(std::span<const double> values, double threshold) {
  BaselineResult r;
  r.method = "mcs";
  r.threshold = threshold;
  r.evaluations = values.size();
  auto hits = static_cast<std::size_t>(std::count_if(values.begin(), values.end(), [&](double z) { return z > threshold; }));
  auto n = static_cast<double>(values.size());
  r.pf = static_cast<double>(hits) / n;
  r.cov = hits > 0 ? std::sqrt((1.0 - r.pf) / (r.pf * n)) : std::numeric_limits<double>::quiet_NaN();
  return r;
}

BaselineResult mcs_pf(const ExtremeResponseModel& model, std::size_t n, double threshold, std::uint64_t seed,
                      std::size_t workers, std::size_t response) {
  auto rows = mcs_run(model, n, seed, workers);
  std::vector<double> z(rows.size());
  for (std::size_t j = 0; j < rows.size(); ++j) z[j] = rows[j].at(response);
  return mcs_estimate(z, threshold);
}

namespace {

struct Chain {
  std::vector<std::vector<double>> states;
  std::vector<double> values;
  std::size_t accepted = 0;
  std::size_t evaluated = 0;
};

std::vector<double> to_inputs(const ExtremeResponseModel& model, const std::vector<double>& z) {
  std::vector<double> u(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) u[i] = model.marginals[i].from_standard_normal(z[i]);
  return u;
}

// Correlation factor of the level estimator from the indicator sequences of the chains.
double chain_correlation_factor(const std::vector<Chain>& chains, double threshold, double p) {
  std::size_t length = chains.empty() ? 0 : chains.front().values.size();
  if (length < 2 || p <= 0.0 || p >= 1.0) return 0.0;
  double n = 0.0;
  for (const auto& c : chains) n += static_cast<double>(c.values.size());
  double r0 = p * (1.0 - p);
  double gamma = 0.0;
  for (std::size_t k = 1; k < length; ++k) {
    double sum = 0.0;
    double count = 0.0;
    for (const auto& c : chains) {
      for (std::size_t t = 0; t + k < c.values.size(); ++t) {
        sum += (c.values[t] > threshold ? 1.0 : 0.0) * (c.values[t + k] > threshold ? 1.0 : 0.0);
        count += 1.0;
      }
    }
    if (count == 0.0) break;
    double rk = sum / count - p * p;
    gamma += 2.0 * (1.0 - static_cast<double>(k) / static_cast<double>(length)) * rk / r0;
  }
  return std::max(gamma, 0.0);
}

}  // namespace

BaselineResult subset_sim_pf(const ExtremeResponseModel& model, double threshold, const SubsetOptions& options,
                             std::uint64_t seed, std::size_t workers, std::size_t response) {
  const std::size_t n = options.n_per_level;
  const double p0 = options.p0;
  if (!(p0 > 0.0 && p0 < 1.0)) throw ConfigError("subset simulation: p0 must lie in (0, 1)");
  double seeds_real = static_cast<double>(n) * p0;
  auto nc = static_cast<std::size_t>(std::llround(seeds_real));
  if (nc < 1 || std::abs(seeds_real - static_cast<double>(nc)) > 1e-9 || n % nc != 0) {
    throw ConfigError("subset simulation: n_per_level * p0 must be an integer dividing n_per_level");
  }
  const std::size_t chain_length = n / nc;
  const std::size_t dim = model.dimension();

  BaselineResult r;
  r.method = "sus";
  r.threshold = threshold;

  std::vector<std::vector<double>> z(n);
  std::vector<double> y(n);
  parallel_for(n, workers, [&](std::size_t j) {
    RandomStream rng(seed, stream_id({stream_tag::kSubsetLevel0, j}));
    z[j].resize(dim);
    for (double& v : z[j]) v = rng.normal();
    y[j] = model.evaluate(to_inputs(model, z[j])).at(response);
  });
  r.evaluations = n;

  double pf = 1.0;
  double cov2 = 0.0;
  double gamma = 0.0;
  std::size_t produced = n;
  double produced_acceptance = 0.0;
  for (std::size_t level = 0;; ++level) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });
    double cut = 0.5 * (y[idx[n - nc - 1]] + y[idx[n - nc]]);
    auto hits = static_cast<std::size_t>(std::count_if(y.begin(), y.end(), [&](double v) { return v > threshold; }));
    SubsetLevel info;
    info.level = level;
    info.evaluations = produced;
    info.acceptance_rate = produced_acceptance;
    if (cut >= threshold || level + 1 >= options.max_levels) {
      double p = static_cast<double>(hits) / static_cast<double>(n);
      pf *= p;
      info.threshold = threshold;
      info.conditional_probability = p;
      r.levels.push_back(info);
      r.reached = cut >= threshold;
      if (p > 0.0) cov2 += (1.0 - p) / (p * static_cast<double>(n)) * (1.0 + (level == 0 ? 0.0 : gamma));
      r.cov = hits > 0 ? std::sqrt(cov2) : std::numeric_limits<double>::quiet_NaN();
      break;
    }
    pf *= p0;
    cov2 += (1.0 - p0) / (p0 * static_cast<double>(n)) * (1.0 + (level == 0 ? 0.0 : gamma));
    info.threshold = cut;
    info.conditional_probability = p0;

    std::vector<Chain> chains(nc);
    parallel_for(nc, workers, [&](std::size_t c) {
      Chain& ch = chains[c];
      std::size_t s = idx[n - nc + c];
      std::vector<double> cur = z[s];
      double cur_y = y[s];
      ch.states.push_back(cur);
      ch.values.push_back(cur_y);
      RandomStream rng(seed, stream_id({stream_tag::kSubsetChain, level, c}));
      std::vector<double> cand(dim);
      for (std::size_t step = 1; step < chain_length; ++step) {
        bool moved = false;
        for (std::size_t i = 0; i < dim; ++i) {
          double xi = cur[i] + options.proposal_width * (2.0 * rng.uniform() - 1.0);
          double ratio = std::exp(0.5 * (cur[i] * cur[i] - xi * xi));
          bool take = rng.uniform() < ratio;
          cand[i] = take ? xi : cur[i];
          moved = moved || take;
        }
        if (moved) {
          double v = model.evaluate(to_inputs(model, cand)).at(response);
          ++ch.evaluated;
          if (v > cut) {
            cur = cand;
            cur_y = v;
            ++ch.accepted;
          }
        }
        ch.states.push_back(cur);
        ch.values.push_back(cur_y);
      }
    });
    std::size_t accepted = 0;
    std::size_t evaluated = 0;
    std::size_t k = 0;
    for (auto& ch : chains) {
      accepted += ch.accepted;
      evaluated += ch.evaluated;
      for (std::size_t t = 0; t < ch.states.size(); ++t, ++k) {
        z[k] = std::move(ch.states[t]);
        y[k] = ch.values[t];
      }
    }
    produced_acceptance = static_cast<double>(accepted) / static_cast<double>(n - nc);
    produced = evaluated;
    r.levels.push_back(info);
    r.evaluations += evaluated;

    // Correlation of the next level's estimator is measured on these chains at the next cut.
    std::vector<double> sorted = y;
    std::sort(sorted.begin(), sorted.end());
    double next_cut = std::min(threshold, 0.5 * (sorted[n - nc - 1] + sorted[n - nc]));
    double p_next = static_cast<double>(std::count_if(y.begin(), y.end(), [&](double v) { return v > next_cut; })) /
                    static_cast<double>(n);
    gamma = chain_correlation_factor(chains, next_cut, p_next);
  }
  r.pf = pf;
  return r;
}

}  // namespace fracmix
