#include "fracmix/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "fracmix/errors.hpp"
#include "fracmix/parallel.hpp"
#include "fracmix/quadrature.hpp"
#include "fracmix/random.hpp"

namespace fracmix {

std::vector<double> default_orders() {
  std::vector<double> r(8);
  for (int i = 0; i < 8; ++i) r[static_cast<std::size_t>(i)] = 0.25 * (i + 1);
  return r;
}

double FractionalMomentSet::at(double order) const {
  for (std::size_t i = 0; i < orders.size(); ++i) {
    if (orders[i] == order) return estimates[i];
  }
  throw std::out_of_range("moment order not estimated: " + std::to_string(order));
}

namespace {

class NeumaierSum {
 public:
  void add(double v) {
    double t = sum_ + v;
    comp_ += std::abs(sum_) >= std::abs(v) ? (sum_ - t) + v : (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double power(double z, double r) {
  if (r == 0.0) return 1.0;
  if (r == 1.0) return z;
  if (r == 2.0) return z * z;
  return std::pow(z, r);
}

}  // namespace

FractionalMomentSet estimate_moments(std::span<const double> values, std::span<const double> weights,
                                     std::span<const double> orders) {
  if (values.size() != weights.size() || values.empty()) {
    throw ConfigError("estimate_moments: values and weights must be non-empty and of equal length");
  }
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
    return values[x] != values[y] ? values[x] < values[y] : weights[x] < weights[y];
  });
  NeumaierSum wsum;
  for (std::size_t k : idx) wsum.add(weights[k]);
  if (std::abs(wsum.value() - 1.0) > 1e-10) throw ConfigError("estimate_moments: weights must sum to 1");

  FractionalMomentSet out;
  out.orders.assign(orders.begin(), orders.end());
  out.sample_count = values.size();
  for (double r : orders) {
    if (r == 0.0) {
      out.estimates.push_back(1.0);
      continue;
    }
    NeumaierSum s;
    for (std::size_t k : idx) {
      double z = values[k];
      if (!(z > 0.0) && r != std::floor(r)) {
        throw DomainError("estimate_moments: sample " + std::to_string(k) + " has non-positive value " +
                          std::to_string(z));
      }
      s.add(weights[k] * power(z, r));
    }
    out.estimates.push_back(s.value());
  }
  NeumaierSum m1, m2;
  for (std::size_t k : idx) {
    m1.add(weights[k] * values[k]);
    m2.add(weights[k] * values[k] * values[k]);
  }
  out.mean = m1.value();
  double var = m2.value() - out.mean * out.mean;
  if (var < 0.0) {
    out.variance_floored = true;
    var = 0.0;
  }
  out.std_dev = std::sqrt(var);
  return out;
}

std::vector<double> AdaptiveResult::response_column(std::size_t j) const {
  std::vector<double> col(responses.size());
  for (std::size_t k = 0; k < responses.size(); ++k) col[k] = responses[k].at(j);
  return col;
}

std::vector<std::vector<double>> evaluate_batch(const ExtremeResponseModel& model,
                                                const std::vector<std::vector<double>>& unit_points,
                                                std::size_t workers) {
  std::vector<std::vector<double>> out(unit_points.size());
  parallel_for(unit_points.size(), workers, [&](std::size_t k) {
    std::vector<double> u = to_physical(unit_points[k], model.marginals);
    out[k] = model.evaluate(u);
    if (out[k].size() != model.response_count()) throw std::logic_error("model returned the wrong number of responses");
  });
  return out;
}

AdaptiveResult adaptive_estimate(const ExtremeResponseModel& model, const SamplerConfig& sampler,
                                 const ConvergenceConfig& convergence, std::span<const double> orders,
                                 std::size_t workers, std::uint64_t seed) {
  if (!(convergence.epsilon > 0.0) || convergence.batch < 1 || convergence.max_batches < 1) {
    throw ConfigError("adaptive_estimate: epsilon must be positive and batch, max_batches at least 1");
  }
  std::size_t batch = std::max<std::size_t>(convergence.batch, static_cast<std::size_t>(sampler.initial_size));
  RlssDesign design = RlssDesign::lss_init(sampler.initial_size, model.dimension(), seed, sampler.refinement_factor);
  AdaptiveResult result;
  std::vector<double> order_list(orders.begin(), orders.end());
  for (std::size_t l = 1; l <= convergence.max_batches; ++l) {
    std::size_t first = design.extend(l == 1 ? batch : convergence.batch);
    std::vector<std::vector<double>> points;
    for (std::size_t k = first; k < design.sample_count(); ++k) {
      auto p = design.point(k);
      points.emplace_back(p.begin(), p.end());
    }
    auto fresh = evaluate_batch(model, points, workers);
    result.evaluations += fresh.size();
    for (auto& v : fresh) result.responses.push_back(std::move(v));
    result.weights = design.weights();

    std::vector<double> z = result.response_column(model.primary);
    FractionalMomentSet m = estimate_moments(z, result.weights, std::vector<double>{1.0, 2.0});
    double cov = weighted_bootstrap_cov(z, result.weights, 2.0, convergence.bootstrap_replicates,
                                        stream_id({stream_tag::kBootstrap, seed, l}));
    result.trace.push_back({l, design.sample_count(), m.estimates[0], m.estimates[1], cov});
    if (cov < convergence.epsilon) {
      result.converged = true;
      break;
    }
  }
  for (std::size_t j = 0; j < model.response_count(); ++j) {
    result.moments.push_back(estimate_moments(result.response_column(j), result.weights, order_list));
  }
  return result;
}

MomentCheck two_sided_moment_check(const std::function<double(double)>& log_pdf,
                                   const std::function<double(double)>& analytic_moment, std::span<const double> orders,
                                   double log_center, double log_scale) {
  MomentCheck out;
  QuadratureOptions opt;
  opt.abs_tol = 0.0;
  opt.rel_tol = 1e-12;
  opt.max_intervals = 4000;
  opt.initial_panels = 8;
  for (double r : orders) {
    auto integrand = [&](double u) {
      double l = log_pdf(std::exp(u));
      if (!std::isfinite(l)) return 0.0;
      return std::exp(l + (r + 1.0) * u);
    };
    QuadratureResult q = integrate_real_line(integrand, log_center, log_scale, opt);
    out.quadrature_converged = out.quadrature_converged && q.converged;
    double exact = analytic_moment(r);
    out.max_rel_discrepancy = std::max(out.max_rel_discrepancy, std::abs(q.value - exact) / std::abs(exact));
  }
  return out;
}

}  // namespace fracmix
