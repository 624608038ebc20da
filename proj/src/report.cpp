#include "fracmix/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "fracmix/errors.hpp"
#include "fracmix/quadrature.hpp"

namespace fracmix {

double first_passage(const MixtureParams& fit, double b_lim) {
  if (!(b_lim >= 0.0)) throw DomainError("first_passage: threshold must be nonnegative");
  return mixture_poe(b_lim, fit);
}

double equivalent_extreme(std::span<const double> responses, std::span<const double> thresholds) {
  if (responses.size() != thresholds.size() || responses.empty()) {
    throw ConfigError("equivalent_extreme: one threshold per response is required");
  }
  double z = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < responses.size(); ++i) {
    if (!(thresholds[i] > 0.0)) throw DomainError("equivalent_extreme: thresholds must be positive");
    z = std::max(z, responses[i] / thresholds[i]);
  }
  return z;
}

std::vector<double> equivalent_extremes(const std::vector<std::vector<double>>& responses,
                                        std::span<const double> thresholds) {
  std::vector<double> out(responses.size());
  for (std::size_t k = 0; k < responses.size(); ++k) out[k] = equivalent_extreme(responses[k], thresholds);
  return out;
}

CurveTable curve_grid(const MixtureParams& fit, double z_min, double z_max, std::size_t n_points, bool log_spacing) {
  if (!(z_min > 0.0) || !(z_max > z_min) || n_points < 2) {
    throw ConfigError("curve_grid: need 0 < z_min < z_max and at least two points");
  }
  CurveTable t;
  t.z.resize(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    double f = static_cast<double>(i) / static_cast<double>(n_points - 1);
    t.z[i] = log_spacing ? std::exp(std::log(z_min) + f * (std::log(z_max) - std::log(z_min)))
                         : z_min + f * (z_max - z_min);
  }
  t.z.front() = z_min;
  t.z.back() = z_max;
  t.pdf.resize(n_points);
  t.poe.resize(n_points);
  t.cdf.resize(n_points);
  for (std::size_t i = 0; i < n_points; ++i) t.pdf[i] = mixture_pdf(t.z[i], fit);
  QuadratureOptions opt;
  opt.abs_tol = 1e-300;
  opt.rel_tol = 1e-12;
  auto pdf = [&](double z) { return mixture_pdf(z, fit); };
  t.poe.back() = mixture_poe(z_max, fit);
  for (std::size_t i = n_points - 1; i-- > 0;) {
    QuadratureResult q = integrate(pdf, t.z[i], t.z[i + 1], opt);
    if (!q.converged && q.abs_error > 1e-14) throw NumericError("curve_grid: cell quadrature did not converge");
    t.poe[i] = std::min(1.0, t.poe[i + 1] + std::max(0.0, q.value));
  }
  for (std::size_t i = 0; i < n_points; ++i) t.cdf[i] = 1.0 - t.poe[i];
  return t;
}

CurveTable default_curve_grid(const MixtureParams& fit, double mean, double m2) {
  double lo = mean / 10.0;
  double hi = std::sqrt(m2 / 1e-7);
  return curve_grid(fit, lo, std::max(hi, 2.0 * lo), 400, true);
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string curves_csv(const CurveTable& t, const std::string& config_hash) {
  std::ostringstream os;
  os << "# config_hash=" << config_hash << "\n";
  os << "z,pdf,cdf,poe\n";
  for (std::size_t i = 0; i < t.z.size(); ++i) {
    os << fmt(t.z[i]) << ',' << fmt(t.pdf[i]) << ',' << fmt(t.cdf[i]) << ',' << fmt(t.poe[i]) << '\n';
  }
  return os.str();
}

std::string convergence_csv(const std::vector<ConvergenceRecord>& trace, const std::string& config_hash) {
  std::ostringstream os;
  os << "# config_hash=" << config_hash << "\n";
  os << "batch,samples,M1,M2,cov_M2\n";
  for (const auto& r : trace) {
    os << r.batch << ',' << r.samples << ',' << fmt(r.m1) << ',' << fmt(r.m2) << ',' << fmt(r.cov_m2) << '\n';
  }
  return os.str();
}

nlohmann::json ReliabilityReport::to_json() const {
  nlohmann::json tr = nlohmann::json::array();
  for (const auto& r : trace) {
    tr.push_back({{"batch", r.batch}, {"samples", r.samples}, {"M1", r.m1}, {"M2", r.m2}, {"cov_M2", r.cov_m2}});
  }
  nlohmann::json resp = nlohmann::json::array();
  for (const auto& r : responses) {
    nlohmann::json fp = nlohmann::json::array();
    for (const auto& t : r.first_passage) fp.push_back({{"threshold", t.threshold}, {"pf", t.pf}});
    resp.push_back({{"label", r.label},
                    {"fit", r.fit.to_json()},
                    {"moments",
                     {{"orders", r.moments.orders},
                      {"estimates", r.moments.estimates},
                      {"sample_count", r.moments.sample_count},
                      {"mean", r.moments.mean},
                      {"std", r.moments.std_dev},
                      {"variance_floored", r.moments.variance_floored}}},
                    {"first_passage", fp}});
  }
  return {{"schema_version", kSchemaVersion},
          {"model", model},
          {"config", config},
          {"config_hash", config_hash},
          {"seed", seed},
          {"sample_count", sample_count},
          {"evaluations", evaluations},
          {"converged", converged},
          {"convergence_trace", tr},
          {"responses", resp}};
}

ReliabilityReport ReliabilityReport::from_json(const nlohmann::json& j) {
  if (j.at("schema_version").get<int>() != kSchemaVersion) throw ConfigError("report: unsupported schema_version");
  ReliabilityReport r;
  r.model = j.at("model").get<std::string>();
  r.config = j.at("config");
  r.config_hash = j.at("config_hash").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.sample_count = j.at("sample_count").get<std::size_t>();
  r.evaluations = j.at("evaluations").get<std::size_t>();
  r.converged = j.at("converged").get<bool>();
  for (const auto& t : j.at("convergence_trace")) {
    r.trace.push_back({t.at("batch").get<std::size_t>(), t.at("samples").get<std::size_t>(), t.at("M1").get<double>(),
                       t.at("M2").get<double>(), t.at("cov_M2").get<double>()});
  }
  for (const auto& x : j.at("responses")) {
    const auto& m = x.at("moments");
    FractionalMomentSet ms;
    ms.orders = m.at("orders").get<std::vector<double>>();
    ms.estimates = m.at("estimates").get<std::vector<double>>();
    ms.sample_count = m.at("sample_count").get<std::size_t>();
    ms.mean = m.at("mean").get<double>();
    ms.std_dev = m.at("std").get<double>();
    ms.variance_floored = m.at("variance_floored").get<bool>();
    ResponseReport rr{x.at("label").get<std::string>(), FitResult::from_json(x.at("fit")), ms, {}};
    for (const auto& t : x.at("first_passage")) {
      double b = t.at("threshold").get<double>();
      double stored = t.at("pf").get<double>();
      double again = first_passage(rr.fit.params, b);
      if (std::abs(again - stored) > 1e-12) {
        throw NumericError("report: stored p_f for '" + rr.label + "' does not match the fitted model");
      }
      rr.first_passage.push_back({b, stored});
    }
    r.responses.push_back(std::move(rr));
  }
  return r;
}

}  // namespace fracmix
