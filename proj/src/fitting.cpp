#include "fracmix/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "fracmix/errors.hpp"
#include "fracmix/random.hpp"

namespace fracmix {

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Returns false when the parameters are outside the model's domain.
using ResidualFn = std::function<bool(const Vec&, Vec&)>;

struct LmResult {
  Vec x;
  double cost = std::numeric_limits<double>::infinity();
};

bool safe_residual(const ResidualFn& f, const Vec& x, Vec& e) {
  try {
    if (!f(x, e)) return false;
  } catch (const std::runtime_error&) {
    return false;
  } catch (const std::logic_error&) {
    return false;
  }
  return e.allFinite();
}

bool jacobian(const ResidualFn& f, const Vec& x, std::size_t m, Mat& jac) {
  jac.resize(static_cast<Eigen::Index>(m), x.size());
  Vec ep(m), em(m);
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    double h = 1e-6 * std::max(1.0, std::abs(x[j]));
    Vec xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    bool okp = safe_residual(f, xp, ep);
    bool okm = safe_residual(f, xm, em);
    if (okp && okm) {
      jac.col(j) = (ep - em) / (xp[j] - xm[j]);
    } else {
      Vec e0(m);
      if (!safe_residual(f, x, e0)) return false;
      if (okp) {
        jac.col(j) = (ep - e0) / (xp[j] - x[j]);
      } else if (okm) {
        jac.col(j) = (e0 - em) / (x[j] - xm[j]);
      } else {
        jac.col(j).setZero();
      }
    }
  }
  return jac.allFinite();
}

// Levenberg-Marquardt with Marquardt diagonal scaling and Nielsen's damping
// update; each step solves the augmented least-squares system by QR.
LmResult levenberg_marquardt(const ResidualFn& f, Vec x, std::size_t m, std::size_t max_iterations, double cost_goal) {
  LmResult out;
  Vec e(m);
  if (!safe_residual(f, x, e)) return out;
  double cost = 0.5 * e.squaredNorm();
  Mat jac;
  if (!jacobian(f, x, m, jac)) {
    out.x = x;
    out.cost = cost;
    return out;
  }
  Vec scale = jac.colwise().norm().transpose().cwiseMax(1e-8);
  double mu = 1e-3;
  double nu = 2.0;
  const auto n = x.size();
  for (std::size_t it = 0; it < max_iterations && cost > cost_goal; ++it) {
    scale = scale.cwiseMax(jac.colwise().norm().transpose());
    Vec g = jac.transpose() * e;
    if (g.cwiseAbs().maxCoeff() < 1e-300) break;
    Mat aug(static_cast<Eigen::Index>(m) + n, n);
    aug.topRows(static_cast<Eigen::Index>(m)) = jac;
    aug.bottomRows(n) = (std::sqrt(mu) * scale).asDiagonal();
    Vec rhs = Vec::Zero(static_cast<Eigen::Index>(m) + n);
    rhs.head(static_cast<Eigen::Index>(m)) = -e;
    Vec h = aug.colPivHouseholderQr().solve(rhs);
    if (!h.allFinite()) {
      mu *= nu;
      nu *= 2.0;
      continue;
    }
    if (h.norm() <= 1e-15 * (x.norm() + 1e-15)) break;
    Vec xn = x + h;
    Vec en(m);
    double predicted = 0.5 * (e.squaredNorm() - (e + jac * h).squaredNorm());
    bool ok = safe_residual(f, xn, en);
    double cost_new = ok ? 0.5 * en.squaredNorm() : std::numeric_limits<double>::infinity();
    double rho = predicted > 0.0 ? (cost - cost_new) / predicted : -1.0;
    if (ok && rho > 0.0) {
      x = xn;
      e = en;
      cost = cost_new;
      if (!jacobian(f, x, m, jac)) break;
      double t = 2.0 * rho - 1.0;
      mu *= std::max(1.0 / 3.0, 1.0 - t * t * t);
      nu = 2.0;
    } else {
      mu *= nu;
      nu *= 2.0;
      if (mu > 1e20) break;
    }
  }
  out.x = x;
  out.cost = cost;
  return out;
}

double logit(double w) { return std::log(w / (1.0 - w)); }

double inv_logit(double t) { return t >= 0.0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t)); }

double relative_norm(std::span<const double> targets, const std::function<double(std::size_t)>& model,
                     std::vector<double>* per_order) {
  double ss = 0.0;
  if (per_order) per_order->clear();
  for (std::size_t i = 0; i < targets.size(); ++i) {
    double rel = (targets[i] - model(i)) / targets[i];
    if (per_order) per_order->push_back(rel);
    ss += rel * rel;
  }
  return std::sqrt(ss);
}

void check_targets(std::span<const double> targets, std::size_t expected, const char* what) {
  if (targets.size() != expected) throw ConfigError(std::string(what) + ": wrong number of target moments");
  for (double t : targets) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError(std::string(what) + ": target moments must be positive");
  }
}

EigdParams eigd_from(const Vec& x) { return {std::exp(x[0]), std::exp(x[1]), std::exp(x[2])}; }

LesndParams lesnd_from(const Vec& x) { return {x[0], std::exp(x[1]), x[2], x[3]}; }

MixtureParams mixture_from(const Vec& x) {
  return {inv_logit(x[0]), EigdParams(std::exp(x[1]), std::exp(x[2]), std::exp(x[3])),
          LesndParams(x[4], std::exp(x[5]), x[6], x[7])};
}

Vec mixture_to(const MixtureParams& p) {
  Vec x(8);
  double w = std::clamp(p.w, 1e-6, 1.0 - 1e-6);
  x << logit(w), std::log(p.eigd.eta), std::log(p.eigd.a), std::log(p.eigd.b), p.lesnd.c, std::log(p.lesnd.d),
      p.lesnd.theta, p.lesnd.tau;
  return x;
}

// Cost goal well below the acceptance tolerance so converged fits have slack.
double cost_goal(double tolerance) { return 0.5 * (1e-3 * tolerance) * (1e-3 * tolerance); }

}  // namespace

InitialValues closed_form_init(double mean, double std_dev) {
  if (!(mean > 0.0) || !(std_dev > 0.0) || !std::isfinite(mean) || !std::isfinite(std_dev)) {
    throw DomainError("closed_form_init: mean and standard deviation must be positive");
  }
  InitialValues v;
  v.eta0 = 1.0;
  v.a0 = mean;
  v.b0 = mean * mean * mean / (std_dev * std_dev);
  v.c0 = std::log(mean * mean / std::sqrt(std_dev * std_dev + mean * mean));
  v.d0 = std::sqrt(std::log(std_dev * std_dev / (mean * mean) + 1.0));
  v.theta0 = 0.0;
  v.tau0 = 0.0;
  return v;
}

EigdStageResult stage1_eigd(std::span<const double> targets, const InitialValues& init) {
  check_targets(targets, kStage1Orders.size(), "stage1_eigd");
  std::vector<double> log_t(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) log_t[i] = std::log(targets[i]);
  ResidualFn f = [&](const Vec& x, Vec& e) {
    EigdParams p = eigd_from(x);
    for (std::size_t i = 0; i < kStage1Orders.size(); ++i) {
      e[static_cast<Eigen::Index>(i)] = eigd_log_frac_moment(kStage1Orders[i], p) - log_t[i];
    }
    return true;
  };
  Vec x0(3);
  x0 << std::log(init.eta0), std::log(init.a0), std::log(init.b0);
  LmResult r = levenberg_marquardt(f, x0, 3, 400, cost_goal(1e-6));
  EigdParams best(init.eta0, init.a0, init.b0);
  if (r.x.size() == 3 && std::isfinite(r.cost)) best = eigd_from(r.x);
  auto model = [&](std::size_t i) { return eigd_frac_moment(kStage1Orders[i], best); };
  double norm = relative_norm(targets, model, nullptr);
  return {best, norm, norm <= 1e-6, best.b / best.a > 1e6};
}

LesndStageResult stage2_lesnd(std::span<const double> targets, const InitialValues& init) {
  check_targets(targets, kStage2Orders.size(), "stage2_lesnd");
  std::vector<double> log_t(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) log_t[i] = std::log(targets[i]);
  ResidualFn f = [&](const Vec& x, Vec& e) {
    LesndParams p = lesnd_from(x);
    for (std::size_t i = 0; i < kStage2Orders.size(); ++i) {
      e[static_cast<Eigen::Index>(i)] = lesnd_log_frac_moment(kStage2Orders[i], p) - log_t[i];
    }
    return true;
  };
  Vec x0(4);
  x0 << init.c0, std::log(init.d0), init.theta0, init.tau0;
  LmResult r = levenberg_marquardt(f, x0, 4, 400, cost_goal(1e-6));
  LesndParams best(init.c0, init.d0, init.theta0, init.tau0);
  if (r.x.size() == 4 && std::isfinite(r.cost)) best = lesnd_from(r.x);
  auto model = [&](std::size_t i) { return lesnd_frac_moment(kStage2Orders[i], best); };
  double norm = relative_norm(targets, model, nullptr);
  return {best, norm, norm <= 1e-6};
}

double moment_residual_norm(const MixtureParams& params, std::span<const double> orders,
                            std::span<const double> targets, std::vector<double>* per_order) {
  return relative_norm(targets, [&](std::size_t i) { return mixture_frac_moment(orders[i], params); }, per_order);
}

FitResult fit_mixture(std::span<const double> orders, std::span<const double> targets, double mean, double std_dev,
                      const FitOptions& options) {
  if (orders.size() != targets.size() || orders.size() < 2) {
    throw ConfigError("fit_mixture: orders and targets must have equal length");
  }
  check_targets(targets, orders.size(), "fit_mixture");
  InitialValues init = closed_form_init(mean, std_dev);

  auto target_at = [&](double r) -> std::optional<double> {
    for (std::size_t i = 0; i < orders.size(); ++i) {
      if (orders[i] == r) return targets[i];
    }
    return std::nullopt;
  };
  // Stage targets fall back to the closed-form component moments when an order is missing.
  std::vector<double> t1, t2;
  IgdParams igd0(init.a0, init.b0);
  LesndParams ln0(init.c0, init.d0, 0.0, 0.0);
  for (double r : kStage1Orders) t1.push_back(target_at(r).value_or(igd_frac_moment(r, igd0)));
  for (double r : kStage2Orders) t2.push_back(target_at(r).value_or(lesnd_frac_moment(r, ln0)));
  EigdStageResult s1 = stage1_eigd(t1, init);
  LesndStageResult s2 = stage2_lesnd(t2, init);
  LesndParams l0 = s2.params;
  if (std::abs(l0.theta) < 1e-8) l0.tau = 0.0;
  init.eta0 = s1.params.eta;
  init.a0 = s1.params.a;
  init.b0 = s1.params.b;
  init.c0 = l0.c;
  init.d0 = l0.d;
  init.theta0 = l0.theta;
  init.tau0 = l0.tau;

  std::vector<double> log_t(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) log_t[i] = std::log(targets[i]);
  const std::size_t m = orders.size();
  ResidualFn f = [&](const Vec& x, Vec& e) {
    MixtureParams p = mixture_from(x);
    for (std::size_t i = 0; i < m; ++i) e[static_cast<Eigen::Index>(i)] = mixture_log_frac_moment(orders[i], p) - log_t[i];
    return true;
  };

  std::vector<Vec> starts;
  for (double w0 : {0.5, 0.25, 0.75}) starts.push_back(mixture_to(MixtureParams(w0, s1.params, l0)));
  RandomStream rng(options.seed, stream_id({stream_tag::kFitRestart}));

  Vec best_x = starts.front();
  double best_norm = std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  for (std::size_t s = 0; s < options.max_restarts + starts.size() && best_norm > options.tolerance; ++s) {
    Vec x0;
    if (s < starts.size()) {
      x0 = starts[s];
    } else {
      x0 = starts[0];
      double spread = 0.25 + 0.75 * static_cast<double>(s - starts.size()) / static_cast<double>(options.max_restarts);
      for (Eigen::Index j = 0; j < x0.size(); ++j) x0[j] += spread * rng.normal();
    }
    ++used;
    LmResult r = levenberg_marquardt(f, x0, m, options.max_iterations, cost_goal(options.tolerance));
    if (r.x.size() != 8 || !std::isfinite(r.cost)) continue;
    try {
      MixtureParams p = mixture_from(r.x);
      double norm = moment_residual_norm(p, orders, targets);
      if (norm < best_norm) {
        best_norm = norm;
        best_x = r.x;
      }
    } catch (const std::exception&) {
    }
  }

  MixtureParams best = mixture_from(best_x);
  FitResult out{best, 0.0, {}, false, init, {}, {}, {}, used};
  out.residual_norm = moment_residual_norm(best, orders, targets, &out.residuals);
  out.converged = out.residual_norm <= options.tolerance;
  out.orders.assign(orders.begin(), orders.end());
  out.target_moments.assign(targets.begin(), targets.end());
  for (double r : orders) out.fitted_moments.push_back(mixture_frac_moment(r, best));
  return out;
}

nlohmann::json FitResult::to_json() const {
  return {{"w", params.w},
          {"eta", params.eigd.eta},
          {"a", params.eigd.a},
          {"b", params.eigd.b},
          {"c", params.lesnd.c},
          {"d", params.lesnd.d},
          {"theta", params.lesnd.theta},
          {"tau", params.lesnd.tau},
          {"residual_norm", residual_norm},
          {"converged", converged},
          {"orders", orders},
          {"target_moments", target_moments},
          {"fitted_moments", fitted_moments},
          {"init",
           {{"eta0", init.eta0},
            {"a0", init.a0},
            {"b0", init.b0},
            {"c0", init.c0},
            {"d0", init.d0},
            {"theta0", init.theta0},
            {"tau0", init.tau0}}},
          {"starts_used", starts_used}};
}

FitResult FitResult::from_json(const nlohmann::json& j) {
  MixtureParams p(j.at("w").get<double>(),
                  EigdParams(j.at("eta").get<double>(), j.at("a").get<double>(), j.at("b").get<double>()),
                  LesndParams(j.at("c").get<double>(), j.at("d").get<double>(), j.at("theta").get<double>(),
                              j.at("tau").get<double>()));
  FitResult r{p, j.at("residual_norm").get<double>(), {}, j.at("converged").get<bool>(), {}, {}, {}, {}, 0};
  r.orders = j.at("orders").get<std::vector<double>>();
  r.target_moments = j.at("target_moments").get<std::vector<double>>();
  r.fitted_moments = j.at("fitted_moments").get<std::vector<double>>();
  if (j.contains("init")) {
    const auto& i = j.at("init");
    r.init = {i.at("eta0").get<double>(), i.at("a0").get<double>(), i.at("b0").get<double>(), i.at("c0").get<double>(),
              i.at("d0").get<double>(), i.at("theta0").get<double>(), i.at("tau0").get<double>()};
  }
  if (j.contains("starts_used")) r.starts_used = j.at("starts_used").get<std::size_t>();
  for (std::size_t i = 0; i < r.orders.size() && i < r.target_moments.size(); ++i) {
    r.residuals.push_back((r.target_moments[i] - r.fitted_moments[i]) / r.target_moments[i]);
  }
  return r;
}

}  // namespace fracmix
