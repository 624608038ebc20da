#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include <nlohmann/json.hpp>

#include "fracmix/errors.hpp"
#include "fracmix/fitting.hpp"
#include "fracmix/moments.hpp"

using namespace fracmix;

namespace {

std::vector<double> moments_of(const MixtureParams& p, const std::vector<double>& orders) {
  std::vector<double> m;
  for (double r : orders) m.push_back(mixture_frac_moment(r, p));
  return m;
}

double mean_of(const MixtureParams& p) { return mixture_frac_moment(1.0, p); }
double sd_of(const MixtureParams& p) {
  double m1 = mixture_frac_moment(1.0, p);
  return std::sqrt(mixture_frac_moment(2.0, p) - m1 * m1);
}

}  // namespace

TEST(ClosedFormInit, UnitMeanAndStd) {
  auto v = closed_form_init(1.0, 1.0);
  EXPECT_EQ(v.eta0, 1.0);
  EXPECT_EQ(v.a0, 1.0);
  EXPECT_EQ(v.b0, 1.0);
  EXPECT_NEAR(v.c0, -0.34657359027997265, 1e-15);
  EXPECT_NEAR(v.d0, 0.83255461115769776, 1e-15);
  EXPECT_EQ(v.theta0, 0.0);
  EXPECT_EQ(v.tau0, 0.0);
}

TEST(ClosedFormInit, TableMoments) {
  auto v = closed_form_init(3.6570, 0.6623);
  EXPECT_EQ(v.a0, 3.6570);
  EXPECT_NEAR(v.b0, 111.49756192126829, 1e-11);
}

TEST(ClosedFormInit, Preconditions) {
  EXPECT_THROW(closed_form_init(2.0, 0.0), DomainError);
  EXPECT_THROW(closed_form_init(-1.0, 1.0), DomainError);
}

TEST(Stage1, RecoversEigdMoments) {
  EigdParams truth(1.5, 2.0, 3.0);
  std::vector<double> t;
  for (double r : kStage1Orders) t.push_back(eigd_frac_moment(r, truth));
  double m = t[1], sd = std::sqrt(eigd_frac_moment(2.0, truth) - m * m);
  auto s = stage1_eigd(t, closed_form_init(m, sd));
  EXPECT_TRUE(s.converged);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(eigd_frac_moment(kStage1Orders[i], s.params) / t[i], 1.0, 1e-8);
}

TEST(Stage1, IgdTargetsGiveUnitExponent) {
  IgdParams truth(1.0, 1.0);
  std::vector<double> t;
  for (double r : kStage1Orders) t.push_back(igd_frac_moment(r, truth));
  auto s = stage1_eigd(t, closed_form_init(1.0, 1.0));
  EXPECT_LT(s.residual_norm, 1e-8);
  EXPECT_NEAR(s.params.eta, 1.0, 1e-4);
}

TEST(Stage1, DegenerateTargetsFlagged) {
  std::vector<double> t{std::sqrt(3.0), 3.0, std::pow(3.0, 1.5)};
  auto s = stage1_eigd(t, closed_form_init(3.0, 1e-5));
  EXPECT_TRUE(s.near_deterministic);
}

TEST(Stage2, LognormalTargets) {
  LesndParams truth(0.5, 0.3, 0.0, 0.0);
  std::vector<double> t;
  for (double r : kStage2Orders) t.push_back(lesnd_frac_moment(r, truth));
  double m = t[1], sd = std::sqrt(t[3] - m * m);
  auto s = stage2_lesnd(t, closed_form_init(m, sd));
  EXPECT_LT(s.residual_norm, 1e-8);
  EXPECT_NEAR(s.params.theta, 0.0, 1e-3);
}

TEST(Stage2, SkewedTargets) {
  LesndParams truth(0.0, 1.0, 3.0, 1.0);
  std::vector<double> t;
  for (double r : kStage2Orders) t.push_back(lesnd_frac_moment(r, truth));
  double m = t[1], sd = std::sqrt(t[3] - m * m);
  auto s = stage2_lesnd(t, closed_form_init(m, sd));
  EXPECT_LT(s.residual_norm, 1e-6);
}

TEST(FitMixture, RoundTrip) {
  MixtureParams truth(0.4, {1.3, 3.5, 120.0}, {1.3, 0.17, 0.6, 1.5});
  auto orders = default_orders();
  auto t = moments_of(truth, orders);
  auto f = fit_mixture(orders, t, mean_of(truth), sd_of(truth));
  EXPECT_TRUE(f.converged);
  EXPECT_LE(f.residual_norm, 1e-6);
  for (std::size_t i = 0; i < orders.size(); ++i) EXPECT_NEAR(f.fitted_moments[i] / t[i], 1.0, 1e-6);
  EXPECT_NEAR(f.residual_norm, moment_residual_norm(f.params, orders, t), 1e-15);
}

TEST(FitMixture, ReducedModelTruth) {
  MixtureParams truth(0.5, {1.0, 2.0, 15.0}, {0.6, 0.3, 0.0, 0.0});
  auto orders = default_orders();
  auto f = fit_mixture(orders, moments_of(truth, orders), mean_of(truth), sd_of(truth));
  EXPECT_LT(f.residual_norm, 1e-6);
}

TEST(FitMixture, ScaleEquivariantAtMomentLevel) {
  MixtureParams truth(0.3, {0.9, 2.0, 30.0}, {0.9, 0.2, -0.5, 0.3});
  auto orders = default_orders();
  auto t = moments_of(truth, orders);
  const double s = 7.5;
  std::vector<double> ts;
  for (std::size_t i = 0; i < orders.size(); ++i) ts.push_back(std::pow(s, orders[i]) * t[i]);
  auto f1 = fit_mixture(orders, t, mean_of(truth), sd_of(truth));
  auto f2 = fit_mixture(orders, ts, s * mean_of(truth), s * sd_of(truth));
  for (std::size_t i = 0; i < orders.size(); ++i) {
    EXPECT_NEAR(f2.fitted_moments[i] / (std::pow(s, orders[i]) * f1.fitted_moments[i]), 1.0, 2e-6);
  }
}

TEST(FitMixture, DeterministicAndInDomain) {
  MixtureParams truth(0.6, {2.0, 5.0, 50.0}, {1.5, 0.25, 1.0, -0.5});
  auto orders = default_orders();
  auto t = moments_of(truth, orders);
  FitOptions o;
  o.seed = 3;
  auto a = fit_mixture(orders, t, mean_of(truth), sd_of(truth), o);
  auto b = fit_mixture(orders, t, mean_of(truth), sd_of(truth), o);
  EXPECT_EQ(a.params.to_array(), b.params.to_array());
  EXPECT_GE(a.params.w, 0.0);
  EXPECT_LE(a.params.w, 1.0);
  EXPECT_GT(a.params.eigd.eta, 0.0);
  EXPECT_GT(a.params.lesnd.d, 0.0);
}

TEST(FitMixture, JsonRoundTrip) {
  MixtureParams truth(0.4, {1.3, 3.5, 120.0}, {1.3, 0.17, 0.6, 1.5});
  auto orders = default_orders();
  auto f = fit_mixture(orders, moments_of(truth, orders), mean_of(truth), sd_of(truth));
  nlohmann::json j = f.to_json();
  for (const char* key : {"w", "eta", "a", "b", "c", "d", "theta", "tau", "residual_norm", "converged", "orders",
                          "target_moments", "fitted_moments"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  auto g = FitResult::from_json(j);
  EXPECT_EQ(g.params.to_array(), f.params.to_array());
  EXPECT_EQ(g.residual_norm, f.residual_norm);
  EXPECT_EQ(g.fitted_moments, f.fitted_moments);
}

TEST(FitMixture, RejectsBadTargets) {
  auto orders = default_orders();
  std::vector<double> t(8, 1.0);
  t[3] = -1.0;
  EXPECT_ANY_THROW(fit_mixture(orders, t, 1.0, 0.1));
  std::vector<double> short_t(3, 1.0);
  EXPECT_THROW(fit_mixture(orders, short_t, 1.0, 0.1), ConfigError);
}
