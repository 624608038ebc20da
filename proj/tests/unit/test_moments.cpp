#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <vector>

#include "fracmix/distributions.hpp"
#include "fracmix/errors.hpp"
#include "fracmix/moments.hpp"
#include "fracmix/random.hpp"

using namespace fracmix;

namespace {

ExtremeResponseModel sum_model(std::size_t dim, std::atomic<std::size_t>* calls = nullptr) {
  ExtremeResponseModel m;
  m.name = "sum";
  m.marginals.assign(dim, MarginalSpec::uniform(0.0, 1.0));
  m.labels = {"Z", "Z2"};
  m.evaluate = [calls](std::span<const double> u) {
    if (calls) ++*calls;
    double s = 0.1 + std::accumulate(u.begin(), u.end(), 0.0);
    return std::vector<double>{s, 2.0 * s};
  };
  return m;
}

}  // namespace

TEST(DefaultOrders, EighthsOfTwo) {
  auto r = default_orders();
  ASSERT_EQ(r.size(), 8u);
  for (int i = 0; i < 8; ++i) EXPECT_EQ(r[i], 0.25 * (i + 1));
}

TEST(EstimateMoments, Examples) {
  std::vector<double> z(5, 2.0), w{0.1, 0.2, 0.3, 0.25, 0.15};
  std::vector<double> orders{0.0, 2.0};
  auto m = estimate_moments(z, w, orders);
  EXPECT_EQ(m.at(0.0), 1.0);
  EXPECT_NEAR(m.at(2.0), 4.0, 1e-15);
  std::vector<double> z3{1.0, 2.0, 3.0}, w3(3, 1.0 / 3.0), r1{1.0};
  EXPECT_NEAR(estimate_moments(z3, w3, r1).at(1.0), 2.0, 1e-15);
}

TEST(EstimateMoments, MeanAndStd) {
  std::vector<double> z{1.0, 2.0, 4.0}, w{0.25, 0.5, 0.25}, r{0.5, 1.0, 2.0};
  auto m = estimate_moments(z, w, r);
  EXPECT_NEAR(m.mean, 2.25, 1e-15);
  EXPECT_NEAR(m.std_dev, std::sqrt(0.25 + 2.0 + 4.0 - 2.25 * 2.25), 1e-14);
  EXPECT_FALSE(m.variance_floored);
  EXPECT_EQ(m.sample_count, 3u);
  EXPECT_THROW(m.at(0.75), std::out_of_range);
}

TEST(EstimateMoments, ConstantSampleFloorsVariance) {
  std::vector<double> z(7, 0.1), w(7, 1.0 / 7.0), r{1.0, 2.0};
  auto m = estimate_moments(z, w, r);
  EXPECT_GE(m.std_dev, 0.0);
  EXPECT_LT(m.std_dev, 1e-8);
}

TEST(EstimateMoments, PermutationInvariantBitExact) {
  RandomStream rng(1, 1);
  std::vector<double> z(500), w(500);
  for (auto& v : z) v = 0.1 + 10.0 * rng.uniform();
  double total = 0.0;
  for (auto& v : w) total += (v = rng.uniform());
  for (auto& v : w) v /= total;
  auto orders = default_orders();
  auto base = estimate_moments(z, w, orders);
  std::vector<std::size_t> idx(z.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (int t = 0; t < 5; ++t) {
    rng.shuffle(idx.begin(), idx.end());
    std::vector<double> zp, wp;
    for (auto i : idx) {
      zp.push_back(z[i]);
      wp.push_back(w[i]);
    }
    auto m = estimate_moments(zp, wp, orders);
    for (std::size_t i = 0; i < orders.size(); ++i) ASSERT_EQ(m.estimates[i], base.estimates[i]);
  }
}

TEST(EstimateMoments, Errors) {
  std::vector<double> w{0.5, 0.5}, r{0.5};
  std::vector<double> bad{1.0, 0.0};
  try {
    estimate_moments(bad, w, r);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("1"), std::string::npos);
  }
  std::vector<double> z{1.0, 2.0}, w_bad{0.5, 0.6};
  EXPECT_THROW(estimate_moments(z, w_bad, r), ConfigError);
}

TEST(Adaptive, LooseToleranceStopsAfterFirstBatch) {
  auto model = sum_model(4);
  ConvergenceConfig c;
  c.epsilon = 1.0;
  auto r = adaptive_estimate(model, {}, c, default_orders(), 1, 3);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.trace.size(), 1u);
  EXPECT_EQ(r.evaluations, c.batch);
}

TEST(Adaptive, ConstantModel) {
  ExtremeResponseModel m;
  m.name = "const";
  m.marginals.assign(3, MarginalSpec::uniform(0.0, 1.0));
  m.labels = {"Z"};
  m.evaluate = [](std::span<const double>) { return std::vector<double>{2.5}; };
  auto r = adaptive_estimate(m, {}, {}, default_orders(), 1, 1);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.trace.size(), 1u);
  EXPECT_EQ(r.trace[0].cov_m2, 0.0);
  for (double order : default_orders()) EXPECT_NEAR(r.moments[0].at(order), std::pow(2.5, order), 1e-13);
}

TEST(Adaptive, ReuseAndMonotoneBudget) {
  std::atomic<std::size_t> calls{0};
  auto model = sum_model(6, &calls);
  ConvergenceConfig c;
  c.epsilon = 0.01;
  auto r = adaptive_estimate(model, {}, c, default_orders(), 1, 5);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(calls.load(), r.evaluations);
  EXPECT_EQ(r.responses.size(), r.evaluations);
  for (std::size_t l = 0; l < r.trace.size(); ++l) EXPECT_EQ(r.trace[l].samples, (l + 1) * c.batch);
  EXPECT_LT(r.trace.back().cov_m2, c.epsilon);
  for (std::size_t l = 0; l + 1 < r.trace.size(); ++l) EXPECT_GE(r.trace[l].cov_m2, c.epsilon);
  double total = std::accumulate(r.weights.begin(), r.weights.end(), 0.0);
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_NEAR(r.moments[0].mean, 3.1, 0.05);
  EXPECT_NEAR(r.moments[1].mean, 6.2, 0.1);
}

TEST(Adaptive, CapFlagsNonConvergence) {
  auto model = sum_model(2);
  ConvergenceConfig c;
  c.epsilon = 1e-9;
  c.max_batches = 3;
  auto r = adaptive_estimate(model, {}, c, default_orders(), 1, 5);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.trace.size(), 3u);
}

TEST(Adaptive, WorkerCountDoesNotChangeResults) {
  auto model = sum_model(5);
  ConvergenceConfig c;
  c.epsilon = 0.004;
  auto a = adaptive_estimate(model, {}, c, default_orders(), 1, 8);
  auto b = adaptive_estimate(model, {}, c, default_orders(), 4, 8);
  ASSERT_EQ(a.evaluations, b.evaluations);
  for (std::size_t i = 0; i < a.moments[0].estimates.size(); ++i) {
    EXPECT_EQ(a.moments[0].estimates[i], b.moments[0].estimates[i]);
  }
  for (std::size_t l = 0; l < a.trace.size(); ++l) EXPECT_EQ(a.trace[l].cov_m2, b.trace[l].cov_m2);
}

TEST(Adaptive, EvaluateBatchKeepsOrder) {
  auto model = sum_model(2);
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 37; ++i) pts.push_back({i / 40.0, 0.5});
  auto out = evaluate_batch(model, pts, 3);
  for (int i = 0; i < 37; ++i) EXPECT_NEAR(out[i][0], 0.1 + i / 40.0 + 0.5, 1e-9);
}

TEST(MomentCheck, Examples) {
  IgdParams igd(1.0, 1.0);
  auto r1 = two_sided_moment_check([&](double z) { return std::log(igd_pdf(z, igd)); },
                                   [&](double r) { return igd_frac_moment(r, igd); }, default_orders(), 0.0, 1.0);
  EXPECT_TRUE(r1.quadrature_converged);
  EXPECT_LT(r1.max_rel_discrepancy, 1e-8);

  LesndParams ln(0.3, 0.5, 0.0, 0.0);
  std::vector<double> two{2.0};
  auto r2 = two_sided_moment_check([&](double x) { return lesnd_log_pdf(x, ln); },
                                   [&](double r) { return lesnd_frac_moment(r, ln); }, two, 0.3, 0.5);
  EXPECT_LT(r2.max_rel_discrepancy, 1e-10);

  EigdParams e(2.0, 1.0, 1.0);
  std::vector<double> one{1.0};
  auto r3 = two_sided_moment_check([&](double x) { return eigd_log_pdf(x, e); },
                                   [&](double r) { return eigd_frac_moment(r, e); }, one, 0.0, 0.5);
  EXPECT_LT(r3.max_rel_discrepancy, 1e-8);
}
