#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <nlohmann/json.hpp>

#include "fracmix/errors.hpp"
#include "fracmix/random.hpp"
#include "fracmix/report.hpp"

using namespace fracmix;

namespace {

MixtureParams sample_fit() { return MixtureParams(0.4, EigdParams(2.0, 2.0, 9.0), LesndParams(1.0, 0.3, 1.5, 0.2)); }

ReliabilityReport sample_report() {
  MixtureParams p = sample_fit();
  std::vector<double> orders = default_orders();
  std::vector<double> targets;
  for (double r : orders) targets.push_back(mixture_frac_moment(r, p));
  double mean = targets[3];
  double sd = std::sqrt(targets[7] - mean * mean);
  ReliabilityReport rep;
  rep.model = "synthetic";
  rep.config = {{"seed", 3}};
  rep.config_hash = "0123456789abcdef";
  rep.seed = 3;
  rep.sample_count = 40;
  rep.evaluations = 40;
  rep.converged = true;
  rep.trace = {{1, 8, 2.0, 5.0, 0.1}, {2, 16, 2.1, 5.2, 0.01}};
  FractionalMomentSet ms;
  ms.orders = orders;
  ms.estimates = targets;
  ms.sample_count = 40;
  ms.mean = mean;
  ms.std_dev = sd;
  FitResult fit = fit_mixture(orders, targets, mean, sd);
  ResponseReport rr{"Z", fit, ms, {}};
  for (double b : {3.0, 5.0, 7.0}) rr.first_passage.push_back({b, first_passage(fit.params, b)});
  rep.responses.push_back(rr);
  return rep;
}

}  // namespace

TEST(FirstPassage, Limits) {
  auto p = sample_fit();
  EXPECT_NEAR(first_passage(p, 0.0), 1.0, 1e-15);
  EXPECT_LT(first_passage(p, 1e6), 1e-30);
  EXPECT_THROW(first_passage(p, -1.0), DomainError);
}

TEST(FirstPassage, NonincreasingInThreshold) {
  auto p = sample_fit();
  double prev = 1.0;
  for (double b = 0.05; b < 40.0; b *= 1.13) {
    double q = first_passage(p, b);
    EXPECT_LE(q, prev);
    EXPECT_GE(q, 0.0);
    prev = q;
  }
}

TEST(EquivalentExtreme, Basics) {
  std::vector<double> z{3.0}, b{2.0};
  EXPECT_EQ(equivalent_extreme(z, b), 1.5);
  std::vector<double> z2{1.0, 2.0, 0.5}, b2{2.0, 4.0, 1.0};
  EXPECT_LT(equivalent_extreme(z2, std::vector<double>{2.1, 4.1, 1.1}), 1.0);
  EXPECT_EQ(equivalent_extreme(z2, b2), 0.5);
  EXPECT_THROW(equivalent_extreme(z2, z), ConfigError);
  EXPECT_THROW(equivalent_extreme(z, std::vector<double>{0.0}), DomainError);
}

TEST(EquivalentExtreme, MatchesUnionOfFailuresExactly) {
  RandomStream r(12, 1);
  std::vector<double> b{1.5, 2.0, 0.7, 3.1};
  std::vector<std::vector<double>> zs(10000, std::vector<double>(4));
  for (auto& z : zs) {
    for (double& v : z) v = std::exp(0.6 * r.normal());
  }
  auto eq = equivalent_extremes(zs, b);
  std::size_t by_eq = 0, by_union = 0;
  for (std::size_t k = 0; k < zs.size(); ++k) {
    bool any = false;
    for (std::size_t i = 0; i < b.size(); ++i) any = any || zs[k][i] > b[i];
    by_union += any;
    by_eq += eq[k] > 1.0;
    EXPECT_EQ(any, eq[k] > 1.0);
  }
  EXPECT_EQ(by_eq, by_union);
  EXPECT_GT(by_union, 0u);
}

TEST(CurveGrid, EndpointsAndMonotone) {
  auto p = sample_fit();
  auto two = curve_grid(p, 0.5, 9.0, 2, true);
  ASSERT_EQ(two.z.size(), 2u);
  EXPECT_EQ(two.z[0], 0.5);
  EXPECT_EQ(two.z[1], 9.0);
  auto t = curve_grid(p, 0.1, 30.0, 400, true);
  for (std::size_t i = 0; i + 1 < t.z.size(); ++i) {
    EXPECT_LT(t.z[i], t.z[i + 1]);
    EXPECT_GE(t.poe[i], t.poe[i + 1]);
    EXPECT_LE(t.cdf[i], t.cdf[i + 1]);
  }
  for (std::size_t i = 0; i < t.z.size(); ++i) {
    EXPECT_DOUBLE_EQ(t.cdf[i], 1.0 - t.poe[i]);
    EXPECT_NEAR(t.pdf[i], mixture_pdf(t.z[i], p), 0.0);
  }
  auto lin = curve_grid(p, 1.0, 3.0, 5, false);
  EXPECT_DOUBLE_EQ(lin.z[2], 2.0);
  EXPECT_THROW(curve_grid(p, 0.0, 1.0, 10, true), ConfigError);
  EXPECT_THROW(curve_grid(p, 1.0, 1.0, 10, true), ConfigError);
  EXPECT_THROW(curve_grid(p, 1.0, 2.0, 1, true), ConfigError);
}

TEST(CurveGrid, CdfIncrementMatchesQuadrature) {
  auto p = sample_fit();
  for (auto [lo, hi] : {std::pair{0.3, 4.0}, std::pair{1.0, 25.0}, std::pair{2.5, 2.7}}) {
    auto t = curve_grid(p, lo, hi, 50, true);
    double ref = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double z) { return mixture_pdf(z, p); }, lo, hi, 15, 1e-14);
    EXPECT_NEAR(t.cdf.back() - t.cdf.front(), ref, 1e-9);
  }
}

TEST(CurveGrid, DefaultSpan) {
  auto p = sample_fit();
  auto t = default_curve_grid(p, 2.0, 5.0);
  EXPECT_EQ(t.z.size(), 400u);
  EXPECT_DOUBLE_EQ(t.z.front(), 0.2);
  EXPECT_DOUBLE_EQ(t.z.back(), std::sqrt(5.0 / 1e-7));
}

TEST(Csv, HeadersAndRows) {
  auto t = curve_grid(sample_fit(), 1.0, 2.0, 3, false);
  std::istringstream is(curves_csv(t, "abc"));
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "# config_hash=abc");
  std::getline(is, line);
  EXPECT_EQ(line, "z,pdf,cdf,poe");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 3);
  std::string conv = convergence_csv({{1, 8, 1.0, 2.0, 0.5}}, "abc");
  EXPECT_NE(conv.find("batch,samples,M1,M2,cov_M2\n1,8,1,2,0.5\n"), std::string::npos);
}

TEST(Report, RoundTrip) {
  auto rep = sample_report();
  auto j = rep.to_json();
  EXPECT_EQ(j["schema_version"], 1);
  auto back = ReliabilityReport::from_json(nlohmann::json::parse(j.dump()));
  ASSERT_EQ(back.responses.size(), 1u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(back.responses[0].first_passage[i].pf, rep.responses[0].first_passage[i].pf, 1e-12);
    EXPECT_NEAR(first_passage(back.responses[0].fit.params, rep.responses[0].first_passage[i].threshold),
                rep.responses[0].first_passage[i].pf, 1e-12);
  }
  EXPECT_EQ(back.to_json(), j);
}

TEST(Report, TamperedProbabilityRejected) {
  auto j = sample_report().to_json();
  j["responses"][0]["first_passage"][1]["pf"] = j["responses"][0]["first_passage"][1]["pf"].get<double>() + 1e-6;
  EXPECT_THROW(ReliabilityReport::from_json(j), NumericError);
  auto k = sample_report().to_json();
  k["schema_version"] = 2;
  EXPECT_THROW(ReliabilityReport::from_json(k), ConfigError);
}
