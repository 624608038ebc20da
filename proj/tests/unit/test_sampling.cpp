#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <vector>

#include <nlohmann/json.hpp>

#include "fracmix/errors.hpp"
#include "fracmix/random.hpp"
#include "fracmix/sampling.hpp"

using namespace fracmix;

namespace {

bool boxes_overlap(const Stratum& a, const Stratum& b) {
  for (std::size_t i = 0; i < a.origin.size(); ++i) {
    double lo = std::max(a.origin[i], b.origin[i]);
    double hi = std::min(a.origin[i] + a.lengths[i], b.origin[i] + b.lengths[i]);
    if (hi - lo <= 1e-15) return false;
  }
  return true;
}

// Partition, containment, weight and nested-LHS invariants of the committed set.
void check_invariants(const RlssDesign& d) {
  const std::size_t n = d.sample_count();
  std::vector<Stratum> strata;
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    Stratum s = d.stratum(k);
    double vol = 1.0;
    for (std::size_t i = 0; i < d.dimension(); ++i) {
      ASSERT_GE(s.origin[i], 0.0);
      ASSERT_LE(s.origin[i] + s.lengths[i], 1.0 + 1e-12);
      vol *= s.lengths[i];
    }
    ASSERT_NEAR(s.weight, vol, 1e-15);
    ASSERT_EQ(s.weight, d.weight(k));
    ASSERT_TRUE(s.contains(d.point(k))) << "sample " << k;
    total += s.weight;
    strata.push_back(std::move(s));
  }
  ASSERT_NEAR(total, 1.0, 1e-12);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) ASSERT_FALSE(boxes_overlap(strata[a], strata[b])) << a << " " << b;
  }
  const double bins = static_cast<double>(d.bins_per_dimension());
  for (std::size_t i = 0; i < d.dimension(); ++i) {
    std::set<std::uint64_t> seen;
    for (std::size_t k = 0; k < n; ++k) {
      auto b = d.bin(k, i);
      ASSERT_EQ(b, static_cast<std::uint64_t>(std::floor(d.point(k)[i] * bins)));
      ASSERT_TRUE(seen.insert(b).second) << "dimension " << i << " bin " << b;
    }
  }
}

}  // namespace

TEST(Lss, SingleSampleIsWholeCube) {
  auto d = RlssDesign::lss_init(1, 3, 7);
  ASSERT_EQ(d.sample_count(), 1u);
  EXPECT_EQ(d.weight(0), 1.0);
  Stratum s = d.stratum(0);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(s.origin[i], 0.0);
    EXPECT_EQ(s.lengths[i], 1.0);
  }
  check_invariants(d);
}

TEST(Lss, FourSamplesInTwoDimensions) {
  auto d = RlssDesign::lss_init(4, 2, 11);
  ASSERT_EQ(d.sample_count(), 4u);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(d.weight(k), 0.25);
  check_invariants(d);
}

TEST(Lss, TwoSamplesInOneDimension) {
  auto d = RlssDesign::lss_init(2, 1, 3);
  std::vector<double> x{d.point(0)[0], d.point(1)[0]};
  std::sort(x.begin(), x.end());
  EXPECT_LT(x[0], 0.5);
  EXPECT_GE(x[1], 0.5);
  EXPECT_EQ(d.weight(0), 0.5);
  EXPECT_EQ(d.weight(1), 0.5);
}

TEST(Rlss, FirstRefinementOfSingleSample) {
  auto d = RlssDesign::lss_init(1, 5, 2);
  d.refine();
  EXPECT_EQ(d.level(), 1u);
  EXPECT_EQ(d.slot_count(), 2u);
  EXPECT_EQ(d.candidate_count(), 1u);
}

TEST(Rlss, RefinementOfFourInTwoDimensionsYieldsFourCandidates) {
  auto d = RlssDesign::lss_init(4, 2, 5);
  d.refine();
  EXPECT_EQ(d.slot_count(), 8u);
  EXPECT_EQ(d.candidate_count(), 4u);
  for (const auto& p : d.candidate_points()) {
    for (double x : p) {
      EXPECT_GE(x, 0.0);
      EXPECT_LT(x, 1.0);
    }
  }
}

TEST(Rlss, SlotCountGrowsGeometrically) {
  for (std::uint64_t delta : {1u, 2u, 3u}) {
    auto d = RlssDesign::lss_init(3, 4, 9, delta);
    std::uint64_t expect = 3;
    for (int l = 1; l <= 3; ++l) {
      d.refine();
      expect *= delta + 1;
      EXPECT_EQ(d.slot_count(), expect);
      d.extend(d.candidate_count() + (l == 1 ? 3 : 0));
    }
  }
}

TEST(Rlss, RefineRequiresEmptyPool) {
  auto d = RlssDesign::lss_init(2, 2, 1);
  d.refine();
  EXPECT_THROW(d.refine(), std::logic_error);
}

TEST(Rlss, ExtendCountsAndFirstCall) {
  auto d = RlssDesign::lss_init(1, 6, 4);
  EXPECT_EQ(d.extend(8), 0u);
  EXPECT_EQ(d.sample_count(), 8u);
  for (int l = 2; l <= 10; ++l) {
    std::size_t first = d.extend(8);
    EXPECT_EQ(first, static_cast<std::size_t>(8 * (l - 1)));
    EXPECT_EQ(d.sample_count(), static_cast<std::size_t>(8 * l));
    double total = 0.0;
    for (double w : d.weights()) total += w;
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
  check_invariants(d);
}

TEST(Rlss, FirstBatchMustCoverInitialSamples) {
  auto d = RlssDesign::lss_init(4, 2, 4);
  EXPECT_ANY_THROW(d.extend(3));
}

TEST(Rlss, InvariantsAcrossSeedsAndShapes) {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    for (auto [n0, dim, delta, batch] : {std::tuple{1, 3, 1, 8}, std::tuple{3, 2, 2, 5}, std::tuple{2, 7, 1, 3}}) {
      auto d = RlssDesign::lss_init(n0, dim, seed, delta);
      check_invariants(d);
      for (int l = 0; l < 6; ++l) {
        d.extend(static_cast<std::size_t>(std::max(batch, l == 0 ? n0 : 0)));
        check_invariants(d);
      }
    }
  }
}

TEST(Rlss, Reproducible) {
  auto a = RlssDesign::lss_init(1, 4, 77), b = RlssDesign::lss_init(1, 4, 77), c = RlssDesign::lss_init(1, 4, 78);
  a.extend(40);
  b.extend(40);
  c.extend(40);
  bool any_diff = false;
  for (std::size_t k = 0; k < 40; ++k) {
    for (std::size_t i = 0; i < 4; ++i) {
      ASSERT_EQ(a.point(k)[i], b.point(k)[i]);
      any_diff = any_diff || a.point(k)[i] != c.point(k)[i];
    }
  }
  EXPECT_TRUE(any_diff);
}

TEST(Rlss, JsonDumpShape) {
  auto d = RlssDesign::lss_init(2, 3, 1);
  d.extend(4);
  nlohmann::json j = d.to_json();
  EXPECT_EQ(j.at("dimension"), 3);
  EXPECT_EQ(j.at("samples").size(), 4u);
  for (const auto& s : j.at("samples")) {
    EXPECT_EQ(s.at("point").size(), 3u);
    EXPECT_EQ(s.at("origin").size(), 3u);
    EXPECT_EQ(s.at("lengths").size(), 3u);
    EXPECT_TRUE(s.contains("weight"));
  }
}

TEST(Rlss, BeatsMonteCarloOnAdditiveFunction) {
  const int designs = 200, dim = 5, n = 32;
  std::vector<double> rlss, mcs;
  for (int s = 0; s < designs; ++s) {
    auto d = RlssDesign::lss_init(1, dim, 1000 + s);
    d.extend(n);
    double est = 0.0;
    for (std::size_t k = 0; k < d.sample_count(); ++k) {
      auto p = d.point(k);
      est += d.weight(k) * std::accumulate(p.begin(), p.end(), 0.0);
    }
    rlss.push_back(est);
    RandomStream r(5000 + s, 0);
    double m = 0.0;
    for (int k = 0; k < n * dim; ++k) m += r.uniform();
    mcs.push_back(m / n);
  }
  auto var = [](const std::vector<double>& v) {
    double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size(), s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / (v.size() - 1);
  };
  // One-sided F test at 95% with (199, 199) degrees of freedom.
  EXPECT_LT(var(rlss) / var(mcs), 1.0 / 1.263);
}

TEST(Marginals, Examples) {
  EXPECT_NEAR(MarginalSpec::uniform(0.0, 2.0 * std::numbers::pi).from_unit(0.5), std::numbers::pi, 1e-15);
  EXPECT_EQ(MarginalSpec::normal(0.0, 1.0).from_unit(0.5), 0.0);
  EXPECT_NEAR(MarginalSpec::lognormal(0.5, 0.2).from_unit(0.5), 0.46423834544262963, 1e-14);
}

TEST(Marginals, ClampAtBoundary) {
  auto n = MarginalSpec::normal(0.0, 1.0);
  EXPECT_TRUE(std::isfinite(n.from_unit(0.0)));
  EXPECT_TRUE(std::isfinite(n.from_unit(1.0)));
  EXPECT_EQ(n.from_unit(0.0), n.from_unit(kUnitClamp));
}

TEST(Marginals, LognormalMomentsMatchParameterization) {
  auto m = MarginalSpec::lognormal(0.3, 0.1);
  double mean = std::exp(m.log_mu() + 0.5 * m.log_sigma() * m.log_sigma());
  double var = (std::exp(m.log_sigma() * m.log_sigma()) - 1.0) * mean * mean;
  EXPECT_NEAR(mean, 0.3, 1e-15);
  EXPECT_NEAR(std::sqrt(var), 0.1, 1e-15);
}

TEST(Marginals, InvalidParametersRejected) {
  EXPECT_THROW(MarginalSpec::uniform(1.0, 1.0), ConfigError);
  EXPECT_THROW(MarginalSpec::normal(0.0, 0.0), ConfigError);
  EXPECT_THROW(MarginalSpec::lognormal(-1.0, 0.1), ConfigError);
  EXPECT_THROW(MarginalSpec::lognormal(1.0, 0.0), ConfigError);
}

TEST(Marginals, ToPhysicalComponentwise) {
  std::vector<MarginalSpec> ms{MarginalSpec::uniform(0.0, 2.0), MarginalSpec::normal(1.0, 2.0)};
  std::vector<double> p{0.25, 0.5};
  auto u = to_physical(p, ms);
  EXPECT_NEAR(u[0], 0.5, 1e-15);
  EXPECT_NEAR(u[1], 1.0, 1e-15);
}

TEST(Bootstrap, ConstantValuesGiveZero) {
  std::vector<double> z(20, 3.0), w(20, 0.05);
  EXPECT_EQ(weighted_bootstrap_cov(z, w, 2.0, 100, 1), 0.0);
}

TEST(Bootstrap, EqualWeightsMatchClosedForm) {
  RandomStream r(3, 3);
  const std::size_t n = 50, b = 4000;
  std::vector<double> z(n), w(n, 1.0 / n);
  for (auto& v : z) v = 1.0 + r.uniform();
  // Equal-weight bootstrap of the mean of Z^2: sd = sqrt(var_n(Z^2) / n).
  double m = 0.0, s2 = 0.0;
  for (double v : z) m += v * v / n;
  for (double v : z) s2 += (v * v - m) * (v * v - m) / n;
  double exact = std::sqrt(s2 / n) / m;
  double est = weighted_bootstrap_cov(z, w, 2.0, b, 9);
  EXPECT_NEAR(est / exact, 1.0, 3.0 / std::sqrt(static_cast<double>(b)));
}

TEST(Bootstrap, SelectionFollowsWeights) {
  // With values (1, 0+) the order-1 replicate equals the fraction of draws of the first value.
  const std::size_t b = 20000;
  std::vector<double> z{1.0, 1e-300}, w{0.9, 0.1};
  // Two draws per replicate: mean of replicates is 0.9 and its sd is sqrt(0.09 / 2).
  double cov = weighted_bootstrap_cov(z, w, 1.0, b, 4);
  EXPECT_NEAR(cov, std::sqrt(0.09 / 2.0) / 0.9, 3.0 * std::sqrt(0.09 / b) + 0.02);
}
