#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "fracmix/config.hpp"
#include "fracmix/errors.hpp"
#include "fracmix/pipeline.hpp"

using namespace fracmix;
namespace fs = std::filesystem;

namespace {

// Z = exp(0.3 * sum of four standard normals): lognormal with log-sd 0.6.
ExtremeResponseModel lognormal_model() {
  ExtremeResponseModel m;
  m.name = "lognormal";
  m.marginals.assign(4, MarginalSpec::normal(0.0, 1.0));
  m.labels = {"Z", "Z2"};
  m.evaluate = [](std::span<const double> u) {
    double s = std::accumulate(u.begin(), u.end(), 0.0);
    return std::vector<double>{std::exp(0.3 * s), 2.0 * std::exp(0.3 * s)};
  };
  return m;
}

RunConfig synthetic_config() {
  RunConfig c;
  c.thresholds = {3.0, 6.0};
  c.convergence.epsilon = 0.03;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST(RunConfig, JsonRoundTripAndUnknownKeys) {
  RunConfig c;
  c.model = "bouc_wen_frame";
  c.model_params = {{"storeys", 4}};
  c.thresholds = {1.0, 2.0};
  c.convergence.epsilon = 0.02;
  c.seed = 77;
  auto back = RunConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  EXPECT_EQ(back.hash(), c.hash());
  EXPECT_THROW(RunConfig::from_json({{"sed", 1}}), ConfigError);
  EXPECT_THROW(RunConfig::from_json({{"convergence", {{"eps", 1}}}}), ConfigError);
  EXPECT_THROW(RunConfig::from_json({{"seed", "one"}}), ConfigError);
  EXPECT_THROW(RunConfig::from_json({{"model", "pendulum"}}), ConfigError);
  EXPECT_THROW(RunConfig::from_json({{"thresholds", {-1.0}}}), ConfigError);
}

TEST(RunConfig, HashIgnoresWorkersAndOutputDir) {
  RunConfig a, b;
  b.workers = 7;
  b.output_dir = "/elsewhere";
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.hash().size(), 16u);
  b.seed = 2;
  EXPECT_NE(a.hash(), b.hash());
}

TEST(RunConfig, DefaultThresholds) {
  RunConfig c;
  EXPECT_EQ(c.effective_thresholds(), std::vector<double>{7.0});
  c.model = "bouc_wen_frame";
  EXPECT_EQ(c.effective_thresholds(), (std::vector<double>{95.0, 80.0, 67.0}));
}

TEST(Pipeline, SyntheticLognormalTail) {
  auto r = run_pipeline(synthetic_config(), lognormal_model());
  ASSERT_TRUE(pipeline_converged(r));
  ASSERT_EQ(r.report.responses.size(), 2u);
  ASSERT_EQ(r.curves.size(), 2u);
  const auto& z = r.report.responses[0];
  // Exact: P(Z > 3) = Phi(-ln 3 / 0.6).
  double exact = 0.5 * std::erfc(std::log(3.0) / 0.6 / std::sqrt(2.0));
  EXPECT_NEAR(z.first_passage[0].pf / exact, 1.0, 0.3);
  EXPECT_EQ(r.report.sample_count, r.adaptive.responses.size());
  EXPECT_EQ(r.report.evaluations, r.adaptive.evaluations);
  // Z2 = 2 Z, so P(Z2 > 6) = P(Z > 3) up to fitting noise.
  EXPECT_NEAR(r.report.responses[1].first_passage[1].pf / z.first_passage[0].pf, 1.0, 0.05);
}

TEST(Pipeline, DeterministicAcrossWorkers) {
  auto c1 = synthetic_config();
  auto c4 = c1;
  c4.workers = 4;
  auto a = run_pipeline(c1, lognormal_model());
  auto b = run_pipeline(c4, lognormal_model());
  EXPECT_EQ(a.report.to_json().dump(), b.report.to_json().dump());
}

TEST(Pipeline, WritesArtifacts) {
  auto c = synthetic_config();
  fs::path dir = fs::temp_directory_path() / "fracmix_pipeline_test";
  fs::remove_all(dir);
  auto r = run_pipeline(c, lognormal_model());
  write_pipeline_outputs(r, dir.string());
  auto j = nlohmann::json::parse(slurp(dir / "report.json"));
  EXPECT_EQ(j["config_hash"], c.hash());
  EXPECT_FALSE(j["config"].contains("workers"));
  auto back = ReliabilityReport::from_json(j);
  EXPECT_EQ(back.responses.size(), 2u);
  std::string curves = slurp(dir / "curves_Z.csv");
  EXPECT_EQ(curves.rfind("# config_hash=" + c.hash() + "\nz,pdf,cdf,poe\n", 0), 0u);
  EXPECT_TRUE(fs::exists(dir / "curves_Z2.csv"));
  EXPECT_TRUE(fs::exists(dir / "convergence.csv"));
  write_partial_outputs(r.adaptive, c.hash(), dir.string());
  EXPECT_TRUE(fs::exists(dir / "convergence.csv.partial"));
  fs::remove_all(dir);
}

TEST(Pipeline, ErrorsCarryStageTag) {
  auto m = lognormal_model();
  m.evaluate = [](std::span<const double>) { return std::vector<double>{-1.0, 1.0}; };
  try {
    run_pipeline(synthetic_config(), m);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("[sampling] ", 0), 0u);
  }
  RunConfig bad = synthetic_config();
  bad.workers = 0;
  try {
    run_pipeline(bad, lognormal_model());
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("[config] ", 0), 0u);
  }
}

TEST(Pipeline, ConstantResponseIsANumericFailure) {
  auto m = lognormal_model();
  m.evaluate = [](std::span<const double>) { return std::vector<double>{2.0, 2.0}; };
  EXPECT_THROW(run_pipeline(synthetic_config(), m), NumericError);
}

TEST(Pipeline, DuffingDefaultRun) {
  RunConfig c;
  auto r = run_pipeline(c);
  ASSERT_EQ(r.report.responses.size(), 1u);
  const auto& z = r.report.responses[0];
  EXPECT_EQ(r.report.model, "duffing");
  EXPECT_TRUE(r.report.converged);
  EXPECT_NEAR(z.moments.mean / 3.6778, 1.0, 0.05);
  ASSERT_EQ(z.first_passage.size(), 1u);
  EXPECT_EQ(z.first_passage[0].threshold, 7.0);
  EXPECT_GT(z.first_passage[0].pf, 1e-6);
  EXPECT_LT(z.first_passage[0].pf, 1e-2);
}

TEST(Baseline, RunsOnPrimaryResponse) {
  RunConfig c = synthetic_config();
  c.mcs_samples = 5000;
  auto rows = run_baseline(c, BaselineMethod::kMcs, lognormal_model());
  ASSERT_EQ(rows.size(), 2u);
  double exact = 0.5 * std::erfc(std::log(3.0) / 0.6 / std::sqrt(2.0));
  EXPECT_NEAR(rows[0].pf, exact, 4.0 * std::sqrt(exact * (1 - exact) / 5000.0));
  c.subset.n_per_level = 500;
  auto sus = run_baseline(c, BaselineMethod::kSubset, lognormal_model());
  EXPECT_EQ(sus.size(), 2u);
  EXPECT_EQ(sus[0].method, "sus");
}
