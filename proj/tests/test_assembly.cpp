#include <catch_amalgamated.hpp>

#include "msdsp/assembly.hpp"
#include "msdsp/dgp.hpp"

using namespace msdsp;
using Catch::Matchers::WithinAbs;

namespace {

ModelConfig quick(ModelFamily f) {
  ModelConfig c;
  c.family = f;
  c.mcmc = {20, 10, 1, 1};
  return c;
}

TimeSeriesDataset regression_data(Index T, std::uint64_t seed) {
  Rng rng(seed);
  TimeSeriesDataset d;
  d.y.resize(T);
  d.X.resize(T, 2);
  d.labels = {"intercept", "x"};
  for (Index t = 0; t < T; ++t) {
    d.X(t, 0) = 1.0;
    d.X(t, 1) = rng.normal();
  }
  d.y[0] = rng.normal();
  for (Index t = 1; t < T; ++t) d.y[t] = 0.8 * d.X(t - 1, 1) + 0.3 * rng.normal();
  return d;
}

ExpertForecastPanel oracle_panel(const Eigen::VectorXd& y, Index T0, int h) {
  ExpertForecastPanel p;
  p.labels = {"oracle"};
  p.horizon = h;
  const Index T = y.size();
  p.forecasts.resize(T - h - T0 + 1, 1);
  p.realized.resize(T - h - T0 + 1);
  for (Index t = T0; t <= T - h; ++t) {
    p.origins.push_back(t);
    p.forecasts(t - T0, 0) = y[t - 1 + h];
    p.realized[t - T0] = y[t - 1 + h];
  }
  return p;
}

}  // namespace

TEST_CASE("three-way split arithmetic", "[assembly]") {
  CHECK(assembly_split(330) == 230);
  CHECK(assembly_split(330) - 130 == 100);
  CHECK_THROWS_AS(assembly_split(80), Error);

  Rng rng(1);
  Eigen::VectorXd y(330);
  for (auto& v : y) v = rng.normal();
  const auto panel = oracle_panel(y, 130, 1);
  CHECK(panel.rows() == 200);
  BacktestOptions opt;
  const auto res = assemble(panel, ModelFamily::Dsp, quick(ModelFamily::Dsp), assembly_split(330), opt);
  CHECK(res.records.size() == 100);
  CHECK(res.first_evaluation_origin == 230);
  CHECK(res.records.back().origin == 329);
}

TEST_CASE("oracle expert column equals the realised response", "[assembly]") {
  Rng rng(2);
  Eigen::VectorXd y(60);
  for (auto& v : y) v = rng.normal();
  const auto panel = oracle_panel(y, 20, 2);
  const auto d = synthesis_dataset(panel, panel.rows());
  CHECK(d.X.col(1) == d.y);
  CHECK((d.X.col(0).array() == 1.0).all());
  CHECK(d.horizon == 0);
  CHECK(d.labels == std::vector<std::string>{"intercept", "oracle"});
}

TEST_CASE("expert panel rows only use information up to their origin", "[assembly]") {
  const auto full = regression_data(80, 3);
  std::vector<ModelSpec> base{{"LINEAR", quick(ModelFamily::LinearConjugate)}, {"RW-SV", quick(ModelFamily::RwSv)}};
  BacktestOptions opt;
  const auto a = build_expert_panel(base, full, 50, 1, opt);
  CHECK(a.forecasts.cols() == 2);
  CHECK(a.labels == std::vector<std::string>{"LINEAR", "RW-SV"});
  CHECK(a.rows() == 30);
  auto mutated = full;
  mutated.y.tail(10).array() += 3.0;
  mutated.X.bottomRows(10).col(1).array() -= 2.0;
  const auto b = build_expert_panel(base, mutated, 50, 1, opt);
  // origins up to 70 never see rows 71..80
  for (Index k = 0; k < a.rows(); ++k) {
    if (a.origins[static_cast<std::size_t>(k)] > 70) continue;
    CHECK(a.forecasts.row(k) == b.forecasts.row(k));
  }
  CHECK_FALSE(a.forecasts.bottomRows(1) == b.forecasts.bottomRows(1));
}

TEST_CASE("assembly needs enough synthesis history", "[assembly]") {
  Rng rng(4);
  Eigen::VectorXd y(60);
  for (auto& v : y) v = rng.normal();
  const auto panel = oracle_panel(y, 40, 1);
  BacktestOptions opt;
  try {
    assemble(panel, ModelFamily::Msdsp, quick(ModelFamily::Msdsp), 45, opt);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientSynthesisHistory);
  }
  try {
    assemble(panel, ModelFamily::LinearConjugate, quick(ModelFamily::Msdsp), 55, opt);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::WrongFamily);
  }
}

TEST_CASE("assembly output does not depend on the worker count", "[assembly]") {
  Rng rng(5);
  Eigen::VectorXd y(70);
  for (auto& v : y) v = rng.normal();
  const auto panel = oracle_panel(y, 20, 1);
  BacktestOptions one, three;
  three.jobs = 3;
  const auto a = assemble(panel, ModelFamily::Msdsp, quick(ModelFamily::Msdsp), 55, one);
  const auto b = assemble(panel, ModelFamily::Msdsp, quick(ModelFamily::Msdsp), 55, three);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    CHECK(a.records[k].mean == b.records[k].mean);
    CHECK(a.records[k].crps == b.records[k].crps);
  }
}
