#include <catch_amalgamated.hpp>

#include <sstream>

#include "msdsp/dgp.hpp"
#include "msdsp/engine.hpp"
#include "msdsp/io.hpp"

using namespace msdsp;

TEST_CASE("draws survive a save/load round trip bit for bit", "[io]") {
  const auto tr = gen_case2(60, 3);
  TimeSeriesDataset d{tr.y, tr.X, {}, 0};
  ModelConfig cfg;
  cfg.mcmc = {10, 6, 1, 9};
  cfg.keep_auxiliary = true;
  const auto draws = fit(cfg, d).draws;
  std::stringstream ss;
  save_draws(ss, draws);
  const auto back = load_draws(ss);
  CHECK(back == draws);

  std::stringstream bad("MSDSP-DRAWS 0\n{}\n");
  CHECK_THROWS_AS(load_draws(bad), Error);
  std::string text;
  {
    std::stringstream full;
    save_draws(full, draws);
    text = full.str();
  }
  std::stringstream truncated(text.substr(0, text.size() - 16));
  CHECK_THROWS_AS(load_draws(truncated), Error);
}

TEST_CASE("configuration JSON round trip", "[io][config]") {
  ModelConfig c;
  c.family = ModelFamily::Dsp;
  c.alpha_h = 1.5;
  c.priors.stay_a = 12.0;
  c.mcmc = McmcSettings::desk(77);
  c.window = WindowScheme::rolling(50);
  c.freeze_switch_forecast = true;
  const auto back = config_from_json(Json::parse(to_json(c).dump()));
  CHECK(back == c);

  CHECK(window_from_json("rolling:100") == WindowScheme::rolling(100));
  CHECK(window_from_json(Json{{"rolling", 50}}) == WindowScheme::rolling(50));
  CHECK(window_from_json("expanding") == WindowScheme::expanding());
  CHECK(mcmc_from_json(Json{{"preset", "paper"}}) == McmcSettings::paper());
}

TEST_CASE("configuration errors", "[io][config]") {
  CHECK_THROWS_AS(config_from_json(Json{{"familly", "MSDSP"}}), Error);
  CHECK_THROWS_AS(config_from_json(Json{{"family", "NOPE"}}), Error);
  CHECK_THROWS_AS(config_from_json(Json{{"mcmc", {{"preset", "huge"}}}}), Error);
  CHECK_THROWS_AS(config_from_json(Json{{"alpha_h", -1.0}}), Error);
}

TEST_CASE("dotted overrides", "[io][config]") {
  Json doc{{"model", {{"mcmc", {{"burn_in", 10}}}}}};
  apply_override(doc, "model.mcmc.burn_in=25");
  apply_override(doc, "model.family=DSP");
  apply_override(doc, "backtest.horizons=[1,3]");
  CHECK(doc["model"]["mcmc"]["burn_in"] == 25);
  CHECK(doc["model"]["family"] == "DSP");
  CHECK(doc["backtest"]["horizons"] == Json::array({1, 3}));
  CHECK_THROWS_AS(apply_override(doc, "novalue"), Error);
}

TEST_CASE("matrix CSV round trip", "[io][csv]") {
  Eigen::MatrixXd m(3, 2);
  m << 0.1, -1e-300, 1.0 / 3.0, 2.5e10, -0.0, 7.0;
  std::stringstream ss;
  write_matrix_csv(ss, m, {"a", "b"});
  const auto [header, back] = read_matrix_csv(ss);
  CHECK(header == std::vector<std::string>{"a", "b"});
  CHECK(back == m);
}
