#pragma once

// Synthetic data generators with stored ground truth.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "msdsp/error.hpp"
#include "msdsp/model.hpp"
#include "msdsp/rng.hpp"

namespace msdsp {

struct SyntheticTruth {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  Eigen::MatrixXd beta_true;
  SwitchMatrix s_true;
  Eigen::VectorXd eps;
  std::vector<std::string> labels;
  std::uint64_t seed = 0;

  [[nodiscard]] TimeSeriesDataset dataset(int horizon = 0) const { return {y, X, labels, horizon}; }
};

namespace detail {

inline void finish_truth(SyntheticTruth& tr) {
  tr.s_true = (tr.beta_true.array() != 0.0).cast<std::uint8_t>();
  tr.y = (tr.X.array() * tr.beta_true.array()).rowwise().sum().matrix() + tr.eps;
}

inline std::vector<std::string> numbered_labels(Index p) {
  std::vector<std::string> l{"intercept"};
  for (Index i = 1; i < p; ++i) l.push_back("x" + std::to_string(i));
  return l;
}

}  // namespace detail

/// Regime levels for the correlated-covariate design; breakpoints are given
/// as fractions of T (1/3 and 2/3 put them at 100 and 200 when T = 300).
struct Case1Params {
  double break1 = 1.0 / 3.0;
  double break2 = 2.0 / 3.0;
  std::array<double, 3> beta1{1.0, 2.0, 0.5};
  std::array<double, 3> beta3{1.5, 0.5, 0.0};
  std::array<double, 3> beta4{1.0, 0.0, -1.0};
  double noise_sd = 1.0;
};

inline SyntheticTruth gen_case1(Index T, std::uint64_t seed, const Case1Params& prm = {}) {
  require(T >= 30, ErrorCode::TooShort, "case 1 needs T >= 30");
  Rng rng(seed);
  SyntheticTruth tr;
  tr.seed = seed;
  tr.X.resize(T, 6);
  tr.eps.resize(T);
  tr.beta_true = Eigen::MatrixXd::Zero(T, 6);
  const auto b1 = static_cast<Index>(std::llround(prm.break1 * static_cast<double>(T)));
  const auto b2 = static_cast<Index>(std::llround(prm.break2 * static_cast<double>(T)));
  for (Index t = 0; t < T; ++t) {
    double z[6];
    for (double& v : z) v = rng.normal();
    const double x1 = 0.4 * z[0] + z[1];
    const double x3 = 0.4 * z[0] + z[3];
    tr.X.row(t) << 1.0, x1, x1 + 1.8 * z[2], x3, x3 + 1.4 * z[4], x3 + 1.4 * z[5];
    tr.eps[t] = prm.noise_sd * rng.normal();
    const int regime = t < b1 ? 0 : (t < b2 ? 1 : 2);
    tr.beta_true(t, 1) = prm.beta1[static_cast<std::size_t>(regime)];
    tr.beta_true(t, 3) = prm.beta3[static_cast<std::size_t>(regime)];
    tr.beta_true(t, 4) = prm.beta4[static_cast<std::size_t>(regime)];
  }
  tr.labels = detail::numbered_labels(6);
  detail::finish_truth(tr);
  return tr;
}

/// Gradual-shift design. Knots are fractions of T; the defaults place them at
/// 100, 170, 200 and 240 for T = 300.
struct Case2Params {
  double break1 = 100.0 / 300.0;
  double break2 = 200.0 / 300.0;
  std::array<double, 3> beta1{1.0, 2.5, 1.5};
  double beta2_active = 1.5;
  double beta3_drift_start = 1.0;  // linear drift over [0, break1)
  double beta3_drift_end = 2.0;
  double beta3_off_end = 170.0 / 300.0;  // zero on [break1, beta3_off_end)
  double beta3_rise_end = 240.0 / 300.0;
  double beta3_rise_start_level = 0.8;
  double beta3_final = 1.5;
  double noise_sd = 1.0;
};

inline SyntheticTruth gen_case2(Index T, std::uint64_t seed, const Case2Params& prm = {}) {
  require(T >= 30, ErrorCode::TooShort, "case 2 needs T >= 30");
  Rng rng(seed);
  SyntheticTruth tr;
  tr.seed = seed;
  tr.X.resize(T, 4);
  tr.eps.resize(T);
  tr.beta_true = Eigen::MatrixXd::Zero(T, 4);
  auto at = [&](double f) { return static_cast<Index>(std::llround(f * static_cast<double>(T))); };
  const Index b1 = at(prm.break1), b2 = at(prm.break2), off = at(prm.beta3_off_end), rise = at(prm.beta3_rise_end);
  for (Index t = 0; t < T; ++t) {
    tr.X(t, 0) = 1.0;
    for (Index j = 1; j < 4; ++j) tr.X(t, j) = rng.normal();
    tr.eps[t] = prm.noise_sd * rng.normal();
    const int regime = t < b1 ? 0 : (t < b2 ? 1 : 2);
    tr.beta_true(t, 1) = prm.beta1[static_cast<std::size_t>(regime)];
    tr.beta_true(t, 2) = regime == 1 ? prm.beta2_active : 0.0;
    double b3;
    if (t < b1)
      b3 = prm.beta3_drift_start + (prm.beta3_drift_end - prm.beta3_drift_start) * static_cast<double>(t) /
                                       static_cast<double>(std::max<Index>(b1 - 1, 1));
    else if (t < off)
      b3 = 0.0;
    else if (t < rise)
      b3 = prm.beta3_rise_start_level + (prm.beta3_final - prm.beta3_rise_start_level) *
                                            static_cast<double>(t - off) /
                                            static_cast<double>(std::max<Index>(rise - off, 1));
    else
      b3 = prm.beta3_final;
    tr.beta_true(t, 3) = b3;
  }
  tr.labels = detail::numbered_labels(4);
  detail::finish_truth(tr);
  return tr;
}

/// Segments of `beta3` that move gradually (drift and rise), as row masks.
inline std::vector<Index> case2_gradual_rows(Index T, const Case2Params& prm = {}) {
  auto at = [&](double f) { return static_cast<Index>(std::llround(f * static_cast<double>(T))); };
  std::vector<Index> rows;
  for (Index t = 0; t < at(prm.break1); ++t) rows.push_back(t);
  for (Index t = at(prm.beta3_off_end); t < at(prm.beta3_rise_end); ++t) rows.push_back(t);
  return rows;
}

/// Predictive regression with a switching slope and stochastic volatility:
/// y_{t+h} = beta_t x_t + eps_{t+h}. x is a persistent AR(1); the slope
/// alternates between 0 and `slope` by a two-state Markov chain.
/// The defaults mimic monthly exchange-rate growth: when active, the slope
/// explains about as much variance as the noise, it is active roughly 40% of
/// the time, and the log-variance wanders with a stationary sd of about 1.75.
struct SwitchingSvParams {
  double x_persistence = 0.95;
  double slope = 0.1;
  double stay_on = 0.97;
  double stay_off = 0.98;
  double sv_level = -3.0;
  double sv_persistence = 0.98;
  double sv_innovation_sd = 0.35;
};

/// Returns y (length T) and X = (1, x) (T rows) aligned so that row t of X
/// predicts y[t + 1]; beta_true row t is the slope active for that pair.
inline SyntheticTruth gen_switching_sv(Index T, std::uint64_t seed, const SwitchingSvParams& prm = {}) {
  require(T >= 30, ErrorCode::TooShort, "switching design needs T >= 30");
  Rng rng(seed);
  SyntheticTruth tr;
  tr.seed = seed;
  tr.X.resize(T, 2);
  tr.y.resize(T);
  tr.eps.resize(T);
  tr.beta_true = Eigen::MatrixXd::Zero(T, 2);
  double x = rng.normal() / std::sqrt(1.0 - prm.x_persistence * prm.x_persistence);
  double g = prm.sv_level;
  int s = 1;
  tr.y[0] = std::exp(0.5 * g) * rng.normal();
  tr.eps[0] = tr.y[0];
  for (Index t = 0; t < T; ++t) {
    tr.X(t, 0) = 1.0;
    tr.X(t, 1) = x;
    tr.beta_true(t, 1) = s ? prm.slope : 0.0;
    if (t + 1 < T) {
      g = prm.sv_level + prm.sv_persistence * (g - prm.sv_level) + prm.sv_innovation_sd * rng.normal();
      tr.eps[t + 1] = std::exp(0.5 * g) * rng.normal();
      tr.y[t + 1] = tr.beta_true(t, 1) * x + tr.eps[t + 1];
    }
    x = prm.x_persistence * x + rng.normal() * std::sqrt(1.0 - prm.x_persistence * prm.x_persistence);
    const double stay = s ? prm.stay_on : prm.stay_off;
    if (rng.uniform() > stay) s = 1 - s;
  }
  tr.s_true = (tr.beta_true.array() != 0.0).cast<std::uint8_t>();
  tr.labels = {"intercept", "x"};
  return tr;
}

}  // namespace msdsp

#include "msdsp/econdata.hpp"

namespace msdsp {

/// Synthetic monthly panel shaped like an exchange-rate dataset: every series
/// the covariate builders need, with the exchange rate loading on the lagged
/// interest differential and oil through switching slopes, plus SV noise.
/// N dates give N-1 growth observations.
inline MacroPanel gen_demo_panel(Index N = 331, std::uint64_t seed = 2024) {
  require(N >= 24, ErrorCode::TooShort, "demo panel needs at least 24 months");
  Rng rng(seed);
  MacroPanel panel;
  for (Index t = 0; t < N; ++t) {
    const Index year = 1990 + t / 12, month = 1 + t % 12;
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-01", static_cast<int>(year), static_cast<int>(month));
    panel.dates.emplace_back(buf);
  }
  auto ar1 = [&](double level, double phi, double sd) {
    Eigen::VectorXd v(N);
    double x = level;
    for (Index t = 0; t < N; ++t) v[t] = x = level + phi * (x - level) + sd * rng.normal();
    return v;
  };
  auto walk = [&](double start, double drift, double sd) {
    Eigen::VectorXd v(N);
    double x = start;
    for (Index t = 0; t < N; ++t) v[t] = x += drift + sd * rng.normal();
    return v;
  };
  panel.series["r"] = ar1(0.04, 0.98, 0.002);
  panel.series["r_star"] = ar1(0.03, 0.98, 0.002);
  panel.series["p"] = walk(4.6, 0.002, 0.002);
  panel.series["p_star"] = walk(4.6, 0.0018, 0.002);
  for (const char* nm : {"p", "p_star"}) {
    const auto& lp = panel.series[nm];
    Eigen::VectorXd infl(N);
    infl[0] = 0.002;
    infl.tail(N - 1) = lp.tail(N - 1) - lp.head(N - 1);
    panel.series[std::string(nm) == "p" ? "pi" : "pi_star"] = infl;
  }
  panel.series["ip"] = walk(4.5, 0.0015, 0.008);
  panel.series["ip_star"] = walk(4.5, 0.0015, 0.008);
  panel.series["m"] = walk(7.0, 0.004, 0.004);
  panel.series["m_star"] = walk(7.0, 0.0035, 0.004);
  panel.series["out"] = walk(9.0, 0.002, 0.005);
  panel.series["out_star"] = walk(9.0, 0.002, 0.005);
  panel.series["oil"] = walk(3.5, 0.0, 0.08);
  panel.series["gold"] = walk(6.0, 0.002, 0.04);
  panel.series["copper"] = walk(8.0, 0.001, 0.06);

  Eigen::VectorXd e(N);
  e[0] = 0.0;
  const auto& r = panel.series["r"];
  const auto& rs = panel.series["r_star"];
  const auto& oil = panel.series["oil"];
  double g = -7.0;
  int on = 1;
  for (Index t = 1; t < N; ++t) {
    g = -7.0 + 0.97 * (g + 7.0) + 0.2 * rng.normal();
    if (rng.uniform() > 0.97) on = 1 - on;
    const double signal = on ? 1.5 * (r[t - 1] - rs[t - 1]) - 0.05 * (oil[t] - oil[t - 1]) : 0.0;
    e[t] = e[t - 1] + signal + std::exp(0.5 * g) * rng.normal();
  }
  panel.series["e"] = e;
  return panel;
}

}  // namespace msdsp
