#pragma once

// Two-stage forecast assembly. Stage 1 collects out-of-sample point forecasts
// from base models; stage 2 regresses the realised response on them with a
// time-varying intercept and weights using the ordinary fit/forecast path.

#include <string>
#include <vector>

#include "msdsp/backtest.hpp"

namespace msdsp {

/// Row k holds forecasts of y at target time origins[k] + horizon, each made
/// with information up to origins[k].
struct ExpertForecastPanel {
  std::vector<std::string> labels;
  int horizon = 1;
  std::vector<Index> origins;
  Eigen::MatrixXd forecasts;  // N x L
  Eigen::VectorXd realized;   // N

  [[nodiscard]] Index rows() const { return forecasts.rows(); }
  [[nodiscard]] Index target(Index k) const { return origins[static_cast<std::size_t>(k)] + horizon; }
};

enum class ExpertStatistic { Mean, Median };

/// Runs each base model at origins T0..T-h and keeps its predictive mean
/// (or median).
inline ExpertForecastPanel build_expert_panel(const std::vector<ModelSpec>& base, const TimeSeriesDataset& full,
                                              Index T0, int h, const BacktestOptions& opt,
                                              ExpertStatistic stat = ExpertStatistic::Mean) {
  require(!base.empty(), ErrorCode::Empty, "no base models");
  const auto jobs = backtest_layout(full.y.size(), T0, {h});
  const auto res = run_backtest(base, full, jobs, opt);
  ExpertForecastPanel panel;
  panel.horizon = h;
  const auto N = static_cast<Index>(jobs.size());
  panel.forecasts.resize(N, static_cast<Index>(base.size()));
  panel.realized.resize(N);
  for (Index k = 0; k < N; ++k) panel.origins.push_back(jobs[static_cast<std::size_t>(k)].origin);
  for (std::size_t j = 0; j < base.size(); ++j) {
    panel.labels.push_back(base[j].name);
    for (Index k = 0; k < N; ++k) {
      const auto& r = res.records[j * jobs.size() + static_cast<std::size_t>(k)];
      panel.forecasts(k, static_cast<Index>(j)) = stat == ExpertStatistic::Mean ? r.mean : r.median;
      panel.realized[k] = r.realized;
    }
  }
  return panel;
}

/// Synthesis regression data from the first `rows` panel rows: y = realised,
/// X = (1, forecasts), contemporaneous alignment.
inline TimeSeriesDataset synthesis_dataset(const ExpertForecastPanel& panel, Index rows) {
  require(rows >= 1 && rows <= panel.rows(), ErrorCode::InvalidParameter, "bad synthesis row count");
  TimeSeriesDataset d;
  d.y = panel.realized.head(rows);
  d.X.resize(rows, panel.forecasts.cols() + 1);
  d.X.col(0).setOnes();
  d.X.rightCols(panel.forecasts.cols()) = panel.forecasts.topRows(rows);
  d.labels = {"intercept"};
  for (const auto& l : panel.labels) d.labels.push_back(l);
  d.horizon = 0;
  return d;
}

struct AssemblyResult {
  std::vector<ForecastRecord> records;
  std::vector<ForecastDistribution> distributions;
  Index first_evaluation_origin = 0;
};

inline Index min_synthesis_rows(const ExpertForecastPanel& panel) {
  return std::max<Index>(10, 2 * (panel.forecasts.cols() + 1));
}

/// Evaluates the assembly at every panel row whose origin is at least T1.
/// For a row with target tau, the synthesis is trained on rows whose targets
/// are at most tau - h (the realisations known at the origin) and its state is
/// pushed h periods ahead before weighting the row's expert forecasts.
inline AssemblyResult assemble(const ExpertForecastPanel& panel, ModelFamily weight_family, ModelConfig cfg, Index T1,
                               const BacktestOptions& opt) {
  require(weight_family == ModelFamily::Msdsp || weight_family == ModelFamily::Dsp, ErrorCode::WrongFamily,
          "assembly weights follow MSDSP or DSP dynamics");
  cfg.family = weight_family;
  const int h = panel.horizon;
  std::vector<Index> eval;
  for (Index k = 0; k < panel.rows(); ++k)
    if (panel.origins[static_cast<std::size_t>(k)] >= T1) eval.push_back(k);
  require(!eval.empty(), ErrorCode::InfeasibleLayout, "no evaluation rows at or after T1");
  auto training_rows = [&](Index k) {
    Index n = 0;
    while (n < panel.rows() && panel.target(n) <= panel.origins[static_cast<std::size_t>(k)]) ++n;
    return n;
  };
  require(training_rows(eval.front()) >= min_synthesis_rows(panel), ErrorCode::InsufficientSynthesisHistory,
          "only " + std::to_string(training_rows(eval.front())) + " synthesis rows before the first evaluation");
  const std::string name = std::string(to_string(weight_family)) + "-assembly";
  using Out = std::pair<ForecastRecord, ForecastDistribution>;
  auto outs = parallel_map<Out>(eval.size(), opt.jobs, [&](std::size_t e) {
    const Index k = eval[e];
    const Index origin = panel.origins[static_cast<std::size_t>(k)];
    ModelConfig c = cfg;
    c.mcmc.seed = job_seed(opt.seed, name, origin, h);
    const auto draws = fit(c, synthesis_dataset(panel, training_rows(k))).draws;
    Eigen::VectorXd x(panel.forecasts.cols() + 1);
    x[0] = 1.0;
    x.tail(panel.forecasts.cols()) = panel.forecasts.row(k).transpose();
    auto fd = detail::propagate_all(draws, x, h, c.mcmc.seed, origin);
    fd.horizon = h;
    return Out{score(fd, panel.realized[k], name, origin, h), std::move(fd)};
  });
  AssemblyResult res;
  res.first_evaluation_origin = panel.origins[static_cast<std::size_t>(eval.front())];
  for (auto& [r, fd] : outs) {
    res.records.push_back(std::move(r));
    if (opt.keep_distributions) res.distributions.push_back(std::move(fd));
  }
  return res;
}

/// Three-way split: T1 = T - evaluation rows.
inline Index assembly_split(Index T, Index evaluation_rows = 100) {
  require(T > evaluation_rows, ErrorCode::InfeasibleLayout, "sample shorter than the evaluation block");
  return T - evaluation_rows;
}

}  // namespace msdsp
