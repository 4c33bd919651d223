#pragma once

// Out-of-sample backtests: one fit and one predictive distribution per
// (model, origin, horizon), merged in a fixed order.

#include <algorithm>
#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "msdsp/econdata.hpp"
#include "msdsp/engine.hpp"
#include "msdsp/forecast.hpp"
#include "msdsp/metrics.hpp"
#include "msdsp/parallel.hpp"

namespace msdsp {

struct ModelSpec {
  std::string name;
  ModelConfig config;
};

struct ForecastRecord {
  std::string model;
  Index origin = 0;
  int horizon = 1;
  double realized = 0.0;
  double mean = 0.0;
  double median = 0.0;
  double q05 = 0.0;
  double q95 = 0.0;
  double log_score = 0.0;
  double crps = 0.0;
  double squared_error = 0.0;
};

struct BacktestOptions {
  std::uint64_t seed = 1;
  int jobs = 1;
  bool standardize_covariates = true;
  bool global_standardization = false;
  bool keep_distributions = false;
};

struct BacktestResult {
  std::vector<ForecastRecord> records;               // ordered by (model, horizon, origin)
  std::vector<ForecastDistribution> distributions;  // parallel to records when kept
};

/// FNV-1a, used to turn model names into stable seed components.
inline std::uint64_t name_hash(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t job_seed(std::uint64_t base, std::string_view model, Index origin, int horizon) {
  return derive_seed(base, {name_hash(model), static_cast<std::uint64_t>(origin), static_cast<std::uint64_t>(horizon)});
}

inline ForecastRecord score(const ForecastDistribution& fd, double realized, const std::string& model, Index origin,
                            int horizon) {
  ForecastRecord r;
  r.model = model;
  r.origin = origin;
  r.horizon = horizon;
  r.realized = realized;
  r.mean = mean(fd);
  r.median = quantile(fd, 0.5);
  r.q05 = quantile(fd, 0.05);
  r.q95 = quantile(fd, 0.95);
  r.log_score = log_density(fd, realized);
  r.crps = crps_mixture(fd, realized);
  r.squared_error = (realized - r.mean) * (realized - r.mean);
  return r;
}

/// Fits `spec` on the window of `job` and forecasts y_{origin+h}. `full` is a
/// contemporaneous dataset whose rows are dated 1..T. Random-walk families use
/// the response alone and iterate their one-step model.
inline std::pair<ForecastRecord, ForecastDistribution> run_origin(const ModelSpec& spec, const TimeSeriesDataset& full,
                                                                 const BacktestJob& job, const BacktestOptions& opt) {
  const std::uint64_t seed = job_seed(opt.seed, spec.name, job.origin, job.horizon);
  ModelConfig cfg = spec.config;
  cfg.mcmc.seed = seed;
  ForecastDistribution fd;
  double realized = 0.0;
  try {
    if (is_random_walk(cfg.family)) {
      const Index first = job.train_first - 1, len = job.train_last - job.train_first + 1;
      require(job.train_last - 1 + job.horizon < full.y.size(), ErrorCode::InfeasibleLayout, "realisation beyond the sample");
      TimeSeriesDataset d;
      d.y = full.y.segment(first, len);
      d.X = Eigen::MatrixXd::Ones(len, 1);
      d.labels = {"intercept"};
      d.horizon = 0;
      realized = full.y[job.train_last - 1 + job.horizon];
      fd = recursive_rw_forecast(fit(cfg, d).draws, job.horizon, seed, job.origin);
    } else {
      const OriginData od = origin_data(full, job, opt.standardize_covariates, opt.global_standardization);
      realized = od.realized;
      fd = direct_forecast(fit(cfg, od.train).draws, od.x_new, job.horizon, seed, job.origin);
    }
  } catch (const Error& e) {
    throw Error(e.code(), std::string(e.what()) + " [model " + spec.name + ", origin " + std::to_string(job.origin) +
                              ", h " + std::to_string(job.horizon) + "]");
  }
  return {score(fd, realized, spec.name, job.origin, job.horizon), std::move(fd)};
}

/// Runs every model on every job. Output order is (model, job order) and does
/// not depend on opt.jobs.
inline BacktestResult run_backtest(const std::vector<ModelSpec>& specs, const TimeSeriesDataset& full,
                                   const std::vector<BacktestJob>& jobs, const BacktestOptions& opt) {
  const std::size_t n = specs.size() * jobs.size();
  using Out = std::pair<ForecastRecord, ForecastDistribution>;
  auto results = parallel_map<Out>(n, opt.jobs, [&](std::size_t k) {
    auto out = run_origin(specs[k / jobs.size()], full, jobs[k % jobs.size()], opt);
    if (!opt.keep_distributions) out.second = {};
    return out;
  });
  BacktestResult res;
  res.records.reserve(n);
  for (auto& [rec, fd] : results) {
    res.records.push_back(std::move(rec));
    if (opt.keep_distributions) res.distributions.push_back(std::move(fd));
  }
  std::vector<std::size_t> order(n);
  for (std::size_t k = 0; k < n; ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ra = res.records[a];
    const auto& rb = res.records[b];
    return std::tuple(a / jobs.size(), ra.horizon, ra.origin) < std::tuple(b / jobs.size(), rb.horizon, rb.origin);
  });
  BacktestResult sorted;
  for (std::size_t k : order) {
    sorted.records.push_back(res.records[k]);
    if (opt.keep_distributions) sorted.distributions.push_back(res.distributions[k]);
  }
  return sorted;
}

inline double loss_of(const ForecastRecord& r, LossKind kind) {
  switch (kind) {
    case LossKind::SquaredError: return r.squared_error;
    case LossKind::NegLogScore: return -r.log_score;
    case LossKind::Crps: return r.crps;
  }
  return 0.0;
}

/// Loss matrix for one horizon; models in first-appearance order, origins sorted.
inline LossMatrix loss_matrix(const std::vector<ForecastRecord>& records, LossKind kind, int horizon) {
  LossMatrix lm;
  lm.kind = kind;
  for (const auto& r : records) {
    if (r.horizon != horizon) continue;
    if (std::find(lm.models.begin(), lm.models.end(), r.model) == lm.models.end()) lm.models.push_back(r.model);
    if (std::find(lm.origins.begin(), lm.origins.end(), r.origin) == lm.origins.end()) lm.origins.push_back(r.origin);
  }
  std::sort(lm.origins.begin(), lm.origins.end());
  require(!lm.models.empty(), ErrorCode::Empty, "no records for horizon " + std::to_string(horizon));
  lm.losses = Eigen::MatrixXd::Constant(static_cast<Index>(lm.models.size()), static_cast<Index>(lm.origins.size()),
                                        std::numeric_limits<double>::quiet_NaN());
  for (const auto& r : records) {
    if (r.horizon != horizon) continue;
    const auto m = std::find(lm.models.begin(), lm.models.end(), r.model) - lm.models.begin();
    const auto o = std::lower_bound(lm.origins.begin(), lm.origins.end(), r.origin) - lm.origins.begin();
    lm.losses(m, o) = loss_of(r, kind);
  }
  require(lm.losses.allFinite(), ErrorCode::LengthMismatch, "models were not evaluated at identical origins");
  return lm;
}

/// Log scores of one model at one horizon, ordered by origin.
inline std::vector<double> log_scores(const std::vector<ForecastRecord>& records, const std::string& model, int horizon) {
  std::vector<std::pair<Index, double>> v;
  for (const auto& r : records)
    if (r.model == model && r.horizon == horizon) v.emplace_back(r.origin, r.log_score);
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (const auto& [_, s] : v) out.push_back(s);
  return out;
}

}  // namespace msdsp
