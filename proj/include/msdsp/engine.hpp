#pragma once

// Gibbs sweep orchestration for every model family, retention of draws,
// chain diagnostics and posterior summaries.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "msdsp/distributions.hpp"
#include "msdsp/fingerprint.hpp"
#include "msdsp/model.hpp"
#include "msdsp/rng.hpp"
#include "msdsp/samplers.hpp"

namespace msdsp {

// ---------------------------------------------------------------------------
// Diagnostics

/// Autocorrelations at lags 1..max_lag (fewer when the series is short).
inline std::vector<double> autocorrelations(const std::vector<double>& x, int max_lag) {
  const auto n = static_cast<Index>(x.size());
  std::vector<double> out;
  if (n < 2) return out;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double c0 = 0.0;
  for (double v : x) c0 += (v - mean) * (v - mean);
  const Index L = std::min<Index>(max_lag, n - 1);
  for (Index k = 1; k <= L; ++k) {
    double ck = 0.0;
    for (Index t = k; t < n; ++t) ck += (x[static_cast<std::size_t>(t)] - mean) * (x[static_cast<std::size_t>(t - k)] - mean);
    out.push_back(c0 > 0.0 ? ck / c0 : 0.0);
  }
  return out;
}

/// Effective sample size with Geyer's initial positive sequence, capped at n.
inline double effective_sample_size(const std::vector<double>& x) {
  const auto n = static_cast<Index>(x.size());
  if (n < 4) return static_cast<double>(n);
  const auto rho = autocorrelations(x, static_cast<int>(n - 1));
  double mean = 0.0, var = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  for (double v : x) var += (v - mean) * (v - mean);
  if (var == 0.0) return static_cast<double>(n);
  auto r = [&](std::size_t k) { return k == 0 ? 1.0 : rho[k - 1]; };
  double tau = -1.0;
  for (std::size_t m = 0; 2 * m + 1 <= rho.size(); ++m) {
    const double pair = r(2 * m) + r(2 * m + 1);
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  tau = std::max(tau, 1e-12);
  return std::clamp(static_cast<double>(n) / tau, 1.0, static_cast<double>(n));
}

struct ChainDiagnostics {
  std::map<std::string, double> ess;
  std::map<std::string, std::vector<double>> acf;  // lags 1..50
  SamplerCounters counters;
  double seconds_per_sweep = 0.0;
  long long sweeps = 0;

  [[nodiscard]] std::map<std::string, double> acceptance_rates() const {
    auto rate = [](long long a, long long p) { return p > 0 ? static_cast<double>(a) / static_cast<double>(p) : 1.0; };
    return {{"phi_g", rate(counters.phi_g_accepted, counters.phi_g_proposed)},
            {"phi", rate(counters.phi_accepted, counters.phi_proposed)},
            {"interval_flip", rate(counters.flip_accepted, counters.flip_proposed)},
            {"transition", rate(counters.transition_accepted, counters.transition_proposed)}};
  }
};

struct FitResult {
  PosteriorDraws draws;
  ChainDiagnostics diagnostics;
};

// ---------------------------------------------------------------------------
// Initialisation and family checks

inline bool intercept_only(const Eigen::MatrixXd& X) {
  return X.cols() == 1 && (X.col(0).array() == 1.0).all();
}

inline void check_family(const ModelConfig& cfg, const TimeSeriesDataset& d) {
  if (is_random_walk(cfg.family))
    require(intercept_only(d.X), ErrorCode::IncompatibleFamily,
            std::string(to_string(cfg.family)) + " requires an intercept-only design");
}

inline LatentState initial_state(const RegressionData& data, const ModelConfig& cfg) {
  const Index n = data.rows(), p = data.cols();
  LatentState st;
  st.beta_tilde = Eigen::MatrixXd::Zero(n, p);
  st.beta0 = Eigen::VectorXd::Zero(p);
  st.s = SwitchMatrix::Ones(n, p);
  st.beta = Eigen::MatrixXd::Zero(n, p);
  double var = 0.0;
  if (n > 1) {
    const double m = data.y.mean();
    var = (data.y.array() - m).square().sum() / static_cast<double>(n - 1);
  }
  const double g0 = std::log(std::max(var, 1e-8));
  st.g = Eigen::VectorXd::Constant(n, g0);
  st.mu_g = g0;
  st.phi_g = 0.9;
  st.sigma2_g = 0.05;
  st.P.assign(static_cast<std::size_t>(p), TransitionMatrix{0.9, 0.9});
  if (cfg.family != ModelFamily::Msdsp || cfg.pin_dsp_state) {
    const double stay0 = cfg.priors.stay_a / (cfg.priors.stay_a + cfg.priors.stay_b);
    st.P.assign(static_cast<std::size_t>(p), TransitionMatrix{stay0, 1.0});
  }
  const double b = cfg.alpha_h + cfg.beta_h;
  st.H = Eigen::MatrixXd::Constant(n, p, -4.0);
  st.mu = Eigen::VectorXd::Constant(p, -4.0);
  st.phi = Eigen::VectorXd::Constant(p, 0.9);
  st.xi_mu = Eigen::VectorXd::Constant(p, polya_gamma_mean(b, 0.0));
  st.xi = Eigen::MatrixXd::Constant(n, p, polya_gamma_mean(b, 0.0));
  st.r = Eigen::VectorXi::Constant(n, 4);
  st.h_mix = Eigen::MatrixXi::Constant(n, p, 4);
  st.state_var = Eigen::VectorXd::Constant(p, std::exp(-4.0));
  if (cfg.family == ModelFamily::TvpHomoskedastic) st.H.setConstant(std::log(st.state_var[0]));
  if (is_random_walk(cfg.family) || cfg.family == ModelFamily::LinearConjugate) {
    st.H.setZero();
    st.mu.setZero();
    st.phi.setZero();
    st.state_var.setZero();
  }
  return st;
}

// ---------------------------------------------------------------------------
// One sweep

inline void sweep(const RegressionData& data, LatentState& st, const ModelConfig& cfg, Rng& rng,
                  SamplerCounters& counters) {
  const bool switching = cfg.family == ModelFamily::Msdsp && !cfg.pin_dsp_state;
  switch (cfg.family) {
    case ModelFamily::Msdsp:
    case ModelFamily::Dsp:
      sample_beta_tilde(data, st, cfg, rng, counters);
      compose_beta(st);
      if (switching) sample_switch_states(data, st, cfg, rng, counters);
      compose_beta(st);
      sample_sv_indicators(data, st, cfg, rng);
      sample_g(data, st, cfg, rng);
      sample_sv_params(st, cfg, rng, counters);
      if (switching) sample_transition(st, cfg, rng, counters);
      sample_h_block(st, cfg, rng, counters);
      break;
    case ModelFamily::TvpHomoskedastic:
      sample_beta_tilde(data, st, cfg, rng, counters);
      compose_beta(st);
      sample_sv_indicators(data, st, cfg, rng);
      sample_g(data, st, cfg, rng);
      sample_sv_params(st, cfg, rng, counters);
      sample_state_variances(st, cfg, rng);
      break;
    case ModelFamily::RwSv:
    case ModelFamily::RwDriftSv:
    case ModelFamily::LinearConjugate:
      if (cfg.family == ModelFamily::RwDriftSv)
        sample_constant_coefficients(data, st, cfg.priors.drift_var, rng);
      else if (cfg.family == ModelFamily::LinearConjugate)
        sample_constant_coefficients(data, st, cfg.priors.linear_coef_var, rng);
      compose_beta(st);
      sample_sv_indicators(data, st, cfg, rng);
      sample_g(data, st, cfg, rng);
      sample_sv_params(st, cfg, rng, counters);
      break;
  }
}

// ---------------------------------------------------------------------------
// Closed-form normal-inverse-gamma posterior for the homoskedastic linear model

inline void fit_linear_conjugate(const RegressionData& data, const ModelConfig& cfg, PosteriorDraws& out, Rng& rng) {
  const Index n = data.rows(), p = data.cols();
  const auto& pr = cfg.priors;
  Eigen::MatrixXd prec = data.X.transpose() * data.X;
  prec.diagonal().array() += 1.0 / pr.linear_coef_var;
  const Eigen::LLT<Eigen::MatrixXd> llt(prec);
  require(llt.info() == Eigen::Success, ErrorCode::NonConvergentCholesky, "normal-inverse-gamma precision not SPD");
  const Eigen::VectorXd mean = llt.solve(data.X.transpose() * data.y);
  const double shape = pr.linear_sigma2_shape + 0.5 * static_cast<double>(n);
  const double rate = pr.linear_sigma2_rate + 0.5 * (data.y.squaredNorm() - mean.dot(prec * mean));
  LatentState st = initial_state(data, cfg);
  for (int d = 0; d < cfg.mcmc.retained; ++d) {
    const double s2 = sample_inverse_gamma(shape, std::max(rate, 1e-300), rng);
    Eigen::VectorXd eps(p);
    for (Index i = 0; i < p; ++i) eps[i] = rng.normal();
    const Eigen::VectorXd beta = mean + std::sqrt(s2) * llt.matrixU().solve(eps);
    for (Index t = 0; t < n; ++t) st.beta_tilde.row(t) = beta.transpose();
    st.beta0 = beta;
    compose_beta(st);
    st.g.setConstant(std::log(s2));
    st.mu_g = std::log(s2);
    st.phi_g = 0.0;
    st.sigma2_g = 1e-300;
    out.append(st);
  }
}

// ---------------------------------------------------------------------------
// Driver

namespace detail {

inline void collect_scalar_traces(const PosteriorDraws& d, ChainDiagnostics& diag) {
  std::map<std::string, std::vector<double>> traces;
  const auto G = static_cast<std::size_t>(d.count);
  traces["mu_g"] = d.mu_g;
  traces["phi_g"] = d.phi_g;
  traces["sigma2_g"] = d.sigma2_g;
  for (Index i = 0; i < d.coefs; ++i) {
    const std::string tag = "[" + std::to_string(i) + "]";
    auto per_coef = [&](const std::vector<double>& v) {
      std::vector<double> out(G);
      for (std::size_t k = 0; k < G; ++k) out[k] = v[d.at(static_cast<Index>(k), i)];
      return out;
    };
    traces["mu" + tag] = per_coef(d.mu);
    traces["phi" + tag] = per_coef(d.phi);
    traces["stay0" + tag] = per_coef(d.stay0);
    traces["stay1" + tag] = per_coef(d.stay1);
    std::vector<double> avg(G, 0.0);
    for (std::size_t k = 0; k < G; ++k) {
      for (Index t = 0; t < d.rows; ++t) avg[k] += d.beta(static_cast<Index>(k), t, i);
      avg[k] /= static_cast<double>(std::max<Index>(d.rows, 1));
    }
    traces["mean_beta" + tag] = std::move(avg);
  }
  for (auto& [name, tr] : traces) {
    diag.ess[name] = effective_sample_size(tr);
    diag.acf[name] = autocorrelations(tr, 50);
  }
}

}  // namespace detail

/// Runs the sampler for `cfg` on `dataset` and returns the retained draws.
inline FitResult fit(const ModelConfig& cfg, const TimeSeriesDataset& dataset) {
  validate_config(cfg);
  checked(dataset);
  check_family(cfg, dataset);
  const RegressionData data = aligned(dataset);
  if (cfg.window.kind == WindowScheme::Kind::Rolling)
    require(data.rows() >= 2 * data.cols(), ErrorCode::TooShort, "window shorter than twice the coefficient count");

  FitResult res;
  PosteriorDraws& out = res.draws;
  out.config = cfg;
  out.fingerprint = dataset_fingerprint(dataset);
  out.horizon = dataset.horizon;
  out.reserve_for(data.rows(), data.cols(), cfg.mcmc.retained);

  Rng rng(cfg.mcmc.seed);
  const auto start = std::chrono::steady_clock::now();
  if (cfg.family == ModelFamily::LinearConjugate && !cfg.linear_sv) {
    fit_linear_conjugate(data, cfg, out, rng);
  } else {
    LatentState st = initial_state(data, cfg);
    const long long total = cfg.mcmc.total_iterations();
    for (long long it = 0; it < total; ++it) {
      try {
        sweep(data, st, cfg, rng, res.diagnostics.counters);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::NonConvergentCholesky || e.code() == ErrorCode::SingularInnovation)
          throw Error(e.code(), std::string(e.what()) + " (sweep " + std::to_string(it) + ")");
        throw;
      }
      ++res.diagnostics.sweeps;
      if (it >= cfg.mcmc.burn_in && (it - cfg.mcmc.burn_in + 1) % cfg.mcmc.thin == 0) {
        const std::string bad = invariant_violation(st);
        require(bad.empty(), ErrorCode::InvalidParameter, "retained state violates invariant: " + bad);
        out.append(st);
      }
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  res.diagnostics.seconds_per_sweep = res.diagnostics.sweeps > 0 ? secs / static_cast<double>(res.diagnostics.sweeps) : 0.0;
  detail::collect_scalar_traces(out, res.diagnostics);
  return res;
}

// ---------------------------------------------------------------------------
// Posterior summary

struct PosteriorSummary {
  Eigen::MatrixXd mean;     // posterior mean of beta
  Eigen::MatrixXd lower;    // 2.5% quantile of beta
  Eigen::MatrixXd upper;    // 97.5% quantile of beta
  Eigen::MatrixXd prob_on;  // Pr(s = 1)
  Eigen::MatrixXd shadow_mean;
  Eigen::VectorXd g_mean;
};

/// Empirical quantile with linear interpolation between order statistics.
inline double empirical_quantile(std::vector<double> v, double q) {
  require(!v.empty(), ErrorCode::Empty, "quantile of an empty sample");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline PosteriorSummary posterior_summary(const PosteriorDraws& d) {
  require(d.count > 0, ErrorCode::Empty, "no retained draws");
  PosteriorSummary s;
  s.mean = Eigen::MatrixXd::Zero(d.rows, d.coefs);
  s.lower.resize(d.rows, d.coefs);
  s.upper.resize(d.rows, d.coefs);
  s.prob_on = Eigen::MatrixXd::Zero(d.rows, d.coefs);
  s.shadow_mean = Eigen::MatrixXd::Zero(d.rows, d.coefs);
  s.g_mean = Eigen::VectorXd::Zero(d.rows);
  const auto G = static_cast<double>(d.count);
  std::vector<double> col(static_cast<std::size_t>(d.count));
  for (Index t = 0; t < d.rows; ++t) {
    for (Index i = 0; i < d.coefs; ++i) {
      for (Index k = 0; k < d.count; ++k) {
        const double b = d.beta(k, t, i);
        col[static_cast<std::size_t>(k)] = b;
        s.mean(t, i) += b / G;
        s.prob_on(t, i) += d.s[d.at(k, t, i)] / G;
        s.shadow_mean(t, i) += d.beta_tilde[d.at(k, t, i)] / G;
      }
      s.lower(t, i) = empirical_quantile(col, 0.025);
      s.upper(t, i) = empirical_quantile(col, 0.975);
    }
    for (Index k = 0; k < d.count; ++k) s.g_mean[t] += d.g[d.at_time(k, t)] / G;
  }
  return s;
}

}  // namespace msdsp
