#pragma once

// Predictive distributions: direct h-step forecasts from covariate models,
// recursive forecasts for the random-walk benchmarks, and mixture functionals.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "msdsp/distributions.hpp"
#include "msdsp/model.hpp"
#include "msdsp/rng.hpp"

namespace msdsp {

namespace detail {

/// Pushes one retained draw `steps` periods past its last fitted row and
/// returns the predictive component (mean, variance) for covariates `x`.
inline std::pair<double, double> propagate_draw(const PosteriorDraws& d, Index k, const Eigen::VectorXd& x,
                                                int steps, Rng& rng) {
  const ModelConfig& cfg = d.config;
  const Index last = d.rows - 1, p = d.coefs;
  const bool switching = cfg.family == ModelFamily::Msdsp && !cfg.pin_dsp_state && !cfg.freeze_switch_forecast;
  Eigen::VectorXd bt(p), h(p);
  Eigen::VectorXi s(p);
  for (Index i = 0; i < p; ++i) {
    bt[i] = d.beta_tilde[d.at(k, last, i)];
    s[i] = d.s[d.at(k, last, i)];
    h[i] = d.H[d.at(k, last, i)];
  }
  double g = d.g[d.at_time(k, last)];
  const double mu_g = d.mu_g[static_cast<std::size_t>(k)], phi_g = d.phi_g[static_cast<std::size_t>(k)];
  const double sd_g = std::sqrt(d.sigma2_g[static_cast<std::size_t>(k)]);
  for (int step = 0; step < steps; ++step) {
    for (Index i = 0; i < p; ++i) {
      switch (cfg.family) {
        case ModelFamily::Msdsp:
        case ModelFamily::Dsp: {
          if (switching) {
            const double stay = s[i] ? d.stay1[d.at(k, i)] : d.stay0[d.at(k, i)];
            if (rng.uniform() >= stay) s[i] = 1 - s[i];
          }
          const double mu = d.mu[d.at(k, i)], phi = d.phi[d.at(k, i)];
          h[i] = mu + phi * (h[i] - mu) + sample_z(cfg.alpha_h, cfg.beta_h, rng);
          bt[i] += std::exp(0.5 * h[i]) * rng.normal();
          break;
        }
        case ModelFamily::TvpHomoskedastic:
          bt[i] += std::sqrt(d.state_var[d.at(k, i)]) * rng.normal();
          break;
        default:
          break;
      }
    }
    g = mu_g + phi_g * (g - mu_g) + sd_g * rng.normal();
  }
  double m = 0.0;
  for (Index i = 0; i < p; ++i)
    if (s[i]) m += x[i] * bt[i];
  return {m, std::exp(g)};
}

inline ForecastDistribution propagate_all(const PosteriorDraws& d, const Eigen::VectorXd& x, int steps,
                                          std::uint64_t seed, Index origin) {
  require(d.count > 0, ErrorCode::Empty, "no retained draws");
  require(x.size() == d.coefs, ErrorCode::LengthMismatch, "covariate vector does not match the fitted model");
  Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(origin), static_cast<std::uint64_t>(steps)}));
  ForecastDistribution fd;
  fd.horizon = steps;
  fd.origin = origin;
  fd.means.reserve(static_cast<std::size_t>(d.count));
  for (Index k = 0; k < d.count; ++k) {
    const auto [m, v] = propagate_draw(d, k, x, steps, rng);
    fd.means.push_back(m);
    fd.variances.push_back(v);
    fd.draws.push_back(m + std::sqrt(v) * rng.normal());
  }
  return fd;
}

}  // namespace detail

/// Predictive distribution of y_{T+h} from draws fitted with horizon alignment h.
inline ForecastDistribution direct_forecast(const PosteriorDraws& draws, const Eigen::VectorXd& x_T, int h,
                                            std::uint64_t seed, Index origin = 0) {
  require(h == draws.horizon, ErrorCode::HorizonMismatch,
          "forecast horizon " + std::to_string(h) + " but draws were fitted for " + std::to_string(draws.horizon));
  return detail::propagate_all(draws, x_T, h, seed, origin);
}

/// h-step predictive of the per-period growth for the random-walk benchmarks,
/// iterating the one-step model h times per draw.
inline ForecastDistribution recursive_rw_forecast(const PosteriorDraws& draws, int h, std::uint64_t seed,
                                                  Index origin = 0) {
  require(is_random_walk(draws.config.family), ErrorCode::WrongFamily,
          "recursive forecasts need RW-SV or RW-DRIFT-SV draws");
  require(h >= 1, ErrorCode::InvalidParameter, "horizon must be at least 1");
  return detail::propagate_all(draws, Eigen::VectorXd::Ones(1), h, seed, origin);
}

// ---------------------------------------------------------------------------
// Mixture functionals

inline double density(const ForecastDistribution& fd, double y) {
  require(fd.size() > 0, ErrorCode::Empty, "empty predictive distribution");
  double s = 0.0;
  for (std::size_t k = 0; k < fd.size(); ++k) s += std::exp(normal_log_density(y, fd.means[k], fd.variances[k]));
  return s / static_cast<double>(fd.size());
}

/// log density, stable when every component is far from y.
inline double log_density(const ForecastDistribution& fd, double y) {
  require(fd.size() > 0, ErrorCode::Empty, "empty predictive distribution");
  double mx = -std::numeric_limits<double>::infinity();
  std::vector<double> l(fd.size());
  for (std::size_t k = 0; k < fd.size(); ++k) mx = std::max(mx, l[k] = normal_log_density(y, fd.means[k], fd.variances[k]));
  double s = 0.0;
  for (double v : l) s += std::exp(v - mx);
  return mx + std::log(s / static_cast<double>(fd.size()));
}

inline double cdf(const ForecastDistribution& fd, double y) {
  require(fd.size() > 0, ErrorCode::Empty, "empty predictive distribution");
  double s = 0.0;
  for (std::size_t k = 0; k < fd.size(); ++k) s += detail::norm_cdf((y - fd.means[k]) / std::sqrt(fd.variances[k]));
  return s / static_cast<double>(fd.size());
}

inline double mean(const ForecastDistribution& fd) {
  require(fd.size() > 0, ErrorCode::Empty, "empty predictive distribution");
  double s = 0.0;
  for (double m : fd.means) s += m;
  return s / static_cast<double>(fd.size());
}

inline double quantile(const ForecastDistribution& fd, double q) {
  require(q > 0.0 && q < 1.0, ErrorCode::QOutOfRange, "quantile level must lie in (0, 1)");
  require(fd.size() > 0, ErrorCode::Empty, "empty predictive distribution");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t k = 0; k < fd.size(); ++k) {
    const double sd = std::sqrt(fd.variances[k]);
    lo = std::min(lo, fd.means[k] - 40.0 * sd);
    hi = std::max(hi, fd.means[k] + 40.0 * sd);
  }
  while (hi - lo > 1e-10 * std::max(1.0, std::abs(lo) + std::abs(hi))) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (cdf(fd, mid) < q ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace msdsp
