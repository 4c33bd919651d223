#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "msdsp/error.hpp"
#include "msdsp/rng.hpp"

namespace msdsp {

namespace detail {

inline double softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double log_beta_fn(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double log_norm_cdf(double x) {
  if (x > -30.0) return std::log(norm_cdf(x));
  // Asymptotic expansion of the lower tail.
  const double x2 = x * x;
  return -0.5 * x2 - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi) +
         std::log1p(-1.0 / x2 + 3.0 / (x2 * x2));
}

}  // namespace detail

inline double normal_log_density(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * var) + d * d / var);
}

// ---------------------------------------------------------------------------
// Z-distribution Z(alpha, beta, 0, 1): logit of a Beta(alpha, beta) variable,
// f(x) = exp(alpha x) / (B(alpha, beta) (1 + exp(x))^(alpha + beta)).

inline double z_log_density(double x, double alpha, double beta) {
  require(alpha > 0 && beta > 0, ErrorCode::NonPositiveShape, "Z-distribution shapes must be positive");
  return alpha * x - detail::log_beta_fn(alpha, beta) - (alpha + beta) * detail::softplus(x);
}

inline double sample_z(double alpha, double beta, Rng& rng) {
  require(alpha > 0 && beta > 0, ErrorCode::NonPositiveShape, "Z-distribution shapes must be positive");
  // log(X / Y) for independent gammas avoids logit(1) after rounding.
  return std::log(rng.gamma(alpha)) - std::log(rng.gamma(beta));
}

// ---------------------------------------------------------------------------
// Polya-Gamma. PG(1, c) uses the exact alternating-series sampler built on
// J*(1, z) with the truncation point t = 2/pi; PG(n, c) for integer n is an
// n-fold sum.

namespace detail {

constexpr double kPgTrunc = 2.0 / std::numbers::pi;

inline double pg_aterm(int n, double x, double t) {
  const double k = n + 0.5;
  double logf;
  if (x <= t) {
    logf = std::log(std::numbers::pi) + std::log(k) + 1.5 * (std::log(2.0 / std::numbers::pi) - std::log(x)) -
           2.0 * k * k / x;
  } else {
    logf = std::log(std::numbers::pi) + std::log(k) - x * std::numbers::pi * std::numbers::pi * 0.5 * k * k;
  }
  return std::exp(logf);
}

// Inverse Gaussian IG(mu, 1).
inline double sample_inverse_gaussian(double mu, Rng& rng) {
  const double n = rng.normal();
  const double v = n * n;
  double x = mu + 0.5 * mu * (mu * v - std::sqrt(4.0 * mu * v + mu * mu * v * v));
  if (rng.uniform() > mu / (mu + x)) x = mu * mu / x;
  return x;
}

// IG(1/z, 1) truncated to (0, t).
inline double sample_truncated_inverse_gaussian(double z, double t, Rng& rng) {
  const double mu = z > 0 ? 1.0 / z : std::numeric_limits<double>::infinity();
  if (mu > t) {
    for (;;) {
      double e1, e2;
      do {
        e1 = rng.exponential();
        e2 = rng.exponential();
      } while (e1 * e1 > 2.0 * e2 / t);
      const double x = t / ((1.0 + t * e1) * (1.0 + t * e1));
      if (rng.uniform() <= std::exp(-0.5 * z * z * x)) return x;
    }
  }
  double x;
  do {
    x = sample_inverse_gaussian(mu, rng);
  } while (x > t);
  return x;
}

// J*(1, z); PG(1, c) = J*(1, c/2) / 4.
inline double sample_jstar1(double z, Rng& rng) {
  const double t = kPgTrunc;
  z = std::abs(z);
  const double K = std::numbers::pi * std::numbers::pi / 8.0 + 0.5 * z * z;
  const double log_a = std::log(4.0) - std::log(std::numbers::pi) - z;
  const double w = std::sqrt(std::numbers::pi / 2.0);  // 1 / sqrt(t)
  const double log_common = log_a + std::log(K) + K * t;
  const double q_over_p = std::exp(log_common + log_norm_cdf(w * (t * z - 1.0))) +
                          std::exp(log_common + 2.0 * z + log_norm_cdf(-w * (t * z + 1.0)));
  const double prob_exp = 1.0 / (1.0 + q_over_p);
  for (;;) {
    double x;
    if (rng.uniform() < prob_exp)
      x = t + rng.exponential() / K;
    else
      x = sample_truncated_inverse_gaussian(z, t, rng);
    double s = pg_aterm(0, x, t);
    const double y = rng.uniform() * s;
    for (int n = 1;; ++n) {
      if (n % 2 == 1) {
        s -= pg_aterm(n, x, t);
        if (y <= s) return x;
      } else {
        s += pg_aterm(n, x, t);
        if (y > s) break;
      }
    }
  }
}

}  // namespace detail

inline double sample_polya_gamma(double b, double c, Rng& rng) {
  require(b > 0, ErrorCode::NonPositiveB, "Polya-Gamma b must be positive");
  const double rounded = std::round(b);
  require(std::abs(b - rounded) < 1e-9, ErrorCode::InvalidParameter,
          "Polya-Gamma sampler supports integer b only");
  double sum = 0.0;
  for (int k = 0; k < static_cast<int>(rounded); ++k) sum += 0.25 * detail::sample_jstar1(0.5 * c, rng);
  return sum;
}

/// E[PG(b, c)].
inline double polya_gamma_mean(double b, double c) {
  if (std::abs(c) < 1e-8) return b / 4.0;
  return b / (2.0 * c) * std::tanh(c / 2.0);
}

// ---------------------------------------------------------------------------
// Ten-component normal mixture approximation of log chi^2_1.

struct LogChi2MixtureTable {
  static constexpr int size = 10;
  std::array<double, size> weight;
  std::array<double, size> mean;
  std::array<double, size> variance;
};

inline const LogChi2MixtureTable& log_chi2_mixture() {
  static const LogChi2MixtureTable table{
      {0.00609, 0.04775, 0.13057, 0.20674, 0.22715, 0.18842, 0.12047, 0.05591, 0.01575, 0.00115},
      {1.92677, 1.34744, 0.73504, 0.02266, -0.85173, -1.97278, -3.46788, -5.55246, -8.68384, -14.65000},
      {0.11265, 0.17788, 0.26768, 0.40611, 0.62699, 0.98583, 1.57469, 2.54498, 4.16591, 7.33342}};
  return table;
}

/// Samples the component of `z = level + log chi^2` given `level`.
inline int sample_mixture_component(double z, double level, Rng& rng) {
  const auto& tab = log_chi2_mixture();
  std::array<double, LogChi2MixtureTable::size> logw{};
  double max = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < tab.size; ++k) {
    logw[k] = std::log(tab.weight[k]) + normal_log_density(z, level + tab.mean[k], tab.variance[k]);
    max = std::max(max, logw[k]);
  }
  double total = 0.0;
  for (auto& w : logw) total += (w = std::exp(w - max));
  double u = rng.uniform() * total;
  for (int k = 0; k < tab.size; ++k) {
    u -= logw[k];
    if (u <= 0) return k;
  }
  return tab.size - 1;
}

// ---------------------------------------------------------------------------
// Conjugate families.

inline double sample_inverse_gamma(double shape, double rate, Rng& rng) {
  require(shape > 0 && rate > 0, ErrorCode::InvalidParameter, "inverse gamma needs shape, rate > 0");
  return rate / rng.gamma(shape);
}

inline double sample_beta(double a, double b, Rng& rng) {
  require(a > 0 && b > 0, ErrorCode::InvalidParameter, "beta needs a, b > 0");
  const double x = rng.gamma(a);
  const double y = rng.gamma(b);
  return x / (x + y);
}

namespace detail {

// Standard normal truncated to [a, b] with a >= 0 (Robert 1995).
inline double truncated_std_normal_right(double a, double b, Rng& rng) {
  const double root = std::sqrt(a * a + 4.0);
  const double alpha = 0.5 * (a + root);
  const double uniform_width = 2.0 * std::sqrt(std::numbers::e) / (a + root) * std::exp(0.25 * (a * a - a * root));
  if (b - a > uniform_width) {
    for (;;) {
      const double z = a + rng.exponential() / alpha;
      if (z > b) continue;
      if (rng.uniform() <= std::exp(-0.5 * (z - alpha) * (z - alpha))) return z;
    }
  }
  for (;;) {
    const double z = a + (b - a) * rng.uniform();
    if (rng.uniform() <= std::exp(0.5 * (a * a - z * z))) return z;
  }
}

}  // namespace detail

inline double sample_truncated_normal(double lo, double hi, double mean, double sd, Rng& rng) {
  require(sd > 0 && lo < hi, ErrorCode::InvalidParameter, "truncated normal needs sd > 0 and lo < hi");
  const double a = (lo - mean) / sd;
  const double b = (hi - mean) / sd;
  double z;
  if (a >= 0) {
    z = detail::truncated_std_normal_right(a, b, rng);
  } else if (b <= 0) {
    z = -detail::truncated_std_normal_right(-b, -a, rng);
  } else if (b - a < std::sqrt(2.0 * std::numbers::pi)) {
    for (;;) {
      z = a + (b - a) * rng.uniform();
      if (rng.uniform() <= std::exp(-0.5 * z * z)) break;
    }
  } else {
    do {
      z = rng.normal();
    } while (z < a || z > b);
  }
  return mean + sd * z;
}

}  // namespace msdsp
