#pragma once

// Forecast evaluation: log-score differences, CRPS, RMSFE, coverage, the
// model confidence set, Diebold-Mariano and Wilcoxon signed-rank tests.

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "msdsp/error.hpp"
#include "msdsp/forecast.hpp"
#include "msdsp/model.hpp"
#include "msdsp/rng.hpp"

namespace msdsp {

enum class LossKind { SquaredError, NegLogScore, Crps };

inline std::string_view to_string(LossKind k) {
  switch (k) {
    case LossKind::SquaredError: return "SFE";
    case LossKind::NegLogScore: return "negLogScore";
    case LossKind::Crps: return "CRPS";
  }
  return "?";
}

/// Losses of M models over N evaluation origins; row m is model m.
struct LossMatrix {
  std::vector<std::string> models;
  std::vector<Index> origins;
  Eigen::MatrixXd losses;
  LossKind kind = LossKind::SquaredError;
};

// ---------------------------------------------------------------------------
// Scores

inline double lpdr(const std::vector<double>& logscores_model, const std::vector<double>& logscores_bench) {
  require(logscores_model.size() == logscores_bench.size(), ErrorCode::LengthMismatch,
          "log-score vectors differ in length");
  double s = 0.0;
  for (std::size_t k = 0; k < logscores_model.size(); ++k) s += logscores_model[k] - logscores_bench[k];
  return s;
}

inline bool strongly_preferred(double lpdr_value) { return lpdr_value > 3.0; }

namespace detail {

// E|X| for X ~ N(mu, var).
inline double abs_normal_mean(double mu, double var) {
  const double sd = std::sqrt(var);
  if (sd == 0.0) return std::abs(mu);
  const double z = mu / sd;
  return 2.0 * sd * std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi) + mu * (2.0 * norm_cdf(z) - 1.0);
}

}  // namespace detail

inline double crps_normal(double mu, double var, double y) {
  return detail::abs_normal_mean(y - mu, var) - 0.5 * detail::abs_normal_mean(0.0, 2.0 * var);
}

/// Closed-form CRPS of an equal-weight Gaussian mixture:
/// E|X - y| - E|X - X'| / 2 with both expectations summed over component pairs.
inline double crps_mixture(const ForecastDistribution& fd, double y) {
  const std::size_t G = fd.size();
  require(G > 0, ErrorCode::Empty, "empty predictive distribution");
  double a = 0.0, b = 0.0;
  for (std::size_t i = 0; i < G; ++i) {
    a += detail::abs_normal_mean(y - fd.means[i], fd.variances[i]);
    b += 0.5 * detail::abs_normal_mean(0.0, 2.0 * fd.variances[i]);
    for (std::size_t j = i + 1; j < G; ++j)
      b += detail::abs_normal_mean(fd.means[i] - fd.means[j], fd.variances[i] + fd.variances[j]);
  }
  const double g = static_cast<double>(G);
  return a / g - b / (g * g);
}

/// Sample CRPS from predictive draws: mean|X - y| - mean|X - X'| / 2.
inline double crps_sample(std::vector<double> draws, double y) {
  require(!draws.empty(), ErrorCode::Empty, "no predictive draws");
  std::sort(draws.begin(), draws.end());
  const double n = static_cast<double>(draws.size());
  double a = 0.0, pair = 0.0;
  for (std::size_t k = 0; k < draws.size(); ++k) {
    a += std::abs(draws[k] - y);
    pair += (2.0 * static_cast<double>(k) - n + 1.0) * draws[k];
  }
  return a / n - pair / (n * n);
}

inline double rmsfe(const std::vector<double>& errors) {
  require(!errors.empty(), ErrorCode::Empty, "no forecast errors");
  double s = 0.0;
  for (double e : errors) s += e * e;
  return std::sqrt(s / static_cast<double>(errors.size()));
}

inline double relative_rmsfe(const std::vector<double>& model, const std::vector<double>& benchmark) {
  return rmsfe(model) / rmsfe(benchmark);
}

enum class Tail { Lower, Upper };

/// Lower tail counts y <= q_alpha; upper tail counts y >= q_{1 - alpha}.
inline double coverage_rate(const std::vector<ForecastDistribution>& fds, const std::vector<double>& ys, double alpha,
                            Tail tail) {
  require(fds.size() == ys.size(), ErrorCode::LengthMismatch, "forecasts and realisations differ in length");
  require(!ys.empty(), ErrorCode::Empty, "no realisations");
  std::size_t hits = 0;
  for (std::size_t k = 0; k < ys.size(); ++k) {
    if (tail == Tail::Lower)
      hits += ys[k] <= quantile(fds[k], alpha);
    else
      hits += ys[k] >= quantile(fds[k], 1.0 - alpha);
  }
  return static_cast<double>(hits) / static_cast<double>(ys.size());
}

// ---------------------------------------------------------------------------
// Model confidence set

struct McsOptions {
  double level = 0.95;
  int bootstrap = 5000;
  int block_length = 0;  // 0: ceil(N^(1/3))
  std::uint64_t seed = 1;
};

struct McsResult {
  std::vector<bool> retained;
  std::vector<int> rank;           // 1 = best retained model, 0 = eliminated
  std::vector<double> p_value;     // MCS p-values
  std::vector<int> elimination;    // model indices in elimination order
};

inline McsResult mcs(const LossMatrix& L, const McsOptions& opt = {}) {
  const Index M = L.losses.rows(), N = L.losses.cols();
  require(M >= 1, ErrorCode::Empty, "no models");
  require(N >= 10, ErrorCode::TooShort, "model confidence set needs at least 10 origins");
  require(L.losses.allFinite(), ErrorCode::NonFiniteValue, "losses must be finite");
  const int block = opt.block_length > 0 ? opt.block_length
                                         : static_cast<int>(std::ceil(std::cbrt(static_cast<double>(N)) - 1e-12));

  // Bootstrap means of each model's losses; differences of these are the
  // bootstrap means of the loss differentials.
  Rng rng(opt.seed);
  const Eigen::VectorXd mean_loss = L.losses.rowwise().mean();
  Eigen::MatrixXd boot(M, opt.bootstrap);
  const Index blocks = (N + block - 1) / block;
  for (int b = 0; b < opt.bootstrap; ++b) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(M);
    Index taken = 0;
    for (Index k = 0; k < blocks; ++k) {
      const auto start = static_cast<Index>(rng.below(static_cast<std::uint64_t>(N - block + 1)));
      for (Index j = 0; j < block && taken < N; ++j, ++taken) acc += L.losses.col(start + j);
    }
    boot.col(b) = acc / static_cast<double>(N);
  }

  McsResult res;
  res.retained.assign(static_cast<std::size_t>(M), true);
  res.p_value.assign(static_cast<std::size_t>(M), 1.0);
  std::vector<int> alive(static_cast<std::size_t>(M));
  std::iota(alive.begin(), alive.end(), 0);
  double running = 0.0;
  while (alive.size() > 1) {
    const auto A = alive.size();
    Eigen::MatrixXd tstat = Eigen::MatrixXd::Zero(static_cast<Index>(A), static_cast<Index>(A));
    Eigen::MatrixXd sd = Eigen::MatrixXd::Zero(static_cast<Index>(A), static_cast<Index>(A));
    double T = 0.0;
    bool any = false;
    int sure = -1;
    for (std::size_t a = 0; a < A; ++a)
      for (std::size_t c = a + 1; c < A; ++c) {
        const int i = alive[a], j = alive[c];
        const double dbar = mean_loss[i] - mean_loss[j];
        const Eigen::ArrayXd db = (boot.row(i) - boot.row(j)).array() - dbar;
        const double v = db.square().mean();
        if (!(v > 1e-300)) {
          // a deterministic loss gap: the worse model is dominated outright
          if (dbar != 0.0 && sure < 0) sure = dbar > 0 ? static_cast<int>(a) : static_cast<int>(c);
          continue;
        }
        any = true;
        const double s = std::sqrt(v);
        sd(static_cast<Index>(a), static_cast<Index>(c)) = sd(static_cast<Index>(c), static_cast<Index>(a)) = s;
        tstat(static_cast<Index>(a), static_cast<Index>(c)) = dbar / s;
        tstat(static_cast<Index>(c), static_cast<Index>(a)) = -dbar / s;
        T = std::max(T, std::abs(dbar) / s);
      }
    if (sure >= 0) {
      const int e = alive[static_cast<std::size_t>(sure)];
      res.retained[static_cast<std::size_t>(e)] = false;
      res.p_value[static_cast<std::size_t>(e)] = running;
      res.elimination.push_back(e);
      alive.erase(alive.begin() + sure);
      continue;
    }
    if (!any) break;
    int exceed = 0;
    for (int b = 0; b < opt.bootstrap; ++b) {
      double Tb = 0.0;
      for (std::size_t a = 0; a < A; ++a)
        for (std::size_t c = a + 1; c < A; ++c) {
          const double s = sd(static_cast<Index>(a), static_cast<Index>(c));
          if (s == 0.0) continue;
          const int i = alive[a], j = alive[c];
          const double dstar = (boot(i, b) - boot(j, b)) - (mean_loss[i] - mean_loss[j]);
          Tb = std::max(Tb, std::abs(dstar) / s);
        }
      exceed += Tb >= T;
    }
    const double p = static_cast<double>(exceed) / static_cast<double>(opt.bootstrap);
    running = std::max(running, p);
    if (p >= 1.0 - opt.level) break;
    std::size_t worst = 0;
    double worst_t = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < A; ++a) {
      const double t = tstat.row(static_cast<Index>(a)).maxCoeff();
      if (t > worst_t) {
        worst_t = t;
        worst = a;
      }
    }
    const int e = alive[worst];
    res.retained[static_cast<std::size_t>(e)] = false;
    res.p_value[static_cast<std::size_t>(e)] = running;
    res.elimination.push_back(e);
    alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(worst));
  }
  for (int i : alive) res.p_value[static_cast<std::size_t>(i)] = 1.0;
  std::sort(alive.begin(), alive.end(), [&](int a, int b) {
    return mean_loss[a] != mean_loss[b] ? mean_loss[a] < mean_loss[b] : a < b;
  });
  res.rank.assign(static_cast<std::size_t>(M), 0);
  for (std::size_t k = 0; k < alive.size(); ++k) res.rank[static_cast<std::size_t>(alive[k])] = static_cast<int>(k + 1);
  return res;
}

// ---------------------------------------------------------------------------
// Pairwise tests

struct DmResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool degenerate = false;  // zero long-run variance: statistic undefined
};

/// Two-sided Diebold-Mariano test with a rectangular HAC variance of lag h - 1
/// and the Harvey-Leybourne-Newbold small-sample correction.
inline DmResult dm_test(const std::vector<double>& lossdiff, int h) {
  const auto N = static_cast<Index>(lossdiff.size());
  require(N >= 20, ErrorCode::TooShort, "Diebold-Mariano test needs at least 20 differentials");
  require(h >= 1, ErrorCode::InvalidParameter, "horizon must be at least 1");
  const double n = static_cast<double>(N);
  double mean = 0.0;
  for (double d : lossdiff) mean += d;
  mean /= n;
  auto gamma = [&](Index k) {
    double s = 0.0;
    for (Index t = k; t < N; ++t)
      s += (lossdiff[static_cast<std::size_t>(t)] - mean) * (lossdiff[static_cast<std::size_t>(t - k)] - mean);
    return s / n;
  };
  double lrv = gamma(0);
  for (Index k = 1; k < h && k < N; ++k) lrv += 2.0 * gamma(k);
  if (!(lrv > 0.0)) lrv = gamma(0);
  DmResult r;
  if (!(lrv > 0.0)) {
    r.degenerate = true;
    r.statistic = std::numeric_limits<double>::quiet_NaN();
    r.p_value = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  const double hd = static_cast<double>(h);
  const double correction = std::sqrt((n + 1.0 - 2.0 * hd + hd * (hd - 1.0) / n) / n);
  r.statistic = correction * mean / std::sqrt(lrv / n);
  const boost::math::students_t dist(n - 1.0);
  r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.statistic)));
  return r;
}

/// Two-sided Wilcoxon signed-rank test of symmetry about zero. Zeros are
/// dropped; the exact null distribution is used without ties, otherwise the
/// normal approximation with tie and continuity corrections.
inline double wilcoxon_signed_rank(const std::vector<double>& x) {
  std::vector<double> v;
  for (double d : x)
    if (d != 0.0) v.push_back(d);
  const auto n = v.size();
  if (n == 0) return 1.0;
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return std::abs(v[a]) < std::abs(v[b]); });
  std::vector<double> rank(n);
  bool ties = false;
  double tie_term = 0.0;
  for (std::size_t k = 0; k < n;) {
    std::size_t e = k;
    while (e + 1 < n && std::abs(v[idx[e + 1]]) == std::abs(v[idx[k]])) ++e;
    const double r = 0.5 * static_cast<double>(k + e) + 1.0;
    const double len = static_cast<double>(e - k + 1);
    if (len > 1) {
      ties = true;
      tie_term += len * len * len - len;
    }
    for (std::size_t j = k; j <= e; ++j) rank[idx[j]] = r;
    k = e + 1;
  }
  double w_plus = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    if (v[k] > 0) w_plus += rank[k];
  const double nn = static_cast<double>(n);
  if (!ties) {
    const auto max_sum = static_cast<std::size_t>(n * (n + 1) / 2);
    std::vector<double> count(max_sum + 1, 0.0);
    count[0] = 1.0;
    for (std::size_t r = 1; r <= n; ++r)
      for (std::size_t s = max_sum; s >= r; --s) count[s] += count[s - r];
    const double total = std::ldexp(1.0, static_cast<int>(n));
    const auto w = static_cast<std::size_t>(std::llround(w_plus));
    double lower = 0.0, upper = 0.0;
    for (std::size_t s = 0; s <= max_sum; ++s) {
      if (s <= w) lower += count[s];
      if (s >= w) upper += count[s];
    }
    return std::min(1.0, 2.0 * std::min(lower, upper) / total);
  }
  const double mu = nn * (nn + 1.0) / 4.0;
  const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
  if (!(var > 0.0)) return 1.0;
  const double dev = std::max(std::abs(w_plus - mu) - 0.5, 0.0);
  const boost::math::normal_distribution<> z;
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(z, dev / std::sqrt(var))));
}

}  // namespace msdsp
