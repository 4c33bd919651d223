#pragma once

// Discrete hidden Markov chain: forward filtering, smoothing, backward
// sampling, and the exact probability of a backward-sampled path.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <vector>

#include "msdsp/error.hpp"
#include "msdsp/rng.hpp"

namespace msdsp {

struct ForwardFilter {
  Eigen::MatrixXd filtered;  // T x K, rows are P(s_t | y_1..t)
  double log_likelihood = 0.0;
};

/// `log_emission` is T x K, `initial` the law of s_1, `transition` row stochastic.
inline ForwardFilter hmm_forward(const Eigen::MatrixXd& log_emission, const Eigen::VectorXd& initial,
                                 const Eigen::MatrixXd& transition) {
  const Eigen::Index T = log_emission.rows(), K = log_emission.cols();
  ForwardFilter out;
  out.filtered.resize(T, K);
  Eigen::VectorXd prior = initial;
  for (Eigen::Index t = 0; t < T; ++t) {
    if (t > 0) prior = transition.transpose() * out.filtered.row(t - 1).transpose();
    const double m = log_emission.row(t).maxCoeff();
    Eigen::VectorXd w(K);
    for (Eigen::Index k = 0; k < K; ++k) w[k] = prior[k] * std::exp(log_emission(t, k) - m);
    const double total = w.sum();
    if (!(total > 0.0) || !std::isfinite(total))
      throw Error(ErrorCode::DegenerateTransition, "filter mass vanished at t=" + std::to_string(t));
    out.filtered.row(t) = (w / total).transpose();
    out.log_likelihood += m + std::log(total);
  }
  return out;
}

/// Smoothed marginals P(s_t | y_1..T).
inline Eigen::MatrixXd hmm_smooth(const ForwardFilter& f, const Eigen::MatrixXd& transition) {
  const Eigen::Index T = f.filtered.rows(), K = f.filtered.cols();
  Eigen::MatrixXd sm(T, K);
  sm.row(T - 1) = f.filtered.row(T - 1);
  for (Eigen::Index t = T - 2; t >= 0; --t) {
    const Eigen::VectorXd pred = transition.transpose() * f.filtered.row(t).transpose();
    for (Eigen::Index j = 0; j < K; ++j) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < K; ++k)
        if (pred[k] > 0.0) acc += transition(j, k) * sm(t + 1, k) / pred[k];
      sm(t, j) = f.filtered(t, j) * acc;
    }
  }
  return sm;
}

namespace detail {

inline Eigen::VectorXd backward_conditional(const ForwardFilter& f, const Eigen::MatrixXd& transition,
                                            Eigen::Index t, int next) {
  const Eigen::Index K = f.filtered.cols();
  Eigen::VectorXd w(K);
  for (Eigen::Index j = 0; j < K; ++j) w[j] = f.filtered(t, j) * transition(j, next);
  const double total = w.sum();
  if (!(total > 0.0)) throw Error(ErrorCode::DegenerateTransition, "unreachable state in backward pass");
  return w / total;
}

inline int draw_categorical(const Eigen::VectorXd& prob, Rng& rng) {
  double u = rng.uniform();
  for (Eigen::Index k = 0; k < prob.size(); ++k) {
    u -= prob[k];
    if (u <= 0.0) return static_cast<int>(k);
  }
  for (Eigen::Index k = prob.size() - 1; k >= 0; --k)
    if (prob[k] > 0.0) return static_cast<int>(k);
  return 0;
}

}  // namespace detail

inline std::vector<int> hmm_backward_sample(const ForwardFilter& f, const Eigen::MatrixXd& transition, Rng& rng) {
  const Eigen::Index T = f.filtered.rows();
  std::vector<int> path(static_cast<std::size_t>(T));
  path[static_cast<std::size_t>(T - 1)] = detail::draw_categorical(f.filtered.row(T - 1).transpose(), rng);
  for (Eigen::Index t = T - 2; t >= 0; --t)
    path[static_cast<std::size_t>(t)] =
        detail::draw_categorical(detail::backward_conditional(f, transition, t, path[static_cast<std::size_t>(t + 1)]), rng);
  return path;
}

/// Log probability that hmm_backward_sample returns `path`.
inline double hmm_path_log_probability(const ForwardFilter& f, const Eigen::MatrixXd& transition,
                                       const std::vector<int>& path) {
  const Eigen::Index T = f.filtered.rows();
  double lp = std::log(f.filtered(T - 1, path[static_cast<std::size_t>(T - 1)]));
  for (Eigen::Index t = T - 2; t >= 0; --t) {
    const auto cond = detail::backward_conditional(f, transition, t, path[static_cast<std::size_t>(t + 1)]);
    lp += std::log(cond[path[static_cast<std::size_t>(t)]]);
  }
  return lp;
}

}  // namespace msdsp
