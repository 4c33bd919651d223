#pragma once

// Conditional updates of the Gibbs sweep. Each function reads the data and
// the current state and rewrites only its own block(s) of the state.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "msdsp/banded.hpp"
#include "msdsp/distributions.hpp"
#include "msdsp/hmm.hpp"
#include "msdsp/model.hpp"
#include "msdsp/rng.hpp"

namespace msdsp {

/// Counters accumulated over a run; reported with the chain diagnostics.
struct SamplerCounters {
  long long underflow_clamps = 0;  // exp(h) below 1e-300, raised to 1e-300
  long long phi_g_accepted = 0, phi_g_proposed = 0;
  long long phi_accepted = 0, phi_proposed = 0;
  long long flip_accepted = 0, flip_proposed = 0;
  long long transition_accepted = 0, transition_proposed = 0;
};

namespace detail {

// Innovation variances are kept inside [floor, ceiling] so their reciprocals
// stay finite.
constexpr double kVarianceFloor = 1e-300;
constexpr double kVarianceCeiling = 1e250;
constexpr double kStayClamp = 1e-10;

inline double clamp_innovation_variance(double log_var, SamplerCounters& counters) {
  const double v = std::exp(log_var);
  if (v < kVarianceFloor) {
    ++counters.underflow_clamps;
    return kVarianceFloor;
  }
  return std::min(v, kVarianceCeiling);
}

inline double log_transition(const TransitionMatrix& P, int from, int to) { return std::log(P(from, to)); }

inline double log_initial(const TransitionMatrix& P, int s) {
  const double p1 = P.stationary1();
  return std::log(s == 1 ? p1 : 1.0 - p1);
}

inline std::vector<Index> scan_order(Index p, bool randomize, Rng& rng) {
  std::vector<Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), Index{0});
  if (randomize)
    for (Index k = p - 1; k > 0; --k)
      std::swap(order[static_cast<std::size_t>(k)], order[rng.below(static_cast<std::uint64_t>(k + 1))]);
  return order;
}

/// y minus the contribution of every coefficient except `skip` (-1 keeps all).
inline Eigen::VectorXd partial_residual(const RegressionData& data, const LatentState& st, Index skip) {
  Eigen::VectorXd r = data.y - (data.X.array() * st.beta.array()).rowwise().sum().matrix();
  if (skip >= 0) r += (data.X.col(skip).array() * st.beta.col(skip).array()).matrix();
  return r;
}

inline Eigen::VectorXd measurement_variance(const LatentState& st) { return st.g.array().exp().matrix(); }

}  // namespace detail

/// Per-coefficient innovation variances exp(h_it), clamped, as used by every
/// shadow-path update.
inline Eigen::MatrixXd innovation_variances(const LatentState& st, SamplerCounters& counters) {
  Eigen::MatrixXd q(st.H.rows(), st.H.cols());
  for (Index t = 0; t < q.rows(); ++t)
    for (Index i = 0; i < q.cols(); ++i) q(t, i) = detail::clamp_innovation_variance(st.H(t, i), counters);
  return q;
}

// ---------------------------------------------------------------------------
// Random-walk paths in information form.

/// Draws a p-dimensional random-walk path theta_{-1}, theta_0..theta_{n-1}
/// with theta_{-1} ~ N(0, V0 I), theta_t - theta_{t-1} ~ N(0, diag(q.row(t)))
/// and Gaussian observation information (A_t, a_t) on theta_t. Returns a
/// p x (n + 1) matrix whose first column is theta_{-1}.
///
/// A backward information filter passes messages D (D + J)^{-1} J through
/// each link, which stays accurate when neighbouring link precisions differ
/// by many orders of magnitude; forward sampling then draws each node given
/// its predecessor.
inline Eigen::MatrixXd sample_random_walk_path(const Eigen::MatrixXd& q, const std::vector<Eigen::MatrixXd>& A,
                                               const Eigen::MatrixXd& a, double V0, Rng& rng) {
  const Index n = q.rows(), p = q.cols();
  std::vector<Eigen::LLT<Eigen::MatrixXd>> node(static_cast<std::size_t>(n));
  std::vector<Eigen::VectorXd> info(static_cast<std::size_t>(n));
  Eigen::MatrixXd msg = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd msg_lin = Eigen::VectorXd::Zero(p);
  for (Index t = n - 1; t >= 0; --t) {
    const auto k = static_cast<std::size_t>(t);
    const Eigen::VectorXd d = q.row(t).transpose().cwiseInverse();
    const Eigen::MatrixXd J = A[k] + msg;
    info[k] = a.col(t) + msg_lin;
    Eigen::MatrixXd DJ = J;
    DJ.diagonal() += d;
    node[k].compute(DJ);
    if (node[k].info() != Eigen::Success)
      throw Error(ErrorCode::NonConvergentCholesky, "shadow path precision not SPD at t=" + std::to_string(t));
    msg = d.asDiagonal() * node[k].solve(J);
    msg = 0.5 * (msg + msg.transpose()).eval();
    msg_lin = d.asDiagonal() * node[k].solve(info[k]);
  }
  Eigen::MatrixXd J0 = msg;
  J0.diagonal().array() += 1.0 / V0;
  const Eigen::LLT<Eigen::MatrixXd> first(J0);
  if (first.info() != Eigen::Success)
    throw Error(ErrorCode::NonConvergentCholesky, "initial shadow state precision not SPD");
  auto draw = [&](const Eigen::LLT<Eigen::MatrixXd>& f, const Eigen::VectorXd& lin) {
    Eigen::VectorXd eps(p);
    for (Index i = 0; i < p; ++i) eps[i] = rng.normal();
    return Eigen::VectorXd(f.solve(lin) + f.matrixU().solve(eps));
  };
  Eigen::MatrixXd theta(p, n + 1);
  theta.col(0) = draw(first, msg_lin);
  for (Index t = 0; t < n; ++t) {
    const Eigen::VectorXd d = q.row(t).transpose().cwiseInverse();
    theta.col(t + 1) = draw(node[static_cast<std::size_t>(t)],
                            info[static_cast<std::size_t>(t)] + d.cwiseProduct(theta.col(t)));
  }
  return theta;
}

// ---------------------------------------------------------------------------
// (a) shadow coefficients, joint over time and coefficients.

/// Draws (beta0, beta_tilde) jointly over time and coefficients.
inline void sample_beta_tilde(const RegressionData& data, LatentState& st, const ModelConfig& cfg, Rng& rng,
                              SamplerCounters& counters) {
  const Index n = data.rows(), p = data.cols();
  if (st.H.size() > 0) {
    bool all_under = true;
    for (Index k = 0; k < st.H.size() && all_under; ++k) all_under = std::exp(st.H.data()[k]) < 1e-300;
    require(!all_under, ErrorCode::SingularInnovation, "every innovation variance underflows");
  }
  const Eigen::MatrixXd q = innovation_variances(st, counters);
  const Eigen::VectorXd w = (-st.g.array()).exp().matrix();
  std::vector<Eigen::MatrixXd> A(static_cast<std::size_t>(n), Eigen::MatrixXd::Zero(p, p));
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, n);
  for (Index t = 0; t < n; ++t) {
    Eigen::VectorXd z(p);
    for (Index i = 0; i < p; ++i) z[i] = st.s(t, i) ? data.X(t, i) : 0.0;
    A[static_cast<std::size_t>(t)].noalias() = w[t] * z * z.transpose();
    a.col(t) = w[t] * data.y[t] * z;
  }
  const Eigen::MatrixXd theta = sample_random_walk_path(q, A, a, cfg.priors.initial_state_var, rng);
  st.beta0 = theta.col(0);
  st.beta_tilde = theta.rightCols(n).transpose();
}

// ---------------------------------------------------------------------------
// (c) composition.

inline void compose_beta(LatentState& st) { st.beta = compose(st.beta_tilde, st.s); }

// ---------------------------------------------------------------------------
// (b) switching states.

/// Emission log densities for coefficient i: column 0 for s = 0, column 1 for s = 1.
inline Eigen::MatrixXd switch_log_emissions(const Eigen::VectorXd& resid, const Eigen::VectorXd& x,
                                            const Eigen::VectorXd& beta_tilde, const Eigen::VectorXd& var) {
  Eigen::MatrixXd le(resid.size(), 2);
  for (Index t = 0; t < resid.size(); ++t) {
    le(t, 0) = normal_log_density(resid[t], 0.0, var[t]);
    le(t, 1) = normal_log_density(resid[t], x[t] * beta_tilde[t], var[t]);
  }
  return le;
}

inline Eigen::MatrixXd transition_matrix(const TransitionMatrix& P) {
  Eigen::MatrixXd m(2, 2);
  m << P(0, 0), P(0, 1), P(1, 0), P(1, 1);
  return m;
}

inline Eigen::VectorXd initial_law(const TransitionMatrix& P) {
  const double p1 = P.stationary1();
  return Eigen::Vector2d(1.0 - p1, p1);
}

/// Scalar random-walk chain for one coefficient with every other coefficient
/// held fixed: r_t = s_t x_t b_t + e_t, e_t ~ N(0, R_t), b_t = b_{t-1} + w_t,
/// w_t ~ N(0, q_t), b_{-1} ~ N(0, V0).
struct ScalarChain {
  Eigen::VectorXd r;
  Eigen::VectorXd x;
  Eigen::VectorXd R;
  Eigen::VectorXd q;
  double V0 = 1e6;

  [[nodiscard]] Index size() const { return r.size(); }
};

/// log p(r | s) with the shadow path integrated out (Kalman prediction errors).
inline double chain_log_marginal(const ScalarChain& c, const std::vector<int>& s) {
  double m = 0.0, C = c.V0, ll = 0.0;
  for (Index t = 0; t < c.size(); ++t) {
    const double P = C + c.q[t];
    const double ct = s[static_cast<std::size_t>(t)] ? c.x[t] : 0.0;
    const double S = ct * ct * P + c.R[t];
    const double e = c.r[t] - ct * m;
    ll += -0.5 * (std::log(2.0 * std::numbers::pi * S) + e * e / S);
    m += P * ct / S * e;
    C = P * c.R[t] / S;
  }
  return ll;
}

/// Draws (b_{-1}, b_0..b_{n-1}) given s; returns a vector of length n + 1.
inline Eigen::VectorXd sample_chain_path(const ScalarChain& c, const std::vector<int>& s, Rng& rng) {
  const Index n = c.size();
  std::vector<Eigen::MatrixXd> A(static_cast<std::size_t>(n), Eigen::MatrixXd::Zero(1, 1));
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(1, n);
  for (Index t = 0; t < n; ++t)
    if (s[static_cast<std::size_t>(t)]) {
      A[static_cast<std::size_t>(t)](0, 0) = c.x[t] * c.x[t] / c.R[t];
      a(0, t) = c.x[t] * c.r[t] / c.R[t];
    }
  return sample_random_walk_path(c.q, A, a, c.V0, rng).row(0).transpose();
}

/// Single-site sweep over s_t with the shadow path integrated out: a backward
/// information pass of the future observations and a forward Kalman filter.
inline void collapsed_single_site_sweep(const ScalarChain& c, const TransitionMatrix& P, std::vector<int>& s,
                                        Rng& rng) {
  const Index n = c.size();
  Eigen::VectorXd om = Eigen::VectorXd::Zero(n), mu = Eigen::VectorXd::Zero(n);
  for (Index t = n - 1; t >= 1; --t) {
    const double ct = s[static_cast<std::size_t>(t)] ? c.x[t] : 0.0;
    const double A = om[t] + ct * ct / c.R[t];
    const double B = mu[t] + ct * c.r[t] / c.R[t];
    om[t - 1] = A / (1.0 + c.q[t] * A);
    mu[t - 1] = B / (1.0 + c.q[t] * A);
  }
  double m = 0.0, C = c.V0;
  for (Index t = 0; t < n; ++t) {
    const double Pp = C + c.q[t];
    double lw[2];
    for (int k = 0; k < 2; ++k) {
      const double ct = k ? c.x[t] : 0.0;
      const double A = om[t] + ct * ct / c.R[t];
      const double B = mu[t] + ct * c.r[t] / c.R[t];
      const double denom = 1.0 + Pp * A;
      lw[k] = -0.5 * std::log(denom) + (B * m - 0.5 * A * m * m + 0.5 * Pp * B * B) / denom;
      lw[k] += t == 0 ? detail::log_initial(P, k) : detail::log_transition(P, s[static_cast<std::size_t>(t - 1)], k);
      if (t + 1 < n) lw[k] += detail::log_transition(P, k, s[static_cast<std::size_t>(t + 1)]);
    }
    const double p1 = 1.0 / (1.0 + std::exp(lw[0] - lw[1]));
    const int k = rng.uniform() < p1 ? 1 : 0;
    s[static_cast<std::size_t>(t)] = k;
    const double ct = k ? c.x[t] : 0.0;
    const double S = ct * ct * Pp + c.R[t];
    m += Pp * ct / S * (c.r[t] - ct * m);
    C = Pp * c.R[t] / S;
  }
}

struct TransitionCounts {
  double n[2][2] = {{0, 0}, {0, 0}};
};

inline TransitionCounts count_transitions(const std::vector<int>& s) {
  TransitionCounts c;
  for (std::size_t t = 1; t < s.size(); ++t) c.n[s[t - 1]][s[t]] += 1.0;
  return c;
}

namespace detail {

inline double log_beta_normaliser_ratio(const TransitionCounts& c, double a, double b) {
  return log_beta_fn(a + c.n[0][0], b + c.n[0][1]) + log_beta_fn(a + c.n[1][1], b + c.n[1][0]) -
         2.0 * log_beta_fn(a, b);
}

inline double clamp_stay(double v) { return std::clamp(v, kStayClamp, 1.0 - kStayClamp); }

inline TransitionMatrix draw_transition_given(const TransitionCounts& c, double a, double b, Rng& rng) {
  return {clamp_stay(sample_beta(a + c.n[0][0], b + c.n[0][1], rng)),
          clamp_stay(sample_beta(a + c.n[1][1], b + c.n[1][0], rng))};
}

}  // namespace detail

/// Interval-flip Metropolis-Hastings moves on (s_i, P^i) with the shadow path
/// integrated out. P' is proposed from its conjugate conditional given s', so
/// the acceptance ratio only involves the initial-state law, the Beta
/// normalisers and the marginal likelihoods.
inline void interval_flip_moves(const ScalarChain& c, TransitionMatrix& P, std::vector<int>& s, int proposals,
                                double stay_a, double stay_b, Rng& rng, SamplerCounters& counters) {
  const Index n = c.size();
  if (n == 0) return;
  double ll = chain_log_marginal(c, s);
  double lz = detail::log_beta_normaliser_ratio(count_transitions(s), stay_a, stay_b);
  for (int k = 0; k < proposals; ++k) {
    Index lo = 0, hi = n;
    switch (rng.below(4)) {
      case 0: break;
      case 1: hi = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n))); break;
      case 2: lo = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n))); break;
      default: {
        Index a = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
        Index b = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
        if (a > b) std::swap(a, b);
        lo = a;
        hi = b + 1;
      }
    }
    std::vector<int> prop = s;
    for (Index t = lo; t < hi; ++t) prop[static_cast<std::size_t>(t)] ^= 1;
    const auto counts = count_transitions(prop);
    const TransitionMatrix P_new = detail::draw_transition_given(counts, stay_a, stay_b, rng);
    const double ll_new = chain_log_marginal(c, prop);
    const double lz_new = detail::log_beta_normaliser_ratio(counts, stay_a, stay_b);
    const double log_ratio = ll_new + lz_new + detail::log_initial(P_new, prop[0]) - ll - lz -
                             detail::log_initial(P, s[0]);
    ++counters.flip_proposed;
    if (std::log(rng.uniform()) < log_ratio) {
      ++counters.flip_accepted;
      s = std::move(prop);
      P = P_new;
      ll = ll_new;
      lz = lz_new;
    }
  }
}

inline ScalarChain scalar_chain_for(const RegressionData& data, const LatentState& st, const Eigen::MatrixXd& q,
                                    const Eigen::VectorXd& var, Index i, double V0) {
  ScalarChain c;
  c.r = detail::partial_residual(data, st, i);
  c.x = data.X.col(i);
  c.R = var;
  c.q = q.col(i);
  c.V0 = V0;
  return c;
}

/// Step (b) for every coefficient in (optionally random) scan order. With
/// collapsed moves enabled each coefficient first receives the integrated
/// single-site sweep and interval flips, then a fresh shadow path given the
/// new states, and finally the conditional forward-filter backward-sampler.
inline void sample_switch_states(const RegressionData& data, LatentState& st, const ModelConfig& cfg, Rng& rng,
                                 SamplerCounters& counters) {
  const Index n = data.rows(), p = data.cols();
  const Eigen::VectorXd var = detail::measurement_variance(st);
  const Eigen::MatrixXd q = cfg.collapsed_switch_moves ? innovation_variances(st, counters) : Eigen::MatrixXd();
  for (Index i : detail::scan_order(p, cfg.randomize_scan, rng)) {
    std::vector<int> s(static_cast<std::size_t>(n));
    for (Index t = 0; t < n; ++t) s[static_cast<std::size_t>(t)] = st.s(t, i);
    auto& P = st.P[static_cast<std::size_t>(i)];

    if (cfg.collapsed_switch_moves) {
      const ScalarChain chain = scalar_chain_for(data, st, q, var, i, cfg.priors.initial_state_var);
      collapsed_single_site_sweep(chain, P, s, rng);
      interval_flip_moves(chain, P, s, cfg.switch_flip_proposals, cfg.priors.stay_a, cfg.priors.stay_b, rng,
                          counters);
      const Eigen::VectorXd path = sample_chain_path(chain, s, rng);
      st.beta0[i] = path[0];
      for (Index t = 0; t < n; ++t) {
        st.beta_tilde(t, i) = path[t + 1];
        st.s(t, i) = static_cast<std::uint8_t>(s[static_cast<std::size_t>(t)]);
        st.beta(t, i) = s[static_cast<std::size_t>(t)] ? path[t + 1] : 0.0;
      }
    }

    const Eigen::VectorXd resid = detail::partial_residual(data, st, i);
    const auto le = switch_log_emissions(resid, data.X.col(i), st.beta_tilde.col(i), var);
    const auto f = hmm_forward(le, initial_law(P), transition_matrix(P));
    const auto path = hmm_backward_sample(f, transition_matrix(P), rng);
    for (Index t = 0; t < n; ++t) {
      st.s(t, i) = static_cast<std::uint8_t>(path[static_cast<std::size_t>(t)]);
      st.beta(t, i) = path[static_cast<std::size_t>(t)] ? st.beta_tilde(t, i) : 0.0;
    }
  }
}

// ---------------------------------------------------------------------------
// (f) transition matrices.

/// Conjugate Beta proposal for each row given the transition counts, accepted
/// with the ratio of initial-state probabilities (the stationary law of P^i
/// governs s_{i,1}).
inline void sample_transition(LatentState& st, const ModelConfig& cfg, Rng& rng, SamplerCounters& counters) {
  const Index n = st.s.rows();
  for (Index i = 0; i < st.s.cols(); ++i) {
    std::vector<int> s(static_cast<std::size_t>(n));
    for (Index t = 0; t < n; ++t) s[static_cast<std::size_t>(t)] = st.s(t, i);
    auto& P = st.P[static_cast<std::size_t>(i)];
    const auto prop = detail::draw_transition_given(count_transitions(s), cfg.priors.stay_a, cfg.priors.stay_b, rng);
    ++counters.transition_proposed;
    if (n == 0 || std::log(rng.uniform()) < detail::log_initial(prop, s[0]) - detail::log_initial(P, s[0])) {
      ++counters.transition_accepted;
      P = prop;
    }
  }
}

// ---------------------------------------------------------------------------
// (k) and (d): measurement stochastic volatility.

inline void sample_sv_indicators(const RegressionData& data, LatentState& st, const ModelConfig& cfg, Rng& rng) {
  const Eigen::VectorXd e = detail::partial_residual(data, st, -1);
  for (Index t = 0; t < e.size(); ++t)
    st.r[t] = sample_mixture_component(std::log(e[t] * e[t] + cfg.priors.log_offset), st.g[t], rng);
}

/// AR(1) path given mixture indicators: u = g - mu_g has tridiagonal precision.
inline void sample_g(const RegressionData& data, LatentState& st, const ModelConfig& cfg, Rng& rng) {
  const Index n = data.rows();
  const auto& tab = log_chi2_mixture();
  const Eigen::VectorXd e = detail::partial_residual(data, st, -1);
  const double inv_s2 = 1.0 / st.sigma2_g, phi = st.phi_g;
  Eigen::VectorXd diag(n), sub(std::max<Index>(n - 1, 0)), lin(n);
  for (Index t = 0; t < n; ++t) {
    const int k = st.r[t];
    const double z = std::log(e[t] * e[t] + cfg.priors.log_offset);
    diag[t] = 1.0 / tab.variance[k] + (t == 0 ? 1.0 / cfg.priors.sv_initial_var : inv_s2);
    if (t + 1 < n) {
      diag[t] += phi * phi * inv_s2;
      sub[t] = -phi * inv_s2;
    }
    lin[t] = (z - tab.mean[k] - st.mu_g) / tab.variance[k];
  }
  st.g = (sample_tridiagonal_gmrf(diag, sub, lin, rng).array() + st.mu_g).matrix();
}

namespace detail {

/// Independence proposal from the Gaussian likelihood truncated to (-1, 1),
/// accepted by the Beta prior ratio on (phi + 1) / 2.
inline double update_persistence(double current, double prec, double lin, double a, double b, Rng& rng,
                                 long long& accepted, long long& proposed) {
  auto log_prior = [&](double phi) { return (a - 1.0) * std::log1p(phi) + (b - 1.0) * std::log1p(-phi); };
  ++proposed;
  if (!(prec > 1e-12)) {
    ++accepted;
    return std::clamp(2.0 * sample_beta(a, b, rng) - 1.0, -1.0 + 1e-12, 1.0 - 1e-12);
  }
  const double prop = sample_truncated_normal(-1.0, 1.0, lin / prec, 1.0 / std::sqrt(prec), rng);
  if (!(std::abs(prop) < 1.0)) return current;
  if (std::log(rng.uniform()) < log_prior(prop) - log_prior(current)) {
    ++accepted;
    return prop;
  }
  return current;
}

}  // namespace detail

/// (e) level, persistence and innovation variance of g.
inline void sample_sv_params(LatentState& st, const ModelConfig& cfg, Rng& rng, SamplerCounters& counters) {
  const auto& pr = cfg.priors;
  const Eigen::VectorXd& g = st.g;
  const Index n = g.size();
  {
    const double w = 1.0 - st.phi_g;
    double prec = 1.0 / pr.sv_level_var + 1.0 / pr.sv_initial_var;
    double lin = pr.sv_level_mean / pr.sv_level_var + g[0] / pr.sv_initial_var;
    for (Index t = 1; t < n; ++t) {
      prec += w * w / st.sigma2_g;
      lin += w * (g[t] - st.phi_g * g[t - 1]) / st.sigma2_g;
    }
    st.mu_g = lin / prec + rng.normal() / std::sqrt(prec);
  }
  {
    double prec = 0.0, lin = 0.0;
    for (Index t = 1; t < n; ++t) {
      const double u0 = g[t - 1] - st.mu_g, u1 = g[t] - st.mu_g;
      prec += u0 * u0 / st.sigma2_g;
      lin += u0 * u1 / st.sigma2_g;
    }
    st.phi_g = detail::update_persistence(st.phi_g, prec, lin, pr.sv_persistence_a, pr.sv_persistence_b, rng,
                                          counters.phi_g_accepted, counters.phi_g_proposed);
  }
  {
    double qf = 0.0;
    for (Index t = 1; t < n; ++t) {
      const double d = (g[t] - st.mu_g) - st.phi_g * (g[t - 1] - st.mu_g);
      qf += d * d;
    }
    st.sigma2_g = sample_inverse_gamma(pr.sv_innovation_shape + 0.5 * static_cast<double>(n - 1),
                                       pr.sv_innovation_rate + 0.5 * qf, rng);
  }
}

// ---------------------------------------------------------------------------
// (g)-(j): dynamic shrinkage block.

/// Shadow-path increments omega_t = beta_tilde_t - beta_tilde_{t-1}.
inline Eigen::MatrixXd shadow_increments(const LatentState& st) {
  Eigen::MatrixXd om(st.beta_tilde.rows(), st.beta_tilde.cols());
  for (Index i = 0; i < om.cols(); ++i)
    for (Index t = 0; t < om.rows(); ++t)
      om(t, i) = st.beta_tilde(t, i) - (t == 0 ? st.beta0[i] : st.beta_tilde(t - 1, i));
  return om;
}

/// Updates, per coefficient: mixture indicators of log(omega^2), the h path,
/// mu_i, phi_i and the Polya-Gamma auxiliaries of mu_i and of the innovations.
inline void sample_h_block(LatentState& st, const ModelConfig& cfg, Rng& rng, SamplerCounters& counters) {
  const Index n = st.H.rows(), p = st.H.cols();
  const auto& tab = log_chi2_mixture();
  const double b_pg = cfg.alpha_h + cfg.beta_h;
  const double kappa = 0.5 * (cfg.alpha_h - cfg.beta_h);
  const Eigen::MatrixXd omega = shadow_increments(st);

  Eigen::VectorXd diag(n), sub(std::max<Index>(n - 1, 0)), lin(n), z(n);
  for (Index i = 0; i < p; ++i) {
    for (Index t = 0; t < n; ++t) {
      z[t] = std::log(omega(t, i) * omega(t, i) + cfg.priors.log_offset);
      st.h_mix(t, i) = sample_mixture_component(z[t], st.H(t, i), rng);
    }
    const double phi = st.phi[i], mu = st.mu[i];
    for (Index t = 0; t < n; ++t) {
      const int k = st.h_mix(t, i);
      const double xi_t = st.xi(t, i);
      diag[t] = xi_t + 1.0 / tab.variance[k];
      lin[t] = kappa + (z[t] - tab.mean[k] - mu) / tab.variance[k];
      if (t + 1 < n) {
        const double xi_next = st.xi(t + 1, i);
        diag[t] += phi * phi * xi_next;
        sub[t] = -phi * xi_next;
        lin[t] -= phi * kappa;
      }
    }
    const Eigen::VectorXd u = sample_tridiagonal_gmrf(diag, sub, lin, rng);
    for (Index t = 0; t < n; ++t) st.H(t, i) = u[t] + mu;

    {
      double prec = st.xi_mu[i], l = kappa;
      for (Index t = 0; t < n; ++t) {
        const double w = t == 0 ? 1.0 : 1.0 - phi;
        const double target = (t == 0 ? st.H(t, i) : st.H(t, i) - phi * st.H(t - 1, i)) - kappa / st.xi(t, i);
        prec += st.xi(t, i) * w * w;
        l += st.xi(t, i) * w * target;
      }
      st.mu[i] = l / prec + rng.normal() / std::sqrt(prec);
    }
    {
      double prec = 0.0, l = 0.0;
      for (Index t = 1; t < n; ++t) {
        const double u0 = st.H(t - 1, i) - st.mu[i], u1 = st.H(t, i) - st.mu[i];
        prec += st.xi(t, i) * u0 * u0;
        l += u0 * (st.xi(t, i) * u1 - kappa);
      }
      st.phi[i] = detail::update_persistence(st.phi[i], prec, l, cfg.priors.dsp_persistence_a,
                                             cfg.priors.dsp_persistence_b, rng, counters.phi_accepted,
                                             counters.phi_proposed);
    }
    st.xi_mu[i] = sample_polya_gamma(b_pg, st.mu[i], rng);
    for (Index t = 0; t < n; ++t) {
      const double eta = t == 0 ? st.H(t, i) - st.mu[i]
                                : (st.H(t, i) - st.mu[i]) - st.phi[i] * (st.H(t - 1, i) - st.mu[i]);
      st.xi(t, i) = sample_polya_gamma(b_pg, eta, rng);
    }
  }
}

// ---------------------------------------------------------------------------
// Blocks used by the non-shrinkage families.

/// Constant innovation variance per coefficient, IG conjugate; H mirrors log W.
inline void sample_state_variances(LatentState& st, const ModelConfig& cfg, Rng& rng) {
  const Eigen::MatrixXd omega = shadow_increments(st);
  const double n = static_cast<double>(omega.rows());
  for (Index i = 0; i < omega.cols(); ++i) {
    st.state_var[i] = sample_inverse_gamma(cfg.priors.state_var_shape + 0.5 * n,
                                           cfg.priors.state_var_rate + 0.5 * omega.col(i).squaredNorm(), rng);
    st.H.col(i).setConstant(std::log(st.state_var[i]));
  }
}

/// Time-invariant coefficients under heteroskedastic errors:
/// beta | g ~ N with prior N(0, prior_var I). Writes every row of beta_tilde.
inline void sample_constant_coefficients(const RegressionData& data, LatentState& st, double prior_var, Rng& rng) {
  const Index p = data.cols();
  const Eigen::VectorXd w = (-st.g.array()).exp().matrix();
  Eigen::MatrixXd prec = data.X.transpose() * w.asDiagonal() * data.X;
  prec.diagonal().array() += 1.0 / prior_var;
  const Eigen::VectorXd lin = data.X.transpose() * (w.array() * data.y.array()).matrix();
  const Eigen::LLT<Eigen::MatrixXd> llt(prec);
  require(llt.info() == Eigen::Success, ErrorCode::NonConvergentCholesky, "coefficient precision not SPD");
  Eigen::VectorXd eps(p);
  for (Index i = 0; i < p; ++i) eps[i] = rng.normal();
  const Eigen::VectorXd beta = llt.solve(lin) + llt.matrixU().solve(eps);
  for (Index t = 0; t < st.beta_tilde.rows(); ++t) st.beta_tilde.row(t) = beta.transpose();
  st.beta0 = beta;
}

}  // namespace msdsp
