#pragma once

// Shared domain types: datasets, model configuration, the latent state of the
// sampler, retained posterior draws and predictive distributions.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "msdsp/error.hpp"

namespace msdsp {

using Index = Eigen::Index;
using SwitchMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

// ---------------------------------------------------------------------------
// Dataset

/// Aligned response and covariates for one forecasting problem. With
/// `horizon == h > 0` row t of X is paired with y[t + h] (direct h-step model),
/// so the regression uses rows 0 .. T-h-1 of X and rows h .. T-1 of y.
struct TimeSeriesDataset {
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  std::vector<std::string> labels;
  int horizon = 0;

  [[nodiscard]] Index length() const { return y.size(); }
  [[nodiscard]] Index coefficients() const { return X.cols(); }
  [[nodiscard]] Index regression_rows() const { return y.size() - horizon; }
};

/// Response/covariate pairs actually entering the likelihood.
struct RegressionData {
  Eigen::VectorXd y;
  Eigen::MatrixXd X;

  [[nodiscard]] Index rows() const { return y.size(); }
  [[nodiscard]] Index cols() const { return X.cols(); }
};

inline RegressionData aligned(const TimeSeriesDataset& d) {
  const Index n = d.regression_rows();
  require(n > 0, ErrorCode::TooShort, "horizon leaves no regression rows");
  return RegressionData{d.y.tail(n), d.X.topRows(n)};
}

struct Violation {
  ErrorCode code;
  std::string message;
  Index row = -1;
  Index col = -1;
  bool warning = false;
};

struct ValidationReport {
  std::vector<Violation> issues;

  [[nodiscard]] bool ok() const {
    for (const auto& v : issues)
      if (!v.warning) return false;
    return true;
  }
};

inline ValidationReport validate_dataset(const TimeSeriesDataset& d) {
  ValidationReport report;
  auto add = [&](ErrorCode c, std::string msg, Index r = -1, Index col = -1, bool warn = false) {
    report.issues.push_back({c, std::move(msg), r, col, warn});
  };
  if (d.X.cols() < 1) add(ErrorCode::LengthMismatch, "X must have at least one column");
  if (d.y.size() != d.X.rows())
    add(ErrorCode::LengthMismatch, "y has " + std::to_string(d.y.size()) + " entries but X has " +
                                       std::to_string(d.X.rows()) + " rows");
  if (d.horizon < 0) add(ErrorCode::InvalidParameter, "horizon must be nonnegative");
  if (d.horizon >= d.y.size() && d.y.size() > 0)
    add(ErrorCode::TooShort, "horizon leaves no regression rows");
  if (!d.labels.empty() && static_cast<Index>(d.labels.size()) != d.X.cols())
    add(ErrorCode::LengthMismatch, "labels do not match the number of covariates");
  for (Index t = 0; t < d.y.size(); ++t)
    if (!std::isfinite(d.y[t])) add(ErrorCode::NonFiniteValue, "y[" + std::to_string(t) + "]", t);
  for (Index j = 0; j < d.X.cols(); ++j)
    for (Index t = 0; t < d.X.rows(); ++t)
      if (!std::isfinite(d.X(t, j)))
        add(ErrorCode::NonFiniteValue, "X(" + std::to_string(t) + "," + std::to_string(j) + ")", t, j);
  for (Index j = 0; j < d.X.cols(); ++j)
    if (d.X.rows() > 0 && (d.X.col(j).array() == 0.0).all())
      add(ErrorCode::InvalidParameter, "column " + std::to_string(j) + " is identically zero", -1, j, true);
  return report;
}

/// Throws the first non-warning violation, otherwise returns the dataset.
inline const TimeSeriesDataset& checked(const TimeSeriesDataset& d) {
  for (const auto& v : validate_dataset(d).issues)
    if (!v.warning) throw Error(v.code, v.message);
  return d;
}

// ---------------------------------------------------------------------------
// Configuration

enum class ModelFamily { Msdsp, Dsp, TvpHomoskedastic, LinearConjugate, RwSv, RwDriftSv };

constexpr std::string_view to_string(ModelFamily f) noexcept {
  switch (f) {
    case ModelFamily::Msdsp: return "MSDSP";
    case ModelFamily::Dsp: return "DSP";
    case ModelFamily::TvpHomoskedastic: return "TVP-HOMOSKEDASTIC";
    case ModelFamily::LinearConjugate: return "LINEAR-CONJUGATE";
    case ModelFamily::RwSv: return "RW-SV";
    case ModelFamily::RwDriftSv: return "RW-DRIFT-SV";
  }
  return "?";
}

inline ModelFamily parse_family(std::string_view s) {
  for (auto f : {ModelFamily::Msdsp, ModelFamily::Dsp, ModelFamily::TvpHomoskedastic,
                 ModelFamily::LinearConjugate, ModelFamily::RwSv, ModelFamily::RwDriftSv})
    if (to_string(f) == s) return f;
  throw Error(ErrorCode::ParseError, "unknown model family '" + std::string(s) + "'");
}

inline bool is_random_walk(ModelFamily f) {
  return f == ModelFamily::RwSv || f == ModelFamily::RwDriftSv;
}

inline bool has_dsp(ModelFamily f) { return f == ModelFamily::Msdsp || f == ModelFamily::Dsp; }

struct WindowScheme {
  enum class Kind { Expanding, Rolling };
  Kind kind = Kind::Expanding;
  int length = 0;

  static WindowScheme expanding() { return {}; }
  static WindowScheme rolling(int n) { return {Kind::Rolling, n}; }
  bool operator==(const WindowScheme&) const = default;
};

/// Hyper-parameters. Names follow the role of the parameter, not its symbol.
struct PriorSet {
  // Measurement log-volatility g: AR(1) level, persistence and innovation variance.
  double sv_level_mean = 0.0;
  double sv_level_var = 10.0;
  double sv_persistence_a = 20.0;  // (phi_g + 1) / 2 ~ Beta(a, b)
  double sv_persistence_b = 1.5;
  double sv_innovation_shape = 2.5;  // sigma2_g ~ IG(shape, rate)
  double sv_innovation_rate = 0.025;
  double sv_initial_var = 10.0;  // g_1 ~ N(level, sv_initial_var)

  // Switching: stay probability of each row of P^i ~ Beta(a, b).
  double stay_a = 8.0;
  double stay_b = 2.0;

  // Shrinkage process persistence (phi_i + 1) / 2 ~ Beta(a, b).
  double dsp_persistence_a = 10.0;
  double dsp_persistence_b = 2.0;

  double initial_state_var = 1e6;  // shadow coefficient at t = 0
  double log_offset = 1e-8;        // inside log(e^2 + c)

  // TVP-HOMOSKEDASTIC innovation variance per coefficient ~ IG(shape, rate).
  double state_var_shape = 2.5;
  double state_var_rate = 0.025;

  // LINEAR-CONJUGATE normal-inverse-gamma: beta | s2 ~ N(0, s2 * coef_var I).
  double linear_coef_var = 100.0;
  double linear_sigma2_shape = 2.0;
  double linear_sigma2_rate = 0.01;

  // Constant drift / constant coefficients under SV: beta ~ N(0, drift_var I).
  double drift_var = 10.0;

  bool operator==(const PriorSet&) const = default;
};

struct McmcSettings {
  int burn_in = 30000;
  int retained = 4000;
  int thin = 5;
  std::uint64_t seed = 1;

  [[nodiscard]] long long total_iterations() const {
    return static_cast<long long>(burn_in) + static_cast<long long>(retained) * thin;
  }
  static McmcSettings paper(std::uint64_t seed = 1) { return {30000, 4000, 5, seed}; }
  static McmcSettings desk(std::uint64_t seed = 1) { return {3000, 1000, 2, seed}; }
  bool operator==(const McmcSettings&) const = default;
};

struct ModelConfig {
  ModelFamily family = ModelFamily::Msdsp;
  double alpha_h = 0.5;
  double beta_h = 0.5;
  PriorSet priors;
  McmcSettings mcmc;
  WindowScheme window;

  // Pins the stay probability of the DSP state (s = 1) to one; with s_1 drawn
  // from the stationary law this makes MSDSP collapse onto DSP.
  bool pin_dsp_state = false;
  // Extra switch moves that integrate the shadow path and transition matrix
  // out (single-site sweep plus interval flips).
  bool collapsed_switch_moves = true;
  int switch_flip_proposals = 4;  // interval-flip proposals per coefficient and sweep
  bool randomize_scan = true;
  // LINEAR-CONJUGATE variant with stochastic volatility instead of a constant variance.
  bool linear_sv = false;
  // Forecast propagation keeps s_T fixed instead of evolving it with P.
  bool freeze_switch_forecast = false;
  // Retain the auxiliary blocks (PG variables, mixture indicators) in the draws.
  bool keep_auxiliary = false;

  bool operator==(const ModelConfig&) const = default;
};

inline void validate_config(const ModelConfig& c) {
  require(c.alpha_h > 0 && c.beta_h > 0, ErrorCode::NonPositiveShape, "alpha_h and beta_h must be positive");
  const double b = c.alpha_h + c.beta_h;
  require(std::abs(b - std::round(b)) < 1e-9, ErrorCode::InvalidParameter,
          "alpha_h + beta_h must be an integer (Polya-Gamma draws use integer b)");
  require(c.mcmc.burn_in >= 0 && c.mcmc.retained > 0 && c.mcmc.thin > 0, ErrorCode::InvalidParameter,
          "MCMC settings must be positive");
  require(c.switch_flip_proposals >= 0, ErrorCode::InvalidParameter, "switch_flip_proposals must be nonnegative");
  if (c.window.kind == WindowScheme::Kind::Rolling)
    require(c.window.length > 0, ErrorCode::InvalidParameter, "rolling window length must be positive");
}

// ---------------------------------------------------------------------------
// Latent state

/// Two-state transition matrix parameterised by its stay probabilities, so
/// each row sums to one by construction.
struct TransitionMatrix {
  double stay0 = 0.9;  // P(0 -> 0)
  double stay1 = 0.9;  // P(1 -> 1)

  [[nodiscard]] double operator()(int from, int to) const {
    const double stay = from == 0 ? stay0 : stay1;
    return from == to ? stay : 1.0 - stay;
  }
  /// Stationary probability of state 1.
  [[nodiscard]] double stationary1() const {
    const double leave0 = 1.0 - stay0, leave1 = 1.0 - stay1;
    const double denom = leave0 + leave1;
    if (denom <= 0.0) return 0.5;
    return leave0 / denom;
  }
  bool operator==(const TransitionMatrix&) const = default;
};

/// One joint value of every unknown. Rows are regression time points
/// (0-based internally), columns are coefficients.
struct LatentState {
  Eigen::MatrixXd beta_tilde;  // shadow coefficients
  Eigen::VectorXd beta0;       // shadow coefficients at t = 0 (initial state)
  SwitchMatrix s;
  Eigen::MatrixXd beta;  // s o beta_tilde

  Eigen::VectorXd g;
  double mu_g = 0.0;
  double phi_g = 0.9;
  double sigma2_g = 0.05;

  std::vector<TransitionMatrix> P;

  Eigen::MatrixXd H;
  Eigen::VectorXd mu;
  Eigen::VectorXd phi;
  Eigen::VectorXd xi_mu;
  Eigen::MatrixXd xi;
  Eigen::VectorXi r;      // SV mixture indicators, 0..9
  Eigen::MatrixXi h_mix;  // mixture indicators for log(omega^2), internal to the H block

  Eigen::VectorXd state_var;  // TVP-HOMOSKEDASTIC innovation variances

  [[nodiscard]] Index rows() const { return beta_tilde.rows(); }
  [[nodiscard]] Index cols() const { return beta_tilde.cols(); }
};

inline Eigen::MatrixXd compose(const Eigen::MatrixXd& beta_tilde, const SwitchMatrix& s) {
  return (beta_tilde.array() * s.cast<double>().array()).matrix();
}

/// Empty string when every invariant holds, otherwise the first violation.
inline std::string invariant_violation(const LatentState& st) {
  for (Index i = 0; i < static_cast<Index>(st.P.size()); ++i) {
    const auto& P = st.P[static_cast<std::size_t>(i)];
    if (!(P.stay0 >= 0 && P.stay0 <= 1 && P.stay1 >= 0 && P.stay1 <= 1))
      return "transition row outside [0,1] for coefficient " + std::to_string(i);
  }
  if (!(std::abs(st.phi_g) < 1.0)) return "|phi_g| >= 1";
  if (!(st.sigma2_g > 0.0)) return "sigma2_g <= 0";
  for (Index t = 0; t < st.beta.rows(); ++t)
    for (Index i = 0; i < st.beta.cols(); ++i)
      if (st.beta(t, i) != (st.s(t, i) ? st.beta_tilde(t, i) : 0.0))
        return "beta != s o beta_tilde at (" + std::to_string(t) + "," + std::to_string(i) + ")";
  if (st.xi.size() > 0 && !(st.xi.array() > 0.0).all()) return "xi has nonpositive entries";
  return {};
}

// ---------------------------------------------------------------------------
// Posterior draws

/// Retained draws stored per variable, draw-major: entry (d, t, i) of a
/// rows x coefs block lives at `(d * rows + t) * coefs + i`.
struct PosteriorDraws {
  ModelConfig config;
  std::string fingerprint;
  Index rows = 0;
  Index coefs = 0;
  int horizon = 0;
  Index count = 0;

  std::vector<double> beta_tilde;
  std::vector<std::uint8_t> s;
  std::vector<double> H;
  std::vector<double> g;
  std::vector<double> beta0;
  std::vector<double> mu_g, phi_g, sigma2_g;
  std::vector<double> stay0, stay1;
  std::vector<double> mu, phi;
  std::vector<double> state_var;

  // Present only when config.keep_auxiliary.
  std::vector<double> xi, xi_mu;
  std::vector<std::int32_t> r;

  [[nodiscard]] Index size() const { return count; }
  [[nodiscard]] std::size_t at(Index d, Index t, Index i) const {
    return static_cast<std::size_t>((d * rows + t) * coefs + i);
  }
  [[nodiscard]] std::size_t at(Index d, Index i) const { return static_cast<std::size_t>(d * coefs + i); }
  [[nodiscard]] std::size_t at_time(Index d, Index t) const { return static_cast<std::size_t>(d * rows + t); }

  [[nodiscard]] double beta(Index d, Index t, Index i) const {
    return s[at(d, t, i)] ? beta_tilde[at(d, t, i)] : 0.0;
  }

  void reserve_for(Index n_rows, Index n_coefs, Index n_draws) {
    rows = n_rows;
    coefs = n_coefs;
    const auto block = static_cast<std::size_t>(n_draws * n_rows * n_coefs);
    beta_tilde.reserve(block);
    s.reserve(block);
    H.reserve(block);
    g.reserve(static_cast<std::size_t>(n_draws * n_rows));
  }

  void append(const LatentState& st) {
    for (Index t = 0; t < rows; ++t)
      for (Index i = 0; i < coefs; ++i) {
        beta_tilde.push_back(st.beta_tilde(t, i));
        s.push_back(st.s(t, i));
        H.push_back(st.H.size() ? st.H(t, i) : 0.0);
        if (config.keep_auxiliary) xi.push_back(st.xi.size() ? st.xi(t, i) : 0.0);
      }
    for (Index t = 0; t < rows; ++t) {
      g.push_back(st.g[t]);
      if (config.keep_auxiliary) r.push_back(st.r.size() ? st.r[t] : 0);
    }
    for (Index i = 0; i < coefs; ++i) {
      beta0.push_back(st.beta0[i]);
      stay0.push_back(st.P.empty() ? 1.0 : st.P[static_cast<std::size_t>(i)].stay0);
      stay1.push_back(st.P.empty() ? 1.0 : st.P[static_cast<std::size_t>(i)].stay1);
      mu.push_back(st.mu.size() ? st.mu[i] : 0.0);
      phi.push_back(st.phi.size() ? st.phi[i] : 0.0);
      state_var.push_back(st.state_var.size() ? st.state_var[i] : 0.0);
      if (config.keep_auxiliary) xi_mu.push_back(st.xi_mu.size() ? st.xi_mu[i] : 0.0);
    }
    mu_g.push_back(st.mu_g);
    phi_g.push_back(st.phi_g);
    sigma2_g.push_back(st.sigma2_g);
    ++count;
  }

  /// Reconstructs draw `d` as a LatentState (auxiliary blocks only when kept).
  [[nodiscard]] LatentState snapshot(Index d) const {
    LatentState st;
    st.beta_tilde.resize(rows, coefs);
    st.s.resize(rows, coefs);
    st.H.resize(rows, coefs);
    for (Index t = 0; t < rows; ++t)
      for (Index i = 0; i < coefs; ++i) {
        st.beta_tilde(t, i) = beta_tilde[at(d, t, i)];
        st.s(t, i) = s[at(d, t, i)];
        st.H(t, i) = H[at(d, t, i)];
      }
    st.beta = compose(st.beta_tilde, st.s);
    st.g.resize(rows);
    for (Index t = 0; t < rows; ++t) st.g[t] = g[at_time(d, t)];
    st.beta0.resize(coefs);
    st.mu.resize(coefs);
    st.phi.resize(coefs);
    st.state_var.resize(coefs);
    st.P.resize(static_cast<std::size_t>(coefs));
    for (Index i = 0; i < coefs; ++i) {
      st.beta0[i] = beta0[at(d, i)];
      st.mu[i] = mu[at(d, i)];
      st.phi[i] = phi[at(d, i)];
      st.state_var[i] = state_var[at(d, i)];
      st.P[static_cast<std::size_t>(i)] = {stay0[at(d, i)], stay1[at(d, i)]};
    }
    st.mu_g = mu_g[static_cast<std::size_t>(d)];
    st.phi_g = phi_g[static_cast<std::size_t>(d)];
    st.sigma2_g = sigma2_g[static_cast<std::size_t>(d)];
    if (!xi.empty()) {
      st.xi.resize(rows, coefs);
      for (Index t = 0; t < rows; ++t)
        for (Index i = 0; i < coefs; ++i) st.xi(t, i) = xi[at(d, t, i)];
      st.xi_mu.resize(coefs);
      for (Index i = 0; i < coefs; ++i) st.xi_mu[i] = xi_mu[at(d, i)];
      st.r.resize(rows);
      for (Index t = 0; t < rows; ++t) st.r[t] = r[at_time(d, t)];
    }
    return st;
  }

  bool operator==(const PosteriorDraws&) const = default;
};

// ---------------------------------------------------------------------------
// Predictive distribution

/// Equal-weight Gaussian mixture over retained draws, plus one sampled y per draw.
struct ForecastDistribution {
  std::vector<double> means;
  std::vector<double> variances;
  std::vector<double> draws;
  int horizon = 0;
  Index origin = 0;

  [[nodiscard]] std::size_t size() const { return means.size(); }
};

}  // namespace msdsp
