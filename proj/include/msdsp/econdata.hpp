#pragma once

// Monthly macro panels: CSV ingestion, response and covariate construction,
// one-sided HP filtering, leak-free standardisation and backtest layouts.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cctype>
#include <string_view>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "msdsp/banded.hpp"
#include "msdsp/error.hpp"
#include "msdsp/model.hpp"

namespace msdsp {

/// Date-indexed series keyed by name. Series names used by the covariate
/// builders: e (log exchange rate, domestic per USD), r/r_star, p/p_star (log
/// prices), pi/pi_star (inflation), ip/ip_star (log industrial production),
/// m/m_star (log money), out/out_star (log output), oil, gold, copper (log prices).
struct MacroPanel {
  std::vector<std::string> dates;
  std::map<std::string, Eigen::VectorXd> series;

  [[nodiscard]] Index length() const { return static_cast<Index>(dates.size()); }

  [[nodiscard]] const Eigen::VectorXd& get(const std::string& name) const {
    const auto it = series.find(name);
    require(it != series.end(), ErrorCode::MissingSeries, "series '" + name + "' not in panel");
    return it->second;
  }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline bool iso_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t k : {0, 1, 2, 3, 5, 6, 8, 9})
    if (!std::isdigit(static_cast<unsigned char>(s[k]))) return false;
  return true;
}

}  // namespace detail

/// Header "date,<name>,...", one row per month with ISO dates in increasing
/// order. Empty or non-numeric cells are rejected.
inline MacroPanel read_panel_csv(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::ParseError, "empty panel file");
  const auto header = detail::split_csv_line(line);
  require(header.size() >= 2 && header[0] == "date", ErrorCode::ParseError, "first column must be 'date'");
  MacroPanel panel;
  std::vector<std::vector<double>> cols(header.size() - 1);
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto cells = detail::split_csv_line(line);
    require(cells.size() == header.size(), ErrorCode::ParseError, "row " + std::to_string(row) + " has wrong width");
    require(detail::iso_date(cells[0]), ErrorCode::ParseError, "row " + std::to_string(row) + ": bad date");
    require(panel.dates.empty() || panel.dates.back() < cells[0], ErrorCode::ParseError,
            "dates must be strictly increasing (row " + std::to_string(row) + ")");
    panel.dates.push_back(cells[0]);
    for (std::size_t c = 1; c < cells.size(); ++c) {
      require(!cells[c].empty(), ErrorCode::MissingSeries,
              "missing value for '" + header[c] + "' at " + cells[0]);
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cells[c], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      require(used == cells[c].size() && std::isfinite(v), ErrorCode::ParseError,
              "non-numeric value '" + cells[c] + "' for '" + header[c] + "' at " + cells[0]);
      cols[c - 1].push_back(v);
    }
  }
  require(!panel.dates.empty(), ErrorCode::Empty, "panel has no rows");
  for (std::size_t c = 1; c < header.size(); ++c)
    panel.series[header[c]] = Eigen::Map<Eigen::VectorXd>(cols[c - 1].data(), static_cast<Index>(cols[c - 1].size()));
  return panel;
}

inline MacroPanel read_panel_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::IoError, "cannot open " + path);
  return read_panel_csv(in);
}

inline void write_panel_csv(std::ostream& out, const MacroPanel& panel) {
  out << "date";
  for (const auto& [name, _] : panel.series) out << ',' << name;
  out << '\n';
  out.precision(17);
  for (Index t = 0; t < panel.length(); ++t) {
    out << panel.dates[static_cast<std::size_t>(t)];
    for (const auto& [_, v] : panel.series) out << ',' << v[t];
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Response and covariates

/// y_t = e_t - e_{t-1}; positive values mean the domestic currency depreciates.
inline Eigen::VectorXd build_response(const MacroPanel& panel) {
  const auto& e = panel.get("e");
  require(e.size() >= 2, ErrorCode::InsufficientHistory, "exchange rate needs at least two observations");
  return e.tail(e.size() - 1) - e.head(e.size() - 1);
}

enum class EconModel { IRP, TR, PPP, MON, Oil, Gold, Copper };

inline constexpr std::array<EconModel, 7> kEconModels{EconModel::IRP, EconModel::TR,   EconModel::PPP,
                                                      EconModel::MON, EconModel::Oil,  EconModel::Gold,
                                                      EconModel::Copper};

inline std::string_view to_string(EconModel m) {
  switch (m) {
    case EconModel::IRP: return "IRP";
    case EconModel::TR: return "TR";
    case EconModel::PPP: return "PPP";
    case EconModel::MON: return "MON";
    case EconModel::Oil: return "Oil";
    case EconModel::Gold: return "Gold";
    case EconModel::Copper: return "Copper";
  }
  return "?";
}

inline EconModel parse_econ_model(std::string_view s) {
  for (auto m : kEconModels)
    if (to_string(m) == s) return m;
  throw Error(ErrorCode::ParseError, "unknown economic model '" + std::string(s) + "'");
}

struct HpResult {
  Eigen::VectorXd trend;
  Eigen::VectorXd gap;
};

namespace detail {

/// Two-sided HP trend of x: (I + lambda D'D) tau = x, D the second difference.
inline Eigen::VectorXd hp_trend(const Eigen::VectorXd& x, double lambda) {
  const Index n = x.size();
  if (n < 3) return x;
  BandedMatrix Q(n, 2);
  for (Index i = 0; i < n; ++i) Q(i, i) = 1.0;
  for (Index k = 0; k + 2 < n; ++k) {
    const Index idx[3] = {k, k + 1, k + 2};
    const double c[3] = {1.0, -2.0, 1.0};
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b <= a; ++b) Q(idx[a], idx[b]) += lambda * c[a] * c[b];
  }
  return BandedCholesky(std::move(Q)).solve(x);
}

}  // namespace detail

/// trend_t is the last point of the HP trend fitted to x_0..x_t.
inline HpResult one_sided_hp(const Eigen::VectorXd& x, double lambda = 14400.0) {
  require(x.size() >= 12, ErrorCode::TooShort, "one-sided HP filter needs at least 12 observations");
  HpResult r;
  r.trend.resize(x.size());
  for (Index t = 0; t < x.size(); ++t) r.trend[t] = detail::hp_trend(x.head(t + 1), lambda)[t];
  r.gap = x - r.trend;
  return r;
}

/// Covariates dated t = 1..N-1 (aligned with build_response), in Table order:
/// intercept first, then the model's fundamentals.
inline TimeSeriesDataset build_covariates(const MacroPanel& panel, EconModel model, double hp_lambda = 14400.0) {
  const Index N = panel.length();
  require(N >= 3, ErrorCode::InsufficientHistory, "panel too short");
  const Index T = N - 1;
  TimeSeriesDataset d;
  d.y = build_response(panel);
  d.horizon = 0;
  auto dated = [&](const Eigen::VectorXd& v) { return Eigen::VectorXd(v.tail(T)); };
  Eigen::MatrixXd X(T, 2);
  X.col(0).setOnes();
  switch (model) {
    case EconModel::IRP:
      X.col(1) = dated(panel.get("r") - panel.get("r_star"));
      d.labels = {"intercept", "r-r*"};
      break;
    case EconModel::TR: {
      X.resize(T, 3);
      X.col(0).setOnes();
      const Eigen::VectorXd dr = panel.get("r") - panel.get("r_star");
      X.col(1) = dr.head(T);  // lagged one month
      const auto gap = one_sided_hp(panel.get("ip"), hp_lambda).gap;
      const auto gap_star = one_sided_hp(panel.get("ip_star"), hp_lambda).gap;
      X.col(2) = dated(1.5 * (panel.get("pi") - panel.get("pi_star")) + 0.5 * (gap - gap_star));
      d.labels = {"intercept", "lag(r-r*)", "1.5(pi-pi*)+0.5(gap-gap*)"};
      break;
    }
    case EconModel::PPP:
      X.col(1) = dated(panel.get("p") - panel.get("p_star") - panel.get("e"));
      d.labels = {"intercept", "p-p*-e"};
      break;
    case EconModel::MON:
      X.col(1) = dated((panel.get("m") - panel.get("m_star")) - (panel.get("out") - panel.get("out_star")) -
                       panel.get("e"));
      d.labels = {"intercept", "(m-m*)-(out-out*)-e"};
      break;
    case EconModel::Oil:
    case EconModel::Gold:
    case EconModel::Copper: {
      const std::string name = model == EconModel::Oil ? "oil" : (model == EconModel::Gold ? "gold" : "copper");
      const auto& lp = panel.get(name);
      X.col(1) = lp.tail(T) - lp.head(T);
      d.labels = {"intercept", "dlog " + name};
      break;
    }
  }
  d.X = std::move(X);
  return d;
}

// ---------------------------------------------------------------------------
// Standardisation

struct Standardized {
  Eigen::VectorXd values;
  double mean = 0.0;
  double sd = 1.0;
};

/// Uses the moments of x[0 .. training_end-1] only (sample standard deviation).
inline Standardized standardize(const Eigen::VectorXd& x, Index training_end) {
  require(training_end >= 2 && training_end <= x.size(), ErrorCode::InvalidParameter, "bad training window");
  const auto w = x.head(training_end);
  Standardized s;
  s.mean = w.mean();
  s.sd = std::sqrt((w.array() - s.mean).square().sum() / static_cast<double>(training_end - 1));
  require(s.sd > 0.0, ErrorCode::ZeroVariance, "training window has zero variance");
  s.values = (x.array() - s.mean) / s.sd;
  return s;
}

// ---------------------------------------------------------------------------
// Backtest layout

struct BacktestJob {
  Index origin = 0;       // 1-based index of the last observation available
  int horizon = 1;
  Index train_first = 1;  // 1-based, inclusive
  Index train_last = 1;
};

/// Origins t = T0..T-h per horizon; expanding windows train on 1..t, rolling
/// windows of length n on t-n+1..t.
inline std::vector<BacktestJob> backtest_layout(Index T, Index T0, const std::vector<int>& horizons,
                                                const WindowScheme& window = WindowScheme::expanding()) {
  require(T0 >= 2, ErrorCode::InfeasibleLayout, "T0 must be at least 2");
  if (window.kind == WindowScheme::Kind::Rolling)
    require(window.length >= 2 && window.length <= T0, ErrorCode::InfeasibleLayout,
            "rolling window must fit inside the initial sample");
  std::vector<BacktestJob> jobs;
  for (int h : horizons) {
    require(h >= 1 && h <= 12, ErrorCode::InfeasibleLayout, "horizons must lie in 1..12");
    require(T - h >= T0, ErrorCode::InfeasibleLayout, "no evaluation origin for horizon " + std::to_string(h));
    for (Index t = T0; t <= T - h; ++t) {
      BacktestJob j{t, h, 1, t};
      if (window.kind == WindowScheme::Kind::Rolling) j.train_first = t - window.length + 1;
      jobs.push_back(j);
    }
  }
  return jobs;
}

inline Index evaluation_count(Index T, Index T0, int h) { return T - h - T0 + 1; }

/// Training dataset for one job from a contemporaneous dataset (rows dated
/// 1..T). Regression pairs (x_s, y_{s+h}) all lie inside the window.
/// Non-intercept covariates are standardised with window moments unless
/// `global_moments` is set, in which case the full-sample moments are used.
struct OriginData {
  TimeSeriesDataset train;
  Eigen::VectorXd x_new;  // covariates at the origin, standardised consistently
  double realized = 0.0;  // y_{t+h}
};

inline OriginData origin_data(const TimeSeriesDataset& full, const BacktestJob& job, bool standardize_covariates = true,
                              bool global_moments = false) {
  const Index first = job.train_first - 1, last = job.train_last - 1;  // 0-based inclusive
  const Index len = last - first + 1;
  require(len > job.horizon, ErrorCode::InsufficientHistory, "window shorter than the horizon");
  require(last + job.horizon < full.y.size(), ErrorCode::InfeasibleLayout, "realisation beyond the sample");
  OriginData od;
  od.train.y = full.y.segment(first, len);
  od.train.X = full.X.middleRows(first, len);
  od.train.labels = full.labels;
  od.train.horizon = job.horizon;
  od.x_new = full.X.row(last).transpose();
  od.realized = full.y[last + job.horizon];
  if (standardize_covariates) {
    for (Index j = 0; j < full.X.cols(); ++j) {
      if ((full.X.col(j).array() == 1.0).all()) continue;
      const Eigen::VectorXd src = global_moments ? Eigen::VectorXd(full.X.col(j)) : Eigen::VectorXd(od.train.X.col(j));
      const auto s = standardize(src, src.size());
      od.train.X.col(j) = (od.train.X.col(j).array() - s.mean) / s.sd;
      od.x_new[j] = (od.x_new[j] - s.mean) / s.sd;
    }
  }
  return od;
}

}  // namespace msdsp
