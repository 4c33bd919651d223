// Batch driver: simulate, fit, forecast, backtest, metrics, mcs, assemble, plot-data.

#include <CLI11.hpp>
#include <Eigen/Core>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "msdsp/msdsp.hpp"

namespace fs = std::filesystem;
using namespace msdsp;

namespace {

constexpr const char* kVersion = "1.0.0";

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string preset;
  int jobs = 1;
  std::string out_dir = ".";
  std::string benchmark = "RW-SV";
  std::vector<std::string> overrides;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Loads the config file (if any) and applies --preset, --seed and --set.
Json load_config(const Common& c) {
  Json doc = Json::object();
  if (!c.config_path.empty()) {
    try {
      doc = Json::parse(read_file(c.config_path));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, "config " + c.config_path + ": " + e.what());
    }
  }
  for (const auto& o : c.overrides) apply_override(doc, o);
  if (!c.preset.empty()) {
    require(c.preset == "paper" || c.preset == "desk", ErrorCode::ParseError, "preset must be paper or desk");
    doc["model"]["mcmc"]["preset"] = c.preset;
    auto& m = doc["model"]["mcmc"];
    // an explicit preset wins over iteration counts from the file
    for (const char* k : {"burn_in", "retained", "thin"}) m.erase(k);
  }
  if (c.seed) {
    doc["seed"] = *c.seed;
    doc["model"]["mcmc"]["seed"] = *c.seed;
  }
  return doc;
}

ModelConfig base_model(const Json& doc) {
  return doc.contains("model") ? config_from_json(doc.at("model")) : ModelConfig{};
}

std::uint64_t base_seed(const Json& doc) { return doc.value("seed", std::uint64_t{1}); }

class Outputs {
 public:
  Outputs(std::string dir, std::string command, Json config)
      : dir_(std::move(dir)), command_(std::move(command)), config_(std::move(config)) {
    fs::create_directories(dir_);
  }

  std::string path(const std::string& name) const { return (fs::path(dir_) / name).string(); }

  void text(const std::string& name, const std::string& content) {
    std::ofstream out(path(name), std::ios::binary);
    require(out.good(), ErrorCode::IoError, "cannot write " + path(name));
    out << content;
    files_.push_back(name);
  }

  void json(const std::string& name, const Json& j) { text(name, j.dump(2) + "\n"); }

  void registered(const std::string& name) { files_.push_back(name); }

  void manifest(const Json& inputs) {
    Json outputs = Json::object();
    for (const auto& f : files_) outputs[f] = git_blob_sha1(read_file(path(f)));
    Json m{{"command", command_},
           {"config", config_},
           {"config_sha1", sha1_hex(config_.dump())},
           {"seed", config_.value("seed", std::uint64_t{1})},
           {"inputs", inputs},
           {"outputs", outputs},
           {"versions",
            {{"msdsp", kVersion},
             {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                           std::to_string(EIGEN_MINOR_VERSION)},
             {"compiler", __VERSION__}}}};
    std::ofstream out(path("manifest.json"), std::ios::binary);
    out << m.dump(2) << "\n";
  }

 private:
  std::string dir_, command_;
  Json config_;
  std::vector<std::string> files_;
};

Json file_inputs(const std::vector<std::string>& paths) {
  Json j = Json::object();
  for (const auto& p : paths)
    if (!p.empty()) j[p] = git_blob_sha1(read_file(p));
  return j;
}

// ---------------------------------------------------------------------------
// Data sources

/// "y" column plus covariates; labels from the header.
TimeSeriesDataset read_dataset_csv(const std::string& path, int horizon) {
  auto [header, m] = read_matrix_csv(path);
  require(!header.empty() && header[0] == "y", ErrorCode::ParseError, path + ": first column must be 'y'");
  require(m.cols() >= 2, ErrorCode::ParseError, path + ": no covariate columns");
  TimeSeriesDataset d;
  d.y = m.col(0);
  d.X = m.rightCols(m.cols() - 1);
  d.labels.assign(header.begin() + 1, header.end());
  d.horizon = horizon;
  return d;
}

std::string dataset_csv(const TimeSeriesDataset& d) {
  std::ostringstream ss;
  Eigen::MatrixXd m(d.y.size(), d.X.cols() + 1);
  m.col(0) = d.y;
  m.rightCols(d.X.cols()) = d.X;
  std::vector<std::string> header{"y"};
  header.insert(header.end(), d.labels.begin(), d.labels.end());
  write_matrix_csv(ss, m, header);
  return ss.str();
}

struct ModelEntry;

struct DataSource {
  std::optional<MacroPanel> panel;
  std::optional<TimeSeriesDataset> dataset;
  std::vector<std::string> files;

  [[nodiscard]] TimeSeriesDataset for_covariates(const std::string& covariates, double hp_lambda) const {
    if (panel) {
      require(covariates != "all", ErrorCode::ParseError, "panel data needs an economic covariate set per model");
      return build_covariates(*panel, parse_econ_model(covariates), hp_lambda);
    }
    require(covariates == "all", ErrorCode::ParseError, "dataset sources only support covariates = \"all\"");
    return *dataset;
  }

  [[nodiscard]] TimeSeriesDataset response_only() const {
    TimeSeriesDataset d;
    d.y = panel ? build_response(*panel) : dataset->y;
    d.X = Eigen::MatrixXd::Ones(d.y.size(), 1);
    d.labels = {"intercept"};
    return d;
  }

  [[nodiscard]] TimeSeriesDataset for_model(const ModelEntry& m, double hp_lambda) const;
};

DataSource load_data(const Json& doc) {
  require(doc.contains("data"), ErrorCode::ParseError, "config has no 'data' section");
  const Json& d = doc.at("data");
  DataSource src;
  if (d.contains("panel")) {
    const auto p = d.at("panel").get<std::string>();
    src.panel = read_panel_csv(p);
    src.files.push_back(p);
  } else if (d.contains("demo_panel")) {
    const Json& dp = d.at("demo_panel");
    src.panel = gen_demo_panel(dp.value("N", Index{331}), dp.value("seed", std::uint64_t{2024}));
  } else if (d.contains("csv")) {
    const auto p = d.at("csv").get<std::string>();
    src.dataset = read_dataset_csv(p, 0);
    src.files.push_back(p);
  } else if (d.contains("simulate")) {
    const Json& s = d.at("simulate");
    const auto kind = s.value("case", std::string("switching-sv"));
    const auto T = s.value("T", Index{300});
    const auto seed = s.value("seed", std::uint64_t{1});
    if (kind == "1") src.dataset = gen_case1(T, seed).dataset();
    else if (kind == "2") src.dataset = gen_case2(T, seed).dataset();
    else if (kind == "switching-sv") src.dataset = gen_switching_sv(T, seed).dataset();
    else throw Error(ErrorCode::ParseError, "unknown simulate case '" + kind + "'");
  } else {
    throw Error(ErrorCode::ParseError, "data section needs one of panel, demo_panel, csv, simulate");
  }
  return src;
}

struct ModelEntry {
  ModelSpec spec;
  std::string covariates;
};

std::vector<ModelEntry> load_models(const Json& list, const ModelConfig& base, const std::string& default_cov) {
  require(list.is_array() && !list.empty(), ErrorCode::ParseError, "'models' must be a nonempty array");
  std::vector<ModelEntry> out;
  for (const auto& m : list) {
    Json cfg = m;
    ModelEntry e;
    e.covariates = cfg.value("covariates", default_cov);
    cfg.erase("covariates");
    ModelConfig c = base;
    std::string name;
    if (cfg.contains("name")) {
      name = cfg.at("name").get<std::string>();
      cfg.erase("name");
    }
    c = config_from_json(cfg, c);
    if (name.empty()) name = std::string(to_string(c.family)) + (is_random_walk(c.family) ? "" : "-" + e.covariates);
    e.spec = {name, c};
    for (const auto& other : out)
      require(other.spec.name != name, ErrorCode::ParseError, "duplicate model name '" + name + "'");
    out.push_back(std::move(e));
  }
  return out;
}

TimeSeriesDataset DataSource::for_model(const ModelEntry& m, double hp_lambda) const {
  return is_random_walk(m.spec.config.family) ? response_only() : for_covariates(m.covariates, hp_lambda);
}

// ---------------------------------------------------------------------------
// CSV emitters

std::string records_csv(const std::vector<ForecastRecord>& recs) {
  std::ostringstream ss;
  ss << "model,origin,horizon,realized,mean,median,q05,q95,log_score,crps,squared_error\n";
  for (const auto& r : recs)
    ss << r.model << ',' << r.origin << ',' << r.horizon << ',' << fmt(r.realized) << ',' << fmt(r.mean) << ','
       << fmt(r.median) << ',' << fmt(r.q05) << ',' << fmt(r.q95) << ',' << fmt(r.log_score) << ',' << fmt(r.crps)
       << ',' << fmt(r.squared_error) << '\n';
  return ss.str();
}

std::vector<ForecastRecord> read_records_csv(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::getline(in, line);
  require(line.rfind("model,origin,horizon", 0) == 0, ErrorCode::ParseError, path + ": not a forecast record file");
  std::vector<ForecastRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> c;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) c.push_back(cell);
    require(c.size() == 11, ErrorCode::ParseError, path + ": bad record row");
    ForecastRecord r;
    try {
      r.model = c[0];
      r.origin = std::stoll(c[1]);
      r.horizon = std::stoi(c[2]);
      r.realized = std::stod(c[3]);
      r.mean = std::stod(c[4]);
      r.median = std::stod(c[5]);
      r.q05 = std::stod(c[6]);
      r.q95 = std::stod(c[7]);
      r.log_score = std::stod(c[8]);
      r.crps = std::stod(c[9]);
      r.squared_error = std::stod(c[10]);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, path + ": non-numeric record field");
    }
    out.push_back(r);
  }
  require(!out.empty(), ErrorCode::Empty, path + ": no records");
  return out;
}

std::string loss_matrix_csv(const LossMatrix& lm) {
  std::ostringstream ss;
  ss << "model";
  for (auto o : lm.origins) ss << ',' << o;
  ss << '\n';
  for (Index m = 0; m < lm.losses.rows(); ++m) {
    ss << lm.models[static_cast<std::size_t>(m)];
    for (Index n = 0; n < lm.losses.cols(); ++n) ss << ',' << fmt(lm.losses(m, n));
    ss << '\n';
  }
  return ss.str();
}

std::vector<int> horizons_of(const std::vector<ForecastRecord>& recs) {
  std::vector<int> hs;
  for (const auto& r : recs)
    if (std::find(hs.begin(), hs.end(), r.horizon) == hs.end()) hs.push_back(r.horizon);
  std::sort(hs.begin(), hs.end());
  return hs;
}

std::vector<std::string> models_of(const std::vector<ForecastRecord>& recs) {
  std::vector<std::string> ms;
  for (const auto& r : recs)
    if (std::find(ms.begin(), ms.end(), r.model) == ms.end()) ms.push_back(r.model);
  return ms;
}

std::vector<double> field(const std::vector<ForecastRecord>& recs, const std::string& model, int h,
                          double ForecastRecord::*f) {
  std::vector<std::pair<Index, double>> v;
  for (const auto& r : recs)
    if (r.model == model && r.horizon == h) v.emplace_back(r.origin, r.*f);
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (auto& [_, x] : v) out.push_back(x);
  return out;
}

// Per model and horizon: LPDR and relative RMSFE against the benchmark, mean
// CRPS, and 5% lower / upper coverage.
std::string metrics_table(const std::vector<ForecastRecord>& recs, const std::string& benchmark) {
  const auto models = models_of(recs);
  require(std::find(models.begin(), models.end(), benchmark) != models.end(), ErrorCode::ParseError,
          "benchmark '" + benchmark + "' not among the forecast records");
  std::ostringstream ss;
  ss << "model,horizon,n,lpdr,strongly_preferred,rmsfe,relative_rmsfe,mean_crps,coverage_lower_05,coverage_upper_05\n";
  for (int h : horizons_of(recs)) {
    const auto bench_ls = field(recs, benchmark, h, &ForecastRecord::log_score);
    const auto bench_se = field(recs, benchmark, h, &ForecastRecord::squared_error);
    std::vector<double> bench_err;
    for (double s : bench_se) bench_err.push_back(std::sqrt(s));
    for (const auto& m : models) {
      const auto ls = field(recs, m, h, &ForecastRecord::log_score);
      if (ls.empty()) continue;
      std::vector<double> err;
      for (double s : field(recs, m, h, &ForecastRecord::squared_error)) err.push_back(std::sqrt(s));
      const auto crps = field(recs, m, h, &ForecastRecord::crps);
      const auto y = field(recs, m, h, &ForecastRecord::realized);
      const auto lo = field(recs, m, h, &ForecastRecord::q05);
      const auto hi = field(recs, m, h, &ForecastRecord::q95);
      double cl = 0.0, cu = 0.0, mc = 0.0;
      for (std::size_t k = 0; k < y.size(); ++k) {
        cl += y[k] <= lo[k];
        cu += y[k] >= hi[k];
        mc += crps[k];
      }
      const double n = static_cast<double>(y.size());
      const double l = lpdr(ls, bench_ls);
      ss << m << ',' << h << ',' << y.size() << ',' << fmt(l) << ',' << (strongly_preferred(l) ? 1 : 0) << ','
         << fmt(rmsfe(err)) << ',' << fmt(relative_rmsfe(err, bench_err)) << ',' << fmt(mc / n) << ','
         << fmt(cl / n) << ',' << fmt(cu / n) << '\n';
    }
  }
  return ss.str();
}

LossKind parse_loss(const std::string& s) {
  if (s == "SFE") return LossKind::SquaredError;
  if (s == "negLogScore") return LossKind::NegLogScore;
  if (s == "CRPS") return LossKind::Crps;
  throw Error(ErrorCode::ParseError, "loss must be SFE, negLogScore or CRPS");
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_simulate(const Common& c, const std::string& which, Index T) {
  Json doc = load_config(c);
  doc["simulate"] = {{"case", which}, {"T", T}};
  const auto seed = base_seed(doc);
  Outputs out(c.out_dir, "simulate", doc);
  if (which == "demo-panel") {
    std::ostringstream ss;
    write_panel_csv(ss, gen_demo_panel(T > 0 ? T : 331, seed));
    out.text("panel.csv", ss.str());
  } else {
    SyntheticTruth tr;
    if (which == "1") tr = gen_case1(T > 0 ? T : 300, seed);
    else if (which == "2") tr = gen_case2(T > 0 ? T : 300, seed);
    else if (which == "switching-sv") tr = gen_switching_sv(T > 0 ? T : 300, seed);
    else throw UsageError("--case must be 1, 2, switching-sv or demo-panel");
    out.text("data.csv", dataset_csv(tr.dataset()));
    std::ostringstream b, s, e;
    write_matrix_csv(b, tr.beta_true, tr.labels);
    write_matrix_csv(s, tr.s_true.cast<double>(), tr.labels);
    write_matrix_csv(e, tr.eps, {"eps"});
    out.text("beta_true.csv", b.str());
    out.text("s_true.csv", s.str());
    out.text("eps.csv", e.str());
  }
  out.manifest(Json::object());
  return 0;
}

Json diagnostics_json(const ChainDiagnostics& d) {
  Json j;
  j["sweeps"] = d.sweeps;
  j["ess"] = d.ess;
  j["acf"] = d.acf;
  j["acceptance_rates"] = d.acceptance_rates();
  j["underflow_clamps"] = d.counters.underflow_clamps;
  return j;
}

int cmd_fit(const Common& c, const std::string& data_path, int horizon) {
  const Json doc = load_config(c);
  const ModelConfig cfg = base_model(doc);
  const auto data = read_dataset_csv(data_path, horizon);
  const auto res = fit(cfg, data);
  Outputs out(c.out_dir, "fit", doc);
  save_draws(out.path("draws.bin"), res.draws);
  out.registered("draws.bin");
  out.json("diagnostics.json", diagnostics_json(res.diagnostics));
  std::cerr << "fit: " << res.diagnostics.sweeps << " sweeps, " << res.diagnostics.seconds_per_sweep * 1e3
            << " ms/sweep\n";
  out.manifest(file_inputs({data_path}));
  return 0;
}

int cmd_forecast(const Common& c, const std::string& draws_path, const std::string& data_path,
                 const std::string& x_text, int horizon) {
  const Json doc = load_config(c);
  const auto draws = load_draws(draws_path);
  const auto seed = doc.contains("seed") ? base_seed(doc) : draws.config.mcmc.seed;
  ForecastDistribution fd;
  Index origin = draws.rows;
  if (is_random_walk(draws.config.family)) {
    fd = recursive_rw_forecast(draws, horizon, seed, origin);
  } else {
    Eigen::VectorXd x;
    if (!x_text.empty()) {
      std::vector<double> v;
      std::stringstream ss(x_text);
      std::string cell;
      while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
      x = Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
    } else {
      if (data_path.empty()) throw UsageError("forecast needs --data or --x for covariate models");
      const auto d = read_dataset_csv(data_path, draws.horizon);
      x = d.X.bottomRows(1).transpose();
      origin = d.X.rows();
    }
    fd = direct_forecast(draws, x, horizon, seed, origin);
  }
  Outputs out(c.out_dir, "forecast", doc);
  std::ostringstream comp;
  comp << "origin,h,m,v,y_draw\n";
  for (std::size_t k = 0; k < fd.size(); ++k)
    comp << fd.origin << ',' << fd.horizon << ',' << fmt(fd.means[k]) << ',' << fmt(fd.variances[k]) << ','
         << fmt(fd.draws[k]) << '\n';
  out.text("components.csv", comp.str());
  std::ostringstream sum;
  sum << "origin,h,mean,q05,q95\n"
      << fd.origin << ',' << fd.horizon << ',' << fmt(mean(fd)) << ',' << fmt(quantile(fd, 0.05)) << ','
      << fmt(quantile(fd, 0.95)) << '\n';
  out.text("summary.csv", sum.str());
  out.manifest(file_inputs({draws_path, data_path}));
  return 0;
}

int cmd_backtest(const Common& c) {
  const Json doc = load_config(c);
  const ModelConfig base = base_model(doc);
  const DataSource src = load_data(doc);
  const Json bt = doc.value("backtest", Json::object());
  const Index T0 = bt.value("T0", Index{130});
  const auto horizons = bt.value("horizons", std::vector<int>{1});
  const double lambda = bt.value("hp_lambda", 14400.0);
  const auto models = load_models(doc.at("models"), base, src.panel ? "IRP" : "all");
  BacktestOptions opt;
  opt.seed = base_seed(doc);
  opt.jobs = c.jobs;
  opt.global_standardization = bt.value("paper_global_standardize", false);

  std::vector<ForecastRecord> all;
  // models sharing a covariate set share one dataset; run them in config order
  for (const auto& m : models) {
    const auto full = src.for_model(m, lambda);
    const auto jobs = backtest_layout(full.y.size(), T0, horizons, m.spec.config.window);
    auto res = run_backtest({m.spec}, full, jobs, opt);
    all.insert(all.end(), res.records.begin(), res.records.end());
  }
  Outputs out(c.out_dir, "backtest", doc);
  out.text("forecasts.csv", records_csv(all));
  for (int h : horizons)
    for (auto kind : {LossKind::SquaredError, LossKind::NegLogScore, LossKind::Crps})
      out.text("losses_" + std::string(to_string(kind)) + "_h" + std::to_string(h) + ".csv",
               loss_matrix_csv(loss_matrix(all, kind, h)));
  out.manifest(file_inputs(src.files));
  return 0;
}

int cmd_metrics(const Common& c, const std::string& forecasts) {
  const Json doc = load_config(c);
  const auto recs = read_records_csv(forecasts);
  Outputs out(c.out_dir, "metrics", doc);
  out.text("metrics.csv", metrics_table(recs, c.benchmark));
  out.manifest(file_inputs({forecasts}));
  return 0;
}

int cmd_mcs(const Common& c, const std::string& forecasts, const std::string& loss, double level, int bootstrap) {
  const Json doc = load_config(c);
  const auto recs = read_records_csv(forecasts);
  const auto kind = parse_loss(loss);
  McsOptions mo;
  mo.level = level;
  mo.bootstrap = bootstrap;
  mo.seed = base_seed(doc);
  std::ostringstream m, dm, wx;
  m << "horizon,model,mean_loss,retained,rank,p_value\n";
  dm << "horizon,model,benchmark,dm_statistic,p_value,degenerate\n";
  wx << "model,benchmark,n_horizons,wilcoxon_p\n";
  std::map<std::string, std::vector<double>> dm_stats;
  for (int h : horizons_of(recs)) {
    const auto lm = loss_matrix(recs, kind, h);
    const auto res = mcs(lm, mo);
    for (std::size_t k = 0; k < lm.models.size(); ++k) {
      const bool kept = res.retained[k];
      m << h << ',' << lm.models[k] << ',' << fmt(lm.losses.row(static_cast<Index>(k)).mean()) << ','
        << (kept ? 1 : 0) << ',' << (kept ? std::to_string(res.rank[k]) : "-") << ',' << fmt(res.p_value[k]) << '\n';
    }
    const auto b = std::find(lm.models.begin(), lm.models.end(), c.benchmark);
    if (b == lm.models.end()) continue;
    const auto bi = static_cast<Index>(b - lm.models.begin());
    for (std::size_t k = 0; k < lm.models.size(); ++k) {
      if (static_cast<Index>(k) == bi) continue;
      std::vector<double> diff(static_cast<std::size_t>(lm.losses.cols()));
      for (Index n = 0; n < lm.losses.cols(); ++n)
        diff[static_cast<std::size_t>(n)] = lm.losses(static_cast<Index>(k), n) - lm.losses(bi, n);
      if (diff.size() < 20) continue;
      const auto r = dm_test(diff, h);
      dm << h << ',' << lm.models[k] << ',' << c.benchmark << ',' << fmt(r.statistic) << ',' << fmt(r.p_value) << ','
         << (r.degenerate ? 1 : 0) << '\n';
      if (!r.degenerate) dm_stats[lm.models[k]].push_back(r.statistic);
    }
  }
  for (const auto& [model, stats] : dm_stats)
    wx << model << ',' << c.benchmark << ',' << stats.size() << ',' << fmt(wilcoxon_signed_rank(stats)) << '\n';
  Outputs out(c.out_dir, "mcs", doc);
  out.text("mcs_" + loss + ".csv", m.str());
  out.text("dm_" + loss + ".csv", dm.str());
  out.text("wilcoxon_" + loss + ".csv", wx.str());
  out.manifest(file_inputs({forecasts}));
  return 0;
}

int cmd_assemble(const Common& c) {
  const Json doc = load_config(c);
  const ModelConfig base = base_model(doc);
  const DataSource src = load_data(doc);
  const Json as = doc.value("assembly", Json::object());
  const Index T0 = as.value("T0", Index{130});
  const Index eval_rows = as.value("evaluation_rows", Index{100});
  const auto horizons = as.value("horizons", std::vector<int>{1});
  const auto weights = as.value("weights", std::vector<std::string>{"MSDSP", "DSP"});
  const auto stat = as.value("statistic", std::string("mean")) == "median" ? ExpertStatistic::Median : ExpertStatistic::Mean;
  ModelConfig synth = base;
  if (as.contains("synthesis")) synth = config_from_json(as.at("synthesis"), synth);
  const auto models = load_models(doc.at("models"), base, src.panel ? "IRP" : "all");
  BacktestOptions opt;
  opt.seed = base_seed(doc);
  opt.jobs = c.jobs;
  opt.global_standardization = doc.value("backtest", Json::object()).value("paper_global_standardize", false);

  Outputs out(c.out_dir, "assemble", doc);
  std::ostringstream report;
  report << "method,horizon,n,lpl,mean_crps,rmsfe\n";
  std::vector<ForecastRecord> all;
  for (int h : horizons) {
    ExpertForecastPanel panel;
    Index T = 0;
    for (const auto& m : models) {
      const auto full = src.for_model(m, 14400.0);
      T = full.y.size();
      auto one = build_expert_panel({m.spec}, full, T0, h, opt, stat);
      if (panel.labels.empty()) {
        panel = std::move(one);
      } else {
        require(one.origins == panel.origins, ErrorCode::LengthMismatch, "base models disagree on origins");
        panel.labels.push_back(one.labels[0]);
        panel.forecasts.conservativeResize(Eigen::NoChange, panel.forecasts.cols() + 1);
        panel.forecasts.rightCols(1) = one.forecasts;
      }
    }
    std::ostringstream pcsv;
    Eigen::MatrixXd pm(panel.rows(), panel.forecasts.cols() + 2);
    for (Index k = 0; k < panel.rows(); ++k) pm(k, 0) = static_cast<double>(panel.origins[static_cast<std::size_t>(k)]);
    pm.col(1) = panel.realized;
    pm.rightCols(panel.forecasts.cols()) = panel.forecasts;
    std::vector<std::string> header{"origin", "realized"};
    header.insert(header.end(), panel.labels.begin(), panel.labels.end());
    write_matrix_csv(pcsv, pm, header);
    out.text("expert_panel_h" + std::to_string(h) + ".csv", pcsv.str());
    const Index T1 = assembly_split(T, eval_rows);
    for (const auto& w : weights) {
      const auto res = assemble(panel, parse_family(w), synth, T1, opt);
      double lpl = 0.0, cr = 0.0, se = 0.0;
      for (const auto& r : res.records) {
        lpl += r.log_score;
        cr += r.crps;
        se += r.squared_error;
      }
      const double n = static_cast<double>(res.records.size());
      report << w << ',' << h << ',' << res.records.size() << ',' << fmt(lpl) << ',' << fmt(cr / n) << ','
             << fmt(std::sqrt(se / n)) << '\n';
      all.insert(all.end(), res.records.begin(), res.records.end());
    }
  }
  out.text("assembly_report.csv", report.str());
  out.text("assembly_forecasts.csv", records_csv(all));
  out.manifest(file_inputs(src.files));
  return 0;
}

int cmd_plot_data(const Common& c, const std::string& draws_path, const std::string& truth_dir) {
  const Json doc = load_config(c);
  const auto draws = load_draws(draws_path);
  const auto s = posterior_summary(draws);
  std::optional<Eigen::MatrixXd> beta_true, s_true;
  if (!truth_dir.empty()) {
    beta_true = read_matrix_csv((fs::path(truth_dir) / "beta_true.csv").string()).second;
    s_true = read_matrix_csv((fs::path(truth_dir) / "s_true.csv").string()).second;
    require(beta_true->rows() >= draws.rows && beta_true->cols() == draws.coefs, ErrorCode::LengthMismatch,
            "truth files do not match the draws");
  }
  std::ostringstream ss;
  ss << "t,coef,mean,lower,upper,prob_on" << (beta_true ? ",beta_true,s_true" : "") << '\n';
  for (Index i = 0; i < draws.coefs; ++i)
    for (Index t = 0; t < draws.rows; ++t) {
      ss << t + 1 << ',' << i << ',' << fmt(s.mean(t, i)) << ',' << fmt(s.lower(t, i)) << ',' << fmt(s.upper(t, i))
         << ',' << fmt(s.prob_on(t, i));
      if (beta_true) ss << ',' << fmt((*beta_true)(t, i)) << ',' << fmt((*s_true)(t, i));
      ss << '\n';
    }
  std::ostringstream g;
  g << "t,g_mean\n";
  for (Index t = 0; t < draws.rows; ++t) g << t + 1 << ',' << fmt(s.g_mean[t]) << '\n';
  Outputs out(c.out_dir, "plot-data", doc);
  out.text("coefficients.csv", ss.str());
  out.text("volatility.csv", g.str());
  std::vector<std::string> inputs{draws_path};
  if (!truth_dir.empty()) {
    inputs.push_back((fs::path(truth_dir) / "beta_true.csv").string());
    inputs.push_back((fs::path(truth_dir) / "s_true.csv").string());
  }
  out.manifest(file_inputs(inputs));
  return 0;
}

void print_error(std::string_view code, const std::string& message) {
  std::cerr << Json{{"error", code}, {"message", message}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MSDSP time-varying-parameter regression toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Common common;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", common.seed, "base seed");
    sub->add_option("--preset", common.preset, "MCMC preset")->check(CLI::IsMember({"paper", "desk"}));
    sub->add_option("--jobs", common.jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out-dir", common.out_dir, "output directory");
    sub->add_option("--set", common.overrides, "config override key.path=value (repeatable)");
  };

  std::string sim_case = "1";
  Index sim_T = 0;
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic dataset with ground truth");
  add_common(simulate);
  simulate->add_option("--case", sim_case, "1, 2, switching-sv or demo-panel");
  simulate->add_option("--T", sim_T, "sample length (default 300; demo panel 331 dates)");

  std::string data_path, draws_path, x_text, truth_dir, forecasts_path, loss = "CRPS";
  int horizon = 0, fc_horizon = 1, bootstrap = 5000;
  double level = 0.95;
  auto* fitc = app.add_subcommand("fit", "run the sampler on a dataset CSV");
  add_common(fitc);
  fitc->add_option("--data", data_path, "CSV with column y followed by covariates")->required()->check(CLI::ExistingFile);
  fitc->add_option("--horizon", horizon, "direct-forecast alignment h (row t of X pairs with y_{t+h})");

  auto* forecast = app.add_subcommand("forecast", "predictive distribution from saved draws");
  add_common(forecast);
  forecast->add_option("--draws", draws_path, "draws file from fit")->required()->check(CLI::ExistingFile);
  forecast->add_option("--data", data_path, "dataset CSV; its last covariate row is used")->check(CLI::ExistingFile);
  forecast->add_option("--x", x_text, "comma-separated covariate vector");
  forecast->add_option("--horizon", fc_horizon, "forecast horizon");

  auto* backtest = app.add_subcommand("backtest", "rolling-origin out-of-sample evaluation");
  add_common(backtest);

  auto* metrics = app.add_subcommand("metrics", "LPDR, RMSFE, CRPS and coverage tables");
  add_common(metrics);
  metrics->add_option("--forecasts", forecasts_path, "forecasts.csv from backtest")->required()->check(CLI::ExistingFile);
  metrics->add_option("--benchmark", common.benchmark, "benchmark model name");

  auto* mcsc = app.add_subcommand("mcs", "model confidence set, DM and Wilcoxon tests");
  add_common(mcsc);
  mcsc->add_option("--forecasts", forecasts_path, "forecasts.csv from backtest")->required()->check(CLI::ExistingFile);
  mcsc->add_option("--loss", loss, "SFE, negLogScore or CRPS")->check(CLI::IsMember({"SFE", "negLogScore", "CRPS"}));
  mcsc->add_option("--level", level, "confidence level");
  mcsc->add_option("--bootstrap", bootstrap, "bootstrap replicates");
  mcsc->add_option("--benchmark", common.benchmark, "benchmark model name for DM tests");

  auto* assemble_c = app.add_subcommand("assemble", "two-stage forecast assembly");
  add_common(assemble_c);

  auto* plot = app.add_subcommand("plot-data", "posterior means, bands and state probabilities");
  add_common(plot);
  plot->add_option("--draws", draws_path, "draws file from fit")->required()->check(CLI::ExistingFile);
  plot->add_option("--truth-dir", truth_dir, "directory with beta_true.csv and s_true.csv")->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("UsageError", e.what());
    return 1;
  }

  try {
    if (*simulate) return cmd_simulate(common, sim_case, sim_T);
    if (*fitc) return cmd_fit(common, data_path, horizon);
    if (*forecast) return cmd_forecast(common, draws_path, data_path, x_text, fc_horizon);
    if (*backtest) return cmd_backtest(common);
    if (*metrics) return cmd_metrics(common, forecasts_path);
    if (*mcsc) return cmd_mcs(common, forecasts_path, loss, level, bootstrap);
    if (*assemble_c) return cmd_assemble(common);
    if (*plot) return cmd_plot_data(common, draws_path, truth_dir);
  } catch (const UsageError& e) {
    print_error("UsageError", e.what());
    return 1;
  } catch (const Error& e) {
    print_error(to_string(e.code()), e.what());
    return 1;
  } catch (const nlohmann::json::exception& e) {
    print_error("ParseError", e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("InternalError", e.what());
    return 2;
  }
  return 2;
}
