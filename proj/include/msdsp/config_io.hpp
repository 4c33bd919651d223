#pragma once

// JSON representation of ModelConfig. Unknown keys are rejected so that a
// misspelt prior never silently falls back to its default.

#include <json.hpp>

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "msdsp/error.hpp"
#include "msdsp/model.hpp"

namespace msdsp {

using Json = nlohmann::ordered_json;

namespace detail {

inline const std::vector<std::pair<const char*, double PriorSet::*>>& prior_fields() {
  static const std::vector<std::pair<const char*, double PriorSet::*>> f{
      {"sv_level_mean", &PriorSet::sv_level_mean},
      {"sv_level_var", &PriorSet::sv_level_var},
      {"sv_persistence_a", &PriorSet::sv_persistence_a},
      {"sv_persistence_b", &PriorSet::sv_persistence_b},
      {"sv_innovation_shape", &PriorSet::sv_innovation_shape},
      {"sv_innovation_rate", &PriorSet::sv_innovation_rate},
      {"sv_initial_var", &PriorSet::sv_initial_var},
      {"stay_a", &PriorSet::stay_a},
      {"stay_b", &PriorSet::stay_b},
      {"dsp_persistence_a", &PriorSet::dsp_persistence_a},
      {"dsp_persistence_b", &PriorSet::dsp_persistence_b},
      {"initial_state_var", &PriorSet::initial_state_var},
      {"log_offset", &PriorSet::log_offset},
      {"state_var_shape", &PriorSet::state_var_shape},
      {"state_var_rate", &PriorSet::state_var_rate},
      {"linear_coef_var", &PriorSet::linear_coef_var},
      {"linear_sigma2_shape", &PriorSet::linear_sigma2_shape},
      {"linear_sigma2_rate", &PriorSet::linear_sigma2_rate},
      {"drift_var", &PriorSet::drift_var},
  };
  return f;
}

inline const std::vector<std::pair<const char*, bool ModelConfig::*>>& flag_fields() {
  static const std::vector<std::pair<const char*, bool ModelConfig::*>> f{
      {"pin_dsp_state", &ModelConfig::pin_dsp_state},
      {"collapsed_switch_moves", &ModelConfig::collapsed_switch_moves},
      {"randomize_scan", &ModelConfig::randomize_scan},
      {"linear_sv", &ModelConfig::linear_sv},
      {"freeze_switch_forecast", &ModelConfig::freeze_switch_forecast},
      {"keep_auxiliary", &ModelConfig::keep_auxiliary},
  };
  return f;
}

inline void reject_unknown(const Json& j, const std::set<std::string>& known, const std::string& where) {
  require(j.is_object(), ErrorCode::ParseError, where + " must be an object");
  for (const auto& [k, _] : j.items())
    require(known.count(k) > 0, ErrorCode::ParseError, "unknown key '" + k + "' in " + where);
}

template <class T>
T get_as(const Json& j, const std::string& key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::ParseError, "bad value for '" + key + "' in " + where);
  }
}

}  // namespace detail

inline Json to_json(const WindowScheme& w) {
  if (w.kind == WindowScheme::Kind::Expanding) return "expanding";
  return Json{{"rolling", w.length}};
}

inline WindowScheme window_from_json(const Json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "expanding") return WindowScheme::expanding();
    if (s.rfind("rolling", 0) == 0 && s.size() > 8 && (s[7] == ':' || s[7] == '(')) {
      std::string digits = s.substr(8);
      if (!digits.empty() && digits.back() == ')') digits.pop_back();
      try {
        return WindowScheme::rolling(std::stoi(digits));
      } catch (const std::exception&) {
      }
    }
    throw Error(ErrorCode::ParseError, "window must be 'expanding', 'rolling:<n>' or {\"rolling\": n}");
  }
  detail::reject_unknown(j, {"rolling"}, "window");
  return WindowScheme::rolling(detail::get_as<int>(j, "rolling", "window"));
}

inline Json to_json(const PriorSet& p) {
  Json j = Json::object();
  for (const auto& [name, field] : detail::prior_fields()) j[name] = p.*field;
  return j;
}

inline PriorSet priors_from_json(const Json& j, PriorSet p = {}) {
  std::set<std::string> known;
  for (const auto& [name, _] : detail::prior_fields()) known.insert(name);
  detail::reject_unknown(j, known, "priors");
  for (const auto& [name, field] : detail::prior_fields())
    if (j.contains(name)) p.*field = detail::get_as<double>(j, name, "priors");
  return p;
}

inline Json to_json(const McmcSettings& m) {
  return Json{{"burn_in", m.burn_in}, {"retained", m.retained}, {"thin", m.thin}, {"seed", m.seed}};
}

inline McmcSettings mcmc_from_json(const Json& j, McmcSettings m = {}) {
  detail::reject_unknown(j, {"preset", "burn_in", "retained", "thin", "seed"}, "mcmc");
  if (j.contains("preset")) {
    const auto preset = detail::get_as<std::string>(j, "preset", "mcmc");
    if (preset == "paper") m = McmcSettings::paper(m.seed);
    else if (preset == "desk") m = McmcSettings::desk(m.seed);
    else throw Error(ErrorCode::ParseError, "unknown preset '" + preset + "'");
  }
  if (j.contains("burn_in")) m.burn_in = detail::get_as<int>(j, "burn_in", "mcmc");
  if (j.contains("retained")) m.retained = detail::get_as<int>(j, "retained", "mcmc");
  if (j.contains("thin")) m.thin = detail::get_as<int>(j, "thin", "mcmc");
  if (j.contains("seed")) m.seed = detail::get_as<std::uint64_t>(j, "seed", "mcmc");
  return m;
}

inline Json to_json(const ModelConfig& c) {
  Json j{{"family", std::string(to_string(c.family))},
         {"alpha_h", c.alpha_h},
         {"beta_h", c.beta_h},
         {"priors", to_json(c.priors)},
         {"mcmc", to_json(c.mcmc)},
         {"window", to_json(c.window)},
         {"switch_flip_proposals", c.switch_flip_proposals}};
  for (const auto& [name, field] : detail::flag_fields()) j[name] = c.*field;
  return j;
}

/// Fields absent from `j` keep the values of `base`.
inline ModelConfig config_from_json(const Json& j, ModelConfig base = {}) {
  std::set<std::string> known{"family", "alpha_h", "beta_h", "priors", "mcmc", "window", "switch_flip_proposals"};
  for (const auto& [name, _] : detail::flag_fields()) known.insert(name);
  detail::reject_unknown(j, known, "model");
  ModelConfig c = std::move(base);
  if (j.contains("family")) c.family = parse_family(detail::get_as<std::string>(j, "family", "model"));
  if (j.contains("alpha_h")) c.alpha_h = detail::get_as<double>(j, "alpha_h", "model");
  if (j.contains("beta_h")) c.beta_h = detail::get_as<double>(j, "beta_h", "model");
  if (j.contains("priors")) c.priors = priors_from_json(j.at("priors"), c.priors);
  if (j.contains("mcmc")) c.mcmc = mcmc_from_json(j.at("mcmc"), c.mcmc);
  if (j.contains("window")) c.window = window_from_json(j.at("window"));
  if (j.contains("switch_flip_proposals"))
    c.switch_flip_proposals = detail::get_as<int>(j, "switch_flip_proposals", "model");
  for (const auto& [name, field] : detail::flag_fields())
    if (j.contains(name)) c.*field = detail::get_as<bool>(j, name, "model");
  validate_config(c);
  return c;
}

/// Applies "a.b.c=value" to a JSON document; the value is parsed as JSON when
/// possible and taken as a string otherwise.
inline void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  require(eq != std::string::npos && eq > 0, ErrorCode::ParseError, "override must look like key.path=value");
  const std::string path = assignment.substr(0, eq), raw = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(raw);
  } catch (const nlohmann::json::exception&) {
    value = raw;
  }
  Json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    require(!key.empty(), ErrorCode::ParseError, "empty key in override '" + path + "'");
    if (!node->is_object()) *node = Json::object();
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

}  // namespace msdsp
