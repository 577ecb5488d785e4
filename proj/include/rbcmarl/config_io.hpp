#pragma once

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "rbcmarl/config.hpp"
#include "rbcmarl/errors.hpp"

// Sectioned key-value configuration files:
//
//   # comment
//   [economy]
//   num_consumers = 10
//   [firm]
//   price_grid = 0, 500, 1000, 1500, 2000, 2500
//
// Unspecified keys keep their defaults; unknown sections or keys are errors.

namespace rbcmarl {

namespace config_io {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Shortest representation that round-trips; plain notation wins ties.
inline std::string format_double(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

inline double parse_double(const std::string& v) {
  std::size_t pos = 0;
  double x = 0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("expected a number, got '" + v + "'");
  }
  if (pos != v.size()) throw ConfigError("expected a number, got '" + v + "'");
  return x;
}

inline long parse_long(const std::string& v) {
  std::size_t pos = 0;
  long x = 0;
  try {
    x = std::stol(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("expected an integer, got '" + v + "'");
  }
  if (pos != v.size()) throw ConfigError("expected an integer, got '" + v + "'");
  return x;
}

inline bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("expected a boolean, got '" + v + "'");
}

inline std::vector<double> parse_list(const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(trim(item)));
  if (out.empty()) throw ConfigError("expected a comma-separated list");
  return out;
}

inline std::string format_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) s += ", ";
    s += format_double(v[k]);
  }
  return s;
}

struct Field {
  std::string section;
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename Access>
Field real_field(std::string section, std::string key, Access access) {
  return {std::move(section), std::move(key),
          [access](RunConfig& c, const std::string& v) { access(c) = parse_double(v); },
          [access](const RunConfig& c) {
            return format_double(access(const_cast<RunConfig&>(c)));
          }};
}

template <typename Access>
Field int_field(std::string section, std::string key, Access access) {
  return {std::move(section), std::move(key),
          [access](RunConfig& c, const std::string& v) {
            access(c) = static_cast<std::remove_reference_t<decltype(access(c))>>(parse_long(v));
          },
          [access](const RunConfig& c) {
            return std::to_string(access(const_cast<RunConfig&>(c)));
          }};
}

template <typename Access>
Field bool_field(std::string section, std::string key, Access access) {
  return {std::move(section), std::move(key),
          [access](RunConfig& c, const std::string& v) { access(c) = parse_bool(v); },
          [access](const RunConfig& c) {
            return std::string(access(const_cast<RunConfig&>(c)) ? "true" : "false");
          }};
}

template <typename Access>
Field list_field(std::string section, std::string key, Access access) {
  return {std::move(section), std::move(key),
          [access](RunConfig& c, const std::string& v) { access(c) = parse_list(v); },
          [access](const RunConfig& c) {
            return format_list(access(const_cast<RunConfig&>(c)));
          }};
}

inline const std::vector<Field>& fields() {
  static const std::vector<Field> all = [] {
    std::vector<Field> f;
    // [economy]
    f.push_back(int_field("economy", "num_consumers", [](RunConfig& c) -> int& { return c.economy.num_consumers; }));
    f.push_back(int_field("economy", "num_firms", [](RunConfig& c) -> int& { return c.economy.num_firms; }));
    f.push_back(int_field("economy", "episode_length", [](RunConfig& c) -> int& { return c.economy.episode_length; }));
    // [consumer]
    f.push_back(real_field("consumer", "crra_eta", [](RunConfig& c) -> double& { return c.economy.crra_eta; }));
    f.push_back(real_field("consumer", "labor_disutility", [](RunConfig& c) -> double& { return c.economy.labor_disutility; }));
    f.push_back(real_field("consumer", "initial_budget", [](RunConfig& c) -> double& { return c.economy.initial_consumer_budget; }));
    f.push_back(real_field("consumer", "discount", [](RunConfig& c) -> double& { return c.economy.consumer_discount; }));
    f.push_back(real_field("consumer", "pareto_scale", [](RunConfig& c) -> double& { return c.economy.pareto_scale; }));
    f.push_back(bool_field("consumer", "pareto_skill", [](RunConfig& c) -> bool& { return c.economy.pareto_skill; }));
    f.push_back(list_field("consumer", "consumption_grid", [](RunConfig& c) -> std::vector<double>& { return c.economy.grids.consumption; }));
    f.push_back(list_field("consumer", "hours_grid", [](RunConfig& c) -> std::vector<double>& { return c.economy.grids.hours; }));
    // [firm]
    f.push_back(list_field("firm", "production_A", [](RunConfig& c) -> std::vector<double>& { return c.economy.production_A; }));
    f.push_back(list_field("firm", "production_alpha", [](RunConfig& c) -> std::vector<double>& { return c.economy.production_alpha; }));
    f.push_back(list_field("firm", "initial_capital", [](RunConfig& c) -> std::vector<double>& { return c.economy.initial_capital; }));
    f.push_back(real_field("firm", "initial_budget", [](RunConfig& c) -> double& { return c.economy.initial_firm_budget; }));
    f.push_back(real_field("firm", "initial_price", [](RunConfig& c) -> double& { return c.economy.initial_price; }));
    f.push_back(real_field("firm", "initial_wage", [](RunConfig& c) -> double& { return c.economy.initial_wage; }));
    f.push_back(real_field("firm", "initial_inventory", [](RunConfig& c) -> double& { return c.economy.initial_inventory; }));
    f.push_back(real_field("firm", "invest_fraction", [](RunConfig& c) -> double& { return c.economy.invest_fraction; }));
    f.push_back(real_field("firm", "discount", [](RunConfig& c) -> double& { return c.economy.firm_discount; }));
    f.push_back(real_field("firm", "no_ponzi_penalty", [](RunConfig& c) -> double& { return c.economy.no_ponzi_penalty; }));
    f.push_back(list_field("firm", "price_grid", [](RunConfig& c) -> std::vector<double>& { return c.economy.grids.price; }));
    f.push_back(list_field("firm", "wage_grid", [](RunConfig& c) -> std::vector<double>& { return c.economy.grids.wage; }));
    // [government]
    f.push_back(Field{"government", "welfare_mode",
                      [](RunConfig& c, const std::string& v) {
                        if (v == "consumer_only") c.economy.welfare_mode = WelfareMode::kConsumerOnly;
                        else if (v == "total") c.economy.welfare_mode = WelfareMode::kTotal;
                        else throw ConfigError("welfare_mode must be consumer_only or total");
                      },
                      [](const RunConfig& c) {
                        return std::string(c.economy.welfare_mode == WelfareMode::kTotal ? "total" : "consumer_only");
                      }});
    f.push_back(real_field("government", "firm_welfare_weight", [](RunConfig& c) -> double& { return c.economy.firm_welfare_weight; }));
    f.push_back(real_field("government", "discount", [](RunConfig& c) -> double& { return c.economy.government_discount; }));
    f.push_back(bool_field("government", "tax_revenue_floor", [](RunConfig& c) -> bool& { return c.economy.tax_revenue_floor; }));
    f.push_back(list_field("government", "tax_grid", [](RunConfig& c) -> std::vector<double>& { return c.economy.grids.tax; }));
    // [export]
    f.push_back(bool_field("export", "enabled", [](RunConfig& c) -> bool& { return c.economy.export_enabled; }));
    f.push_back(real_field("export", "min_price", [](RunConfig& c) -> double& { return c.economy.export_min_price; }));
    f.push_back(real_field("export", "quota", [](RunConfig& c) -> double& { return c.economy.export_quota; }));
    // [curriculum]
    f.push_back(bool_field("curriculum", "enabled", [](RunConfig& c) -> bool& { return c.curriculum.enabled; }));
    f.push_back(int_field("curriculum", "t_start_firm", [](RunConfig& c) -> long& { return c.curriculum.t_start_firm; }));
    f.push_back(int_field("curriculum", "t_start_government", [](RunConfig& c) -> long& { return c.curriculum.t_start_government; }));
    f.push_back(int_field("curriculum", "firm_anneal_span", [](RunConfig& c) -> long& { return c.curriculum.firm_anneal_span; }));
    f.push_back(int_field("curriculum", "government_anneal_span", [](RunConfig& c) -> long& { return c.curriculum.government_anneal_span; }));
    f.push_back(int_field("curriculum", "theta_anneal_span", [](RunConfig& c) -> long& { return c.curriculum.theta_anneal_span; }));
    f.push_back(real_field("curriculum", "entropy_initial", [](RunConfig& c) -> double& { return c.curriculum.entropy_initial; }));
    f.push_back(real_field("curriculum", "entropy_min_coeff", [](RunConfig& c) -> double& { return c.curriculum.entropy_min_coeff; }));
    f.push_back(real_field("curriculum", "entropy_decay_rate", [](RunConfig& c) -> double& { return c.curriculum.entropy_decay_rate; }));
    f.push_back(bool_field("curriculum", "entropy_scale_by_initial", [](RunConfig& c) -> bool& { return c.curriculum.entropy_scale_by_initial; }));
    f.push_back(real_field("curriculum", "pinned_wage", [](RunConfig& c) -> double& { return c.curriculum.pinned_wage; }));
    // [training]
    f.push_back(Field{"training", "algorithm",
                      [](RunConfig& c, const std::string& v) {
                        if (v == "ppo") c.training.algorithm = Algorithm::kPpo;
                        else if (v == "reinforce") c.training.algorithm = Algorithm::kReinforce;
                        else throw ConfigError("algorithm must be ppo or reinforce");
                      },
                      [](const RunConfig& c) {
                        return std::string(c.training.algorithm == Algorithm::kPpo ? "ppo" : "reinforce");
                      }});
    f.push_back(real_field("training", "learning_rate", [](RunConfig& c) -> double& { return c.training.learning_rate; }));
    f.push_back(real_field("training", "government_learning_rate", [](RunConfig& c) -> double& { return c.training.government_learning_rate; }));
    f.push_back(real_field("training", "adam_beta1", [](RunConfig& c) -> double& { return c.training.adam_beta1; }));
    f.push_back(real_field("training", "adam_beta2", [](RunConfig& c) -> double& { return c.training.adam_beta2; }));
    f.push_back(real_field("training", "adam_epsilon", [](RunConfig& c) -> double& { return c.training.adam_epsilon; }));
    f.push_back(int_field("training", "batch_size", [](RunConfig& c) -> int& { return c.training.batch_size; }));
    f.push_back(real_field("training", "max_grad_norm", [](RunConfig& c) -> double& { return c.training.max_grad_norm; }));
    f.push_back(real_field("training", "ppo_clip", [](RunConfig& c) -> double& { return c.training.ppo_clip; }));
    f.push_back(int_field("training", "ppo_epochs", [](RunConfig& c) -> int& { return c.training.ppo_epochs; }));
    f.push_back(real_field("training", "value_loss_coef", [](RunConfig& c) -> double& { return c.training.value_loss_coef; }));
    f.push_back(real_field("training", "consumer_reward_scale", [](RunConfig& c) -> double& { return c.training.consumer_reward_scale; }));
    f.push_back(real_field("training", "firm_reward_scale", [](RunConfig& c) -> double& { return c.training.firm_reward_scale; }));
    f.push_back(real_field("training", "government_reward_scale", [](RunConfig& c) -> double& { return c.training.government_reward_scale; }));
    f.push_back(int_field("training", "hidden_width", [](RunConfig& c) -> int& { return c.training.hidden_width; }));
    f.push_back(int_field("training", "hidden_layers", [](RunConfig& c) -> int& { return c.training.hidden_layers; }));
    f.push_back(int_field("training", "num_updates", [](RunConfig& c) -> long& { return c.training.num_updates; }));
    f.push_back(int_field("training", "checkpoint_interval", [](RunConfig& c) -> long& { return c.training.checkpoint_interval; }));
    f.push_back(int_field("training", "workers", [](RunConfig& c) -> int& { return c.training.workers; }));
    f.push_back(int_field("training", "eval_episodes", [](RunConfig& c) -> int& { return c.training.eval_episodes; }));
    return f;
  }();
  return all;
}

}  // namespace config_io

// Parses configuration text; errors carry the 1-based line number.
inline RunConfig parse_config(const std::string& text, bool check = true) {
  using namespace config_io;
  RunConfig cfg;
  std::stringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  std::vector<std::string> seen;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto where = "line " + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      bool known = false;
      for (const auto& f : fields()) known |= f.section == section;
      if (!known) throw ConfigError(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    if (section.empty()) throw ConfigError(where + "key outside of a section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const Field* field = nullptr;
    for (const auto& f : fields()) {
      if (f.section == section && f.key == key) field = &f;
    }
    if (!field) throw ConfigError(where + "unknown key '" + key + "' in [" + section + "]");
    const std::string id = section + "." + key;
    if (std::find(seen.begin(), seen.end(), id) != seen.end()) {
      throw ConfigError(where + "duplicate key '" + key + "'");
    }
    seen.push_back(id);
    try {
      field->set(cfg, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + key + ": " + e.what());
    }
  }
  if (check) validate(cfg);
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// Writes every key; parse_config(serialize_config(c)) == c.
inline std::string serialize_config(const RunConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& f : config_io::fields()) {
    if (f.section != section) {
      if (!section.empty()) out += "\n";
      section = f.section;
      out += "[" + section + "]\n";
    }
    out += f.key + " = " + f.get(cfg) + "\n";
  }
  return out;
}

}  // namespace rbcmarl
