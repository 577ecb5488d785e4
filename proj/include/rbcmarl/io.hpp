#pragma once

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rbcmarl/config.hpp"
#include "rbcmarl/config_io.hpp"
#include "rbcmarl/errors.hpp"
#include "rbcmarl/mlp.hpp"
#include "rbcmarl/rl.hpp"
#include "rbcmarl/rollout.hpp"
#include "rbcmarl/run_state.hpp"

namespace rbcmarl {

using nlohmann::json;

inline constexpr const char* kCodeVersion = "0.1.0";
inline constexpr int kCheckpointVersion = 1;
inline constexpr int kRolloutSchemaVersion = 1;

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RuntimeError("cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes to a sibling temporary file and renames it over `path`.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeError("cannot write '" + tmp.string() + "'");
    out << text;
    out.flush();
    if (!out) throw RuntimeError("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

inline json read_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

namespace detail {

// float -> double is exact and the JSON writer emits round-trip precision,
// so tensors survive a save/load cycle bit for bit.
template <typename M>
json tensor_to_json(const M& m) {
  std::vector<double> data(static_cast<std::size_t>(m.size()));
  for (Eigen::Index k = 0; k < m.size(); ++k) data[static_cast<std::size_t>(k)] = m.data()[k];
  return json{{"shape", {m.rows(), m.cols()}}, {"data", data}};
}

template <typename M>
M tensor_from_json(const json& j) {
  const auto rows = j.at("shape").at(0).get<Eigen::Index>();
  const auto cols = j.at("shape").at(1).get<Eigen::Index>();
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw ConfigError("tensor data does not match its shape");
  }
  M m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    m.data()[k] = static_cast<typename M::Scalar>(data[static_cast<std::size_t>(k)].get<double>());
  }
  return m;
}

}  // namespace detail

inline json params_to_json(const MlpParams<float>& p) {
  json layers = json::array();
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    layers.push_back({{"weight", detail::tensor_to_json(p.weights[l])},
                      {"bias", detail::tensor_to_json(p.biases[l])}});
  }
  json heads = json::array();
  for (std::size_t h = 0; h < p.head_weights.size(); ++h) {
    heads.push_back({{"weight", detail::tensor_to_json(p.head_weights[h])},
                     {"bias", detail::tensor_to_json(p.head_biases[h])}});
  }
  return json{{"layers", layers},
              {"heads", heads},
              {"value", {{"weight", detail::tensor_to_json(p.value_weight)},
                         {"bias", detail::tensor_to_json(p.value_bias)}}}};
}

inline MlpParams<float> params_from_json(const json& j) {
  using P = MlpParams<float>;
  P p;
  for (const auto& l : j.at("layers")) {
    p.weights.push_back(detail::tensor_from_json<P::Matrix>(l.at("weight")));
    p.biases.push_back(detail::tensor_from_json<P::Vector>(l.at("bias")));
  }
  for (const auto& h : j.at("heads")) {
    p.head_weights.push_back(detail::tensor_from_json<P::Matrix>(h.at("weight")));
    p.head_biases.push_back(detail::tensor_from_json<P::Vector>(h.at("bias")));
  }
  p.value_weight = detail::tensor_from_json<P::Matrix>(j.at("value").at("weight"));
  p.value_bias = detail::tensor_from_json<P::Vector>(j.at("value").at("bias"));
  return p;
}

inline json checkpoint_to_json(const TrainRunState& run) {
  json types = json::object();
  for (AgentType type : kAllAgentTypes) {
    const auto k = static_cast<int>(type);
    const auto& opt = run.policies.opt[k];
    types[agent_type_name(type)] = json{
        {"params", params_to_json(run.policies.net[k])},
        {"adam", {{"step", opt.step},
                  {"beta1", opt.beta1},
                  {"beta2", opt.beta2},
                  {"epsilon", opt.epsilon},
                  {"m", params_to_json(opt.m)},
                  {"v", params_to_json(opt.v)}}}};
  }
  return json{{"format", "rbcmarl-checkpoint"},
              {"version", kCheckpointVersion},
              {"seed", run.seed},
              {"update", run.update},
              {"config", serialize_config(run.config)},
              {"types", types}};
}

inline TrainRunState checkpoint_from_json(const json& j) {
  if (j.value("format", "") != "rbcmarl-checkpoint") throw ConfigError("not a checkpoint file");
  if (j.value("version", 0) != kCheckpointVersion) {
    throw ConfigError("unsupported checkpoint version " + std::to_string(j.value("version", 0)));
  }
  TrainRunState run;
  try {
    run.config = parse_config(j.at("config").get<std::string>());
    run.seed = j.at("seed").get<std::uint64_t>();
    run.update = j.at("update").get<long>();
    const ObsLayout layout = make_layout(run.config.economy);
    for (AgentType type : kAllAgentTypes) {
      const auto k = static_cast<int>(type);
      const auto& t = j.at("types").at(agent_type_name(type));
      auto& net = run.policies.net[k];
      net = params_from_json(t.at("params"));
      if (net.input_width() != layout.width(type) ||
          net.head_sizes() != head_sizes(run.config.economy, type)) {
        throw ConfigError(std::string(agent_type_name(type)) +
                          " network does not match the stored configuration");
      }
      const auto& a = t.at("adam");
      auto& opt = run.policies.opt[k];
      opt.step = a.at("step").get<long>();
      opt.beta1 = a.at("beta1").get<double>();
      opt.beta2 = a.at("beta2").get<double>();
      opt.epsilon = a.at("epsilon").get<double>();
      opt.m = params_from_json(a.at("m"));
      opt.v = params_from_json(a.at("v"));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed checkpoint: ") + e.what());
  }
  return run;
}

inline void save_checkpoint(const std::filesystem::path& path, const TrainRunState& run) {
  write_file_atomic(path, checkpoint_to_json(run).dump());
}

inline TrainRunState load_checkpoint(const std::filesystem::path& path) {
  try {
    return checkpoint_from_json(read_json(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

inline std::string checkpoint_name(long update) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "ckpt_%08ld.json", update);
  return buf;
}

// Latest checkpoint in `dir`, or an empty path.
inline std::filesystem::path latest_checkpoint(const std::filesystem::path& dir) {
  std::filesystem::path best;
  if (!std::filesystem::is_directory(dir)) return best;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.rfind("ckpt_", 0) == 0 && e.path().extension() == ".json" &&
        (best.empty() || name > best.filename().string())) {
      best = e.path();
    }
  }
  return best;
}

// Episode trace export.

inline json rollout_to_json(const EpisodeRecord& r, const json& meta = json::object()) {
  return json{{"schema_version", kRolloutSchemaVersion},
              {"meta", meta},
              {"num_consumers", r.num_consumers},
              {"num_firms", r.num_firms},
              {"length", r.length()},
              {"government", {{"income_tax", r.income_tax},
                              {"corporate_tax", r.corporate_tax},
                              {"tax_revenue", r.tax_revenue},
                              {"welfare", r.welfare}}},
              {"firms", {{"price", r.price},
                         {"wage", r.wage},
                         {"inventory", r.inventory},
                         {"capital", r.capital},
                         {"budget", r.firm_budget},
                         {"production", r.production},
                         {"exports", r.exports},
                         {"profit", r.profit}}},
              {"consumers", {{"budget", r.consumer_budget},
                             {"hours", r.hours},
                             {"work_firm", r.work_firm},
                             {"utility", r.utility},
                             {"consumption", r.consumption}}}};
}

inline EpisodeRecord rollout_from_json(const json& j) {
  if (j.value("schema_version", 0) != kRolloutSchemaVersion) {
    throw ConfigError("unsupported rollout schema version");
  }
  EpisodeRecord r;
  try {
    r.num_consumers = j.at("num_consumers").get<int>();
    r.num_firms = j.at("num_firms").get<int>();
    const auto& g = j.at("government");
    g.at("income_tax").get_to(r.income_tax);
    g.at("corporate_tax").get_to(r.corporate_tax);
    g.at("tax_revenue").get_to(r.tax_revenue);
    g.at("welfare").get_to(r.welfare);
    const auto& f = j.at("firms");
    f.at("price").get_to(r.price);
    f.at("wage").get_to(r.wage);
    f.at("inventory").get_to(r.inventory);
    f.at("capital").get_to(r.capital);
    f.at("budget").get_to(r.firm_budget);
    f.at("production").get_to(r.production);
    f.at("exports").get_to(r.exports);
    f.at("profit").get_to(r.profit);
    const auto& c = j.at("consumers");
    c.at("budget").get_to(r.consumer_budget);
    c.at("hours").get_to(r.hours);
    c.at("work_firm").get_to(r.work_firm);
    c.at("utility").get_to(r.utility);
    c.at("consumption").get_to(r.consumption);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed rollout: ") + e.what());
  }
  return r;
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Everything needed to rerun a training job.
struct RunManifest {
  std::string config_text;
  std::uint64_t seed = 0;
  std::string code_version = kCodeVersion;
  std::vector<std::string> command_line;
  std::string started;
  std::string finished;
  std::vector<std::string> files;

  json to_json() const {
    return json{{"config", config_text},  {"seed", seed},
                {"code_version", code_version}, {"command_line", command_line},
                {"started", started},     {"finished", finished},
                {"files", files}};
  }

  void write(const std::filesystem::path& path) const {
    write_file_atomic(path, to_json().dump(2) + "\n");
  }
};

}  // namespace rbcmarl
