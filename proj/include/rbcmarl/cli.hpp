#pragma once

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rbcmarl/config.hpp"
#include "rbcmarl/config_io.hpp"
#include "rbcmarl/curriculum.hpp"
#include "rbcmarl/equilibrium.hpp"
#include "rbcmarl/errors.hpp"
#include "rbcmarl/io.hpp"
#include "rbcmarl/observation.hpp"
#include "rbcmarl/trainer.hpp"

namespace rbcmarl {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

// "a,b,c" crosses every value with every value; "a:b,c:d" lists pairs.
inline std::vector<TaxPair> parse_rates(const std::string& text) {
  std::vector<std::string> tokens;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) tokens.push_back(config_io::trim(tok));
  if (tokens.empty()) throw ConfigError("--rates: empty list");
  const bool pairs = tokens.front().find(':') != std::string::npos;
  std::vector<TaxPair> out;
  std::vector<double> values;
  for (const auto& t : tokens) {
    const auto colon = t.find(':');
    if ((colon != std::string::npos) != pairs) {
      throw ConfigError("--rates: mix of single values and tau:sigma pairs");
    }
    if (pairs) {
      out.emplace_back(config_io::parse_double(config_io::trim(t.substr(0, colon))),
                       config_io::parse_double(config_io::trim(t.substr(colon + 1))));
    } else {
      values.push_back(config_io::parse_double(t));
    }
  }
  for (double tau : values) {
    for (double sigma : values) out.emplace_back(tau, sigma);
  }
  return out;
}

inline std::string schedule_csv(const RunConfig& cfg, long from, long to, long every) {
  const Curriculum c(cfg.curriculum, cfg.economy);
  const auto& g = cfg.economy.grids;
  std::string s =
      "t,theta,gate_consumer,gate_firm,gate_government,entropy_coeff_consumer,"
      "entropy_coeff_firm,entropy_coeff_government,mask_price,mask_wage,"
      "mask_income_tax,mask_corporate_tax\n";
  char buf[64];
  const auto num = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return std::string(buf);
  };
  for (long t = from; t <= to; t += every) {
    const auto snap = ScheduleSnapshot::at(c, t);
    const auto& fm = snap.masks[static_cast<int>(AgentType::kFirm)];
    const auto& gm = snap.masks[static_cast<int>(AgentType::kGovernment)];
    s += std::to_string(t) + "," + num(snap.theta);
    for (AgentType type : kAllAgentTypes) s += snap.gates.open(type) ? ",1" : ",0";
    for (double a : snap.entropy_coeff) s += "," + num(a);
    s += "," + std::to_string(admitted(fm, 0, static_cast<int>(g.price.size())));
    s += "," + std::to_string(admitted(fm, 1, static_cast<int>(g.wage.size())));
    s += "," + std::to_string(admitted(gm, 0, static_cast<int>(g.tax.size())));
    s += "," + std::to_string(admitted(gm, 1, static_cast<int>(g.tax.size()))) + "\n";
  }
  return s;
}

namespace detail {

inline std::filesystem::path sibling_checkpoint(const std::filesystem::path& ckpt, bool first) {
  namespace fs = std::filesystem;
  fs::path pick;
  const auto dir = ckpt.has_parent_path() ? ckpt.parent_path() : fs::path(".");
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.rfind("ckpt_", 0) != 0 || e.path().extension() != ".json") continue;
    if (pick.empty() || (first ? name < pick.filename().string() : name > pick.filename().string())) {
      pick = e.path();
    }
  }
  return pick;
}

inline void write_reports(const std::string& prefix, const nlohmann::json& j,
                          const std::string& csv, std::ostream& out) {
  if (prefix.empty()) {
    out << j.dump(2) << "\n";
    return;
  }
  write_file_atomic(prefix + ".json", j.dump(2) + "\n");
  write_file_atomic(prefix + ".csv", csv);
  out << "wrote " << prefix << ".json and " << prefix << ".csv\n";
}

}  // namespace detail

// Parses argv and runs one subcommand. Exit codes: 0 success, 2 usage or
// configuration error, 1 runtime failure.
inline int cli_dispatch(int argc, const char* const* argv, std::ostream& out = std::cout,
                        std::ostream& err = std::cerr) {
  CLI::App app{"Multi-agent reinforcement learning in a real-business-cycle economy", "rbcmarl"};
  app.require_subcommand(1);

  // train
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  bool no_curriculum = false;
  bool resume = false;
  std::optional<long> updates;
  std::optional<int> workers;
  auto* train_cmd = app.add_subcommand("train", "Run the staged training schedule");
  train_cmd->add_option("--config", config_path, "Configuration file")->required();
  train_cmd->add_option("--seed", seed, "Master seed")->capture_default_str();
  train_cmd->add_option("--out", out_dir, "Output directory")->required();
  train_cmd->add_flag("--no-curriculum", no_curriculum,
                      "Disable staging, action annealing and disutility annealing");
  train_cmd->add_flag("--resume", resume, "Continue from the latest checkpoint in --out");
  train_cmd->add_option("--updates", updates, "Override training.num_updates");
  train_cmd->add_option("--workers", workers, "Override training.workers");

  // rollout
  std::string ckpt_path;
  std::string out_file;
  std::string fixed_tax;
  auto* rollout_cmd = app.add_subcommand("rollout", "Record one episode from a checkpoint");
  rollout_cmd->add_option("--checkpoint", ckpt_path, "Checkpoint file")->required();
  rollout_cmd->add_option("--out", out_file, "Output JSON file")->required();
  rollout_cmd->add_option("--seed", seed, "Episode seed")->capture_default_str();
  rollout_cmd->add_option("--fixed-tax", fixed_tax, "Replace the government by tau:sigma");

  // best-response
  std::string type_name;
  std::optional<long> br_updates;
  std::optional<int> episodes;
  std::string initial_ckpt;
  std::string reference_ckpt;
  std::string report_prefix;
  auto* br_cmd = app.add_subcommand("best-response", "Measure one agent type's best-response gain");
  br_cmd->add_option("--checkpoint", ckpt_path, "Checkpoint to analyse")->required();
  br_cmd->add_option("--type", type_name, "Agent type: c, f or g")->required();
  br_cmd->add_option("--updates", br_updates,
                     "Best-response updates (default: 20% of training.num_updates)");
  br_cmd->add_option("--seed", seed, "Seed for training and evaluation")->capture_default_str();
  br_cmd->add_option("--episodes", episodes, "Evaluation episodes (default: training.eval_episodes)");
  br_cmd->add_option("--initial-checkpoint", initial_ckpt,
                     "Start of the main run (default: earliest checkpoint beside --checkpoint)");
  br_cmd->add_option("--reference-checkpoint", reference_ckpt,
                     "End of the main run (default: latest checkpoint beside --checkpoint)");
  br_cmd->add_option("--out", report_prefix, "Write <prefix>.json and <prefix>.csv");

  // baseline-sweep
  std::string rates_text = "0.2,0.4,0.6,0.8";
  long retrain = 0;
  auto* sweep_cmd = app.add_subcommand("baseline-sweep", "Welfare under fixed tax rates");
  sweep_cmd->add_option("--checkpoint", ckpt_path, "Checkpoint file")->required();
  sweep_cmd->add_option("--rates", rates_text,
                        "Comma list crossed with itself, or tau:sigma pairs")
      ->capture_default_str();
  sweep_cmd->add_option("--episodes", episodes, "Evaluation episodes (default: training.eval_episodes)");
  sweep_cmd->add_option("--seed", seed, "Evaluation seed")->capture_default_str();
  sweep_cmd->add_option("--retrain-updates", retrain,
                        "Retrain consumers and firms against each fixed pair first")
      ->capture_default_str();
  sweep_cmd->add_option("--out", report_prefix, "Write <prefix>.json and <prefix>.csv");

  // layout
  auto* layout_cmd = app.add_subcommand("layout", "Print the observation layout as JSON");
  layout_cmd->add_option("--config", config_path, "Configuration file (default: built-in)");

  // schedule-dump
  long from = 0;
  std::optional<long> to;
  long every = 1;
  auto* sched_cmd = app.add_subcommand("schedule-dump", "Print curriculum schedules as CSV");
  sched_cmd->add_option("--config", config_path, "Configuration file (default: built-in)");
  sched_cmd->add_option("--from", from, "First training step")->capture_default_str();
  sched_cmd->add_option("--to", to, "Last training step (default: training.num_updates)");
  sched_cmd->add_option("--every", every, "Step stride")->capture_default_str()->check(
      CLI::PositiveNumber);
  sched_cmd->add_flag("--no-curriculum", no_curriculum, "Disable the curriculum");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    const auto config_or_default = [&] {
      return config_path.empty() ? RunConfig{} : load_config(config_path);
    };
    const auto eval_episodes = [&](const RunConfig& c) {
      return episodes ? *episodes : c.training.eval_episodes;
    };

    if (*train_cmd) {
      RunConfig cfg = load_config(config_path);
      if (no_curriculum) cfg.curriculum.enabled = false;
      if (updates) cfg.training.num_updates = *updates;
      if (workers) cfg.training.workers = *workers;
      validate(cfg);
      TrainOptions opts;
      opts.out = out_dir;
      opts.resume = resume;
      opts.command_line.assign(argv, argv + argc);
      opts.log = &err;
      train(cfg, seed, opts);
      out << "training finished: " << out_dir << "\n";
    } else if (*rollout_cmd) {
      const auto run = load_checkpoint(ckpt_path);
      RolloutOptions ro;
      ro.replicas = 1;
      ro.seed = seed;
      ro.stream = kFinalRolloutTag;
      ro.record_first = true;
      if (!fixed_tax.empty()) {
        const auto rates = parse_rates(fixed_tax);
        if (rates.size() != 1) throw ConfigError("--fixed-tax expects one tau:sigma pair");
        const auto& grid = run.config.economy.grids.tax;
        if (grid_index(grid, rates[0].first) < 0 || grid_index(grid, rates[0].second) < 0) {
          throw ConfigError("--fixed-tax rates must be tax grid points");
        }
        ro.fixed_government = GovernmentAction{rates[0].first, rates[0].second};
      }
      const Curriculum c(run.config.curriculum, run.config.economy);
      const auto batch = collect_rollouts(run.config.economy, run.config.training, run.policies,
                                          ScheduleSnapshot::at(c, run.update), ro);
      nlohmann::json meta = {{"seed", seed}, {"update", run.update}, {"checkpoint", ckpt_path}};
      write_file_atomic(out_file, rollout_to_json(*batch.record, meta).dump() + "\n");
      out << "wrote " << out_file << "\n";
    } else if (*br_cmd) {
      const AgentType type = parse_agent_type(type_name);
      const auto run = load_checkpoint(ckpt_path);
      const auto first = initial_ckpt.empty() ? detail::sibling_checkpoint(ckpt_path, true)
                                              : std::filesystem::path(initial_ckpt);
      const auto last = reference_ckpt.empty() ? detail::sibling_checkpoint(ckpt_path, false)
                                               : std::filesystem::path(reference_ckpt);
      const auto initial = load_checkpoint(first);
      const auto reference = load_checkpoint(last);
      if (initial.config != run.config || reference.config != run.config) {
        throw ConfigError("checkpoints belong to runs with different configurations");
      }
      const int n = eval_episodes(run.config);
      const long u = br_updates ? *br_updates : run.config.training.num_updates / 5;
      const double gain = training_gain(initial, reference, type, n, seed);
      const auto rep = best_response(run, type, u, seed, gain, n);
      char line[256];
      std::snprintf(line, sizeof line, "%s,%ld,%ld,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                    agent_type_name(type), rep.checkpoint_update, rep.updates, rep.before,
                    rep.after, rep.improvement, rep.training_gain, rep.fractional);
      detail::write_reports(report_prefix, rep.to_json(),
                            std::string("type,checkpoint_update,updates,before,after,"
                                        "improvement,training_gain,fractional_improvement\n") +
                                line,
                            out);
    } else if (*sweep_cmd) {
      const auto run = load_checkpoint(ckpt_path);
      const auto rates = parse_rates(rates_text);
      const auto rep = fixed_tax_sweep(run, rates, eval_episodes(run.config), seed, retrain);
      detail::write_reports(report_prefix, rep.to_json(), rep.csv(), out);
    } else if (*layout_cmd) {
      const auto cfg = config_or_default();
      out << layout_to_json(make_layout(cfg.economy)).dump(2) << "\n";
    } else if (*sched_cmd) {
      RunConfig cfg = config_or_default();
      if (no_curriculum) cfg.curriculum.enabled = false;
      const long last = to ? *to : cfg.training.num_updates;
      if (from < 0 || last < from) throw ConfigError("schedule-dump needs 0 <= --from <= --to");
      out << schedule_csv(cfg, from, last, every);
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace rbcmarl
