#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rbcmarl/config.hpp"
#include "rbcmarl/curriculum.hpp"
#include "rbcmarl/io.hpp"
#include "rbcmarl/policy_update.hpp"
#include "rbcmarl/rl.hpp"
#include "rbcmarl/rollout.hpp"
#include "rbcmarl/run_state.hpp"

namespace rbcmarl {

// Returns per (replica, agent) episode, advantages standardized over the
// whole type batch, then `ppo_epochs` full-batch epochs (one for
// REINFORCE). No-op for an empty batch.
inline UpdateStats update_type(MlpParams<float>& net, AdamState<float>& opt,
                               const TypeBatch& tb, int replicas, int horizon,
                               double gamma, const TrainingConfig& tc, AgentType type,
                               double entropy_coeff, int workers) {
  if (tb.rows() == 0) return {};
  const int A = tb.agents;
  std::vector<double> returns(static_cast<std::size_t>(tb.rows()));
  std::vector<double> rewards(static_cast<std::size_t>(horizon));
  for (int r = 0; r < replicas; ++r) {
    for (int a = 0; a < A; ++a) {
      const auto row = [&](int t) {
        return static_cast<std::size_t>((static_cast<long>(r) * horizon + t) * A + a);
      };
      for (int t = 0; t < horizon; ++t) rewards[static_cast<std::size_t>(t)] = tb.reward[row(t)];
      const auto g = discounted_returns(rewards, gamma);
      for (int t = 0; t < horizon; ++t) returns[row(t)] = g[static_cast<std::size_t>(t)];
    }
  }
  const auto adv = advantages(returns, tb.value);

  PolicyBatch pb;
  pb.obs = tb.obs.data();
  pb.width = tb.width;
  pb.rows = tb.rows();
  pb.actions = tb.actions;
  pb.old_logp = tb.logp;
  pb.advantages = adv;
  pb.returns = returns;
  pb.masks = tb.masks;

  UpdateSettings u;
  u.loss.algorithm = tc.algorithm;
  u.loss.clip = tc.ppo_clip;
  u.loss.entropy_coeff = entropy_coeff;
  u.loss.value_coef = tc.value_loss_coef;
  u.epochs = tc.algorithm == Algorithm::kPpo ? tc.ppo_epochs : 1;
  u.learning_rate = tc.lr(type);
  u.max_grad_norm = tc.max_grad_norm;
  u.workers = workers;
  return update_policy(net, opt, pb, u);
}

// One row of metrics.csv. Column meanings are documented in docs/metrics.md.
struct UpdateMetrics {
  long update = 0;
  double theta = 0;
  TrainingGates gates;
  double consumer_reward = 0;    // episode utility per consumer
  double firm_reward = 0;        // episode profit per firm
  double government_reward = 0;  // episode welfare
  double price = 0;
  double wage = 0;
  double income_tax = 0;
  double corporate_tax = 0;
  double consumption = 0;        // units per consumer per step
  double hours = 0;              // hours per consumer per step
  double exports = 0;            // units per firm per step
  double ponzi_rate = 0;         // share of firm-episodes ending in debt
  double entropy_coeff[kNumAgentTypes] = {0, 0, 0};
  std::optional<UpdateStats> stats[kNumAgentTypes];
  int mask_price = 0;
  int mask_wage = 0;
  int mask_tax = 0;

  static std::string csv_header() {
    std::string h =
        "update,theta,train_consumer,train_firm,train_government,"
        "consumer_reward,firm_reward,government_reward,price,wage,income_tax,"
        "corporate_tax,consumption,hours,exports,ponzi_rate";
    for (AgentType t : kAllAgentTypes) h += std::string(",entropy_coeff_") + agent_type_name(t);
    for (AgentType t : kAllAgentTypes) {
      const std::string n = agent_type_name(t);
      h += ",loss_" + n + ",policy_loss_" + n + ",value_loss_" + n + ",entropy_" + n +
           ",grad_norm_" + n;
    }
    h += ",mask_price,mask_wage,mask_tax";
    return h;
  }

  std::string csv_row() const {
    const auto num = [](double x) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.9g", x);
      return std::string(buf);
    };
    std::string s = std::to_string(update) + "," + num(theta);
    for (AgentType t : kAllAgentTypes) s += gates.open(t) ? ",1" : ",0";
    for (double x : {consumer_reward, firm_reward, government_reward, price, wage,
                     income_tax, corporate_tax, consumption, hours, exports, ponzi_rate}) {
      s += "," + num(x);
    }
    for (double x : entropy_coeff) s += "," + num(x);
    for (const auto& st : stats) {
      if (st) {
        s += "," + num(st->loss.loss) + "," + num(st->loss.policy_loss) + "," +
             num(st->loss.value_loss) + "," + num(st->loss.entropy) + "," + num(st->grad_norm);
      } else {
        s += ",,,,,";
      }
    }
    s += "," + std::to_string(mask_price) + "," + std::to_string(mask_wage) + "," +
         std::to_string(mask_tax);
    return s;
  }
};

inline void summarize(const RolloutBatch& batch, const EconomyConfig& cfg, UpdateMetrics& m) {
  const double R = batch.replicas;
  const double T = batch.horizon;
  const double nc = cfg.num_consumers;
  const double nf = cfg.num_firms;
  for (const auto& st : batch.stats) {
    m.consumer_reward += st.consumer_reward / (R * nc);
    m.firm_reward += st.firm_reward / (R * nf);
    m.government_reward += st.welfare / R;
    m.price += st.price / (R * T * nf);
    m.wage += st.wage / (R * T * nf);
    m.income_tax += st.income_tax / (R * T);
    m.corporate_tax += st.corporate_tax / (R * T);
    m.consumption += st.consumption / (R * T * nc);
    m.hours += st.hours / (R * T * nc);
    m.exports += st.exports / (R * T * nf);
    m.ponzi_rate += st.ponzi_violations / (R * nf);
  }
}

inline int admitted(const HeadMasks& masks, std::size_t head, int size) {
  if (head >= masks.size() || masks[head].empty()) return size;
  return mask_cardinality(masks[head]);
}

inline constexpr std::uint64_t kFinalRolloutTag = 0x66696e616c;

// One rollout phase followed by one update phase for every open gate.
inline UpdateMetrics train_iteration(TrainRunState& run, const Curriculum& curriculum) {
  const auto& cfg = run.config;
  const long u = run.update;
  const ScheduleSnapshot schedule = ScheduleSnapshot::at(curriculum, u);
  RolloutOptions ro;
  ro.replicas = cfg.training.batch_size;
  ro.workers = cfg.training.workers;
  ro.seed = run.seed;
  ro.stream = static_cast<std::uint64_t>(u);
  RolloutBatch batch;
  {
    PhaseGuard guard(run, Phase::kRollout);
    batch = collect_rollouts(cfg.economy, cfg.training, run.policies, schedule, ro);
  }

  UpdateMetrics m;
  m.update = u;
  m.theta = schedule.theta;
  m.gates = schedule.gates;
  summarize(batch, cfg.economy, m);
  const auto& g = cfg.economy.grids;
  const auto firm_masks = schedule.masks[static_cast<int>(AgentType::kFirm)];
  const auto gov_masks = schedule.masks[static_cast<int>(AgentType::kGovernment)];
  m.mask_price = admitted(firm_masks, 0, static_cast<int>(g.price.size()));
  m.mask_wage = admitted(firm_masks, 1, static_cast<int>(g.wage.size()));
  m.mask_tax = admitted(gov_masks, 0, static_cast<int>(g.tax.size()));

  PhaseGuard guard(run, Phase::kUpdate);
  for (AgentType type : kAllAgentTypes) {
    const auto k = static_cast<int>(type);
    m.entropy_coeff[k] = schedule.entropy_coeff[k];
    if (!schedule.gates.open(type)) continue;
    m.stats[k] = update_type(run.policies.net[k], run.policies.opt[k], batch[type],
                             batch.replicas, batch.horizon, cfg.economy.discount(type),
                             cfg.training, type, schedule.entropy_coeff[k],
                             cfg.training.workers);
  }
  run.update = u + 1;
  return m;
}

struct TrainOptions {
  std::filesystem::path out;  // metrics.csv, checkpoints/, rollout.json, manifest.json
  bool resume = false;
  std::vector<std::string> command_line;
  std::ostream* log = nullptr;
  long log_every = 50;
};

namespace detail {

// Keeps the header and every row whose update precedes `update`.
inline void truncate_metrics(const std::filesystem::path& path, long update) {
  if (!std::filesystem::exists(path)) return;
  std::stringstream in(read_file(path));
  std::string line;
  std::string kept;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      kept += line + "\n";
      header = false;
      continue;
    }
    if (line.empty()) continue;
    if (std::stol(line.substr(0, line.find(','))) < update) kept += line + "\n";
  }
  write_file_atomic(path, kept);
}

inline RunConfig without_run_length(RunConfig c) {
  c.training.num_updates = 0;
  c.training.workers = 1;
  return c;
}

}  // namespace detail

// Runs the staged schedule from update 0 (or the latest checkpoint when
// resuming) to `config.training.num_updates`, writing metrics, checkpoints
// at update 0, every checkpoint_interval updates and at the end, a manifest
// and a recorded final episode.
inline TrainRunState train(const RunConfig& config, std::uint64_t seed, const TrainOptions& opts) {
  validate(config);
  namespace fs = std::filesystem;
  const fs::path ckpt_dir = opts.out / "checkpoints";
  const fs::path metrics_path = opts.out / "metrics.csv";
  fs::create_directories(ckpt_dir);

  TrainRunState run;
  bool resumed = false;
  if (opts.resume) {
    const auto latest = latest_checkpoint(ckpt_dir);
    if (!latest.empty()) {
      run = load_checkpoint(latest);
      if (run.seed != seed) throw ConfigError("--seed differs from the checkpoint's seed");
      if (detail::without_run_length(run.config) != detail::without_run_length(config)) {
        throw ConfigError("configuration differs from the checkpoint's configuration");
      }
      run.config.training.num_updates = config.training.num_updates;
      run.config.training.workers = config.training.workers;
      resumed = true;
    }
  }
  if (!resumed) run = init_run(config, seed);

  RunManifest manifest;
  manifest.config_text = serialize_config(run.config);
  manifest.seed = seed;
  manifest.command_line = opts.command_line;
  manifest.started = utc_timestamp();
  manifest.write(opts.out / "manifest.json");

  if (resumed) {
    detail::truncate_metrics(metrics_path, run.update);
  } else {
    write_file_atomic(metrics_path, UpdateMetrics::csv_header() + "\n");
    save_checkpoint(ckpt_dir / checkpoint_name(0), run);
  }

  const Curriculum curriculum(run.config.curriculum, run.config.economy);
  const long total = run.config.training.num_updates;
  std::ofstream metrics(metrics_path, std::ios::app);
  if (!metrics) throw RuntimeError("cannot append to '" + metrics_path.string() + "'");
  while (run.update < total) {
    const UpdateMetrics m = train_iteration(run, curriculum);
    metrics << m.csv_row() << "\n";
    metrics.flush();
    if (opts.log && (run.update % opts.log_every == 0 || run.update == total)) {
      char buf[200];
      std::snprintf(buf, sizeof buf,
                    "update %ld/%ld  consumer %.4g  firm %.4g  welfare %.4g  price %.4g  wage %.4g\n",
                    run.update, total, m.consumer_reward, m.firm_reward, m.government_reward,
                    m.price, m.wage);
      *opts.log << buf << std::flush;
    }
    if (run.update % run.config.training.checkpoint_interval == 0 || run.update == total) {
      save_checkpoint(ckpt_dir / checkpoint_name(run.update), run);
    }
  }
  metrics.close();

  RolloutOptions ro;
  ro.replicas = 1;
  ro.seed = seed;
  ro.stream = kFinalRolloutTag;
  ro.record_first = true;
  const auto final_batch =
      collect_rollouts(run.config.economy, run.config.training, run.policies,
                       ScheduleSnapshot::at(curriculum, run.update), ro);
  json meta = {{"seed", seed}, {"update", run.update}};
  write_file_atomic(opts.out / "rollout.json", rollout_to_json(*final_batch.record, meta).dump() + "\n");

  manifest.finished = utc_timestamp();
  for (const auto& e : fs::recursive_directory_iterator(opts.out)) {
    if (e.is_regular_file() && e.path().filename() != "manifest.json") {
      manifest.files.push_back(fs::relative(e.path(), opts.out).generic_string());
    }
  }
  std::sort(manifest.files.begin(), manifest.files.end());
  manifest.files.push_back("manifest.json");
  manifest.write(opts.out / "manifest.json");
  return run;
}

}  // namespace rbcmarl
