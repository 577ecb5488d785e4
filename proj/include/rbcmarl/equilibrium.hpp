#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rbcmarl/config.hpp"
#include "rbcmarl/curriculum.hpp"
#include "rbcmarl/errors.hpp"
#include "rbcmarl/rollout.hpp"
#include "rbcmarl/run_state.hpp"
#include "rbcmarl/trainer.hpp"

namespace rbcmarl {

inline constexpr std::uint64_t kEvalTag = 0x6576616c;
inline constexpr std::uint64_t kBestResponseTag = 0x6272;
inline constexpr std::uint64_t kSweepTag = 0x7377;

struct Evaluation {
  int episodes = 0;
  double reward[kNumAgentTypes] = {0, 0, 0};  // scaled episode return per agent
  double consumer_utility = 0;                // episode utility per consumer
  double firm_profit = 0;                     // episode profit per firm
  double welfare = 0;                         // episode welfare
  double consumption = 0;                     // units per consumer per step
  double hours = 0;                           // hours per consumer per step
};

// Mean outcomes over `episodes` stochastic episodes. The streams depend only
// on `seed`, so two policies evaluated with the same seed face common
// random numbers.
inline Evaluation evaluate(const RunConfig& cfg, const Policies& policies,
                           const ScheduleSnapshot& schedule, int episodes, std::uint64_t seed,
                           std::optional<GovernmentAction> fixed_government = std::nullopt) {
  RolloutOptions ro;
  ro.replicas = episodes;
  ro.workers = cfg.training.workers;
  ro.seed = derive_seed(seed, {kEvalTag});
  ro.stream = 0;
  ro.fixed_government = fixed_government;
  const auto batch = collect_rollouts(cfg.economy, cfg.training, policies, schedule, ro);
  UpdateMetrics m;
  summarize(batch, cfg.economy, m);
  Evaluation e;
  e.episodes = episodes;
  e.consumer_utility = m.consumer_reward;
  e.firm_profit = m.firm_reward;
  e.welfare = m.government_reward;
  e.consumption = m.consumption;
  e.hours = m.hours;
  for (AgentType type : kAllAgentTypes) {
    const auto k = static_cast<int>(type);
    double total = 0;
    for (const auto& st : batch.stats) {
      total += type == AgentType::kGovernment && fixed_government
                   ? st.welfare / cfg.training.government_reward_scale
                   : st.scaled_return[k];
    }
    e.reward[k] = total / (episodes * static_cast<double>(agents_of(cfg.economy, type)));
  }
  return e;
}

inline ScheduleSnapshot terminal_schedule(const RunConfig& cfg, TrainingGates gates) {
  return ScheduleSnapshot::terminal(Curriculum(cfg.curriculum, cfg.economy), cfg.economy, gates);
}

// Trains the types whose gate is open in `schedule` for `updates` updates
// with the schedule held fixed. Other networks are not touched.
inline void train_frozen(const RunConfig& cfg, Policies& policies, const ScheduleSnapshot& schedule,
                         long updates, std::uint64_t seed,
                         std::optional<GovernmentAction> fixed_government = std::nullopt) {
  for (long u = 0; u < updates; ++u) {
    RolloutOptions ro;
    ro.replicas = cfg.training.batch_size;
    ro.workers = cfg.training.workers;
    ro.seed = seed;
    ro.stream = static_cast<std::uint64_t>(u);
    ro.fixed_government = fixed_government;
    const auto batch = collect_rollouts(cfg.economy, cfg.training, policies, schedule, ro);
    for (AgentType type : kAllAgentTypes) {
      if (!schedule.gates.open(type)) continue;
      const auto k = static_cast<int>(type);
      update_type(policies.net[k], policies.opt[k], batch[type], batch.replicas, batch.horizon,
                  cfg.economy.discount(type), cfg.training, type, schedule.entropy_coeff[k],
                  cfg.training.workers);
    }
  }
}

inline TrainingGates only(AgentType type) {
  return {type == AgentType::kConsumer, type == AgentType::kFirm,
          type == AgentType::kGovernment};
}

// Reward gained by `type` between two checkpoints of the same run, measured
// under the terminal schedule.
inline double training_gain(const TrainRunState& initial, const TrainRunState& final_run,
                            AgentType type, int episodes, std::uint64_t eval_seed) {
  const auto s = terminal_schedule(final_run.config, {true, true, true});
  const auto k = static_cast<int>(type);
  return evaluate(final_run.config, final_run.policies, s, episodes, eval_seed).reward[k] -
         evaluate(initial.config, initial.policies, s, episodes, eval_seed).reward[k];
}

struct BestResponseReport {
  AgentType type = AgentType::kConsumer;
  long checkpoint_update = 0;
  long updates = 0;
  std::uint64_t seed = 0;
  int episodes = 0;
  double before = 0;         // scaled episode return per agent
  double after = 0;
  double improvement = 0;    // after - before
  double training_gain = 0;  // reward gained during the main run
  double fractional = 0;     // improvement / |training_gain|
  bool regressed = false;    // after < before

  nlohmann::json to_json() const {
    return {{"type", agent_type_name(type)}, {"checkpoint_update", checkpoint_update},
            {"updates", updates},           {"seed", seed},
            {"episodes", episodes},         {"before", before},
            {"after", after},               {"improvement", improvement},
            {"training_gain", training_gain}, {"fractional_improvement", fractional},
            {"regressed", regressed}};
  }
};

inline constexpr double kMinTrainingGain = 1e-9;

// Meta-game best response: continues training the shared policy of `type`
// with every other type frozen and the curriculum at its terminal values,
// then compares evaluation rewards before and after.
inline BestResponseReport best_response(const TrainRunState& run, AgentType type, long updates,
                                        std::uint64_t seed, double gain, int episodes) {
  if (updates < 0) throw ConfigError("best-response updates must be >= 0");
  if (episodes < 1) throw ConfigError("evaluation episodes must be >= 1");
  BestResponseReport rep;
  rep.type = type;
  rep.checkpoint_update = run.update;
  rep.updates = updates;
  rep.seed = seed;
  rep.episodes = episodes;
  rep.training_gain = gain;
  const auto k = static_cast<int>(type);
  const auto eval_schedule = terminal_schedule(run.config, {true, true, true});
  rep.before = evaluate(run.config, run.policies, eval_schedule, episodes, seed).reward[k];

  Policies policies = run.policies;
  train_frozen(run.config, policies, terminal_schedule(run.config, only(type)), updates,
               derive_seed(seed, {kBestResponseTag, static_cast<std::uint64_t>(type)}));
  rep.after = evaluate(run.config, policies, eval_schedule, episodes, seed).reward[k];
  rep.improvement = rep.after - rep.before;
  rep.fractional = rep.improvement / std::max(std::abs(gain), kMinTrainingGain);
  rep.regressed = rep.improvement < 0;
  return rep;
}

using TaxPair = std::pair<double, double>;  // (income, corporate)

inline std::vector<TaxPair> default_sweep_rates() {
  std::vector<TaxPair> rates;
  for (double tau : {0.2, 0.4, 0.6, 0.8}) {
    for (double sigma : {0.2, 0.4, 0.6, 0.8}) rates.emplace_back(tau, sigma);
  }
  return rates;
}

struct SweepRow {
  double income_tax = 0;
  double corporate_tax = 0;
  double welfare = 0;
  double consumer_utility = 0;
  double firm_profit = 0;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  std::size_t best = 0;   // row with the highest welfare
  double rl_welfare = 0;  // learned government, same evaluation protocol
  int episodes = 0;
  long retrain_updates = 0;

  // Relative welfare gain of the learned government over the best fixed pair.
  double rl_vs_best() const {
    const double b = rows.at(best).welfare;
    return (rl_welfare - b) / std::max(std::abs(b), kMinTrainingGain);
  }

  std::string csv() const {
    std::string s = "income_tax,corporate_tax,welfare,consumer_utility,firm_profit\n";
    char buf[160];
    for (const auto& r : rows) {
      std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g,%.9g\n", r.income_tax,
                    r.corporate_tax, r.welfare, r.consumer_utility, r.firm_profit);
      s += buf;
    }
    return s;
  }

  nlohmann::json to_json() const {
    nlohmann::json rs = nlohmann::json::array();
    for (const auto& r : rows) {
      rs.push_back({{"income_tax", r.income_tax}, {"corporate_tax", r.corporate_tax},
                    {"welfare", r.welfare}, {"consumer_utility", r.consumer_utility},
                    {"firm_profit", r.firm_profit}});
    }
    return {{"rows", rs},
            {"best", {{"income_tax", rows.at(best).income_tax},
                      {"corporate_tax", rows.at(best).corporate_tax},
                      {"welfare", rows.at(best).welfare}}},
            {"rl_welfare", rl_welfare},
            {"rl_vs_best", rl_vs_best()},
            {"episodes", episodes},
            {"retrain_updates", retrain_updates}};
  }
};

// Social welfare with the government replaced by constant rates. With
// `retrain_updates` > 0 consumers and firms first continue training against
// each fixed pair.
inline SweepReport fixed_tax_sweep(const TrainRunState& run, const std::vector<TaxPair>& rates,
                                   int episodes, std::uint64_t seed, long retrain_updates = 0) {
  const auto& grid = run.config.economy.grids.tax;
  if (rates.empty()) throw ConfigError("baseline sweep needs at least one rate pair");
  for (const auto& [tau, sigma] : rates) {
    if (grid_index(grid, tau) < 0 || grid_index(grid, sigma) < 0) {
      throw ConfigError("tax rate pair (" + config_io::format_double(tau) + ", " +
                        config_io::format_double(sigma) + ") is not on the tax grid");
    }
  }
  SweepReport rep;
  rep.episodes = episodes;
  rep.retrain_updates = retrain_updates;
  const auto eval_schedule = terminal_schedule(run.config, {true, true, true});
  for (std::size_t n = 0; n < rates.size(); ++n) {
    const GovernmentAction fixed{rates[n].first, rates[n].second};
    Policies policies = run.policies;
    if (retrain_updates > 0) {
      train_frozen(run.config, policies, terminal_schedule(run.config, {true, true, false}),
                   retrain_updates, derive_seed(seed, {kSweepTag, n}), fixed);
    }
    const auto e = evaluate(run.config, policies, eval_schedule, episodes, seed, fixed);
    rep.rows.push_back({fixed.income_tax, fixed.corporate_tax, e.welfare, e.consumer_utility,
                        e.firm_profit});
    if (e.welfare > rep.rows[rep.best].welfare) rep.best = n;
  }
  rep.rl_welfare = evaluate(run.config, run.policies, eval_schedule, episodes, seed).welfare;
  return rep;
}

}  // namespace rbcmarl
