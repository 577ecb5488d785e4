#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "rbcmarl/config.hpp"
#include "rbcmarl/curriculum.hpp"
#include "rbcmarl/economy.hpp"
#include "rbcmarl/mlp.hpp"
#include "rbcmarl/observation.hpp"
#include "rbcmarl/parallel.hpp"
#include "rbcmarl/rl.hpp"
#include "rbcmarl/rng.hpp"

namespace rbcmarl {

// One network and its optimizer per agent type, shared by every agent of
// that type.
struct Policies {
  MlpParams<float> net[kNumAgentTypes];
  AdamState<float> opt[kNumAgentTypes];

  MlpParams<float>& operator[](AgentType t) { return net[static_cast<int>(t)]; }
  const MlpParams<float>& operator[](AgentType t) const { return net[static_cast<int>(t)]; }
  AdamState<float>& optimizer(AgentType t) { return opt[static_cast<int>(t)]; }
};

inline int agents_of(const EconomyConfig& cfg, AgentType type) {
  switch (type) {
    case AgentType::kConsumer: return cfg.num_consumers;
    case AgentType::kFirm: return cfg.num_firms;
    case AgentType::kGovernment: return 1;
  }
  return 0;
}

// Rows for one agent type. Row index is (replica * T + t) * agents + agent.
struct TypeBatch {
  int width = 0;
  int heads = 0;
  int agents = 0;
  std::vector<float> obs;      // width x rows, column-major
  std::vector<int> actions;    // rows x heads
  std::vector<double> logp;    // joint log-prob at sampling time
  std::vector<double> value;   // value prediction at sampling time
  std::vector<double> reward;  // scaled
  HeadMasks masks;

  long rows() const { return static_cast<long>(logp.size()); }
  bool operator==(const TypeBatch&) const = default;
};

// Per-replica episode totals in unscaled units.
struct ReplicaStats {
  double consumer_reward = 0;    // sum over t and consumers of utility
  double firm_reward = 0;        // sum over t and firms of profit
  double welfare = 0;            // sum over t of social welfare
  double scaled_return[kNumAgentTypes] = {0, 0, 0};  // sum over t and agents
  double price = 0;              // sum over t and firms
  double wage = 0;
  double income_tax = 0;         // sum over t
  double corporate_tax = 0;
  double consumption = 0;        // units, sum over t, consumers and goods
  double hours = 0;              // sum over t and consumers
  double exports = 0;
  int ponzi_violations = 0;

  bool operator==(const ReplicaStats&) const = default;
};

// Per-timestep trace of one episode.
struct EpisodeRecord {
  int num_consumers = 0;
  int num_firms = 0;
  std::vector<double> income_tax, corporate_tax, tax_revenue, welfare;
  std::vector<std::vector<double>> price, wage, inventory, capital, firm_budget,
      production, exports, profit;
  std::vector<std::vector<double>> consumer_budget, hours, utility;
  std::vector<std::vector<int>> work_firm;
  std::vector<std::vector<std::vector<double>>> consumption;  // [t][j][i]

  int length() const { return static_cast<int>(price.size()); }
  bool operator==(const EpisodeRecord&) const = default;
};

struct RolloutBatch {
  int replicas = 0;
  int horizon = 0;
  TypeBatch type[kNumAgentTypes];
  std::vector<ReplicaStats> stats;
  std::optional<EpisodeRecord> record;  // replica 0, when requested

  TypeBatch& operator[](AgentType t) { return type[static_cast<int>(t)]; }
  const TypeBatch& operator[](AgentType t) const { return type[static_cast<int>(t)]; }
};

struct RolloutOptions {
  int replicas = 1;
  int workers = 1;
  std::uint64_t seed = 0;            // master seed
  std::uint64_t stream = 0;          // update index or evaluation tag
  std::optional<GovernmentAction> fixed_government;
  bool record_first = false;
};

inline constexpr std::uint64_t kRolloutTag = 0x726f6c6c;

inline ConsumerAction consumer_action(const EconomyConfig& cfg, std::span<const int> idx) {
  ConsumerAction a;
  const auto nf = static_cast<std::size_t>(cfg.num_firms);
  a.consumption.resize(nf);
  for (std::size_t i = 0; i < nf; ++i) {
    a.consumption[i] = cfg.grids.consumption[static_cast<std::size_t>(idx[i])];
  }
  a.work_firm = idx[nf];
  a.hours = cfg.grids.hours[static_cast<std::size_t>(idx[nf + 1])];
  return a;
}

inline FirmAction firm_action(const EconomyConfig& cfg, std::span<const int> idx) {
  return {cfg.grids.price[static_cast<std::size_t>(idx[0])],
          cfg.grids.wage[static_cast<std::size_t>(idx[1])]};
}

inline GovernmentAction government_action(const EconomyConfig& cfg, std::span<const int> idx) {
  return {cfg.grids.tax[static_cast<std::size_t>(idx[0])],
          cfg.grids.tax[static_cast<std::size_t>(idx[1])]};
}

namespace detail {

inline void record_step(EpisodeRecord& rec, const WorldState& before,
                        const WorldState& after, const JointAction& a,
                        const StepOutcome& o) {
  rec.income_tax.push_back(before.income_tax);
  rec.corporate_tax.push_back(before.corporate_tax);
  rec.tax_revenue.push_back(o.tax_revenue);
  rec.welfare.push_back(o.welfare);
  rec.price.push_back(before.price);
  rec.wage.push_back(before.wage);
  rec.inventory.push_back(after.inventory);
  rec.capital.push_back(after.capital);
  rec.firm_budget.push_back(after.firm_budget);
  rec.production.push_back(o.production);
  rec.exports.push_back(o.export_sold);
  rec.profit.push_back(o.profit);
  rec.consumer_budget.push_back(after.consumer_budget);
  std::vector<double> hours;
  std::vector<int> firm;
  for (const auto& c : a.consumers) {
    hours.push_back(c.hours);
    firm.push_back(c.hours > 0 ? c.work_firm : -1);
  }
  rec.hours.push_back(hours);
  rec.work_firm.push_back(firm);
  rec.utility.push_back(o.utility);
  rec.consumption.push_back(o.consumption);
}

}  // namespace detail

// Simulates one full episode per replica with actions sampled from the
// current policies under the schedule's masks and labor disutility.
// Parameters are read-only; each replica owns its RNG stream derived from
// (seed, stream, replica), so the batch does not depend on `workers`.
inline RolloutBatch collect_rollouts(const EconomyConfig& cfg, const TrainingConfig& tc,
                                     const Policies& policies,
                                     const ScheduleSnapshot& schedule,
                                     const RolloutOptions& opts) {
  const ObsLayout layout = make_layout(cfg);
  const int T = cfg.episode_length;
  const int R = opts.replicas;
  RolloutBatch batch;
  batch.replicas = R;
  batch.horizon = T;
  batch.stats.resize(static_cast<std::size_t>(R));
  const bool fixed_gov = opts.fixed_government.has_value();
  for (AgentType type : kAllAgentTypes) {
    TypeBatch& tb = batch[type];
    tb.width = layout.width(type);
    tb.heads = static_cast<int>(head_sizes(cfg, type).size());
    tb.agents = agents_of(cfg, type);
    tb.masks = schedule.masks[static_cast<int>(type)];
    if (type == AgentType::kGovernment && fixed_gov) continue;
    const auto rows = static_cast<std::size_t>(R) * static_cast<std::size_t>(T) *
                      static_cast<std::size_t>(tb.agents);
    tb.obs.assign(rows * static_cast<std::size_t>(tb.width), 0.0f);
    tb.actions.assign(rows * static_cast<std::size_t>(tb.heads), 0);
    tb.logp.assign(rows, 0.0);
    tb.value.assign(rows, 0.0);
    tb.reward.assign(rows, 0.0);
  }
  if (opts.record_first && R > 0) {
    batch.record.emplace();
    batch.record->num_consumers = cfg.num_consumers;
    batch.record->num_firms = cfg.num_firms;
  }

  parallel_for(R, opts.workers, [&](int r) {
    Rng rng(derive_seed(opts.seed, {kRolloutTag, opts.stream, static_cast<std::uint64_t>(r)}));
    WorldState state = initial_state(cfg);
    ReplicaStats& st = batch.stats[static_cast<std::size_t>(r)];
    JointAction joint;
    joint.consumers.resize(static_cast<std::size_t>(cfg.num_consumers));
    joint.firms.resize(static_cast<std::size_t>(cfg.num_firms));
    for (int t = 0; t < T; ++t) {
      const long base_step = static_cast<long>(r) * T + t;
      // Sample every type from the same pre-step state.
      for (AgentType type : kAllAgentTypes) {
        TypeBatch& tb = batch[type];
        if (type == AgentType::kGovernment && fixed_gov) {
          joint.government = *opts.fixed_government;
          continue;
        }
        const long row0 = base_step * tb.agents;
        float* block = tb.obs.data() + row0 * tb.width;
        for (int a = 0; a < tb.agents; ++a) {
          std::span<float> col(block + static_cast<long>(a) * tb.width,
                               static_cast<std::size_t>(tb.width));
          switch (type) {
            case AgentType::kConsumer: consumer_obs(layout, state, a, schedule.theta, col); break;
            case AgentType::kFirm: firm_obs(layout, cfg, state, a, col); break;
            case AgentType::kGovernment: government_obs(layout, state, col); break;
          }
        }
        Eigen::Map<const Eigen::MatrixXf> x(block, tb.width, tb.agents);
        const auto cache = forward(policies[type], x, tb.masks);
        for (int a = 0; a < tb.agents; ++a) {
          const auto s = sample(cache, a, rng);
          const long row = row0 + a;
          std::copy(s.indices.begin(), s.indices.end(),
                    tb.actions.begin() + row * tb.heads);
          tb.logp[static_cast<std::size_t>(row)] = s.log_prob;
          tb.value[static_cast<std::size_t>(row)] = static_cast<double>(cache.value(0, a));
          const auto ua = static_cast<std::size_t>(a);
          switch (type) {
            case AgentType::kConsumer: joint.consumers[ua] = consumer_action(cfg, s.indices); break;
            case AgentType::kFirm: joint.firms[ua] = firm_action(cfg, s.indices); break;
            case AgentType::kGovernment: joint.government = government_action(cfg, s.indices); break;
          }
        }
      }

      const bool recording = batch.record.has_value() && r == 0;
      WorldState before;
      if (recording) before = state;
      st.price += std::accumulate(state.price.begin(), state.price.end(), 0.0);
      st.wage += std::accumulate(state.wage.begin(), state.wage.end(), 0.0);
      st.income_tax += state.income_tax;
      st.corporate_tax += state.corporate_tax;
      const StepOutcome out = step(cfg, state, joint, schedule.theta);
      if (recording) detail::record_step(*batch.record, before, state, joint, out);

      const auto put = [&](AgentType type, int a, double scaled) {
        TypeBatch& tb = batch[type];
        tb.reward[static_cast<std::size_t>(base_step * tb.agents + a)] = scaled;
        st.scaled_return[static_cast<int>(type)] += scaled;
      };
      for (int j = 0; j < cfg.num_consumers; ++j) {
        const double u = out.utility[static_cast<std::size_t>(j)];
        st.consumer_reward += u;
        put(AgentType::kConsumer, j, u / tc.consumer_reward_scale);
        st.hours += joint.consumers[static_cast<std::size_t>(j)].hours;
        for (double c : out.consumption[static_cast<std::size_t>(j)]) st.consumption += c;
      }
      for (int i = 0; i < cfg.num_firms; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        st.firm_reward += out.profit[ui];
        st.exports += out.export_sold[ui];
        st.ponzi_violations += out.ponzi_penalty[ui] != 0;
        put(AgentType::kFirm, i, out.profit[ui] / tc.firm_reward_scale + out.ponzi_penalty[ui]);
      }
      st.welfare += out.welfare;
      if (!fixed_gov) {
        put(AgentType::kGovernment, 0, out.welfare / tc.government_reward_scale);
      }
    }
  });
  return batch;
}

}  // namespace rbcmarl
