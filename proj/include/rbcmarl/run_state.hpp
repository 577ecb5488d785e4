#pragma once

#include <cstdint>
#include <stdexcept>

#include "rbcmarl/config.hpp"
#include "rbcmarl/curriculum.hpp"
#include "rbcmarl/observation.hpp"
#include "rbcmarl/rl.hpp"
#include "rbcmarl/rollout.hpp"

namespace rbcmarl {

enum class Phase { kIdle, kRollout, kUpdate };

// Everything needed to continue a run: configuration, master seed, update
// counter, networks and optimizer moments. Replica RNG streams are derived
// from (seed, update, replica), so no generator state is stored.
struct TrainRunState {
  RunConfig config;
  std::uint64_t seed = 0;
  long update = 0;
  Policies policies;
  Phase phase = Phase::kIdle;
};

inline constexpr std::uint64_t kInitTag = 0x696e6974;

inline TrainRunState init_run(const RunConfig& config, std::uint64_t seed) {
  validate(config);
  TrainRunState run;
  run.config = config;
  run.seed = seed;
  const ObsLayout layout = make_layout(config.economy);
  const auto& tc = config.training;
  for (AgentType type : kAllAgentTypes) {
    Rng rng(derive_seed(seed, {kInitTag, static_cast<std::uint64_t>(type)}));
    auto& net = run.policies[type];
    net = make_mlp<float>(layout.width(type), tc.hidden_width, tc.hidden_layers,
                          head_sizes(config.economy, type), rng);
    run.policies.optimizer(type) =
        AdamState<float>::like(net, tc.adam_beta1, tc.adam_beta2, tc.adam_epsilon);
  }
  return run;
}

// Marks a phase for the lifetime of the guard; nested or overlapping phases
// are a logic error.
class PhaseGuard {
 public:
  PhaseGuard(TrainRunState& run, Phase phase) : run_(run) {
    if (run_.phase != Phase::kIdle) throw std::logic_error("rollout and update phases overlap");
    run_.phase = phase;
  }
  ~PhaseGuard() { run_.phase = Phase::kIdle; }
  PhaseGuard(const PhaseGuard&) = delete;
  PhaseGuard& operator=(const PhaseGuard&) = delete;

 private:
  TrainRunState& run_;
};

}  // namespace rbcmarl
