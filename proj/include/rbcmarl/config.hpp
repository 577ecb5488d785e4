#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rbcmarl/errors.hpp"

namespace rbcmarl {

enum class AgentType { kConsumer = 0, kFirm = 1, kGovernment = 2 };
inline constexpr int kNumAgentTypes = 3;
inline constexpr AgentType kAllAgentTypes[] = {
    AgentType::kConsumer, AgentType::kFirm, AgentType::kGovernment};

inline const char* agent_type_name(AgentType type) {
  switch (type) {
    case AgentType::kConsumer: return "consumer";
    case AgentType::kFirm: return "firm";
    case AgentType::kGovernment: return "government";
  }
  return "?";
}

inline AgentType parse_agent_type(const std::string& s) {
  if (s == "c" || s == "consumer") return AgentType::kConsumer;
  if (s == "f" || s == "firm") return AgentType::kFirm;
  if (s == "g" || s == "government") return AgentType::kGovernment;
  throw ConfigError("unknown agent type '" + s + "' (expected c, f or g)");
}

enum class WelfareMode { kConsumerOnly, kTotal };
enum class Algorithm { kPpo, kReinforce };

// Discrete action values. Every list is strictly increasing.
struct ActionGrids {
  std::vector<double> consumption{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<double> hours{0, 260, 520, 780, 1040};
  std::vector<double> price{0, 500, 1000, 1500, 2000, 2500};
  std::vector<double> wage{0, 11, 22, 33, 44};
  std::vector<double> tax{0, 0.2, 0.4, 0.6, 0.8, 1.0};

  bool operator==(const ActionGrids&) const = default;
};

// Index of `value` in `grid`, or -1 when it is not a grid point.
inline int grid_index(const std::vector<double>& grid, double value) {
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (std::abs(grid[k] - value) <= 1e-9 * std::max(1.0, std::abs(value))) {
      return static_cast<int>(k);
    }
  }
  return -1;
}

struct EconomyConfig {
  int num_consumers = 100;
  int num_firms = 10;
  int episode_length = 40;

  double crra_eta = 0.1;
  double labor_disutility = 0.01;

  // Per-firm technology. A list of length num_firms is used verbatim, a
  // single value is broadcast. Otherwise `initial_capital` splits the firms
  // into contiguous groups (one per entry) and `production_alpha` /
  // `production_A` cycle within each group.
  std::vector<double> production_A{1.0};
  std::vector<double> production_alpha{0.2, 0.4, 0.6, 0.8};
  std::vector<double> initial_capital{5000, 10000};

  double initial_firm_budget = 2200000;
  double initial_consumer_budget = 1000;
  double initial_price = 1000;
  double initial_wage = 0;
  double initial_inventory = 0;
  double invest_fraction = 0.10;

  bool export_enabled = true;
  double export_min_price = 500;
  double export_quota = 100;

  WelfareMode welfare_mode = WelfareMode::kTotal;
  double firm_welfare_weight = 0.0025;

  double consumer_discount = 0.99;
  double firm_discount = 0.99;
  double government_discount = 0.99;

  // Added to a firm's scaled reward at the final step when its budget is
  // negative.
  double no_ponzi_penalty = -1.0;

  // When total tax revenue would be negative (corporate rebates on losses
  // exceed collections), rebates are reduced pro rata so revenue is zero.
  bool tax_revenue_floor = true;

  // Pareto skill draw. Unused unless `pareto_skill` is set, in which case
  // consumer j earns wage * skill_j per hour and supplies skill_j effective
  // hours, with skill_j the Pareto quantile at (j + 0.5) / num_consumers.
  double pareto_scale = 4.0;
  bool pareto_skill = false;

  ActionGrids grids;

  bool operator==(const EconomyConfig&) const = default;

  int capital_group(int firm) const {
    const int groups = static_cast<int>(initial_capital.size());
    if (groups == num_firms || groups == 1) return groups == 1 ? 0 : firm;
    return static_cast<int>(static_cast<long long>(firm) * groups / num_firms);
  }

  int group_start(int group) const {
    const int groups = static_cast<int>(initial_capital.size());
    int first = 0;
    while (first < num_firms &&
           static_cast<long long>(first) * groups / num_firms < group) {
      ++first;
    }
    return first;
  }

  double per_firm(const std::vector<double>& values, int firm) const {
    const int n = static_cast<int>(values.size());
    if (n == num_firms) return values[firm];
    if (n == 1) return values[0];
    const int offset = firm - group_start(capital_group(firm));
    return values[offset % n];
  }

  double firm_A(int firm) const { return per_firm(production_A, firm); }
  double firm_alpha(int firm) const { return per_firm(production_alpha, firm); }
  double firm_initial_capital(int firm) const {
    const int n = static_cast<int>(initial_capital.size());
    if (n == num_firms) return initial_capital[firm];
    return initial_capital[capital_group(firm)];
  }

  double consumer_skill(int consumer) const {
    if (!pareto_skill) return 1.0;
    const double q = (consumer + 0.5) / num_consumers;
    return std::pow(1.0 - q, -1.0 / pareto_scale);
  }

  double discount(AgentType type) const {
    switch (type) {
      case AgentType::kConsumer: return consumer_discount;
      case AgentType::kFirm: return firm_discount;
      case AgentType::kGovernment: return government_discount;
    }
    return 1.0;
  }
};

struct CurriculumConfig {
  bool enabled = true;
  long t_start_firm = 5000;
  long t_start_government = 10000;
  long firm_anneal_span = 2500;
  long government_anneal_span = 2500;
  long theta_anneal_span = 5000;
  double entropy_initial = 0.5;
  double entropy_min_coeff = 0.1;
  double entropy_decay_rate = 10000;
  // alpha = entropy_initial * max(exp(-t/decay), min) when set, otherwise
  // max(exp(-t/decay), min).
  bool entropy_scale_by_initial = true;
  // Wage firms are held at before their action range opens. Prices are held
  // at the economy's initial price.
  double pinned_wage = 22;

  bool operator==(const CurriculumConfig&) const = default;
};

struct TrainingConfig {
  Algorithm algorithm = Algorithm::kPpo;
  double learning_rate = 0.001;
  double government_learning_rate = 0.0005;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int batch_size = 128;  // parallel replicas, one full episode each
  double max_grad_norm = 2.0;
  double ppo_clip = 0.2;
  int ppo_epochs = 2;
  double value_loss_coef = 0.5;
  double consumer_reward_scale = 5;
  double firm_reward_scale = 30000;
  double government_reward_scale = 1000;
  int hidden_width = 128;
  int hidden_layers = 3;
  long num_updates = 20000;
  long checkpoint_interval = 1000;
  int workers = 1;
  int eval_episodes = 32;

  bool operator==(const TrainingConfig&) const = default;

  double reward_scale(AgentType type) const {
    switch (type) {
      case AgentType::kConsumer: return consumer_reward_scale;
      case AgentType::kFirm: return firm_reward_scale;
      case AgentType::kGovernment: return government_reward_scale;
    }
    return 1.0;
  }
  double lr(AgentType type) const {
    return type == AgentType::kGovernment ? government_learning_rate
                                          : learning_rate;
  }
};

struct RunConfig {
  EconomyConfig economy;
  CurriculumConfig curriculum;
  TrainingConfig training;

  bool operator==(const RunConfig&) const = default;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("invalid configuration: " + what);
}

inline void validate_grid(const std::vector<double>& grid,
                          const std::string& name, bool uniform) {
  require(!grid.empty(), name + " grid must not be empty");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    require(std::isfinite(grid[k]), name + " grid values must be finite");
    require(grid[k] >= 0, name + " grid values must be >= 0");
    if (k > 0) {
      require(grid[k] > grid[k - 1],
              name + " grid must be strictly increasing (step > 0)");
    }
  }
  if (uniform && grid.size() > 2) {
    const double step = grid[1] - grid[0];
    for (std::size_t k = 2; k < grid.size(); ++k) {
      require(std::abs((grid[k] - grid[k - 1]) - step) <= 1e-9 * (1 + step),
              name + " grid must have a uniform step");
    }
  }
}

}  // namespace detail

inline void validate(const EconomyConfig& c) {
  using detail::require;
  require(c.num_consumers >= 1, "num_consumers >= 1");
  require(c.num_firms >= 1, "num_firms >= 1");
  require(c.episode_length >= 1, "episode_length >= 1");
  require(c.crra_eta >= 0 && std::abs(c.crra_eta - 1.0) > 1e-12,
          "crra_eta >= 0 and != 1");
  require(c.labor_disutility >= 0, "labor_disutility >= 0");
  require(c.invest_fraction >= 0 && c.invest_fraction <= 1,
          "invest_fraction in [0, 1]");
  for (double g : {c.consumer_discount, c.firm_discount, c.government_discount}) {
    require(g > 0 && g <= 1, "discounts in (0, 1]");
  }
  const auto per_firm_ok = [&](const std::vector<double>& v) {
    return !v.empty() && static_cast<int>(v.size()) <= c.num_firms;
  };
  require(per_firm_ok(c.production_A), "production_A needs 1..num_firms values");
  require(per_firm_ok(c.production_alpha),
          "production_alpha needs 1..num_firms values");
  require(per_firm_ok(c.initial_capital),
          "initial_capital needs 1..num_firms values");
  for (double a : c.production_alpha) {
    require(a >= 0 && a <= 1, "production_alpha in [0, 1]");
  }
  for (double a : c.production_A) require(a > 0, "production_A > 0");
  for (double k : c.initial_capital) require(k > 0, "initial_capital > 0");
  require(c.initial_consumer_budget >= 0, "initial_consumer_budget >= 0");
  require(c.initial_price >= 0 && c.initial_wage >= 0,
          "initial price and wage >= 0");
  require(c.initial_inventory >= 0, "initial_inventory >= 0");
  require(c.export_min_price >= 0 && c.export_quota >= 0,
          "export_min_price and export_quota >= 0");
  require(c.firm_welfare_weight >= 0, "firm_welfare_weight >= 0");
  require(c.pareto_scale > 0, "pareto_scale > 0");

  detail::validate_grid(c.grids.consumption, "consumption", false);
  detail::validate_grid(c.grids.hours, "hours", false);
  detail::validate_grid(c.grids.price, "price", true);
  detail::validate_grid(c.grids.wage, "wage", true);
  detail::validate_grid(c.grids.tax, "tax", true);
  require(c.grids.consumption.front() == 0, "consumption grid starts at 0");
  require(c.grids.hours.front() == 0, "hours grid starts at 0");
  require(c.grids.tax.front() == 0 &&
              std::abs(c.grids.tax.back() - 1.0) <= 1e-9,
          "tax grid spans [0, 1] exactly");
  require(grid_index(c.grids.price, c.initial_price) >= 0,
          "initial_price must be a price grid point");
  require(grid_index(c.grids.wage, c.initial_wage) >= 0,
          "initial_wage must be a wage grid point");
}

inline void validate(const CurriculumConfig& c, const EconomyConfig& e) {
  using detail::require;
  require(c.firm_anneal_span >= 0 && c.government_anneal_span >= 0 &&
              c.theta_anneal_span >= 0,
          "anneal spans >= 0");
  require(c.t_start_firm >= 0, "t_start_firm >= 0");
  require(c.t_start_government > c.t_start_firm,
          "gates ordered consumer < firm < government");
  require(c.t_start_firm - c.firm_anneal_span >= 0,
          "firm anneal must end at its gate and start at t >= 0");
  require(c.t_start_government - c.government_anneal_span >= c.t_start_firm,
          "government anneal must start after the firm gate");
  require(c.entropy_initial >= 0, "entropy_initial >= 0");
  require(c.entropy_min_coeff >= 0 && c.entropy_min_coeff <= 1,
          "entropy_min_coeff in [0, 1]");
  require(c.entropy_decay_rate > 0, "entropy_decay_rate > 0");
  require(grid_index(e.grids.wage, c.pinned_wage) >= 0,
          "pinned_wage must be a wage grid point");
}

inline void validate(const TrainingConfig& c) {
  using detail::require;
  require(c.learning_rate > 0 && c.government_learning_rate > 0,
          "learning rates > 0");
  require(c.adam_beta1 >= 0 && c.adam_beta1 < 1 && c.adam_beta2 >= 0 &&
              c.adam_beta2 < 1 && c.adam_epsilon > 0,
          "adam parameters");
  require(c.batch_size >= 1, "batch_size >= 1");
  require(c.max_grad_norm > 0, "max_grad_norm > 0");
  require(c.ppo_clip > 0 && c.ppo_clip < 1, "ppo_clip in (0, 1)");
  require(c.ppo_epochs >= 1, "ppo_epochs >= 1");
  require(c.value_loss_coef >= 0, "value_loss_coef >= 0");
  require(c.consumer_reward_scale > 0 && c.firm_reward_scale > 0 &&
              c.government_reward_scale > 0,
          "reward scales > 0");
  require(c.hidden_width >= 1 && c.hidden_layers >= 1,
          "hidden_width and hidden_layers >= 1");
  require(c.num_updates >= 0, "num_updates >= 0");
  require(c.checkpoint_interval >= 1, "checkpoint_interval >= 1");
  require(c.workers >= 1, "workers >= 1");
  require(c.eval_episodes >= 1, "eval_episodes >= 1");
}

inline void validate(const RunConfig& c) {
  validate(c.economy);
  validate(c.curriculum, c.economy);
  validate(c.training);
}

}  // namespace rbcmarl
