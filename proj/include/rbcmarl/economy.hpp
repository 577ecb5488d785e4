#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "rbcmarl/config.hpp"
#include "rbcmarl/errors.hpp"

namespace rbcmarl {

// Full state of one environment replica.
struct WorldState {
  int t = 0;
  std::vector<double> inventory;
  std::vector<double> price;
  std::vector<double> wage;
  double income_tax = 0;
  double corporate_tax = 0;
  std::vector<double> consumer_budget;
  std::vector<double> firm_budget;
  std::vector<double> capital;
  std::vector<bool> overdemanded;
  double last_tax_revenue = 0;

  bool operator==(const WorldState&) const = default;
};

struct ConsumerAction {
  std::vector<double> consumption;  // attempted units per good
  int work_firm = -1;               // -1: does not work
  double hours = 0;
};

struct FirmAction {
  double price = 0;  // effective next step
  double wage = 0;   // effective next step
};

struct GovernmentAction {
  double income_tax = 0;     // effective next step
  double corporate_tax = 0;  // effective next step
};

struct JointAction {
  std::vector<ConsumerAction> consumers;
  std::vector<FirmAction> firms;
  GovernmentAction government;
};

struct StepOutcome {
  std::vector<std::vector<double>> consumption;  // [consumer][good], realized
  std::vector<double> income;                    // per consumer, pre-tax
  std::vector<double> utility;                   // per consumer
  std::vector<double> labor;                     // per firm, effective hours
  std::vector<double> production;
  std::vector<double> consumed;                  // per firm, by consumers
  std::vector<double> export_sold;
  std::vector<double> export_revenue;
  std::vector<double> investment;
  std::vector<double> profit;
  std::vector<double> firm_tax;                  // tax actually paid (may be < 0)
  std::vector<double> ponzi_penalty;             // scaled-reward units
  double tax_revenue = 0;
  double welfare = 0;
};

inline WorldState initial_state(const EconomyConfig& cfg) {
  const auto n = static_cast<std::size_t>(cfg.num_firms);
  WorldState s;
  s.t = 0;
  s.inventory.assign(n, cfg.initial_inventory);
  s.price.assign(n, cfg.initial_price);
  s.wage.assign(n, cfg.initial_wage);
  s.consumer_budget.assign(static_cast<std::size_t>(cfg.num_consumers),
                           cfg.initial_consumer_budget);
  s.firm_budget.assign(n, cfg.initial_firm_budget);
  s.capital.resize(n);
  for (int i = 0; i < cfg.num_firms; ++i) {
    s.capital[static_cast<std::size_t>(i)] = cfg.firm_initial_capital(i);
  }
  s.overdemanded.assign(n, false);
  return s;
}

// Scales attempted consumption so that its cost fits the budget. A negative
// budget buys nothing.
inline std::vector<double> scale_to_budget(std::span<const double> attempted,
                                           std::span<const double> prices,
                                           double budget) {
  std::vector<double> out(attempted.begin(), attempted.end());
  double cost = 0;
  for (std::size_t i = 0; i < out.size(); ++i) cost += prices[i] * out[i];
  const double available = std::max(budget, 0.0);
  if (cost > available) {
    const double factor = available / cost;
    for (double& c : out) c *= factor;
  }
  return out;
}

// Proportional rationing factor min(1, supply / demand); no demand means no
// rationing.
inline double rationing_factor(double total_attempted, double supply) {
  if (total_attempted <= 0) return 1.0;
  return std::min(1.0, supply / total_attempted);
}

struct RationResult {
  std::vector<double> realized;
  bool overdemanded = false;
};

inline RationResult ration(double total_attempted, double supply,
                           std::span<const double> attempted) {
  const double factor = rationing_factor(total_attempted, supply);
  RationResult r;
  r.realized.reserve(attempted.size());
  for (double a : attempted) r.realized.push_back(factor * a);
  r.overdemanded = total_attempted > supply;
  return r;
}

// Cobb-Douglas output A k^(1-alpha) L^alpha, with 0^0 = 1.
inline double produce(double capital, double labor, double A, double alpha) {
  const auto power = [](double base, double exponent) {
    return exponent == 0 ? 1.0 : std::pow(base, exponent);
  };
  return A * power(capital, 1.0 - alpha) * power(labor, alpha);
}

inline double firm_invest(double firm_budget, double invest_fraction = 0.10) {
  return firm_budget > 0 ? invest_fraction * firm_budget : 0.0;
}

struct ExportResult {
  double sold = 0;
  double revenue = 0;
};

inline ExportResult export_step(double price, double remaining,
                                const EconomyConfig& cfg) {
  ExportResult r;
  if (!cfg.export_enabled || price <= cfg.export_min_price) return r;
  r.sold = std::min(cfg.export_quota, std::max(remaining, 0.0));
  r.revenue = price * r.sold;
  return r;
}

inline double crra(double c, double eta) {
  return (std::pow(c + 1.0, 1.0 - eta) - 1.0) / (1.0 - eta);
}

// Isoelastic utility summed over goods minus linear work disutility, charged
// once per consumer.
inline double consumer_utility(std::span<const double> consumption,
                               double hours, double theta, double eta) {
  double u = 0;
  for (double c : consumption) u += crra(c, eta);
  return u - 0.5 * theta * hours;
}

inline double social_welfare(std::span<const double> utilities,
                             std::span<const double> profits,
                             const EconomyConfig& cfg) {
  double swf = 0;
  for (double u : utilities) swf += u;
  if (cfg.welfare_mode == WelfareMode::kTotal) {
    double p = 0;
    for (double x : profits) p += x;
    swf += cfg.firm_welfare_weight * p;
  }
  return swf;
}

inline void validate_action(const EconomyConfig& cfg, const JointAction& a) {
  const auto& g = cfg.grids;
  const auto fail = [](const std::string& what) {
    throw ConfigError("invalid action: " + what);
  };
  if (static_cast<int>(a.consumers.size()) != cfg.num_consumers) {
    fail("expected one action per consumer");
  }
  if (static_cast<int>(a.firms.size()) != cfg.num_firms) {
    fail("expected one action per firm");
  }
  for (const auto& c : a.consumers) {
    if (static_cast<int>(c.consumption.size()) != cfg.num_firms) {
      fail("consumption vector needs one entry per good");
    }
    for (double x : c.consumption) {
      if (grid_index(g.consumption, x) < 0) fail("consumption off grid");
    }
    if (grid_index(g.hours, c.hours) < 0) fail("hours off grid");
    if (c.work_firm < -1 || c.work_firm >= cfg.num_firms) {
      fail("work_firm out of range");
    }
    if (c.work_firm == -1 && c.hours != 0) fail("hours without an employer");
  }
  for (const auto& f : a.firms) {
    if (grid_index(g.price, f.price) < 0) fail("price off grid");
    if (grid_index(g.wage, f.wage) < 0) fail("wage off grid");
  }
  if (grid_index(g.tax, a.government.income_tax) < 0 ||
      grid_index(g.tax, a.government.corporate_tax) < 0) {
    fail("tax rate off grid");
  }
}

// One quarter of the economy. The dynamics consume no randomness.
//
// Phases: labor and production, budget scaling and rationing, export,
// investment, profits / taxes / redistribution, installation of next-step
// prices, wages and taxes, clock and overdemand flags.
inline StepOutcome step(const EconomyConfig& cfg, WorldState& state,
                        const JointAction& action, double labor_disutility) {
  if (state.t >= cfg.episode_length) {
    throw RuntimeError("step called on a finished episode");
  }
  validate_action(cfg, action);
  const int nc = cfg.num_consumers;
  const int nf = cfg.num_firms;
  const auto uc = static_cast<std::size_t>(nc);
  const auto uf = static_cast<std::size_t>(nf);

  StepOutcome out;
  out.consumption.assign(uc, std::vector<double>(uf, 0.0));
  out.income.assign(uc, 0.0);
  out.utility.assign(uc, 0.0);
  out.labor.assign(uf, 0.0);
  out.production.assign(uf, 0.0);
  out.consumed.assign(uf, 0.0);
  out.export_sold.assign(uf, 0.0);
  out.export_revenue.assign(uf, 0.0);
  out.investment.assign(uf, 0.0);
  out.profit.assign(uf, 0.0);
  out.firm_tax.assign(uf, 0.0);
  out.ponzi_penalty.assign(uf, 0.0);

  // Labor and production.
  for (int j = 0; j < nc; ++j) {
    const auto& a = action.consumers[static_cast<std::size_t>(j)];
    if (a.work_firm < 0 || a.hours == 0) continue;
    const auto i = static_cast<std::size_t>(a.work_firm);
    const double skill = cfg.consumer_skill(j);
    out.labor[i] += skill * a.hours;
    out.income[static_cast<std::size_t>(j)] = state.wage[i] * skill * a.hours;
  }
  std::vector<double> supply(uf);
  for (int i = 0; i < nf; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    out.production[ui] = produce(state.capital[ui], out.labor[ui],
                                 cfg.firm_A(i), cfg.firm_alpha(i));
    supply[ui] = state.inventory[ui] + out.production[ui];
  }

  // Budget scaling, then proportional rationing against supply.
  std::vector<std::vector<double>> scaled(uc);
  std::vector<double> demand(uf, 0.0);
  for (std::size_t j = 0; j < uc; ++j) {
    scaled[j] = scale_to_budget(action.consumers[j].consumption, state.price,
                                state.consumer_budget[j]);
    for (std::size_t i = 0; i < uf; ++i) demand[i] += scaled[j][i];
  }
  std::vector<bool> overdemanded(uf);
  for (std::size_t i = 0; i < uf; ++i) {
    const double factor = rationing_factor(demand[i], supply[i]);
    overdemanded[i] = demand[i] > supply[i];
    for (std::size_t j = 0; j < uc; ++j) {
      out.consumption[j][i] = factor * scaled[j][i];
      out.consumed[i] += out.consumption[j][i];
    }
  }

  // Export market buys from what consumers left.
  for (std::size_t i = 0; i < uf; ++i) {
    const double remaining = std::max(supply[i] - out.consumed[i], 0.0);
    const auto ex = export_step(state.price[i], remaining, cfg);
    out.export_sold[i] = ex.sold;
    out.export_revenue[i] = ex.revenue;
  }

  // Investment from the current budget, then profits.
  double total_income = 0;
  for (double x : out.income) total_income += x;
  for (std::size_t i = 0; i < uf; ++i) {
    out.investment[i] = firm_invest(state.firm_budget[i], cfg.invest_fraction);
    out.profit[i] = state.price[i] * out.consumed[i] + out.export_revenue[i] -
                    state.wage[i] * out.labor[i] - out.investment[i];
  }

  // Taxes and redistribution. Corporate tax is symmetric (losses earn a
  // rebate) unless the revenue floor trims rebates.
  const double tau = state.income_tax;
  const double sigma = state.corporate_tax;
  double collected = tau * total_income;
  double rebates = 0;
  for (double p : out.profit) {
    if (p >= 0) {
      collected += sigma * p;
    } else {
      rebates += sigma * -p;
    }
  }
  double rebate_factor = 1.0;
  if (cfg.tax_revenue_floor && rebates > collected) {
    rebate_factor = collected / rebates;
  }
  double revenue = 0;
  for (std::size_t i = 0; i < uf; ++i) {
    const double p = out.profit[i];
    out.firm_tax[i] = p >= 0 ? sigma * p : rebate_factor * sigma * p;
    revenue += out.firm_tax[i];
  }
  revenue += tau * total_income;
  out.tax_revenue = revenue;
  const double transfer = revenue / nc;

  for (std::size_t j = 0; j < uc; ++j) {
    double cost = 0;
    for (std::size_t i = 0; i < uf; ++i) {
      cost += state.price[i] * out.consumption[j][i];
    }
    state.consumer_budget[j] +=
        (1.0 - tau) * out.income[j] + transfer - cost;
    out.utility[j] = consumer_utility(out.consumption[j],
                                      action.consumers[j].hours,
                                      labor_disutility, cfg.crra_eta);
  }
  for (std::size_t i = 0; i < uf; ++i) {
    state.firm_budget[i] += out.profit[i] - out.firm_tax[i];
    state.capital[i] += out.investment[i];
    state.inventory[i] = std::max(
        supply[i] - out.consumed[i] - out.export_sold[i], 0.0);
  }
  out.welfare = social_welfare(out.utility, out.profit, cfg);

  // Next-step prices, wages and taxes.
  for (std::size_t i = 0; i < uf; ++i) {
    state.price[i] = action.firms[i].price;
    state.wage[i] = action.firms[i].wage;
  }
  state.income_tax = action.government.income_tax;
  state.corporate_tax = action.government.corporate_tax;
  state.overdemanded = overdemanded;
  state.last_tax_revenue = revenue;
  state.t += 1;

  if (state.t == cfg.episode_length) {
    for (std::size_t i = 0; i < uf; ++i) {
      if (state.firm_budget[i] < 0) out.ponzi_penalty[i] = cfg.no_ponzi_penalty;
    }
  }
  return out;
}

inline StepOutcome step(const EconomyConfig& cfg, WorldState& state,
                        const JointAction& action) {
  return step(cfg, state, action, cfg.labor_disutility);
}

}  // namespace rbcmarl
