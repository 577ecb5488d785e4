#pragma once

#include <cmath>
#include <span>
#include <vector>

#include <json.hpp>

#include "rbcmarl/config.hpp"
#include "rbcmarl/economy.hpp"
#include "rbcmarl/errors.hpp"

namespace rbcmarl {

inline constexpr int kBudgetDigits = 7;
inline constexpr int kInventoryDigits = 6;
inline constexpr int kCapitalDigits = 7;

// Base-10 digits of round(value), least significant first, each divided by
// 9. Values that do not fit in `num_digits` saturate every digit at 1.
inline void encode_digits(double value, int num_digits, std::span<float> out) {
  if (!(value >= 0)) throw ConfigError("encode_digits: negative value");
  const double rounded = std::round(value);
  if (rounded >= std::pow(10.0, num_digits)) {
    for (int d = 0; d < num_digits; ++d) out[static_cast<std::size_t>(d)] = 1.0f;
    return;
  }
  auto v = static_cast<unsigned long long>(rounded);
  for (int d = 0; d < num_digits; ++d) {
    out[static_cast<std::size_t>(d)] = static_cast<float>(v % 10) / 9.0f;
    v /= 10;
  }
}

inline std::vector<float> encode_digits(double value, int num_digits) {
  std::vector<float> out(static_cast<std::size_t>(num_digits));
  encode_digits(value, num_digits, out);
  return out;
}

// Feature offsets and scale constants for every agent type. A pure function
// of the economy configuration.
struct ObsLayout {
  int num_firms = 0;
  double horizon = 1;
  double price_scale = 1;
  double wage_scale = 1;
  double tax_scale = 1;
  double theta_scale = 1;

  // Global block.
  int time = 0;
  int inventory = 0;
  int price = 0;
  int wage = 0;
  int overdemand = 0;
  int income_tax = 0;
  int corporate_tax = 0;
  int global_width = 0;

  // Consumer private block, relative to global_width.
  int consumer_budget = 0;
  int consumer_theta = 0;
  int consumer_width = 0;

  // Firm private block, relative to global_width.
  int firm_budget_sign = 0;
  int firm_budget = 0;
  int firm_capital = 0;
  int firm_identity = 0;
  int firm_alpha = 0;
  int firm_width = 0;

  int width(AgentType type) const {
    switch (type) {
      case AgentType::kConsumer: return consumer_width;
      case AgentType::kFirm: return firm_width;
      case AgentType::kGovernment: return global_width;
    }
    return 0;
  }

  bool operator==(const ObsLayout&) const = default;
};

inline ObsLayout make_layout(const EconomyConfig& cfg) {
  const auto positive = [](double x) { return x > 0 ? x : 1.0; };
  ObsLayout l;
  const int n = cfg.num_firms;
  l.num_firms = n;
  l.horizon = cfg.episode_length;
  l.price_scale = positive(cfg.grids.price.back());
  l.wage_scale = positive(cfg.grids.wage.back());
  l.tax_scale = positive(cfg.grids.tax.back());
  l.theta_scale = positive(cfg.labor_disutility);

  int at = 0;
  l.time = at;  at += 1;
  l.inventory = at;  at += n * kInventoryDigits;
  l.price = at;  at += n;
  l.wage = at;  at += n;
  l.overdemand = at;  at += n;
  l.income_tax = at;  at += 1;
  l.corporate_tax = at;  at += 1;
  l.global_width = at;

  l.consumer_budget = at;
  l.consumer_theta = at + kBudgetDigits;
  l.consumer_width = at + kBudgetDigits + 1;

  l.firm_budget_sign = at;
  l.firm_budget = at + 1;
  l.firm_capital = l.firm_budget + kBudgetDigits;
  l.firm_identity = l.firm_capital + kCapitalDigits;
  l.firm_alpha = l.firm_identity + n;
  l.firm_width = l.firm_alpha + 1;
  return l;
}

inline void global_obs(const ObsLayout& l, const WorldState& s,
                       std::span<float> out) {
  const auto at = [&](int k) -> float& { return out[static_cast<std::size_t>(k)]; };
  at(l.time) = static_cast<float>(s.t / l.horizon);
  for (int i = 0; i < l.num_firms; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    encode_digits(s.inventory[ui], kInventoryDigits,
                  out.subspan(static_cast<std::size_t>(l.inventory + i * kInventoryDigits),
                              kInventoryDigits));
    at(l.price + i) = static_cast<float>(s.price[ui] / l.price_scale);
    at(l.wage + i) = static_cast<float>(s.wage[ui] / l.wage_scale);
    at(l.overdemand + i) = s.overdemanded[ui] ? 1.0f : 0.0f;
  }
  at(l.income_tax) = static_cast<float>(s.income_tax / l.tax_scale);
  at(l.corporate_tax) = static_cast<float>(s.corporate_tax / l.tax_scale);
}

inline void consumer_obs(const ObsLayout& l, const WorldState& s, int j,
                         double theta, std::span<float> out) {
  if (j < 0 || j >= static_cast<int>(s.consumer_budget.size())) {
    throw ConfigError("consumer index out of range");
  }
  global_obs(l, s, out);
  encode_digits(std::max(s.consumer_budget[static_cast<std::size_t>(j)], 0.0),
                kBudgetDigits,
                out.subspan(static_cast<std::size_t>(l.consumer_budget), kBudgetDigits));
  out[static_cast<std::size_t>(l.consumer_theta)] =
      static_cast<float>(std::min(theta / l.theta_scale, 1.0));
}

inline void firm_obs(const ObsLayout& l, const EconomyConfig& cfg,
                     const WorldState& s, int i, std::span<float> out) {
  if (i < 0 || i >= l.num_firms) throw ConfigError("firm index out of range");
  global_obs(l, s, out);
  const double budget = s.firm_budget[static_cast<std::size_t>(i)];
  out[static_cast<std::size_t>(l.firm_budget_sign)] = budget < 0 ? -1.0f : 1.0f;
  encode_digits(std::abs(budget), kBudgetDigits,
                out.subspan(static_cast<std::size_t>(l.firm_budget), kBudgetDigits));
  encode_digits(s.capital[static_cast<std::size_t>(i)], kCapitalDigits,
                out.subspan(static_cast<std::size_t>(l.firm_capital), kCapitalDigits));
  for (int k = 0; k < l.num_firms; ++k) {
    out[static_cast<std::size_t>(l.firm_identity + k)] = k == i ? 1.0f : 0.0f;
  }
  out[static_cast<std::size_t>(l.firm_alpha)] = static_cast<float>(cfg.firm_alpha(i));
}

inline void government_obs(const ObsLayout& l, const WorldState& s,
                           std::span<float> out) {
  global_obs(l, s, out);
}

inline std::vector<float> global_obs(const ObsLayout& l, const WorldState& s) {
  std::vector<float> v(static_cast<std::size_t>(l.global_width));
  global_obs(l, s, v);
  return v;
}
inline std::vector<float> consumer_obs(const ObsLayout& l, const WorldState& s,
                                       int j, double theta) {
  std::vector<float> v(static_cast<std::size_t>(l.consumer_width));
  consumer_obs(l, s, j, theta, v);
  return v;
}
inline std::vector<float> firm_obs(const ObsLayout& l, const EconomyConfig& cfg,
                                   const WorldState& s, int i) {
  std::vector<float> v(static_cast<std::size_t>(l.firm_width));
  firm_obs(l, cfg, s, i, v);
  return v;
}
inline std::vector<float> government_obs(const ObsLayout& l, const WorldState& s) {
  return global_obs(l, s);
}

inline nlohmann::json layout_to_json(const ObsLayout& l) {
  using nlohmann::json;
  const auto block = [](int offset, int width) {
    return json{{"offset", offset}, {"width", width}};
  };
  json global = {
      {"time", block(l.time, 1)},
      {"inventory", block(l.inventory, l.num_firms * kInventoryDigits)},
      {"price", block(l.price, l.num_firms)},
      {"wage", block(l.wage, l.num_firms)},
      {"overdemand", block(l.overdemand, l.num_firms)},
      {"income_tax", block(l.income_tax, 1)},
      {"corporate_tax", block(l.corporate_tax, 1)},
  };
  return json{
      {"digits", {{"budget", kBudgetDigits},
                  {"inventory", kInventoryDigits},
                  {"capital", kCapitalDigits}}},
      {"scales", {{"time", l.horizon},
                  {"price", l.price_scale},
                  {"wage", l.wage_scale},
                  {"tax", l.tax_scale},
                  {"theta", l.theta_scale}}},
      {"global", {{"width", l.global_width}, {"features", global}}},
      {"consumer",
       {{"width", l.consumer_width},
        {"features", {{"budget", block(l.consumer_budget, kBudgetDigits)},
                      {"theta", block(l.consumer_theta, 1)}}}}},
      {"firm",
       {{"width", l.firm_width},
        {"features", {{"budget_sign", block(l.firm_budget_sign, 1)},
                      {"budget", block(l.firm_budget, kBudgetDigits)},
                      {"capital", block(l.firm_capital, kCapitalDigits)},
                      {"identity", block(l.firm_identity, l.num_firms)},
                      {"alpha", block(l.firm_alpha, 1)}}}}},
      {"government", {{"width", l.global_width}}},
  };
}

}  // namespace rbcmarl
