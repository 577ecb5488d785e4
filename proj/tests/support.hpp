#pragma once

// Hand-rolled generators and fixtures shared by the unit and acceptance
// suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <unistd.h>
#include <string>
#include <vector>

#include "oracle/ledger_oracle.hpp"
#include "rbcmarl/config.hpp"
#include "rbcmarl/economy.hpp"
#include "rbcmarl/rng.hpp"

namespace testing_support {

using namespace rbcmarl;

inline int uniform_int(Rng& rng, int lo, int hi) {  // inclusive
  return lo + static_cast<int>(rng.uniform() * (hi - lo + 1));
}

inline double pick(Rng& rng, const std::vector<double>& v) {
  return v[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(v.size()) - 1))];
}

inline bool coin(Rng& rng, double p = 0.5) { return rng.uniform() < p; }

inline EconomyConfig small_economy(int consumers = 3, int firms = 2) {
  EconomyConfig c;
  c.num_consumers = consumers;
  c.num_firms = firms;
  c.episode_length = 10;
  c.production_alpha.assign(static_cast<std::size_t>(firms), 0.0);
  for (int i = 0; i < firms; ++i) c.production_alpha[static_cast<std::size_t>(i)] = 0.2 * (1 + i % 4);
  c.initial_capital = {5000};
  return c;
}

inline JointAction random_action(Rng& rng, const EconomyConfig& c) {
  JointAction a;
  for (int j = 0; j < c.num_consumers; ++j) {
    ConsumerAction ca;
    for (int i = 0; i < c.num_firms; ++i) ca.consumption.push_back(pick(rng, c.grids.consumption));
    if (coin(rng, 0.8)) {
      ca.work_firm = uniform_int(rng, 0, c.num_firms - 1);
      ca.hours = pick(rng, c.grids.hours);
    }
    a.consumers.push_back(ca);
  }
  for (int i = 0; i < c.num_firms; ++i) {
    a.firms.push_back({pick(rng, c.grids.price), pick(rng, c.grids.wage)});
  }
  a.government = {pick(rng, c.grids.tax), pick(rng, c.grids.tax)};
  return a;
}

// Arbitrary mid-episode state: prices and wages need not be grid points,
// firm budgets may be negative.
inline WorldState random_state(Rng& rng, const EconomyConfig& c) {
  WorldState s = initial_state(c);
  s.t = uniform_int(rng, 0, c.episode_length - 1);
  for (int i = 0; i < c.num_firms; ++i) {
    const auto u = static_cast<std::size_t>(i);
    s.inventory[u] = coin(rng, 0.3) ? 0.0 : rng.uniform(0, 500);
    s.price[u] = coin(rng) ? pick(rng, c.grids.price) : rng.uniform(0, 3000);
    s.wage[u] = coin(rng) ? pick(rng, c.grids.wage) : rng.uniform(0, 50);
    s.capital[u] = rng.uniform(100, 50000);
    s.firm_budget[u] = rng.uniform(-1e6, 3e6);
    s.overdemanded[u] = coin(rng);
  }
  for (auto& b : s.consumer_budget) b = coin(rng, 0.2) ? 0.0 : rng.uniform(0, 20000);
  s.income_tax = pick(rng, c.grids.tax);
  s.corporate_tax = pick(rng, c.grids.tax);
  return s;
}

inline oracle::Economy to_oracle(const EconomyConfig& c) {
  oracle::Economy e;
  e.J = c.num_consumers;
  e.I = c.num_firms;
  for (int i = 0; i < c.num_firms; ++i) {
    e.A.push_back(c.firm_A(i));
    e.alpha.push_back(c.firm_alpha(i));
  }
  e.invest = c.invest_fraction;
  e.open = c.export_enabled;
  e.export_min_price = c.export_min_price;
  e.export_quota = c.export_quota;
  e.revenue_floor = c.tax_revenue_floor;
  return e;
}

inline oracle::State to_oracle(const WorldState& s) {
  return {s.inventory, s.price, s.wage, s.capital, s.firm_budget, s.consumer_budget,
          s.income_tax, s.corporate_tax};
}

inline oracle::Actions to_oracle(const JointAction& a) {
  oracle::Actions o;
  for (const auto& c : a.consumers) {
    o.chat.push_back(c.consumption);
    o.firm.push_back(c.work_firm);
    o.hours.push_back(c.hours);
  }
  return o;
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("rbcmarl_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing_support
