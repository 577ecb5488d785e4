#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "rbcmarl/config.hpp"
#include "rbcmarl/mlp.hpp"

namespace rbcmarl {

struct TrainingGates {
  bool consumer = true;
  bool firm = false;
  bool government = false;

  bool open(AgentType type) const {
    switch (type) {
      case AgentType::kConsumer: return consumer;
      case AgentType::kFirm: return firm;
      case AgentType::kGovernment: return government;
    }
    return false;
  }
  bool operator==(const TrainingGates&) const = default;
};

// Action-head layout per agent type.
//   consumer: one consumption head per good, employer head, hours head
//   firm: price head, wage head
//   government: income tax head, corporate tax head
inline std::vector<int> head_sizes(const EconomyConfig& cfg, AgentType type) {
  const auto& g = cfg.grids;
  switch (type) {
    case AgentType::kConsumer: {
      std::vector<int> sizes(static_cast<std::size_t>(cfg.num_firms),
                             static_cast<int>(g.consumption.size()));
      sizes.push_back(cfg.num_firms);
      sizes.push_back(static_cast<int>(g.hours.size()));
      return sizes;
    }
    case AgentType::kFirm:
      return {static_cast<int>(g.price.size()), static_cast<int>(g.wage.size())};
    case AgentType::kGovernment:
      return {static_cast<int>(g.tax.size()), static_cast<int>(g.tax.size())};
  }
  return {};
}

// Admits grid indices within `radius` of `pinned`.
inline HeadMask window_mask(int size, int pinned, int radius) {
  HeadMask m(static_cast<std::size_t>(size), 0);
  for (int k = std::max(0, pinned - radius); k <= std::min(size - 1, pinned + radius); ++k) {
    m[static_cast<std::size_t>(k)] = 1;
  }
  return m;
}

// Stepwise widening: the span is cut into K equal sub-intervals, K being
// the number of grid points on the longer side of the pinned value; one
// point per side is admitted after each completed sub-interval.
inline int widening_radius(int size, int pinned, long t, long start, long span) {
  const int k = std::max(pinned, size - 1 - pinned);
  if (t < start) return 0;
  if (span == 0) return k;
  return static_cast<int>(std::min<long>(k, (t - start) * k / span));
}

inline int mask_cardinality(const HeadMask& m) {
  if (m.empty()) return -1;
  int n = 0;
  for (auto x : m) n += x != 0;
  return n;
}

// Training-step-indexed schedules. Pure function of the configuration.
class Curriculum {
 public:
  Curriculum(const CurriculumConfig& cc, const EconomyConfig& ec)
      : cc_(cc), ec_(ec) {}

  const CurriculumConfig& config() const { return cc_; }

  TrainingGates gates(long t) const {
    if (!cc_.enabled) return {true, true, true};
    return {true, t > cc_.t_start_firm, t > cc_.t_start_government};
  }

  long training_start(AgentType type) const {
    if (!cc_.enabled) return 0;
    switch (type) {
      case AgentType::kConsumer: return 0;
      case AgentType::kFirm: return cc_.t_start_firm;
      case AgentType::kGovernment: return cc_.t_start_government;
    }
    return 0;
  }

  double entropy_coeff(AgentType type, long t) const {
    const double rel = static_cast<double>(std::max(0L, t - training_start(type)));
    const double w = std::max(std::exp(-rel / cc_.entropy_decay_rate), cc_.entropy_min_coeff);
    return cc_.entropy_scale_by_initial ? cc_.entropy_initial * w : w;
  }

  double terminal_entropy_coeff() const {
    return cc_.entropy_scale_by_initial ? cc_.entropy_initial * cc_.entropy_min_coeff
                                        : cc_.entropy_min_coeff;
  }

  double theta(long t) const {
    if (!cc_.enabled || cc_.theta_anneal_span == 0 || t >= cc_.theta_anneal_span) {
      return ec_.labor_disutility;
    }
    if (t <= 0) return 0.0;
    return ec_.labor_disutility * static_cast<double>(t) /
           static_cast<double>(cc_.theta_anneal_span);
  }

  HeadMasks masks(AgentType type, long t) const {
    const auto sizes = head_sizes(ec_, type);
    HeadMasks full(sizes.size());
    if (!cc_.enabled || type == AgentType::kConsumer) return full;
    const auto& g = ec_.grids;
    if (type == AgentType::kFirm) {
      const long start = cc_.t_start_firm - cc_.firm_anneal_span;
      const int np = static_cast<int>(g.price.size());
      const int nw = static_cast<int>(g.wage.size());
      const int pp = grid_index(g.price, ec_.initial_price);
      const int pw = grid_index(g.wage, cc_.pinned_wage);
      return {window_mask(np, pp, widening_radius(np, pp, t, start, cc_.firm_anneal_span)),
              window_mask(nw, pw, widening_radius(nw, pw, t, start, cc_.firm_anneal_span))};
    }
    const long start = cc_.t_start_government - cc_.government_anneal_span;
    const int nt = static_cast<int>(g.tax.size());
    const int r = widening_radius(nt, 0, t, start, cc_.government_anneal_span);
    return {window_mask(nt, 0, r), window_mask(nt, 0, r)};
  }

 private:
  CurriculumConfig cc_;
  EconomyConfig ec_;
};

// Schedule values handed to the rollout and update phases.
struct ScheduleSnapshot {
  double theta = 0;
  TrainingGates gates;
  HeadMasks masks[kNumAgentTypes];
  double entropy_coeff[kNumAgentTypes] = {0, 0, 0};

  static ScheduleSnapshot at(const Curriculum& c, long t) {
    ScheduleSnapshot s;
    s.theta = c.theta(t);
    s.gates = c.gates(t);
    for (AgentType type : kAllAgentTypes) {
      const auto k = static_cast<std::size_t>(type);
      s.masks[k] = c.masks(type, t);
      s.entropy_coeff[k] = c.entropy_coeff(type, t);
    }
    return s;
  }

  // Full action ranges, final labor disutility, minimum entropy; used for
  // evaluation and best-response training.
  static ScheduleSnapshot terminal(const Curriculum& c, const EconomyConfig& e,
                                   TrainingGates gates) {
    ScheduleSnapshot s;
    s.theta = e.labor_disutility;
    s.gates = gates;
    for (AgentType type : kAllAgentTypes) {
      const auto k = static_cast<std::size_t>(type);
      s.masks[k] = HeadMasks(head_sizes(e, type).size());
      s.entropy_coeff[k] = c.terminal_entropy_coeff();
    }
    return s;
  }
};

}  // namespace rbcmarl
