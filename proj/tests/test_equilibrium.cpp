#include <gtest/gtest.h>

#include <string>

#include "rbcmarl/config_io.hpp"
#include "rbcmarl/equilibrium.hpp"
#include "rbcmarl/io.hpp"
#include "support.hpp"

using namespace rbcmarl;

namespace {

RunConfig smoke() {
  auto c = load_config(std::string(RBCMARL_SOURCE_DIR) + "/configs/smoke.ini");
  c.training.batch_size = 8;
  return c;
}

TrainRunState trained(std::uint64_t seed, int updates) {
  auto run = init_run(smoke(), seed);
  const Curriculum c(run.config.curriculum, run.config.economy);
  for (int u = 0; u < updates; ++u) train_iteration(run, c);
  return run;
}

}  // namespace

TEST(BestResponse, ZeroUpdatesMeansZeroImprovement) {
  const auto run = trained(1, 3);
  for (AgentType type : kAllAgentTypes) {
    const auto rep = best_response(run, type, 0, 7, 1.0, 8);
    EXPECT_EQ(rep.improvement, 0);
    EXPECT_EQ(rep.fractional, 0);
    EXPECT_FALSE(rep.regressed);
  }
}

TEST(BestResponse, FractionIsImprovementOverTrainingGain) {
  const auto run = trained(2, 2);
  const auto rep = best_response(run, AgentType::kConsumer, 3, 8, -4.0, 8);
  EXPECT_DOUBLE_EQ(rep.fractional, rep.improvement / 4.0);
  const auto tiny = best_response(run, AgentType::kConsumer, 3, 8, 0.0, 8);
  EXPECT_DOUBLE_EQ(tiny.fractional, tiny.improvement / kMinTrainingGain);
  EXPECT_EQ(rep.to_json()["type"], "consumer");
}

TEST(BestResponse, OpponentsStayByteIdentical) {
  const auto run = trained(3, 2);
  Policies policies = run.policies;
  const auto before = policies;
  train_frozen(run.config, policies, terminal_schedule(run.config, only(AgentType::kFirm)), 3, 9);
  EXPECT_TRUE(policies[AgentType::kConsumer] == before[AgentType::kConsumer]);
  EXPECT_TRUE(policies[AgentType::kGovernment] == before[AgentType::kGovernment]);
  EXPECT_FALSE(policies[AgentType::kFirm] == before[AgentType::kFirm]);
  EXPECT_EQ(policies.opt[0].step, before.opt[0].step);
  EXPECT_EQ(policies.opt[2].step, before.opt[2].step);
}

TEST(BestResponse, RejectsBadArguments) {
  const auto run = trained(4, 0);
  EXPECT_THROW(best_response(run, AgentType::kFirm, -1, 0, 1, 4), ConfigError);
  EXPECT_THROW(best_response(run, AgentType::kFirm, 1, 0, 1, 0), ConfigError);
  EXPECT_THROW(parse_agent_type("landlord"), ConfigError);
  EXPECT_EQ(parse_agent_type("g"), AgentType::kGovernment);
}

TEST(Evaluate, CommonRandomNumbersMakeEqualPoliciesTie) {
  const auto run = trained(5, 1);
  const auto s = terminal_schedule(run.config, {true, true, true});
  const auto a = evaluate(run.config, run.policies, s, 6, 11);
  const auto b = evaluate(run.config, run.policies, s, 6, 11);
  for (int k = 0; k < kNumAgentTypes; ++k) EXPECT_EQ(a.reward[k], b.reward[k]);
  EXPECT_EQ(training_gain(run, run, AgentType::kFirm, 6, 11), 0);
}

TEST(FixedTaxSweep, ZeroTaxesRaiseNoRevenue) {
  const auto run = trained(6, 0);
  const auto s = terminal_schedule(run.config, {true, true, true});
  RolloutOptions o;
  o.replicas = 4;
  o.fixed_government = GovernmentAction{0, 0};
  o.record_first = true;
  const auto b = collect_rollouts(run.config.economy, run.config.training, run.policies, s, o);
  for (double r : b.record->tax_revenue) EXPECT_EQ(r, 0);
  const auto rep = fixed_tax_sweep(run, {{0.0, 0.0}}, 4, 1);
  ASSERT_EQ(rep.rows.size(), 1u);
}

TEST(FixedTaxSweep, DefaultRatesCoverTheQuarterGrid) {
  const auto rates = default_sweep_rates();
  ASSERT_EQ(rates.size(), 16u);
  EXPECT_EQ(rates.front(), (TaxPair{0.2, 0.2}));
  EXPECT_EQ(rates.back(), (TaxPair{0.8, 0.8}));
}

TEST(FixedTaxSweep, OneRowPerRatePairAndBestIsMax) {
  const auto run = trained(7, 2);
  const std::vector<TaxPair> rates{{0.2, 0.2}, {0.4, 0.8}, {0.8, 0.2}};
  const auto rep = fixed_tax_sweep(run, rates, 4, 2);
  ASSERT_EQ(rep.rows.size(), rates.size());
  for (std::size_t n = 0; n < rates.size(); ++n) {
    EXPECT_EQ(rep.rows[n].income_tax, rates[n].first);
    EXPECT_EQ(rep.rows[n].corporate_tax, rates[n].second);
    EXPECT_LE(rep.rows[n].welfare, rep.rows[rep.best].welfare);
  }
  EXPECT_EQ(rep.to_json()["rows"].size(), 3u);
  EXPECT_NE(rep.csv().find("income_tax,corporate_tax,welfare"), std::string::npos);
}

TEST(FixedTaxSweep, RetrainingLeavesTheCheckpointAlone) {
  const auto run = trained(8, 1);
  const auto copy = run.policies;
  const auto rep = fixed_tax_sweep(run, {{0.4, 0.4}}, 4, 3, 2);
  EXPECT_EQ(rep.retrain_updates, 2);
  for (int k = 0; k < kNumAgentTypes; ++k) EXPECT_TRUE(run.policies.net[k] == copy.net[k]);
}

TEST(FixedTaxSweep, OffGridRatesRejected) {
  const auto run = trained(9, 0);
  EXPECT_THROW(fixed_tax_sweep(run, {{0.3, 0.2}}, 2, 0), ConfigError);
  EXPECT_THROW(fixed_tax_sweep(run, {}, 2, 0), ConfigError);
}
