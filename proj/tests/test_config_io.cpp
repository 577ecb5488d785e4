#include <gtest/gtest.h>

#include <string>

#include "rbcmarl/config_io.hpp"
#include "rbcmarl/io.hpp"
#include "support.hpp"

using namespace rbcmarl;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(LoadConfig, EmptyTextGivesDefaults) {
  const auto c = parse_config("");
  EXPECT_EQ(c, RunConfig{});
  EXPECT_EQ(c.economy.labor_disutility, 0.01);
  EXPECT_EQ(c.economy.initial_firm_budget, 2.2e6);
  EXPECT_EQ(c.training.learning_rate, 0.001);
  EXPECT_EQ(c.training.government_learning_rate, 0.0005);
  EXPECT_EQ(c.training.batch_size, 128);
  EXPECT_EQ(c.training.max_grad_norm, 2.0);
  EXPECT_EQ(c.economy.num_consumers, 100);
  EXPECT_EQ(c.economy.num_firms, 10);
}

TEST(LoadConfig, TenFirmsInTwoCapitalGroups) {
  const auto c = parse_config(
      "[economy]\nnum_firms = 10\n[firm]\nproduction_alpha = 0.2, 0.4, 0.6, 0.8\n"
      "initial_capital = 5000, 10000\n");
  const double alpha[] = {0.2, 0.4, 0.6, 0.8, 0.2, 0.2, 0.4, 0.6, 0.8, 0.2};
  for (int i = 0; i < 10; ++i) {
    EXPECT_EQ(c.economy.firm_initial_capital(i), i < 5 ? 5000 : 10000) << i;
    EXPECT_EQ(c.economy.firm_alpha(i), alpha[i]) << i;
    EXPECT_EQ(c.economy.firm_A(i), 1.0);
  }
}

TEST(LoadConfig, PerFirmListsAreVerbatim) {
  const auto c = parse_config(
      "[economy]\nnum_firms = 3\n[firm]\nproduction_alpha = 0.1, 0.5, 0.9\ninitial_capital = 1, 2, 3\n");
  EXPECT_EQ(c.economy.firm_alpha(2), 0.9);
  EXPECT_EQ(c.economy.firm_initial_capital(1), 2);
}

TEST(LoadConfig, TaxGridStepMustBeUniformAndSpanUnit) {
  EXPECT_THROW(parse_config("[government]\ntax_grid = 0, 0.15, 0.3, 0.45, 0.6, 0.75, 0.9\n"), ConfigError);
  EXPECT_THROW(parse_config("[government]\ntax_grid = 0, 0.15, 0.5, 1\n"), ConfigError);
  EXPECT_NO_THROW(parse_config("[government]\ntax_grid = 0, 0.25, 0.5, 0.75, 1\n"));
}

TEST(LoadConfig, ErrorsNameTheLine) {
  EXPECT_NE(error_of("[economy]\nnum_consumer = 3\n").find("line 2"), std::string::npos);
  EXPECT_NE(error_of("[economy]\n\n# c\nnum_firms = x\n").find("line 4"), std::string::npos);
  EXPECT_NE(error_of("[nope]\n").find("unknown section"), std::string::npos);
  EXPECT_NE(error_of("[economy]\nnum_firms = 2\nnum_firms = 3\n").find("duplicate"), std::string::npos);
  EXPECT_NE(error_of("num_firms = 2\n").find("outside"), std::string::npos);
  EXPECT_NE(error_of("[economy]\nnum_firms 2\n").find("line 2"), std::string::npos);
  EXPECT_NE(error_of("[economy\n").find("malformed"), std::string::npos);
}

TEST(LoadConfig, ConstraintViolationsNameTheInvariant) {
  EXPECT_NE(error_of("[economy]\nnum_firms = 0\n").find("num_firms >= 1"), std::string::npos);
  EXPECT_NE(error_of("[consumer]\ncrra_eta = 1\n").find("crra_eta"), std::string::npos);
  EXPECT_NE(error_of("[firm]\ninitial_price = 1200\n").find("initial_price"), std::string::npos);
  EXPECT_NE(error_of("[firm]\nprice_grid = 0, 1000, 500\n").find("strictly increasing"), std::string::npos);
}

TEST(LoadConfig, MissingFileIsConfigError) {
  EXPECT_THROW(load_config("/nonexistent/rbcmarl.ini"), ConfigError);
}

TEST(LoadConfig, ShippedConfigsLoad) {
  for (const char* name : {"smoke.ini", "acceptance.ini", "paper.ini"}) {
    EXPECT_NO_THROW(load_config(std::string(RBCMARL_SOURCE_DIR) + "/configs/" + name)) << name;
  }
  EXPECT_EQ(load_config(std::string(RBCMARL_SOURCE_DIR) + "/configs/paper.ini"), RunConfig{});
}

TEST(ConfigRoundTrip, DefaultsAreAFixedPoint) {
  const RunConfig c;
  EXPECT_EQ(parse_config(serialize_config(c)), c);
  EXPECT_EQ(serialize_config(parse_config(serialize_config(c))), serialize_config(c));
}

TEST(ConfigRoundTrip, RandomConfigsAreFixedPoints) {
  using testing_support::coin;
  using testing_support::uniform_int;
  Rng rng(1);
  for (int n = 0; n < 200; ++n) {
    RunConfig c;
    c.economy.num_consumers = uniform_int(rng, 1, 200);
    c.economy.num_firms = uniform_int(rng, 1, 12);
    c.economy.episode_length = uniform_int(rng, 1, 60);
    c.economy.crra_eta = rng.uniform(0, 0.9);
    c.economy.labor_disutility = rng.uniform(0, 0.1);
    c.economy.production_alpha = {rng.uniform(0, 1)};
    c.economy.initial_capital = {rng.uniform(1, 1e5)};
    c.economy.initial_firm_budget = rng.uniform(0, 1e7);
    c.economy.export_enabled = coin(rng);
    c.economy.tax_revenue_floor = coin(rng);
    c.economy.welfare_mode = coin(rng) ? WelfareMode::kTotal : WelfareMode::kConsumerOnly;
    c.economy.firm_welfare_weight = rng.uniform(0, 1) / 3;
    c.curriculum.enabled = coin(rng);
    c.curriculum.entropy_decay_rate = rng.uniform(1, 1e5);
    c.curriculum.entropy_scale_by_initial = coin(rng);
    c.training.algorithm = coin(rng) ? Algorithm::kPpo : Algorithm::kReinforce;
    c.training.learning_rate = rng.uniform(1e-5, 1e-2);
    c.training.ppo_clip = coin(rng) ? 0.1 : 0.2;
    c.training.num_updates = uniform_int(rng, 0, 100000);
    validate(c);
    const auto text = serialize_config(c);
    const auto back = parse_config(text);
    EXPECT_EQ(back, c);
    EXPECT_EQ(serialize_config(back), text);
  }
}

TEST(ConfigFormat, ShortestRoundTripNumbers) {
  EXPECT_EQ(config_io::format_double(0.1), "0.1");
  EXPECT_EQ(config_io::format_double(2200000), "2200000");
  EXPECT_EQ(config_io::format_double(1e-8), "1e-08");
  const double awkward = 0.1 + 0.2;
  EXPECT_EQ(config_io::parse_double(config_io::format_double(awkward)), awkward);
}
