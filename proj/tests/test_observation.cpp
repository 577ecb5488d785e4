#include <gtest/gtest.h>

#include <algorithm>

#include <vector>

#include "rbcmarl/observation.hpp"
#include "support.hpp"

using namespace rbcmarl;
using testing_support::pick;
using testing_support::random_state;
using testing_support::small_economy;

TEST(EncodeDigits, LeastSignificantFirst) {
  EXPECT_EQ(encode_digits(305, 4), (std::vector<float>{5 / 9.0f, 0, 3 / 9.0f, 0}));
}

TEST(EncodeDigits, Zero) { EXPECT_EQ(encode_digits(0, 3), (std::vector<float>{0, 0, 0})); }

TEST(EncodeDigits, OverflowSaturates) {
  EXPECT_EQ(encode_digits(1e6, 4), (std::vector<float>{1, 1, 1, 1}));
  EXPECT_EQ(encode_digits(9999.4, 4), (std::vector<float>{1, 1, 1, 1}));
}

TEST(EncodeDigits, RoundsToNearest) {
  EXPECT_EQ(encode_digits(12.6, 2), (std::vector<float>{3 / 9.0f, 1 / 9.0f}));
}

TEST(EncodeDigits, RejectsNegative) { EXPECT_THROW(encode_digits(-1, 3), ConfigError); }

TEST(Observation, FreshStatePricesAreFourTenths) {
  const EconomyConfig c;
  const auto l = make_layout(c);
  const auto g = global_obs(l, initial_state(c));
  for (int i = 0; i < c.num_firms; ++i) EXPECT_FLOAT_EQ(g[static_cast<std::size_t>(l.price + i)], 0.4f);
}

TEST(Observation, ZeroStateIsZero) {
  EconomyConfig c = small_economy(2, 2);
  c.initial_price = 0;
  const auto g = global_obs(make_layout(c), initial_state(c));
  for (float x : g) EXPECT_EQ(x, 0);
}

TEST(Observation, GovernmentSeesExactlyTheGlobalState) {
  Rng rng(3);
  const EconomyConfig c = small_economy(3, 2);
  const auto l = make_layout(c);
  for (int n = 0; n < 50; ++n) {
    const auto s = random_state(rng, c);
    EXPECT_EQ(government_obs(l, s), global_obs(l, s));
  }
}

TEST(Observation, FirmIdentityIsOneHot) {
  const EconomyConfig c;
  const auto l = make_layout(c);
  const auto o = firm_obs(l, c, initial_state(c), 3);
  for (int k = 0; k < 10; ++k) {
    EXPECT_EQ(o[static_cast<std::size_t>(l.firm_identity + k)], k == 3 ? 1.0f : 0.0f);
  }
}

TEST(Observation, ConsumerWidthIsGlobalPlusBudgetDigitsPlusOne) {
  const EconomyConfig c;
  const auto l = make_layout(c);
  EXPECT_EQ(l.consumer_width, l.global_width + kBudgetDigits + 1);
  // 1 + 10*6 + 10 + 10 + 10 + 2
  EXPECT_EQ(l.global_width, 93);
  EXPECT_EQ(l.firm_width, 93 + 1 + kBudgetDigits + kCapitalDigits + 10 + 1);
}

TEST(Observation, PrivateBlocksFollowTheGlobalPrefix) {
  Rng rng(4);
  const EconomyConfig c = small_economy(3, 2);
  const auto l = make_layout(c);
  for (int n = 0; n < 50; ++n) {
    const auto s = random_state(rng, c);
    const auto g = global_obs(l, s);
    const auto co = consumer_obs(l, s, 1, c.labor_disutility);
    const auto fo = firm_obs(l, c, s, 1);
    ASSERT_EQ(static_cast<int>(co.size()), l.consumer_width);
    ASSERT_EQ(static_cast<int>(fo.size()), l.firm_width);
    EXPECT_TRUE(std::equal(g.begin(), g.end(), co.begin()));
    EXPECT_TRUE(std::equal(g.begin(), g.end(), fo.begin()));
    EXPECT_EQ(fo[static_cast<std::size_t>(l.firm_budget_sign)], s.firm_budget[1] < 0 ? -1.0f : 1.0f);
    const auto digits = encode_digits(std::abs(s.firm_budget[1]), kBudgetDigits);
    EXPECT_TRUE(std::equal(digits.begin(), digits.end(), fo.begin() + l.firm_budget));
    EXPECT_FLOAT_EQ(fo[static_cast<std::size_t>(l.firm_alpha)], static_cast<float>(c.firm_alpha(1)));
    EXPECT_FLOAT_EQ(co[static_cast<std::size_t>(l.consumer_theta)], 1.0f);
  }
}

TEST(Observation, LayoutOffsetsLocateEachFeature) {
  // Layout oracle: write state values, read them back through the offsets.
  Rng rng(5);
  const EconomyConfig c = small_economy(2, 3);
  const auto l = make_layout(c);
  for (int n = 0; n < 50; ++n) {
    const auto s = random_state(rng, c);
    const auto g = global_obs(l, s);
    EXPECT_FLOAT_EQ(g[static_cast<std::size_t>(l.time)], static_cast<float>(s.t / 10.0));
    for (int i = 0; i < 3; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      EXPECT_FLOAT_EQ(g[static_cast<std::size_t>(l.price + i)], static_cast<float>(s.price[ui] / 2500));
      EXPECT_FLOAT_EQ(g[static_cast<std::size_t>(l.wage + i)], static_cast<float>(s.wage[ui] / 44));
      EXPECT_EQ(g[static_cast<std::size_t>(l.overdemand + i)], s.overdemanded[ui] ? 1.0f : 0.0f);
      const auto digits = encode_digits(s.inventory[ui], kInventoryDigits);
      EXPECT_TRUE(std::equal(digits.begin(), digits.end(), g.begin() + l.inventory + i * kInventoryDigits));
    }
    EXPECT_FLOAT_EQ(g[static_cast<std::size_t>(l.income_tax)], static_cast<float>(s.income_tax));
    EXPECT_FLOAT_EQ(g[static_cast<std::size_t>(l.corporate_tax)], static_cast<float>(s.corporate_tax));
  }
}

TEST(Observation, IndexOutOfRangeThrows) {
  const EconomyConfig c = small_economy(3, 2);
  const auto l = make_layout(c);
  const auto s = initial_state(c);
  EXPECT_THROW(consumer_obs(l, s, 3, 0.01), ConfigError);
  EXPECT_THROW(consumer_obs(l, s, -1, 0.01), ConfigError);
  EXPECT_THROW(firm_obs(l, c, s, 2), ConfigError);
}

TEST(Observation, LayoutJsonMatchesWidths) {
  const EconomyConfig c;
  const auto l = make_layout(c);
  const auto j = layout_to_json(l);
  EXPECT_EQ(j["consumer"]["width"], l.consumer_width);
  EXPECT_EQ(j["firm"]["features"]["identity"]["offset"], l.firm_identity);
  EXPECT_EQ(j["government"]["width"], l.global_width);
}

// Properties over random states drawn on and off the action grids.

TEST(ObservationProperties, WidthStableAcrossStates) {
  Rng rng(6);
  const EconomyConfig c = small_economy(4, 3);
  const auto l = make_layout(c);
  EXPECT_EQ(make_layout(c), l);
  for (int n = 0; n < 100; ++n) {
    const auto s = random_state(rng, c);
    EXPECT_EQ(static_cast<int>(global_obs(l, s).size()), l.global_width);
    EXPECT_EQ(static_cast<int>(consumer_obs(l, s, n % 4, 0.01).size()), l.consumer_width);
    EXPECT_EQ(static_cast<int>(firm_obs(l, c, s, n % 3).size()), l.firm_width);
  }
}

TEST(ObservationProperties, EveryFeatureBounded) {
  Rng rng(7);
  const EconomyConfig c = small_economy(4, 3);
  const auto l = make_layout(c);
  for (int n = 0; n < 300; ++n) {
    auto s = random_state(rng, c);
    // Prices and wages are only ever installed from the action grids.
    for (auto& p : s.price) p = std::min(p, c.grids.price.back());
    for (auto& w : s.wage) w = std::min(w, c.grids.wage.back());
    // Include grid maxima and the largest budgets the digit widths admit.
    if (n % 3 == 0) {
      s.price.assign(3, 2500);
      s.wage.assign(3, 44);
      s.firm_budget[0] = -1e8;
      s.consumer_budget[0] = 5e7;
    }
    for (const auto& o : {global_obs(l, s), consumer_obs(l, s, n % 4, 0.01), firm_obs(l, c, s, n % 3)}) {
      for (float x : o) {
        EXPECT_GE(x, -1.0f);
        EXPECT_LE(x, 1.0f);
      }
    }
  }
}

TEST(ObservationProperties, GridValuesAreDistinguishable) {
  Rng rng(8);
  const EconomyConfig c = small_economy(2, 2);
  const auto l = make_layout(c);
  for (int n = 0; n < 300; ++n) {
    const auto s = random_state(rng, c);
    auto t = s;
    switch (n % 4) {
      case 0: {
        const double v = pick(rng, c.grids.price);
        if (v == t.price[0]) continue;
        t.price[0] = v;
        break;
      }
      case 1: {
        const double v = pick(rng, c.grids.wage);
        if (v == t.wage[1]) continue;
        t.wage[1] = v;
        break;
      }
      case 2: {
        const double v = pick(rng, c.grids.tax);
        if (v == t.income_tax) continue;
        t.income_tax = v;
        break;
      }
      default: {
        const double v = pick(rng, c.grids.tax);
        if (v == t.corporate_tax) continue;
        t.corporate_tax = v;
      }
    }
    EXPECT_NE(global_obs(l, s), global_obs(l, t));
  }
}
