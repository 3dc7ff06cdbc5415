#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "jrp/baselines.hpp"
#include "support.hpp"

using namespace jrp;
using jrp::testing::Rng;

TEST(Eoq, ClosedForm) {
  const auto a = eoq_optimal(4, 1);
  EXPECT_DOUBLE_EQ(a.period, 2.0);
  EXPECT_DOUBLE_EQ(a.cost, 4.0);
  const auto b = eoq_optimal(1, 1);
  EXPECT_DOUBLE_EQ(b.period, 1.0);
  EXPECT_DOUBLE_EQ(b.cost, 2.0);
}

TEST(Eoq, MinimizerIsStrict) {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const double K = jrp::testing::log_uniform(rng, 0.01, 100), H = jrp::testing::log_uniform(rng, 0.01, 100);
    const auto s = eoq_optimal(K, H);
    EXPECT_NEAR(eoq_cost(K, H, s.period), s.cost, 1e-12 * s.cost);
    EXPECT_LT(eoq_cost(K, H, s.period), eoq_cost(K, H, s.period * 1.1));
    EXPECT_LT(eoq_cost(K, H, s.period), eoq_cost(K, H, s.period / 1.1));
  }
}

TEST(Eoq, RejectsNonPositive) {
  EXPECT_THROW(eoq_optimal(0, 1), std::invalid_argument);
  EXPECT_THROW(eoq_optimal(1, 0), std::invalid_argument);
  EXPECT_THROW(eoq_optimal(-1, 1), std::invalid_argument);
}

TEST(Relaxation, SingleItemCollapsesToEoq) {
  const ContinuousInstance inst{3.0, {Item{1, 1, {}}}};
  const auto r = relaxation_lower_bound(inst);
  // The objective is flat to rounding near its minimum, so the minimizer is
  // only pinned to about the square root of machine precision.
  EXPECT_NEAR(r.joint_period, 2.0, 1e-7);
  EXPECT_NEAR(r.value, 4.0, 1e-12);
  ASSERT_EQ(r.item_periods.size(), 1u);
  EXPECT_NEAR(r.item_periods[0], 2.0, 1e-7);
}

TEST(Relaxation, VanishingJointCost) {
  const ContinuousInstance inst{1e-12, {Item{1, 1, {}}, Item{4, 1, {}}, Item{2, 8, {}}}};
  const double sum = 2.0 * (1.0 + 2.0 + 4.0);
  EXPECT_NEAR(relaxation_lower_bound(inst).value, sum, 1e-5);
}

TEST(Relaxation, StructureAndSingleItemBracket) {
  Rng rng(11);
  for (int rep = 0; rep < 300; ++rep) {
    const int n = jrp::testing::uniform_int(rng, 1, 6);
    const auto inst = jrp::testing::random_continuous(rng, n);
    const auto r = relaxation_lower_bound(inst);
    double value = inst.joint_cost / r.joint_period;
    for (int i = 0; i < n; ++i) {
      const auto& it = inst.items[static_cast<std::size_t>(i)];
      EXPECT_DOUBLE_EQ(r.item_periods[static_cast<std::size_t>(i)],
                       std::max(r.joint_period, std::sqrt(it.ordering_cost / it.holding_rate)));
      value += eoq_cost(it.ordering_cost, it.holding_rate, r.item_periods[static_cast<std::size_t>(i)]);
    }
    EXPECT_DOUBLE_EQ(r.value, value);
    if (n == 1) {
      const auto& it = inst.items[0];
      EXPECT_LE(r.value, 2.0 * std::sqrt((inst.joint_cost + it.ordering_cost) * it.holding_rate) * (1 + 1e-12));
      EXPECT_GE(r.value, 2.0 * std::sqrt(it.ordering_cost * it.holding_rate));
    }
  }
}

TEST(Relaxation, TernarySearchMatchesDenseGrid) {
  Rng rng(12);
  for (int rep = 0; rep < 8; ++rep) {
    const auto inst = jrp::testing::random_continuous(rng, jrp::testing::uniform_int(rng, 1, 4));
    const auto r = relaxation_lower_bound(inst);
    double lo = std::numeric_limits<double>::infinity(), hi = 0, sum_h = 0;
    for (const auto& it : inst.items) {
      lo = std::min(lo, std::sqrt(it.ordering_cost / it.holding_rate));
      hi = std::max(hi, std::sqrt(it.ordering_cost / it.holding_rate));
      sum_h += it.holding_rate;
    }
    hi = std::max(hi, std::sqrt(inst.joint_cost / sum_h)) * 4;
    lo /= 4;
    double grid_min = std::numeric_limits<double>::infinity();
    constexpr int kPoints = 1000000;
    for (int k = 0; k < kPoints; ++k) {
      const double t = lo * std::pow(hi / lo, static_cast<double>(k) / (kPoints - 1));
      grid_min = std::min(grid_min, detail::relaxation_objective(inst, t));
    }
    EXPECT_LE(std::abs(r.value - grid_min), 1e-9 * r.value);
  }
}

TEST(PowerOfTwo, SingleItemNearEoq) {
  // With one item the exponent is 0 and some base lies within a factor
  // x = 2^(1/126) of T0, so the ratio is at most (x + 1/x)/2, about 1 + 1.51e-5.
  Rng rng(21);
  double worst = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const auto inst = jrp::testing::random_continuous(rng, 1);
    const auto p = power_of_two_policy(inst);
    const double lb = relaxation_lower_bound(inst).value;
    worst = std::max(worst, p.avg_cost / lb);
    EXPECT_EQ(p.exponents, std::vector<int>{0});
  }
  EXPECT_LE(worst, 1.07);
  EXPECT_LE(worst, 1.0 + 2e-5);
}

TEST(PowerOfTwo, IdenticalItemsShareEveryOrder) {
  const ContinuousInstance inst{5.0, {Item{2, 1, {}}, Item{2, 1, {}}, Item{2, 1, {}}}};
  const auto p = power_of_two_policy(inst);
  ASSERT_TRUE(p.policy.has_value());
  EXPECT_EQ(p.exponents[0], p.exponents[1]);
  EXPECT_EQ(p.exponents[1], p.exponents[2]);
  EXPECT_EQ(p.policy->offsets[0], p.policy->offsets[1]);
  EXPECT_EQ(p.policy->offsets[1], p.policy->offsets[2]);
}

TEST(PowerOfTwo, BoundedByRelaxation) {
  Rng rng(22);
  for (int rep = 0; rep < 300; ++rep) {
    const auto inst = jrp::testing::random_continuous(rng, jrp::testing::uniform_int(rng, 1, 8));
    const auto p = power_of_two_policy(inst);
    const double lb = relaxation_lower_bound(inst).value;
    EXPECT_GE(p.avg_cost, lb * (1 - 1e-9));
    EXPECT_LE(p.avg_cost, 1.5 * lb);
    EXPECT_NEAR(p.avg_cost, detail::power_of_two_cost(inst, p.base_period, p.exponents), 1e-9 * p.avg_cost);
  }
}

TEST(PowerOfTwo, AnalyticCostPastOffsetCap) {
  const ContinuousInstance inst{1.0, {Item{0.01, 10, {}}, Item{1000, 0.001, {}}}};
  const auto full = power_of_two_policy(inst);
  ASSERT_TRUE(full.policy.has_value());
  const auto capped = power_of_two_policy(inst, {2});
  EXPECT_FALSE(capped.policy.has_value());
  EXPECT_EQ(capped.exponents, full.exponents);
  EXPECT_NEAR(capped.avg_cost, full.avg_cost, 1e-9 * full.avg_cost);
}
