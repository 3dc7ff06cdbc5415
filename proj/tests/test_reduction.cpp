#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "jrp/baselines.hpp"
#include "jrp/reduction.hpp"
#include "support.hpp"

using namespace jrp;
using jrp::testing::Rng;

namespace {

ContinuousOptions fast_options(std::int64_t tp) {
  ContinuousOptions o;
  o.tp_override = tp;
  return o;
}

// All regular items once per cycle, expensive items on their EOQ streams.
double best_uniform_cycle(const ContinuousInstance& inst, double eps) {
  const auto split = split_continuous(inst, eps);
  double detached = 0;
  for (const auto& e : split.expensive) detached += e.marginal_cost;
  double k = inst.joint_cost, h = 0;
  for (std::size_t i : split.regular) {
    k += inst.items[i].ordering_cost;
    h += inst.items[i].holding_rate;
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : candidate_lengths(split.regular_instance, eps))
    best = std::min(best, detached + k / c.length + h * c.length);
  return best;
}

}  // namespace

TEST(CandidateLengths, GeometricRangeExample) {
  const ContinuousInstance inst{2.0, {Item{1, 1, {}}}};
  const auto c = candidate_lengths(inst, 0.5);
  // 1.5^22 < 8192 <= 1.5^23: 23 powers plus the closing endpoint.
  ASSERT_EQ(c.size(), 24u);
  EXPECT_DOUBLE_EQ(c.front().length, 0.03125);
  EXPECT_DOUBLE_EQ(c.back().length, 256.0);
  for (std::size_t i = 1; i + 1 < c.size(); ++i) EXPECT_NEAR(c[i].length / c[i - 1].length, 1.5, 1e-12);
  EXPECT_LE(c.back().length / c[c.size() - 2].length, 1.5);
  for (const auto& x : c) {
    EXPECT_EQ(x.periods, 2304);
    EXPECT_DOUBLE_EQ(x.period_length, x.length / 2304);
  }
}

TEST(CandidateLengths, EmptyWithoutRegularItems) {
  EXPECT_TRUE(candidate_lengths(ContinuousInstance{1.0, {}}, 0.5).empty());
}

TEST(CandidateLengths, EndpointsBracketRange) {
  Rng rng(31);
  for (int rep = 0; rep < 100; ++rep) {
    const auto inst = jrp::testing::random_continuous(rng, jrp::testing::uniform_int(rng, 1, 5));
    const double eps = 1.0 / jrp::testing::uniform_int(rng, 1, 4);
    const auto c = candidate_lengths(inst, eps, 64);
    const double M = aggregate_bound(inst);
    double hmin = 1e300;
    for (const auto& it : inst.items) hmin = std::min(hmin, it.holding_rate);
    EXPECT_DOUBLE_EQ(c.front().length, inst.joint_cost / (16 * M));
    EXPECT_DOUBLE_EQ(c.back().length, 16 * M / (eps * eps * hmin));
    for (std::size_t i = 1; i < c.size(); ++i) {
      EXPECT_GT(c[i].length, c[i - 1].length);
      EXPECT_LE(c[i].length / c[i - 1].length, (1 + eps) * (1 + 1e-12));
    }
  }
}

TEST(PeriodGrid, TheoreticalAndOverride) {
  const auto g = period_grid(1, snap_epsilon(0.5));
  EXPECT_EQ(g.periods, 2304);
  EXPECT_FALSE(g.truncated);
  const auto t = period_grid(1, snap_epsilon(0.5), 512);
  EXPECT_EQ(t.periods, 512);
  EXPECT_EQ(t.theoretical, 2304);
  EXPECT_TRUE(t.truncated);
  const auto loose = period_grid(1, snap_epsilon(0.5), 5000);
  EXPECT_EQ(loose.periods, 2304);
  EXPECT_FALSE(loose.truncated);
  EXPECT_EQ(period_grid(2, snap_epsilon(1.0)).periods, 288);
  EXPECT_THROW(period_grid(1, snap_epsilon(0.5), 0), InvalidOption);
  EXPECT_THROW(period_grid(50, snap_epsilon(0.1)), LimitExceeded);
}

TEST(Discretize, HoldingScalesWithPeriodSquared) {
  const ContinuousInstance inst{2.0, {Item{1, 3, {}}}};
  const CandidateLength c{2.0, 8, 0.25};
  const auto d = discretize(inst, c);
  EXPECT_EQ(d.periods, 8);
  EXPECT_DOUBLE_EQ(d.joint_cost, 2.0);
  EXPECT_DOUBLE_EQ(d.items[0].ordering_cost, 1.0);
  EXPECT_DOUBLE_EQ(d.items[0].holding_rate, 3 * 0.0625);
  // Ordering every period: holding H delta^2 T_p = H L delta.
  DiscretePolicy every{{{1, 2, 3, 4, 5, 6, 7, 8}}};
  EXPECT_DOUBLE_EQ(evaluate_discrete_cost(d, every).per_item_holding[0], 3 * 2.0 * 0.25);
  EXPECT_THROW(discretize(inst, CandidateLength{2.0, 0, 0.25}), InvalidOption);
}

TEST(LiftPolicy, Offsets) {
  const auto a = lift_policy(DiscretePolicy{{{1}}}, 2.0, 0.5);
  EXPECT_DOUBLE_EQ(a.cycle_length, 2.0);
  EXPECT_EQ(a.offsets[0], (std::vector<double>{0.0}));
  const auto b = lift_policy(DiscretePolicy{{{1, 3}}}, 2.0, 0.5);
  EXPECT_EQ(b.offsets[0], (std::vector<double>{0.0, 1.0}));
}

TEST(LiftPolicy, AverageCostIsDiscreteTotalOverLength) {
  Rng rng(32);
  for (int rep = 0; rep < 60; ++rep) {
    const auto inst = jrp::testing::random_continuous(rng, jrp::testing::uniform_int(rng, 1, 3));
    const double L = jrp::testing::log_uniform(rng, 0.1, 10);
    const int T = jrp::testing::uniform_int(rng, 2, 24);
    const CandidateLength c{L, T, L / T};
    const auto d = discretize(inst, c);
    const auto sol = solve_eptas(d, 0.5);
    const double avg = evaluate_cyclic_avg_cost(inst, lift_policy(sol.policy, L, c.period_length));
    EXPECT_TRUE(jrp::testing::rel_close(avg, sol.cost.total / L, 1e-9)) << avg << " vs " << sol.cost.total / L;
    const auto p = jrp::testing::random_policy(rng, d);
    const double q = evaluate_cyclic_avg_cost(inst, lift_policy(p, L, c.period_length));
    EXPECT_TRUE(jrp::testing::rel_close(q, evaluate_discrete_cost(d, p).total / L, 1e-9));
  }
}

TEST(SolveContinuous, SingleItemMatchesEoq) {
  const ContinuousInstance inst{3.0, {Item{1, 1, {}}}};
  const auto r = solve_continuous(inst, 0.5, fast_options(512));
  EXPECT_GE(r.avg_cost, 4.0 * (1 - 1e-12));
  EXPECT_LE(r.avg_cost, 4.0 * 1.10);
  EXPECT_TRUE(jrp::testing::rel_close(r.avg_cost, evaluate_cyclic_avg_cost(inst, r.policy), 1e-12));
  EXPECT_EQ(r.report.periods, 512);
  EXPECT_EQ(r.report.theoretical_periods, 2304);
  EXPECT_NE(std::find(r.report.flags.begin(), r.report.flags.end(), "tp_truncated"), r.report.flags.end());
  EXPECT_EQ(r.report.lengths.size(), 24u);
}

TEST(SolveContinuous, AllExpensiveUsesDetachedStreams) {
  const ContinuousInstance inst{1.0, {Item{10, 1, {}}, Item{40, 4, {}}}};
  const auto r = solve_continuous(inst, 0.5, fast_options(64));
  const double expect = (1 + 10) / std::sqrt(10.0) + std::sqrt(10.0) + (1 + 40) / std::sqrt(10.0) + 4 * std::sqrt(10.0);
  EXPECT_NEAR(r.avg_cost, expect, 1e-12 * expect);
  EXPECT_EQ(r.policy.detached_streams.size(), 2u);
  EXPECT_EQ(r.report.expensive_items, (std::vector<std::size_t>{0, 1}));
}

TEST(SolveContinuous, MixedDetachedAndCyclic) {
  const ContinuousInstance inst{1.0, {Item{0.5, 1, {}}, Item{10, 1, {}}}};
  const auto r = solve_continuous(inst, 0.5, fast_options(64));
  ASSERT_EQ(r.policy.detached_streams.size(), 1u);
  EXPECT_EQ(r.policy.detached_streams[0].item, 1u);
  EXPECT_TRUE(r.policy.offsets[1].empty());
  EXPECT_FALSE(r.policy.offsets[0].empty());
  EXPECT_DOUBLE_EQ(r.avg_cost, evaluate_cyclic_avg_cost(inst, r.policy));
}

TEST(SolveContinuous, BetweenRelaxationAndUniformCycle) {
  Rng rng(33);
  for (int rep = 0; rep < 12; ++rep) {
    const auto inst = jrp::testing::random_continuous(rng, jrp::testing::uniform_int(rng, 1, 3));
    const double eps = rep % 2 ? 1.0 : 0.5;
    const auto r = solve_continuous(inst, eps, fast_options(48));
    EXPECT_GE(r.avg_cost, relaxation_lower_bound(inst).value * (1 - 1e-9));
    EXPECT_LE(r.avg_cost, best_uniform_cycle(inst, eps) * (1 + 1e-12));
    EXPECT_DOUBLE_EQ(r.avg_cost, evaluate_cyclic_avg_cost(inst, r.policy));
  }
}

TEST(SolveContinuous, ScalingCovariance) {
  Rng rng(34);
  for (int rep = 0; rep < 6; ++rep) {
    const auto inst = jrp::testing::random_continuous(rng, jrp::testing::uniform_int(rng, 1, 3));
    auto scaled = inst;
    scaled.joint_cost *= 4;
    for (auto& it : scaled.items) {
      it.ordering_cost *= 4;
      it.holding_rate *= 4;
    }
    const auto a = solve_continuous(inst, 1.0, fast_options(32));
    const auto b = solve_continuous(scaled, 1.0, fast_options(32));
    EXPECT_EQ(a.policy.cycle_length, b.policy.cycle_length);
    EXPECT_EQ(a.policy.offsets, b.policy.offsets);
    EXPECT_TRUE(jrp::testing::rel_close(4 * a.avg_cost, b.avg_cost, 1e-12));
  }
}

TEST(SolveContinuous, TimeCovarianceSingleItem) {
  const double K0 = 2.0, K = 1.5, H = 0.8, s = 2.0;
  const ContinuousInstance base{K0, {Item{K, H, {}}}};
  const ContinuousInstance slow{K0, {Item{K, H / (s * s), {}}}};
  const double closed = 2 * std::sqrt((K0 + K) * H);
  const double closed_slow = 2 * std::sqrt((K0 + K) * H / (s * s));
  EXPECT_DOUBLE_EQ(closed_slow, closed / s);
  const auto a = solve_continuous(base, 0.5, fast_options(128));
  const auto b = solve_continuous(slow, 0.5, fast_options(128));
  EXPECT_GE(a.avg_cost, closed * (1 - 1e-12));
  EXPECT_GE(b.avg_cost, closed_slow * (1 - 1e-12));
  EXPECT_LE(a.avg_cost, closed * 1.10);
  EXPECT_LE(b.avg_cost, closed_slow * 1.10);
}

TEST(SolveContinuous, LengthThinning) {
  const ContinuousInstance inst{2.0, {Item{1, 1, {}}}};
  auto o = fast_options(64);
  o.lengths_thin = 4;
  const auto r = solve_continuous(inst, 0.5, o);
  EXPECT_EQ(r.report.counters.at("lengths"), 24u);
  EXPECT_EQ(r.report.counters.at("lengths_evaluated"), 6u);
  EXPECT_NE(std::find(r.report.flags.begin(), r.report.flags.end(), "lengths_thinned"), r.report.flags.end());
  o.lengths_thin = 0;
  EXPECT_THROW(solve_continuous(inst, 0.5, o), InvalidOption);
}

TEST(SolveContinuous, WorkerCountDoesNotMatter) {
  Rng rng(35);
  const auto inst = jrp::testing::random_continuous(rng, 3, 0.5, 2.0);
  auto o = fast_options(48);
  o.eptas.workers = 1;
  const auto a = solve_continuous(inst, 0.5, o);
  o.eptas.workers = 8;
  const auto b = solve_continuous(inst, 0.5, o);
  EXPECT_EQ(a.policy.offsets, b.policy.offsets);
  EXPECT_EQ(a.policy.cycle_length, b.policy.cycle_length);
  EXPECT_EQ(a.avg_cost, b.avg_cost);
  EXPECT_TRUE(a.policy.detached_streams.empty());
}

TEST(SolveContinuous, RejectsZeroJointCost) {
  EXPECT_THROW(solve_continuous(ContinuousInstance{0.0, {Item{1, 1, {}}}}, 0.5), InvalidInstance);
}
