#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jrp/core.hpp"

namespace jrp {

/// Accuracy parameter with integral inverse.
struct Epsilon {
  int inverse = 1;
  double value() const { return 1.0 / static_cast<double>(inverse); }
};

/// Largest 1/k not exceeding eps (within 1e-9 on the inverse).
inline Epsilon snap_epsilon(double eps) {
  if (!(eps > 0.0) || eps > 1.0 || !std::isfinite(eps))
    throw InvalidOption("epsilon must lie in (0, 1]");
  const double inv = std::ceil(1.0 / eps - 1e-9);
  if (inv > 1e6) throw InvalidOption("epsilon too small");
  return Epsilon{static_cast<int>(inv)};
}

/// Smallest integer j with base^j >= x, for x > 0 and base > 1.
inline int rounding_exponent(double x, double base) {
  if (!(x > 0.0) || !(base > 1.0)) throw std::invalid_argument("rounding_exponent: need x > 0, base > 1");
  int j = static_cast<int>(std::ceil(std::log(x) / std::log(base)));
  while (std::pow(base, j - 1) >= x) --j;
  while (std::pow(base, j) < x) ++j;
  return j;
}

inline double round_up_to_power(double x, double base) {
  return std::pow(base, rounding_exponent(x, base));
}

/// Each positive K_i and every H_i rounded up to a power of 1 + eps. Items
/// with K_i = 0 keep it.
inline DiscreteInstance round_costs(const DiscreteInstance& inst, double eps) {
  if (!(eps > 0.0) || eps > 1.0) throw InvalidOption("epsilon must lie in (0, 1]");
  validate_instance(inst);
  const double base = 1.0 + eps;
  DiscreteInstance out = inst;
  for (auto& it : out.items) {
    if (it.ordering_cost > 0.0) it.ordering_cost = round_up_to_power(it.ordering_cost, base);
    it.holding_rate = round_up_to_power(it.holding_rate, base);
  }
  return out;
}

struct RatioGrouping {
  std::vector<std::vector<std::size_t>> groups;  // original item indices
  std::vector<Item> super_items;                 // summed K and H per group
  /// Exponent j with K/H = (1+eps)^j per group; empty for the K = 0 group.
  std::vector<std::optional<int>> rho_exponents;
  bool has_zero_cost_group = false;
  double epsilon = 1.0;

  std::size_t item_count() const {
    std::size_t n = 0;
    for (const auto& g : groups) n += g.size();
    return n;
  }
};

struct FusedInstance {
  DiscreteInstance instance;
  RatioGrouping grouping;
};

/// Merges items whose rounded ratios coincide. Equality is decided on the
/// integer exponent difference, groups are numbered by first member, and all
/// K = 0 items share one group of ratio zero.
inline FusedInstance fuse_groups(const DiscreteInstance& inst, double eps) {
  if (!(eps > 0.0) || eps > 1.0) throw InvalidOption("epsilon must lie in (0, 1]");
  validate_instance(inst);
  const double base = 1.0 + eps;
  FusedInstance out;
  auto& g = out.grouping;
  g.epsilon = eps;
  std::map<std::optional<int>, std::size_t> index;
  for (std::size_t i = 0; i < inst.items.size(); ++i) {
    const auto& it = inst.items[i];
    std::optional<int> key;
    if (it.ordering_cost > 0.0)
      key = rounding_exponent(it.ordering_cost, base) - rounding_exponent(it.holding_rate, base);
    auto [pos, fresh] = index.try_emplace(key, g.groups.size());
    if (fresh) {
      g.groups.emplace_back();
      g.super_items.push_back(Item{0.0, 0.0, "group" + std::to_string(pos->second)});
      g.rho_exponents.push_back(key);
      if (!key) g.has_zero_cost_group = true;
    }
    g.groups[pos->second].push_back(i);
    g.super_items[pos->second].ordering_cost += it.ordering_cost;
    g.super_items[pos->second].holding_rate += it.holding_rate;
  }
  out.instance = DiscreteInstance{inst.periods, inst.joint_cost, g.super_items};
  return out;
}

/// Every original item adopts the order set of its group.
inline DiscretePolicy unfuse_policy(const RatioGrouping& grouping, const DiscretePolicy& fused) {
  if (fused.orders.size() != grouping.groups.size())
    throw InvalidPolicy("fused policy covers " + std::to_string(fused.orders.size()) +
                        " groups, grouping has " + std::to_string(grouping.groups.size()));
  DiscretePolicy out;
  out.orders.resize(grouping.item_count());
  for (std::size_t l = 0; l < grouping.groups.size(); ++l)
    for (std::size_t i : grouping.groups[l]) {
      if (i >= out.orders.size()) throw InvalidPolicy("grouping index out of range");
      out.orders[i] = fused.orders[l];
    }
  return out;
}

// ---------------------------------------------------------------------------
// Continuous instances

struct ExpensiveItem {
  std::size_t item = 0;
  double eoq_period = 0.0;     // sqrt(K_i / H_i)
  double marginal_cost = 0.0;  // (K0 + K_i)/T* + H_i T*
};

struct ContinuousSplit {
  std::vector<ExpensiveItem> expensive;
  std::vector<std::size_t> regular;  // original indices, ascending
  std::vector<bool> raised;          // per regular item: K lifted to eps·K0/n
  ContinuousInstance regular_instance;
};

/// Items with K_i > K0/eps are detached; cheaper-than-eps·K0/n items are
/// raised to that floor.
inline ContinuousSplit split_continuous(const ContinuousInstance& inst, double eps) {
  if (!(eps > 0.0) || eps > 1.0) throw InvalidOption("epsilon must lie in (0, 1]");
  validate_instance(inst);
  const double K0 = inst.joint_cost;
  const double n = static_cast<double>(inst.items.size());
  const double high = K0 / eps;
  const double floor = eps * K0 / n;
  ContinuousSplit s;
  s.regular_instance.joint_cost = K0;
  for (std::size_t i = 0; i < inst.items.size(); ++i) {
    const auto& it = inst.items[i];
    if (it.ordering_cost > high) {
      const double t = std::sqrt(it.ordering_cost / it.holding_rate);
      s.expensive.push_back({i, t, (K0 + it.ordering_cost) / t + it.holding_rate * t});
      continue;
    }
    Item r = it;
    const bool lift = r.ordering_cost < floor;
    if (lift) r.ordering_cost = floor;
    s.regular.push_back(i);
    s.raised.push_back(lift);
    s.regular_instance.items.push_back(std::move(r));
  }
  return s;
}

}  // namespace jrp
