#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace jrp {

class InvalidInstance : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidPolicy : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidOption : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a request would blow past an enumeration limit.
class LimitExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a time budget ran out before any feasible answer existed.
class BudgetExpired : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Item {
  double ordering_cost = 0.0;  // K_i
  double holding_rate = 0.0;   // H_i, per squared time unit
  std::string name;
};

struct DiscreteInstance {
  int periods = 0;
  double joint_cost = 0.0;
  std::vector<Item> items;
};

struct ContinuousInstance {
  double joint_cost = 0.0;
  std::vector<Item> items;
};

namespace detail {

inline void check_items(std::span<const Item> items) {
  if (items.empty()) throw InvalidInstance("instance has no items");
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& it = items[i];
    if (!std::isfinite(it.ordering_cost) || it.ordering_cost < 0.0)
      throw InvalidInstance("item " + std::to_string(i) +
                            ": ordering cost must be finite and >= 0");
    if (!std::isfinite(it.holding_rate) || it.holding_rate <= 0.0)
      throw InvalidInstance("item " + std::to_string(i) +
                            ": holding rate must be finite and > 0");
  }
}

}  // namespace detail

inline void validate_instance(const DiscreteInstance& inst) {
  if (inst.periods < 1) throw InvalidInstance("periods must be >= 1");
  if (!std::isfinite(inst.joint_cost) || inst.joint_cost <= 0.0)
    throw InvalidInstance("joint cost must be finite and > 0");
  detail::check_items(inst.items);
}

inline void validate_instance(const ContinuousInstance& inst) {
  if (!std::isfinite(inst.joint_cost) || inst.joint_cost <= 0.0)
    throw InvalidInstance("joint cost must be finite and > 0");
  detail::check_items(inst.items);
}

using OrderSet = std::vector<int>;

/// Per-item order periods over a finite horizon. Joint orders are the union
/// of the item lists.
struct DiscretePolicy {
  std::vector<OrderSet> orders;

  friend bool operator==(const DiscretePolicy&, const DiscretePolicy&) = default;
};

struct PolicyViolation {
  std::optional<std::size_t> item;  // empty for whole-policy violations
  std::string message;
};

/// Every violated policy invariant, in item order. Empty means valid.
inline std::vector<PolicyViolation> validate_policy(const DiscreteInstance& inst,
                                                    const DiscretePolicy& policy) {
  std::vector<PolicyViolation> out;
  if (policy.orders.size() != inst.items.size()) {
    out.push_back({std::nullopt, "policy covers " + std::to_string(policy.orders.size()) +
                                     " items, instance has " +
                                     std::to_string(inst.items.size())});
  }
  for (std::size_t i = 0; i < policy.orders.size(); ++i) {
    const auto& o = policy.orders[i];
    const std::string who = "item " + std::to_string(i);
    if (o.empty()) {
      out.push_back({i, who + " has no orders"});
      continue;
    }
    if (o.front() != 1) out.push_back({i, who + " missing period-1 order"});
    for (int p : o) {
      if (p < 1 || p > inst.periods) {
        out.push_back({i, who + " period " + std::to_string(p) + " out of range [1, " +
                              std::to_string(inst.periods) + "]"});
        break;
      }
    }
    if (std::adjacent_find(o.begin(), o.end(), [](int a, int b) { return a >= b; }) != o.end())
      out.push_back({i, who + " periods not strictly increasing"});
  }
  return out;
}

/// Sum of squared order durations; the last duration runs to horizon_end + 1.
inline std::int64_t squared_durations(std::span<const int> orders, int horizon_end) {
  std::int64_t q = 0;
  for (std::size_t v = 0; v < orders.size(); ++v) {
    const std::int64_t next = v + 1 < orders.size() ? orders[v + 1] : horizon_end + 1;
    const std::int64_t d = next - orders[v];
    q += d * d;
  }
  return q;
}

/// Sorted union of all item order periods.
inline std::vector<int> joint_periods(const DiscretePolicy& policy) {
  std::vector<int> all;
  for (const auto& o : policy.orders) all.insert(all.end(), o.begin(), o.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return all;
}

struct CostBreakdown {
  double joint = 0.0;
  int joint_orders = 0;
  std::vector<double> per_item_ordering;
  std::vector<double> per_item_holding;
  double total = 0.0;
};

inline CostBreakdown evaluate_discrete_cost(const DiscreteInstance& inst,
                                            const DiscretePolicy& policy) {
  if (auto v = validate_policy(inst, policy); !v.empty()) throw InvalidPolicy(v.front().message);
  CostBreakdown c;
  c.joint_orders = static_cast<int>(joint_periods(policy).size());
  c.joint = inst.joint_cost * c.joint_orders;
  c.total = c.joint;
  const std::size_t n = inst.items.size();
  c.per_item_ordering.resize(n);
  c.per_item_holding.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& o = policy.orders[i];
    c.per_item_ordering[i] = inst.items[i].ordering_cost * static_cast<double>(o.size());
    c.per_item_holding[i] =
        inst.items[i].holding_rate * static_cast<double>(squared_durations(o, inst.periods));
    c.total += c.per_item_ordering[i] + c.per_item_holding[i];
  }
  return c;
}

/// Injective byte encoding: item count, then per item its periods as
/// big-endian u32 followed by a zero terminator. Byte-wise comparison orders
/// item lists lexicographically with shorter prefixes first.
inline std::string canonical_encoding(const DiscretePolicy& policy) {
  std::string out;
  auto put = [&out](std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<char>((v >> s) & 0xFFu));
  };
  put(static_cast<std::uint32_t>(policy.orders.size()));
  for (const auto& o : policy.orders) {
    for (int p : o) put(static_cast<std::uint32_t>(p));
    put(0);
  }
  return out;
}

/// A discrete policy together with its exact cost.
struct Candidate {
  DiscretePolicy policy;
  CostBreakdown cost;
};

/// Strict total order used for every deterministic argmin: total cost, then
/// fewer joint orders, then canonical encoding.
inline bool precedes(const Candidate& a, const Candidate& b) {
  if (a.cost.total != b.cost.total) return a.cost.total < b.cost.total;
  if (a.cost.joint_orders != b.cost.joint_orders) return a.cost.joint_orders < b.cost.joint_orders;
  return canonical_encoding(a.policy) < canonical_encoding(b.policy);
}

inline Candidate make_candidate(const DiscreteInstance& inst, DiscretePolicy policy) {
  Candidate c{std::move(policy), {}};
  c.cost = evaluate_discrete_cost(inst, c.policy);
  return c;
}

// ---------------------------------------------------------------------------
// Cyclic policies in continuous time

struct DetachedStream {
  std::size_t item = 0;
  double period = 0.0;
};

/// A segment of length cycle_length repeated forever. Items listed in
/// detached_streams are replenished on their own periodic schedule, each order
/// paying a private joint cost, and carry no offsets.
struct CyclicPolicy {
  double cycle_length = 0.0;
  std::vector<std::vector<double>> offsets;
  std::vector<DetachedStream> detached_streams;
};

inline double evaluate_cyclic_avg_cost(const ContinuousInstance& inst, const CyclicPolicy& policy) {
  const std::size_t n = inst.items.size();
  const double L = policy.cycle_length;
  if (!(L > 0.0) || !std::isfinite(L)) throw InvalidPolicy("cycle length must be > 0");
  if (policy.offsets.size() != n)
    throw InvalidPolicy("policy covers " + std::to_string(policy.offsets.size()) +
                        " items, instance has " + std::to_string(n));
  std::vector<char> detached(n, 0);
  double avg = 0.0;
  for (const auto& s : policy.detached_streams) {
    if (s.item >= n) throw InvalidPolicy("detached stream references unknown item");
    if (detached[s.item]) throw InvalidPolicy("item " + std::to_string(s.item) + " detached twice");
    if (!(s.period > 0.0)) throw InvalidPolicy("detached stream period must be > 0");
    detached[s.item] = 1;
    const auto& it = inst.items[s.item];
    avg += (inst.joint_cost + it.ordering_cost) / s.period + it.holding_rate * s.period;
  }
  // Ordering costs are summed before dividing by L and each squared duration
  // is scaled as d·(d/L), so a single offset reproduces (K0 + K)/L + H·L bit
  // for bit.
  std::vector<double> all;
  double ordering = 0.0;
  double holding = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& o = policy.offsets[i];
    const std::string who = "item " + std::to_string(i);
    if (detached[i]) {
      if (!o.empty()) throw InvalidPolicy(who + " is detached but has cycle offsets");
      continue;
    }
    if (o.empty()) throw InvalidPolicy(who + " has no offsets");
    if (o.front() != 0.0) throw InvalidPolicy(who + " offsets must start at 0");
    if (o.back() >= L) throw InvalidPolicy(who + " offset beyond cycle length");
    double q = 0.0;
    for (std::size_t v = 0; v < o.size(); ++v) {
      const double next = v + 1 < o.size() ? o[v + 1] : L + o.front();
      const double d = next - o[v];
      if (!(d > 0.0)) throw InvalidPolicy(who + " offsets not strictly increasing");
      q += d * (d / L);
    }
    ordering += inst.items[i].ordering_cost * static_cast<double>(o.size());
    holding += inst.items[i].holding_rate * q;
    all.insert(all.end(), o.begin(), o.end());
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  const double joint = inst.joint_cost * static_cast<double>(all.size());
  return avg + ((joint + ordering) / L + holding);
}

}  // namespace jrp
