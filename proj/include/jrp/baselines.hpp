#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "jrp/core.hpp"

namespace jrp {

struct EoqSolution {
  double period = 0.0;  // T* = sqrt(K/H)
  double cost = 0.0;    // 2 sqrt(K H)
};

inline EoqSolution eoq_optimal(double K, double H) {
  if (!(K > 0.0) || !(H > 0.0) || !std::isfinite(K) || !std::isfinite(H))
    throw std::invalid_argument("eoq_optimal: need K > 0 and H > 0");
  return {std::sqrt(K / H), 2.0 * std::sqrt(K * H)};
}

/// Average cost K/T + H·T of ordering every T time units.
inline double eoq_cost(double K, double H, double T) { return K / T + H * T; }

struct RelaxationSolution {
  double joint_period = 0.0;         // T0
  std::vector<double> item_periods;  // T_i = max(T0, sqrt(K_i/H_i))
  double value = 0.0;
};

namespace detail {

inline double relaxation_objective(const ContinuousInstance& inst, double T0) {
  double v = inst.joint_cost / T0;
  for (const auto& it : inst.items) {
    const double Ti = std::max(T0, std::sqrt(it.ordering_cost / it.holding_rate));
    v += eoq_cost(it.ordering_cost, it.holding_rate, Ti);
  }
  return v;
}

}  // namespace detail

/// min over T0 of K0/T0 + Σ C_i(max(T0, EOQ_i)); a lower bound on the long-run
/// average cost of every feasible policy. The objective is convex in T0.
inline RelaxationSolution relaxation_lower_bound(const ContinuousInstance& inst) {
  validate_instance(inst);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0, sum_h = 0.0;
  for (const auto& it : inst.items) {
    const double t = std::sqrt(it.ordering_cost / it.holding_rate);
    if (t > 0.0) lo = std::min(lo, t);
    hi = std::max(hi, t);
    sum_h += it.holding_rate;
  }
  const double joint_alone = std::sqrt(inst.joint_cost / sum_h);
  lo = std::min(lo, joint_alone) / 4.0;
  hi = std::max(hi, joint_alone) * 4.0;
  for (int iter = 0; iter < 2000 && hi - lo > 1e-12 * hi; ++iter) {
    const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    if (detail::relaxation_objective(inst, m1) <= detail::relaxation_objective(inst, m2))
      hi = m2;
    else
      lo = m1;
  }
  RelaxationSolution s;
  s.joint_period = 0.5 * (lo + hi);
  s.value = inst.joint_cost / s.joint_period;
  for (const auto& it : inst.items) {
    const double Ti = std::max(s.joint_period, std::sqrt(it.ordering_cost / it.holding_rate));
    s.item_periods.push_back(Ti);
    s.value += eoq_cost(it.ordering_cost, it.holding_rate, Ti);
  }
  return s;
}

struct PowerOfTwoOptions {
  std::uint64_t offset_cap = 1u << 20;  // most offsets materialized in the cycle
};

struct PowerOfTwoResult {
  double base_period = 0.0;     // T_min
  std::vector<int> exponents;   // q_i, item interval T_min·2^q_i
  double avg_cost = 0.0;
  std::optional<CyclicPolicy> policy;  // empty when the cycle needs more offsets than the cap
};

namespace detail {

inline int best_power(double K, double H, double base) {
  int q = 0;
  while (q < 60 && eoq_cost(K, H, std::ldexp(base, q + 1)) < eoq_cost(K, H, std::ldexp(base, q))) ++q;
  return q;
}

// Joint orders fall on multiples of the shortest interval because the item
// grids nest.
inline double power_of_two_cost(const ContinuousInstance& inst, double base, const std::vector<int>& q) {
  const int qmin = *std::min_element(q.begin(), q.end());
  double v = inst.joint_cost / std::ldexp(base, qmin);
  for (std::size_t i = 0; i < q.size(); ++i)
    v += eoq_cost(inst.items[i].ordering_cost, inst.items[i].holding_rate, std::ldexp(base, q[i]));
  return v;
}

}  // namespace detail

/// Stationary policy with item intervals T_min·2^q_i. T_min is the best of 64
/// geometric steps across [T0/√2, T0·√2]; each q_i minimizes the item's own cost.
inline PowerOfTwoResult power_of_two_policy(const ContinuousInstance& inst, const PowerOfTwoOptions& opts = {}) {
  const auto relax = relaxation_lower_bound(inst);
  const double lo = relax.joint_period / std::sqrt(2.0);
  PowerOfTwoResult best;
  best.avg_cost = std::numeric_limits<double>::infinity();
  constexpr int kSteps = 64;
  for (int j = 0; j < kSteps; ++j) {
    const double base = lo * std::pow(2.0, static_cast<double>(j) / (kSteps - 1));
    std::vector<int> q;
    for (const auto& it : inst.items) q.push_back(detail::best_power(it.ordering_cost, it.holding_rate, base));
    const double c = detail::power_of_two_cost(inst, base, q);
    if (c < best.avg_cost) {
      best.avg_cost = c;
      best.base_period = base;
      best.exponents = std::move(q);
    }
  }
  const int qmax = *std::max_element(best.exponents.begin(), best.exponents.end());
  std::uint64_t offsets = 0;
  for (int q : best.exponents) offsets += qmax - q >= 63 ? opts.offset_cap + 1 : (std::uint64_t{1} << (qmax - q));
  if (offsets > opts.offset_cap) return best;
  CyclicPolicy p;
  p.cycle_length = std::ldexp(best.base_period, qmax);
  for (int q : best.exponents) {
    const double step = std::ldexp(best.base_period, q);
    std::vector<double> o;
    for (std::uint64_t k = 0; k < (std::uint64_t{1} << (qmax - q)); ++k) o.push_back(static_cast<double>(k) * step);
    p.offsets.push_back(std::move(o));
  }
  best.avg_cost = evaluate_cyclic_avg_cost(inst, p);
  best.policy = std::move(p);
  return best;
}

}  // namespace jrp
