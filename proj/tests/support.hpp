#pragma once

// Shared generators and naive reference solvers for the test suites.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "jrp/core.hpp"

namespace jrp::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Log-uniform positive value; spreads ratios over several orders of magnitude.
inline double log_uniform(Rng& rng, double lo, double hi) {
  return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

inline DiscreteInstance random_instance(Rng& rng, int periods, int items, double k_lo = 0.1,
                                        double k_hi = 50.0) {
  DiscreteInstance inst;
  inst.periods = periods;
  inst.joint_cost = log_uniform(rng, 0.1, 50.0);
  for (int i = 0; i < items; ++i)
    inst.items.push_back(Item{log_uniform(rng, k_lo, k_hi), log_uniform(rng, 0.05, 5.0), {}});
  return inst;
}

inline ContinuousInstance random_continuous(Rng& rng, int items, double lo = 0.1, double hi = 50.0) {
  ContinuousInstance inst;
  inst.joint_cost = log_uniform(rng, lo, hi);
  for (int i = 0; i < items; ++i) inst.items.push_back(Item{log_uniform(rng, lo, hi), log_uniform(rng, 0.05, 5.0), {}});
  return inst;
}

inline OrderSet random_order_set(Rng& rng, int periods, double density) {
  OrderSet o{1};
  for (int t = 2; t <= periods; ++t)
    if (uniform(rng, 0.0, 1.0) < density) o.push_back(t);
  return o;
}

inline DiscretePolicy random_policy(Rng& rng, const DiscreteInstance& inst) {
  DiscretePolicy p;
  const double density = uniform(rng, 0.0, 1.0);
  for (std::size_t i = 0; i < inst.items.size(); ++i) p.orders.push_back(random_order_set(rng, inst.periods, density));
  return p;
}

inline OrderSet set_from_mask(std::uint32_t mask, int periods) {
  OrderSet o{1};
  for (int t = 2; t <= periods; ++t)
    if (mask & (1u << (t - 2))) o.push_back(t);
  return o;
}

// Optimum over every combination of per-item order sets, without any lot-sizing
// subroutine. Exponential in n·T; only for tiny instances.
inline double naive_optimum(const DiscreteInstance& inst) {
  const int T = inst.periods;
  const std::size_t n = inst.items.size();
  const std::uint32_t per = 1u << (T - 1);
  std::vector<std::uint32_t> pick(n, 0);
  double best = std::numeric_limits<double>::infinity();
  for (;;) {
    DiscretePolicy p;
    for (std::size_t i = 0; i < n; ++i) p.orders.push_back(set_from_mask(pick[i], T));
    best = std::min(best, evaluate_discrete_cost(inst, p).total);
    std::size_t i = 0;
    while (i < n && ++pick[i] == per) pick[i++] = 0;
    if (i == n) break;
  }
  return best;
}

inline bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace jrp::testing
