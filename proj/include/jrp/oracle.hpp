#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "jrp/core.hpp"
#include "jrp/detail/parallel.hpp"
#include "jrp/lotsizing.hpp"

namespace jrp {

struct ExactOptions {
  int limit = 20;   // largest horizon accepted
  int workers = 0;  // 0: JRP_WORKERS or 1
};

struct ExactSolution {
  DiscretePolicy policy;
  CostBreakdown cost;
  /// K0·|S| + Σ per-item optimum over S for the winning joint set S. Equals
  /// cost.total for solve_exact; may exceed it for a fixed order count when
  /// an item-level optimum leaves a joint period unused.
  double objective = 0.0;
  std::uint64_t joint_sets_examined = 0;
};

namespace detail {

// Joint sets are masks over periods 2..T; bit b set means period b + 2.
inline std::vector<std::uint32_t> masks_with_popcount(int bits, int k) {
  std::vector<std::uint32_t> out;
  if (k == 0) return {0u};
  if (k > bits) return out;
  const std::uint32_t limit = bits >= 32 ? 0xFFFFFFFFu : (1u << bits);
  std::uint32_t v = (1u << k) - 1u;
  while (v < limit) {
    out.push_back(v);
    const std::uint32_t t = v | (v - 1u);
    if (t == 0xFFFFFFFFu) break;
    v = (t + 1u) | (((~t & (t + 1u)) - 1u) >> (std::countr_zero(v) + 1));
  }
  return out;
}

struct ExactChunk {
  std::optional<Candidate> best;
  double objective = 0.0;
  std::uint64_t examined = 0;
};

inline ExactSolution solve_exact_impl(const DiscreteInstance& inst, const ExactOptions& opts,
                                      std::optional<int> fixed_orders) {
  validate_instance(inst);
  const int T = inst.periods;
  if (T > opts.limit)
    throw LimitExceeded("exact solver: horizon " + std::to_string(T) + " exceeds limit " +
                        std::to_string(opts.limit) + " (would enumerate 2^" + std::to_string(T - 1) +
                        " joint sets); raise the limit explicitly");
  if (T > 31) throw LimitExceeded("exact solver: horizon above 31 is not supported");
  if (fixed_orders && (*fixed_orders < 1 || *fixed_orders > T))
    throw std::invalid_argument("exact solver: joint order count must lie in [1, T]");

  const int bits = T - 1;
  const double K0 = inst.joint_cost;
  double eoq_bound = 0.0;
  for (const auto& it : inst.items) eoq_bound += single_item_lower_bound(T, it.ordering_cost, it.holding_rate);

  std::optional<Candidate> best;
  double best_objective = 0.0;
  std::uint64_t examined = 0;
  constexpr std::size_t kChunk = 2048;

  const int k_lo = fixed_orders ? *fixed_orders - 1 : 0;
  const int k_hi = fixed_orders ? *fixed_orders - 1 : bits;
  for (int k = k_lo; k <= k_hi; ++k) {
    const double level_bound = K0 * (k + 1) + eoq_bound;
    if (!fixed_orders && best && level_bound * (1.0 - 1e-12) > best->cost.total) break;
    const auto masks = masks_with_popcount(bits, k);
    const std::size_t chunks = (masks.size() + kChunk - 1) / kChunk;
    const std::optional<double> incoming =
        (!fixed_orders && best) ? std::optional<double>(best->cost.total) : std::nullopt;

    auto results = parallel_map<ExactChunk>(chunks, opts.workers, [&](std::size_t c) {
      ExactChunk out;
      std::vector<int> pts;
      pts.reserve(static_cast<std::size_t>(T));
      const std::size_t end = std::min(masks.size(), (c + 1) * kChunk);
      for (std::size_t idx = c * kChunk; idx < end; ++idx) {
        const std::uint32_t mask = masks[idx];
        pts.assign(1, 1);
        for (int b = 0; b < bits; ++b)
          if (mask & (1u << b)) pts.push_back(b + 2);
        double objective = K0 * static_cast<double>(pts.size());
        std::vector<LotSizingResult> per_item;
        per_item.reserve(inst.items.size());
        for (const auto& it : inst.items) {
          per_item.push_back(lot_size_restricted(T, it.ordering_cost, it.holding_rate, pts));
          objective += per_item.back().cost;
        }
        ++out.examined;
        if (!fixed_orders) {
          double bar = incoming ? *incoming : std::numeric_limits<double>::infinity();
          if (out.best) bar = std::min(bar, out.best->cost.total);
          if (objective * (1.0 - 1e-12) > bar) continue;
        } else if (out.best && objective > out.objective) {
          continue;
        }
        DiscretePolicy pol;
        for (auto& r : per_item) pol.orders.push_back(std::move(r.orders));
        Candidate cand = make_candidate(inst, std::move(pol));
        bool take = !out.best;
        if (!take) {
          take = fixed_orders ? (objective < out.objective ||
                                 canonical_encoding(cand.policy) < canonical_encoding(out.best->policy))
                              : precedes(cand, *out.best);
        }
        if (take) {
          out.best = std::move(cand);
          out.objective = objective;
        }
      }
      return out;
    });

    for (auto& r : results) {
      examined += r.examined;
      if (!r.best) continue;
      bool take = !best;
      if (!take) {
        take = fixed_orders ? (r.objective < best_objective ||
                               (r.objective == best_objective &&
                                canonical_encoding(r.best->policy) < canonical_encoding(best->policy)))
                            : precedes(*r.best, *best);
      }
      if (take) {
        best = std::move(r.best);
        best_objective = r.objective;
      }
    }
  }

  ExactSolution sol;
  sol.policy = std::move(best->policy);
  sol.cost = std::move(best->cost);
  sol.objective = fixed_orders ? best_objective : sol.cost.total;
  sol.joint_sets_examined = examined;
  return sol;
}

}  // namespace detail

/// Exact optimum by enumerating every joint order set containing period 1.
inline ExactSolution solve_exact(const DiscreteInstance& inst, const ExactOptions& opts = {}) {
  return detail::solve_exact_impl(inst, opts, std::nullopt);
}

/// Exact optimum over joint order sets of exactly `joint_orders` periods.
inline ExactSolution solve_exact_fixed_orders(const DiscreteInstance& inst, int joint_orders,
                                              const ExactOptions& opts = {}) {
  return detail::solve_exact_impl(inst, opts, joint_orders);
}

}  // namespace jrp
