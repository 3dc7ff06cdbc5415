#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jrp/core.hpp"
#include "jrp/detail/parallel.hpp"
#include "jrp/eptas.hpp"
#include "jrp/preprocess.hpp"

namespace jrp {

struct CandidateLength {
  double length = 0.0;         // L, time units
  int periods = 1;             // T_p
  double period_length = 0.0;  // delta = L / T_p
};

struct PeriodGrid {
  int periods = 1;                  // T_p actually used
  std::int64_t theoretical = 1;     // 36 n^3 / eps^6, saturated
  bool truncated = false;           // an override cut the theoretical grid
};

/// Periods per cycle for n regular items. An override caps the count.
inline PeriodGrid period_grid(std::size_t n, Epsilon eps, std::optional<std::int64_t> tp_override = std::nullopt) {
  if (tp_override && *tp_override < 1) throw InvalidOption("tp override must be >= 1");
  constexpr std::int64_t kMax = std::numeric_limits<std::int64_t>::max();
  std::int64_t t = 36;
  auto mul = [&](std::int64_t f) { t = (f != 0 && t > kMax / f) ? kMax : t * f; };
  for (int i = 0; i < 3; ++i) mul(static_cast<std::int64_t>(std::max<std::size_t>(n, 1)));
  for (int i = 0; i < 6; ++i) mul(eps.inverse);
  PeriodGrid g;
  g.theoretical = t;
  std::int64_t used = t;
  if (tp_override && *tp_override < t) {
    used = *tp_override;
    g.truncated = true;
  }
  if (used > std::numeric_limits<int>::max())
    throw LimitExceeded("discretization needs " + std::to_string(used) +
                        " periods per cycle; pass a tp override to cap the grid");
  g.periods = static_cast<int>(used);
  return g;
}

/// Aggregate bound K0 + n (K_max + H_max) over the given items.
inline double aggregate_bound(const ContinuousInstance& inst) {
  double kmax = 0.0, hmax = 0.0;
  for (const auto& it : inst.items) {
    kmax = std::max(kmax, it.ordering_cost);
    hmax = std::max(hmax, it.holding_rate);
  }
  return inst.joint_cost + static_cast<double>(inst.items.size()) * (kmax + hmax);
}

/// Geometric cycle lengths with ratio 1 + eps spanning
/// [K0/(16M), 16M/(eps^2 H_min)], both ends included. Call on regular items.
inline std::vector<CandidateLength> candidate_lengths(const ContinuousInstance& inst, double epsilon,
                                                      std::optional<std::int64_t> tp_override = std::nullopt) {
  std::vector<CandidateLength> out;
  if (inst.items.empty()) return out;
  validate_instance(inst);
  const Epsilon eps = snap_epsilon(epsilon);
  const double e = eps.value();
  const double M = aggregate_bound(inst);
  double hmin = std::numeric_limits<double>::infinity();
  for (const auto& it : inst.items) hmin = std::min(hmin, it.holding_rate);
  const double lo = inst.joint_cost / (16.0 * M);
  const double hi = 16.0 * M / (e * e * hmin);
  const double ratio = 1.0 + e;
  const int m = static_cast<int>(std::ceil(std::log(hi / lo) / std::log(ratio)));
  const PeriodGrid grid = period_grid(inst.items.size(), eps, tp_override);
  auto add = [&](double L) { out.push_back({L, grid.periods, L / grid.periods}); };
  for (int k = 0; k < m; ++k) {
    const double L = lo * std::pow(ratio, k);
    if (L >= hi * (1.0 - 1e-12)) break;
    add(L);
  }
  add(hi);
  return out;
}

/// Uniform-period instance over one cycle: durations of d periods cost
/// H (d delta)^2, so holding rates scale by delta^2.
inline DiscreteInstance discretize(const ContinuousInstance& inst, const CandidateLength& c) {
  if (c.periods < 1) throw InvalidOption("discretization needs at least one period");
  if (!(c.period_length > 0.0)) throw InvalidOption("period length must be > 0");
  DiscreteInstance d;
  d.periods = c.periods;
  d.joint_cost = inst.joint_cost;
  for (const auto& it : inst.items) {
    Item x = it;
    x.holding_rate = it.holding_rate * c.period_length * c.period_length;
    d.items.push_back(std::move(x));
  }
  return d;
}

/// Period t becomes offset (t - 1) delta in a cycle of length L.
inline CyclicPolicy lift_policy(const DiscretePolicy& policy, double length, double period_length) {
  CyclicPolicy p;
  p.cycle_length = length;
  for (const auto& o : policy.orders) {
    std::vector<double> off;
    off.reserve(o.size());
    for (int t : o) off.push_back(static_cast<double>(t - 1) * period_length);
    p.offsets.push_back(std::move(off));
  }
  return p;
}

struct ContinuousOptions {
  EptasOptions eptas;
  std::optional<std::int64_t> tp_override;
  int lengths_thin = 1;  // keep every k-th candidate length
};

struct LengthRecord {
  double length = 0.0;
  double avg_cost = 0.0;
  bool fallback = false;  // the all-items-once policy beat the discrete solve
};

struct ContinuousReport {
  double epsilon_used = 1.0;
  int epsilon_inverse = 1;
  int periods = 0;
  std::int64_t theoretical_periods = 0;
  std::optional<double> best_length;
  std::vector<LengthRecord> lengths;
  std::vector<std::size_t> expensive_items;
  std::vector<std::size_t> raised_items;
  std::optional<SolveReport> discrete;  // report of the discrete solve at the best length
  std::map<std::string, std::uint64_t> counters;
  std::vector<std::string> flags;
  std::map<std::string, double> timings_ms;

  void flag(const std::string& f) {
    if (std::find(flags.begin(), flags.end(), f) == flags.end()) flags.push_back(f);
    std::sort(flags.begin(), flags.end());
  }
};

struct ContinuousResult {
  CyclicPolicy policy;
  double avg_cost = 0.0;
  ContinuousReport report;
};

namespace detail {

struct LengthOutcome {
  CyclicPolicy policy;
  double avg_cost = std::numeric_limits<double>::infinity();
  bool fallback = false;
  std::optional<SolveReport> report;
};

}  // namespace detail

/// Solve a continuous instance: detach expensive items onto their own EOQ
/// streams, then for each candidate cycle length discretize the rest, solve
/// it, and lift back. The cheapest cycle on the original costs wins.
inline ContinuousResult solve_continuous(const ContinuousInstance& inst, double epsilon,
                                         const ContinuousOptions& opts = {}) {
  using Clock = std::chrono::steady_clock;
  const auto t_start = Clock::now();
  validate_instance(inst);
  if (!(inst.joint_cost > 0.0)) throw InvalidInstance("continuous instances need K0 > 0");
  if (opts.lengths_thin < 1) throw InvalidOption("lengths thinning factor must be >= 1");
  const Epsilon eps = snap_epsilon(epsilon);
  const std::size_t n = inst.items.size();

  const auto split = split_continuous(inst, eps.value());
  ContinuousResult res;
  auto& rep = res.report;
  rep.epsilon_used = eps.value();
  rep.epsilon_inverse = eps.inverse;
  for (const auto& e : split.expensive) rep.expensive_items.push_back(e.item);
  for (std::size_t r = 0; r < split.regular.size(); ++r)
    if (split.raised[r]) rep.raised_items.push_back(split.regular[r]);

  std::vector<DetachedStream> streams;
  for (const auto& e : split.expensive) streams.push_back({e.item, e.eoq_period});

  auto full_policy = [&](double L, const std::vector<std::vector<double>>& regular_offsets) {
    CyclicPolicy p;
    p.cycle_length = L;
    p.offsets.assign(n, {});
    for (std::size_t r = 0; r < split.regular.size(); ++r) p.offsets[split.regular[r]] = regular_offsets[r];
    p.detached_streams = streams;
    return p;
  };

  if (split.regular.empty()) {
    res.policy = full_policy(1.0, {});
    res.avg_cost = evaluate_cyclic_avg_cost(inst, res.policy);
    rep.flag("all_items_detached");
    rep.counters["lengths"] = 0;
    rep.counters["expensive_items"] = rep.expensive_items.size();
    rep.timings_ms["total"] = std::chrono::duration<double, std::milli>(Clock::now() - t_start).count();
    return res;
  }

  const auto all_lengths = candidate_lengths(split.regular_instance, eps.value(), opts.tp_override);
  const PeriodGrid grid = period_grid(split.regular.size(), eps, opts.tp_override);
  rep.periods = grid.periods;
  rep.theoretical_periods = grid.theoretical;
  if (grid.truncated) rep.flag("tp_truncated");
  std::vector<CandidateLength> lengths;
  for (std::size_t i = 0; i < all_lengths.size(); i += static_cast<std::size_t>(opts.lengths_thin))
    lengths.push_back(all_lengths[i]);
  if (lengths.size() < all_lengths.size()) rep.flag("lengths_thinned");
  rep.counters["lengths"] = all_lengths.size();
  rep.counters["lengths_evaluated"] = lengths.size();
  rep.counters["expensive_items"] = rep.expensive_items.size();
  rep.counters["raised_items"] = rep.raised_items.size();

  // Lengths run in parallel; each discrete solve stays single-threaded.
  EptasOptions inner = opts.eptas;
  inner.workers = 1;
  const std::vector<std::vector<double>> once(split.regular.size(), std::vector<double>{0.0});
  auto outcomes = detail::parallel_map<detail::LengthOutcome>(lengths.size(), opts.eptas.workers, [&](std::size_t i) {
    const auto& c = lengths[i];
    detail::LengthOutcome out;
    out.policy = full_policy(c.length, once);
    out.avg_cost = evaluate_cyclic_avg_cost(inst, out.policy);
    out.fallback = true;
    const auto disc = discretize(split.regular_instance, c);
    auto r = solve_eptas(disc, eps.value(), inner);
    const auto lifted = lift_policy(r.policy, c.length, c.period_length);
    auto p = full_policy(c.length, lifted.offsets);
    const double avg = evaluate_cyclic_avg_cost(inst, p);
    if (avg <= out.avg_cost) {
      out.policy = std::move(p);
      out.avg_cost = avg;
      out.fallback = false;
    }
    out.report = std::move(r.report);
    return out;
  });

  std::size_t best = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    rep.lengths.push_back({lengths[i].length, outcomes[i].avg_cost, outcomes[i].fallback});
    if (outcomes[i].avg_cost < outcomes[best].avg_cost) best = i;
  }
  res.policy = std::move(outcomes[best].policy);
  res.avg_cost = outcomes[best].avg_cost;
  rep.best_length = lengths[best].length;
  rep.discrete = std::move(outcomes[best].report);
  if (outcomes[best].fallback) rep.flag("fallback_selected");
  if (rep.discrete && rep.discrete->flags.end() != std::find(rep.discrete->flags.begin(), rep.discrete->flags.end(),
                                                             "time_budget_exhausted"))
    rep.flag("time_budget_exhausted");
  rep.timings_ms["total"] = std::chrono::duration<double, std::milli>(Clock::now() - t_start).count();
  return res;
}

}  // namespace jrp
