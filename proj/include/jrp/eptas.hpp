#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "jrp/core.hpp"
#include "jrp/detail/joint_search.hpp"
#include "jrp/detail/parallel.hpp"
#include "jrp/lotsizing.hpp"
#include "jrp/preprocess.hpp"

namespace jrp {

enum class NStarStrategy { full, geometric };

struct EptasOptions {
  NStarStrategy n_star_strategy = NStarStrategy::full;
  int segment_point_cap = 20;  // allowed points per zero-inventory segment
  int workers = 0;             // 0: JRP_WORKERS or 1
  std::optional<double> time_budget_s;
  std::uint64_t easy_node_cap = 0;  // per enumeration task; 0: unlimited
  bool prune = true;
  bool use_fallbacks = true;
};

/// Everything derived from (T, N*, eps) for one guess of the joint order count.
struct ScenarioParams {
  int inverse_epsilon = 1;
  double epsilon = 1.0;
  int periods = 1;
  int n_star = 1;
  bool easy = false;  // N* < 1/eps^4
  std::int64_t gamma = 1;        // rare/sparse grid spacing, ceil(T/(eps N*))
  std::int64_t gamma_allow = 1;  // allowed-point spacing, ceil(eps T/N*)
  std::int64_t gamma_zero = 1;   // segment length, gamma_allow/eps^4
  double rare_cut = 0.0;         // on sqrt(rho)
  double freq_cut = 0.0;
};

namespace detail {

// k^4 saturated well above any horizon an int can hold.
inline std::int64_t fourth_power_saturated(std::int64_t k) {
  constexpr std::int64_t cap = std::int64_t{1} << 40;
  std::int64_t v = 1;
  for (int i = 0; i < 4; ++i) v = std::min(cap, v * k);
  return v;
}

}  // namespace detail

inline ScenarioParams make_scenario_params(int periods, int n_star, Epsilon eps) {
  if (periods < 1) throw InvalidInstance("periods must be >= 1");
  if (n_star < 1 || n_star > periods) throw InvalidOption("N* must lie in [1, T]");
  ScenarioParams p;
  const std::int64_t k = eps.inverse, T = periods, N = n_star;
  const std::int64_t k4 = detail::fourth_power_saturated(k);
  p.inverse_epsilon = eps.inverse;
  p.epsilon = eps.value();
  p.periods = periods;
  p.n_star = n_star;
  p.easy = N < k4;
  p.gamma = (T * k + N - 1) / N;
  p.gamma_allow = (T + k * N - 1) / (k * N);
  p.gamma_zero = std::min<std::int64_t>(std::int64_t{1} << 40, p.gamma_allow * k4);
  const double kd = static_cast<double>(k), Td = static_cast<double>(T), Nd = static_cast<double>(N);
  p.rare_cut = Td * kd * kd / Nd;
  p.freq_cut = 2.0 * Td / (kd * Nd);
  return p;
}

enum class ItemClass { rare, frequent, average };

inline const char* to_string(ItemClass c) {
  switch (c) {
    case ItemClass::rare: return "rare";
    case ItemClass::frequent: return "frequent";
    default: return "average";
  }
}

/// Rare when sqrt(rho) >= rare_cut (checked first), frequent when
/// sqrt(rho) <= freq_cut, average otherwise.
inline ItemClass classify_ratio(double rho, const ScenarioParams& p) {
  const double r = std::sqrt(rho);
  if (r >= p.rare_cut) return ItemClass::rare;
  if (r <= p.freq_cut) return ItemClass::frequent;
  return ItemClass::average;
}

/// Class of each super-item; the K = 0 group has ratio zero.
inline std::vector<ItemClass> classify_items(const RatioGrouping& grouping, const ScenarioParams& p) {
  std::vector<ItemClass> out;
  out.reserve(grouping.groups.size());
  for (const auto& j : grouping.rho_exponents)
    out.push_back(j ? classify_ratio(std::pow(1.0 + grouping.epsilon, *j), p) : ItemClass::frequent);
  return out;
}

/// {1, ..., 1/eps} together with the rounded powers ceil((1+eps)^j), within [1, T].
inline std::vector<int> duration_menu(Epsilon eps, int periods) {
  std::vector<int> m;
  for (int d = 1; d <= std::min(eps.inverse, periods); ++d) m.push_back(d);
  const double base = 1.0 + eps.value();
  for (double v = 1.0; v <= static_cast<double>(periods); v *= base) {
    const int d = static_cast<int>(std::ceil(v));
    if (d <= periods) m.push_back(d);
  }
  std::sort(m.begin(), m.end());
  m.erase(std::unique(m.begin(), m.end()), m.end());
  return m;
}

/// Calls fn for every easy-scenario joint point set with exactly n_star points:
/// 1, then each next point a menu duration later, all within [1, T].
inline void for_each_easy_point_set(int periods, int n_star, Epsilon eps,
                                    const std::function<void(const std::vector<int>&)>& fn) {
  const auto menu = duration_menu(eps, periods);
  std::vector<int> pts{1};
  std::function<void()> rec = [&] {
    if (static_cast<int>(pts.size()) == n_star) {
      fn(pts);
      return;
    }
    for (int d : menu) {
      if (pts.back() + d > periods) break;
      pts.push_back(pts.back() + d);
      rec();
      pts.pop_back();
    }
  };
  rec();
}

/// Order periods for a subset of the (fused) items.
struct PartialPolicy {
  std::vector<std::size_t> items;
  std::vector<OrderSet> orders;
};

/// Union of two partial policies covering complementary item sets; the joint
/// cost is recomputed on the union of their order periods.
inline Candidate merge_partials(const DiscreteInstance& inst, const PartialPolicy& a, const PartialPolicy& b) {
  const std::size_t n = inst.items.size();
  std::vector<char> seen(n, 0);
  DiscretePolicy pol;
  pol.orders.resize(n);
  for (const PartialPolicy* part : {&a, &b}) {
    if (part->items.size() != part->orders.size()) throw InvalidPolicy("partial policy is malformed");
    for (std::size_t v = 0; v < part->items.size(); ++v) {
      const std::size_t i = part->items[v];
      if (i >= n) throw InvalidPolicy("partial policy references unknown item");
      if (seen[i]) throw InvalidPolicy("item " + std::to_string(i) + " covered by both partial policies");
      seen[i] = 1;
      pol.orders[i] = part->orders[v];
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!seen[i]) throw InvalidPolicy("item " + std::to_string(i) + " covered by neither partial policy");
  return make_candidate(inst, std::move(pol));
}

/// Grid {1, 1 + gamma, 1 + 2 gamma, ...} within [1, T].
inline std::vector<int> rare_grid(const ScenarioParams& p) {
  std::vector<int> g;
  for (std::int64_t t = 1; t <= p.periods; t += p.gamma) g.push_back(static_cast<int>(t));
  return g;
}

/// Each listed item lot-sized on the rare grid.
inline PartialPolicy solve_rare_sparse(const DiscreteInstance& inst, const std::vector<std::size_t>& items,
                                       const ScenarioParams& p) {
  const auto grid = rare_grid(p);
  PartialPolicy out;
  for (std::size_t i : items) {
    const auto& it = inst.items[i];
    out.items.push_back(i);
    out.orders.push_back(lot_size_restricted(inst.periods, it.ordering_cost, it.holding_rate, grid).orders);
  }
  return out;
}

struct SegmentSolution {
  std::vector<OrderSet> orders;  // per item, relative to the segment start
  std::uint64_t subsets = 0;
  bool deadline_hit = false;
};

namespace detail {

inline std::int64_t segment_points(std::int64_t length, std::int64_t gamma_allow) {
  return (length - 1) / gamma_allow + 1;
}

inline void check_segment_cap(std::int64_t length, std::int64_t gamma_allow, int cap) {
  const auto m = segment_points(length, gamma_allow);
  if (m > cap)
    throw LimitExceeded("zero-inventory segment has " + std::to_string(m) + " allowed points, above the cap of " +
                        std::to_string(cap) + " (2^" + std::to_string(m - 1) +
                        " subsets); use a larger epsilon or raise the segment point cap");
}

}  // namespace detail

/// Cheapest joint subset of a segment's allowed points (first point forced) for
/// the given items, each lot-sized within the segment.
inline SegmentSolution solve_segment(const DiscreteInstance& inst, const std::vector<std::size_t>& items,
                                     int length, std::int64_t gamma_allow, const EptasOptions& opts,
                                     std::optional<detail::Clock::time_point> deadline = std::nullopt) {
  detail::check_segment_cap(length, gamma_allow, opts.segment_point_cap);
  const auto m = static_cast<int>(detail::segment_points(length, gamma_allow));
  detail::JointSearchSpec spec;
  spec.instance.periods = length;
  spec.instance.joint_cost = inst.joint_cost;
  for (std::size_t i : items) spec.instance.items.push_back(inst.items[i]);
  for (int s = 1; s < m; ++s) spec.steps.push_back(static_cast<int>(gamma_allow * s));
  spec.max_depth = m;
  spec.candidate_at.assign(static_cast<std::size_t>(m) + 1, 1);
  spec.candidate_at[0] = 0;
  spec.prune = opts.prune;
  spec.deadline = deadline;
  auto r = detail::JointSearcher(spec, std::nullopt).run(-2);
  SegmentSolution out;
  out.orders = std::move(r.best->policy.orders);
  out.subsets = r.candidates;
  out.deadline_hit = r.deadline_hit;
  return out;
}

/// Listed items on zero-inventory segments of gamma_zero periods (the last one
/// possibly shorter); each segment solved independently.
inline PartialPolicy solve_frequent_dense(const DiscreteInstance& inst, const std::vector<std::size_t>& items,
                                          const ScenarioParams& p, const EptasOptions& opts = {},
                                          std::uint64_t* subsets = nullptr) {
  PartialPolicy out;
  out.items = items;
  out.orders.resize(items.size());
  if (items.empty()) return out;
  std::map<int, SegmentSolution> cache;
  for (std::int64_t s = 1; s <= p.periods; s += p.gamma_zero) {
    const int len = static_cast<int>(std::min<std::int64_t>(p.gamma_zero, p.periods - s + 1));
    auto it = cache.find(len);
    if (it == cache.end()) {
      it = cache.emplace(len, solve_segment(inst, items, len, p.gamma_allow, opts)).first;
      if (subsets) *subsets += it->second.subsets;
    }
    for (std::size_t v = 0; v < items.size(); ++v)
      for (int t : it->second.orders[v]) out.orders[v].push_back(static_cast<int>(s - 1 + t));
  }
  return out;
}

/// Best merged policy over every dense/sparse guess for the average items.
inline Candidate solve_difficult(const DiscreteInstance& fused, const RatioGrouping& grouping,
                                 const ScenarioParams& p, const EptasOptions& opts = {}) {
  const auto classes = classify_items(grouping, p);
  std::vector<std::size_t> average;
  for (std::size_t l = 0; l < classes.size(); ++l)
    if (classes[l] == ItemClass::average) average.push_back(l);
  if (average.size() > 20) throw LimitExceeded("too many average items to guess");
  std::optional<Candidate> best;
  for (std::uint32_t mask = 0; mask < (1u << average.size()); ++mask) {
    std::vector<std::size_t> sparse, dense;
    for (std::size_t l = 0; l < classes.size(); ++l) {
      bool is_dense = classes[l] == ItemClass::frequent;
      if (classes[l] == ItemClass::average) {
        const auto pos = std::find(average.begin(), average.end(), l) - average.begin();
        is_dense = (mask >> pos) & 1u;
      }
      (is_dense ? dense : sparse).push_back(l);
    }
    auto c = merge_partials(fused, solve_rare_sparse(fused, sparse, p), solve_frequent_dense(fused, dense, p, opts));
    if (!best || precedes(c, *best)) best = std::move(c);
  }
  return std::move(*best);
}

/// Best easy-scenario policy with exactly n_star joint points available.
inline std::optional<Candidate> solve_easy(const DiscreteInstance& fused, const ScenarioParams& p,
                                           const EptasOptions& opts = {}) {
  detail::JointSearchSpec spec;
  spec.instance = fused;
  spec.steps = duration_menu(Epsilon{p.inverse_epsilon}, p.periods);
  spec.max_depth = p.n_star;
  spec.candidate_at.assign(static_cast<std::size_t>(p.n_star) + 1, 0);
  spec.candidate_at[static_cast<std::size_t>(p.n_star)] = 1;
  spec.prune = opts.prune;
  spec.node_cap = opts.easy_node_cap;
  return detail::JointSearcher(spec, std::nullopt).run(-2).best;
}

struct CandidateRecord {
  std::string scenario;  // easy, difficult or fallback
  int n_star = 0;        // N* for easy/difficult, grid step for fallback
  double cost = 0.0;     // on the original instance
};

struct SolveReport {
  double epsilon_used = 1.0;
  int epsilon_inverse = 1;
  std::optional<int> best_n_star;
  std::string scenario;
  std::map<std::string, std::uint64_t> counters;
  std::vector<CandidateRecord> candidate_costs;
  std::vector<std::string> flags;
  std::map<std::string, double> timings_ms;

  void flag(const std::string& f) {
    if (std::find(flags.begin(), flags.end(), f) == flags.end()) flags.push_back(f);
    std::sort(flags.begin(), flags.end());
  }
};

struct EptasResult {
  DiscretePolicy policy;
  CostBreakdown cost;
  SolveReport report;
};

inline std::vector<int> n_star_candidates(int periods, Epsilon eps, NStarStrategy strategy) {
  std::vector<int> out;
  if (strategy == NStarStrategy::full) {
    for (int n = 1; n <= periods; ++n) out.push_back(n);
    return out;
  }
  const double base = 1.0 + eps.value();
  for (double v = 1.0; v <= static_cast<double>(periods); v *= base) out.push_back(static_cast<int>(std::ceil(v)));
  std::erase_if(out, [&](int n) { return n > periods; });
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace detail {

inline double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct DifficultKey {
  std::int64_t gamma, gamma_allow, gamma_zero;
  std::vector<ItemClass> classes;
  auto tie() const { return std::tie(gamma, gamma_allow, gamma_zero, classes); }
  bool operator<(const DifficultKey& o) const { return tie() < o.tie(); }
};

struct SegmentJob {
  int length;
  std::int64_t gamma_allow;
  std::vector<std::size_t> items;
  auto tie() const { return std::tie(length, gamma_allow, items); }
  bool operator<(const SegmentJob& o) const { return tie() < o.tie(); }
};

}  // namespace detail

/// Rounds and fuses the instance, tries every N* guess (easy or difficult) plus
/// uniform-grid fallbacks, and returns the cheapest policy on the original
/// instance.
inline EptasResult solve_eptas(const DiscreteInstance& inst, double epsilon, const EptasOptions& opts = {}) {
  using detail::Clock;
  const auto t_start = Clock::now();
  validate_instance(inst);
  const Epsilon eps = snap_epsilon(epsilon);
  if (opts.segment_point_cap < 1) throw InvalidOption("segment point cap must be >= 1");
  std::optional<Clock::time_point> deadline;
  if (opts.time_budget_s) {
    if (!(*opts.time_budget_s > 0.0)) throw InvalidOption("time budget must be > 0");
    deadline = t_start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(*opts.time_budget_s));
  }
  const int T = inst.periods;
  const auto rounded = round_costs(inst, eps.value());
  const auto fz = fuse_groups(rounded, eps.value());
  const DiscreteInstance& F = fz.instance;

  EptasResult out;
  SolveReport& rep = out.report;
  rep.epsilon_used = eps.value();
  rep.epsilon_inverse = eps.inverse;
  rep.counters["super_items"] = F.items.size();
  if (fz.grouping.has_zero_cost_group) rep.flag("zero_cost_group");

  std::optional<Candidate> best;
  auto consider = [&](const Candidate& fused_cand, const std::string& scenario, int n_star) {
    Candidate c = make_candidate(inst, unfuse_policy(fz.grouping, fused_cand.policy));
    rep.candidate_costs.push_back({scenario, n_star, c.cost.total});
    if (!best || precedes(c, *best)) {
      best = std::move(c);
      rep.scenario = scenario;
      rep.best_n_star = scenario == "fallback" ? std::nullopt : std::optional<int>(n_star);
    }
  };
  auto expired = [&] {
    if (deadline && Clock::now() >= *deadline) {
      rep.flag("time_budget_exhausted");
      return true;
    }
    return false;
  };

  // Fallbacks: every item lot-sized on a uniform grid.
  auto t0 = Clock::now();
  std::optional<double> incumbent;
  if (opts.use_fallbacks) {
    auto steps = duration_menu(eps, T);
    steps.push_back(T);
    steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
    for (int g : steps) {
      std::vector<int> grid;
      for (int t = 1; t <= T; t += g) grid.push_back(t);
      DiscretePolicy pol;
      for (const auto& it : F.items)
        pol.orders.push_back(lot_size_restricted(T, it.ordering_cost, it.holding_rate, grid).orders);
      Candidate c = make_candidate(F, std::move(pol));
      if (!incumbent || c.cost.total < *incumbent) incumbent = c.cost.total;
      consider(c, "fallback", g);
    }
    rep.counters["fallback_candidates"] = steps.size();
  }
  rep.timings_ms["fallback"] = detail::ms_since(t0);

  const auto n_stars = n_star_candidates(T, eps, opts.n_star_strategy);
  rep.counters["n_star_values"] = n_stars.size();
  std::vector<int> easy_depths, hard_depths;
  for (int n : n_stars) (make_scenario_params(T, n, eps).easy ? easy_depths : hard_depths).push_back(n);

  // Easy scenario: one enumeration tree shared by all easy N*.
  t0 = Clock::now();
  if (!easy_depths.empty() && !expired()) {
    detail::JointSearchSpec spec;
    spec.instance = F;
    spec.steps = duration_menu(eps, T);
    spec.max_depth = easy_depths.back();
    spec.candidate_at.assign(static_cast<std::size_t>(spec.max_depth) + 1, 0);
    for (int n : easy_depths) spec.candidate_at[static_cast<std::size_t>(n)] = 1;
    spec.prune = opts.prune;
    spec.node_cap = opts.easy_node_cap;
    spec.deadline = deadline;
    std::vector<int> branches{-1};
    if (spec.max_depth >= 2)
      for (std::size_t i = 0; i < spec.steps.size() && 1 + spec.steps[i] <= T; ++i)
        branches.push_back(static_cast<int>(i));
    auto parts = detail::parallel_map<detail::JointSearchResult>(
        branches.size(), opts.workers,
        [&](std::size_t b) { return detail::JointSearcher(spec, incumbent).run(branches[b]); });
    detail::JointSearchResult easy;
    for (auto& part : parts) detail::absorb(easy, std::move(part));
    rep.counters["easy_nodes"] = easy.nodes;
    rep.counters["easy_candidates"] = easy.candidates;
    if (easy.node_cap_hit) rep.flag("easy_node_cap_reached");
    if (easy.deadline_hit) rep.flag("time_budget_exhausted");
    if (easy.best) consider(*easy.best, "easy", easy.best_depth);
  }
  rep.timings_ms["easy"] = detail::ms_since(t0);

  // Difficult scenario: N* values sharing grids and classes give identical
  // candidates, so each distinct key is solved once.
  t0 = Clock::now();
  if (!hard_depths.empty() && !expired()) {
    std::map<detail::DifficultKey, std::size_t> key_index;
    std::vector<ScenarioParams> reps;
    std::vector<std::vector<ItemClass>> rep_classes;
    for (int n : hard_depths) {
      const auto p = make_scenario_params(T, n, eps);
      auto cls = classify_items(fz.grouping, p);
      detail::DifficultKey key{p.gamma, p.gamma_allow, p.gamma_zero, cls};
      if (key_index.emplace(key, reps.size()).second) {
        reps.push_back(p);
        rep_classes.push_back(std::move(cls));
      }
    }
    rep.counters["difficult_keys"] = reps.size();

    // Guesses per key: (key, dense items, sparse items).
    struct Guess {
      std::size_t key;
      std::vector<std::size_t> dense, sparse;
    };
    std::vector<Guess> guesses;
    std::map<detail::SegmentJob, std::size_t> jobs;
    std::vector<detail::SegmentJob> job_list;
    for (std::size_t k = 0; k < reps.size(); ++k) {
      const auto& cls = rep_classes[k];
      std::vector<std::size_t> average;
      for (std::size_t l = 0; l < cls.size(); ++l)
        if (cls[l] == ItemClass::average) average.push_back(l);
      if (average.size() > 20) throw LimitExceeded("too many average items to guess");
      for (std::uint32_t mask = 0; mask < (1u << average.size()); ++mask) {
        Guess g{k, {}, {}};
        std::size_t pos = 0;
        for (std::size_t l = 0; l < cls.size(); ++l) {
          bool is_dense = cls[l] == ItemClass::frequent;
          if (cls[l] == ItemClass::average) is_dense = (mask >> pos++) & 1u;
          (is_dense ? g.dense : g.sparse).push_back(l);
        }
        if (!g.dense.empty()) {
          const auto& p = reps[k];
          for (std::int64_t s = 1; s <= T; s += p.gamma_zero) {
            const int len = static_cast<int>(std::min<std::int64_t>(p.gamma_zero, T - s + 1));
            detail::check_segment_cap(len, p.gamma_allow, opts.segment_point_cap);
            detail::SegmentJob job{len, p.gamma_allow, g.dense};
            if (jobs.emplace(job, job_list.size()).second) job_list.push_back(job);
          }
        }
        guesses.push_back(std::move(g));
      }
    }
    rep.counters["difficult_guesses"] = guesses.size();
    rep.counters["dense_segments"] = job_list.size();

    auto seg = detail::parallel_map<SegmentSolution>(job_list.size(), opts.workers, [&](std::size_t j) {
      const auto& job = job_list[j];
      return solve_segment(F, job.items, job.length, job.gamma_allow, opts, deadline);
    });
    std::uint64_t subsets = 0;
    for (const auto& s : seg) {
      subsets += s.subsets;
      if (s.deadline_hit) rep.flag("time_budget_exhausted");
    }
    rep.counters["dense_subsets"] = subsets;

    auto merged = detail::parallel_map<Candidate>(guesses.size(), opts.workers, [&](std::size_t gi) {
      const auto& g = guesses[gi];
      const auto& p = reps[g.key];
      PartialPolicy dense{g.dense, std::vector<OrderSet>(g.dense.size())};
      if (!g.dense.empty()) {
        for (std::int64_t s = 1; s <= T; s += p.gamma_zero) {
          const int len = static_cast<int>(std::min<std::int64_t>(p.gamma_zero, T - s + 1));
          const auto& sol = seg[jobs.at(detail::SegmentJob{len, p.gamma_allow, g.dense})];
          for (std::size_t v = 0; v < g.dense.size(); ++v)
            for (int t : sol.orders[v]) dense.orders[v].push_back(static_cast<int>(s - 1 + t));
        }
      }
      return merge_partials(F, solve_rare_sparse(F, g.sparse, p), dense);
    });
    std::vector<std::optional<Candidate>> per_key(reps.size());
    for (std::size_t gi = 0; gi < guesses.size(); ++gi) {
      auto& slot = per_key[guesses[gi].key];
      if (!slot || precedes(merged[gi], *slot)) slot = std::move(merged[gi]);
    }
    for (std::size_t k = 0; k < reps.size(); ++k) consider(*per_key[k], "difficult", reps[k].n_star);
  }
  rep.timings_ms["difficult"] = detail::ms_since(t0);

  if (!best) throw BudgetExpired("time budget expired before any candidate was produced");
  out.policy = std::move(best->policy);
  out.cost = std::move(best->cost);
  if (rep.scenario == "fallback") rep.flag("fallback_selected");
  rep.timings_ms["total"] = detail::ms_since(t_start);
  return out;
}

}  // namespace jrp
