#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "jrp/core.hpp"

namespace jrp::detail {

using Clock = std::chrono::steady_clock;

// Depth-first enumeration of joint point sets 1 = p_1 < p_2 < ... where every
// gap is taken from `steps`. Each node extends a per-item forward DP over the
// current prefix, so a candidate point set is priced in O(depth) per item.
//
// The search objective charges K0 for every point of the set, used or not;
// candidates are then priced exactly on the points their items use. A set
// with unused points is never better than its used subset under the search
// objective, and the bound below is tight enough to cut deep trees.
struct JointSearchSpec {
  DiscreteInstance instance;       // horizon, K0 and items of the subproblem
  std::vector<int> steps;          // ascending positive gaps
  int max_depth = 1;               // largest number of points in a set
  std::vector<char> candidate_at;  // [d]: d-point sets are candidates
  bool prune = true;
  std::uint64_t node_cap = 0;  // 0: unlimited
  std::optional<Clock::time_point> deadline;
};

struct JointSearchResult {
  std::optional<Candidate> best;
  int best_depth = 0;
  std::uint64_t nodes = 0;
  std::uint64_t candidates = 0;
  bool node_cap_hit = false;
  bool deadline_hit = false;
};

// Lower bound on the cost of covering the last R periods after an order,
// when the next order is at least `a` periods away and at most `b` further
// orders remain. Relaxes order counts and positions to reals; the resulting
// function of the first gap is convex and piecewise quadratic, so its minimum
// lies on one of the listed breakpoints.
inline double tail_bound(double K, double H, std::int64_t R, std::int64_t a, std::int64_t b) {
  const double Rd = static_cast<double>(R);
  double best = H * Rd * Rd;
  if (b < 1 || a > R - 1) return best;
  const double bd = static_cast<double>(b);
  const double r = K > 0.0 ? std::sqrt(K / H) : 0.0;
  auto cont = [&](double x) {
    if (K <= 0.0) return H * x * x / bd;
    const double m = std::clamp(x / r, 1.0, bd);
    return K * m + H * x * x / m;
  };
  const double lo = static_cast<double>(a), hi = static_cast<double>(R - 1);
  for (double d : {lo, hi, Rd / 2.0, Rd / (bd + 1.0), r, Rd - r, Rd - bd * r}) {
    d = std::clamp(d, lo, hi);
    best = std::min(best, H * d * d + cont(Rd - d));
  }
  return best;
}

class JointSearcher {
 public:
  JointSearcher(const JointSearchSpec& spec, std::optional<double> incumbent)
      : s_(spec), T_(spec.instance.periods), K0_(spec.instance.joint_cost) {
    const std::size_t n = s_.instance.items.size();
    const auto depth = static_cast<std::size_t>(s_.max_depth);
    points_.assign(depth, 0);
    g_.assign(n, std::vector<double>(depth));
    cnt_.assign(n, std::vector<int>(depth));
    pred_.assign(n, std::vector<int>(depth));
    bar_ = incumbent.value_or(std::numeric_limits<double>::infinity());
    min_step_ = s_.steps.empty() ? T_ : s_.steps.front();
  }

  // branch < 0: the one-point set and everything below it when branch == -2,
  // only the one-point set when branch == -1; branch >= 0: the subtree whose
  // second point is 1 + steps[branch].
  JointSearchResult run(int branch) {
    push(0, 1);
    if (branch == -2) {
      dfs(1);
    } else if (branch == -1) {
      visit(1, false);
    } else {
      const int p = 1 + s_.steps[static_cast<std::size_t>(branch)];
      if (s_.max_depth >= 2 && p <= T_) {
        push(1, p);
        dfs(2);
      }
    }
    return std::move(res_);
  }

 private:
  void push(int d, int p) {
    const auto du = static_cast<std::size_t>(d);
    points_[du] = p;
    for (std::size_t l = 0; l < g_.size(); ++l) {
      const double K = s_.instance.items[l].ordering_cost, H = s_.instance.items[l].holding_rate;
      if (d == 0) {
        g_[l][0] = K;
        cnt_[l][0] = 1;
        pred_[l][0] = -1;
        continue;
      }
      double best = std::numeric_limits<double>::infinity();
      int arg = -1;
      for (std::size_t i = 0; i < du; ++i) {
        const double gap = static_cast<double>(p - points_[i]);
        const double hold = H * gap * gap;
        if (g_[l][i] + hold < best) {
          best = g_[l][i] + hold;
          arg = static_cast<int>(i);
        }
      }
      g_[l][du] = K + best;
      cnt_[l][du] = cnt_[l][static_cast<std::size_t>(arg)] + 1;
      pred_[l][du] = arg;
    }
  }

  // K0 for the d points so far, each item's best prefix plus relaxed tail, and
  // K0 for the future orders of the item needing the most of them.
  double lower_bound(int d) const {
    const int last = points_[static_cast<std::size_t>(d - 1)];
    const std::int64_t room = (T_ - last) / min_step_;
    const std::int64_t b = std::min<std::int64_t>(room, s_.max_depth - d);
    double sum = 0.0, extra = 0.0;
    for (std::size_t l = 0; l < g_.size(); ++l) {
      const double K = s_.instance.items[l].ordering_cost, H = s_.instance.items[l].holding_rate;
      double lb = std::numeric_limits<double>::infinity(), lbj = lb;
      for (int j = 0; j < d; ++j) {
        const int pj = points_[static_cast<std::size_t>(j)];
        const std::int64_t R = T_ + 1 - pj;
        const std::int64_t a = last + min_step_ - pj;
        lb = std::min(lb, g_[l][static_cast<std::size_t>(j)] + tail_bound(K, H, R, a, b));
        lbj = std::min(lbj, g_[l][static_cast<std::size_t>(j)] + tail_bound(K + K0_, H, R, a, b));
      }
      sum += lb;
      extra = std::max(extra, lbj - lb);
    }
    return K0_ * d + sum + extra;
  }

  bool out_of_budget() {
    if (s_.node_cap && res_.nodes >= s_.node_cap) {
      res_.node_cap_hit = true;
      return true;
    }
    if (s_.deadline && (res_.nodes & 1023u) == 0 && Clock::now() >= *s_.deadline) {
      res_.deadline_hit = true;
      return true;
    }
    return false;
  }

  // Returns false when the subtree below this node can be skipped.
  bool visit(int d, bool expand) {
    ++res_.nodes;
    if (s_.prune && std::isfinite(bar_) && lower_bound(d) * (1.0 - 1e-12) > bar_) return false;
    if (s_.candidate_at[static_cast<std::size_t>(d)]) evaluate(d);
    return expand;
  }

  void dfs(int d) {
    if (stop_) return;
    if (out_of_budget()) {
      stop_ = true;
      return;
    }
    if (!visit(d, true) || d == s_.max_depth) return;
    const int last = points_[static_cast<std::size_t>(d - 1)];
    for (int step : s_.steps) {
      const int p = last + step;
      if (p > T_) break;
      push(d, p);
      dfs(d + 1);
      if (stop_) return;
    }
  }

  void evaluate(int d) {
    ++res_.candidates;
    const std::size_t n = g_.size();
    double sum = 0.0;
    int max_count = 0;
    arg_.assign(n, 0);
    for (std::size_t l = 0; l < n; ++l) {
      const double H = s_.instance.items[l].holding_rate;
      double best = std::numeric_limits<double>::infinity();
      for (int j = 0; j < d; ++j) {
        const double R = static_cast<double>(T_ + 1 - points_[static_cast<std::size_t>(j)]);
        const double c = g_[l][static_cast<std::size_t>(j)] + H * R * R;
        if (c < best) {
          best = c;
          arg_[l] = j;
        }
      }
      sum += best;
      max_count = std::max(max_count, cnt_[l][static_cast<std::size_t>(arg_[l])]);
    }
    if ((sum + K0_ * max_count) * (1.0 - 1e-12) > bar_) return;
    DiscretePolicy pol;
    pol.orders.resize(n);
    for (std::size_t l = 0; l < n; ++l) {
      auto& o = pol.orders[l];
      for (int j = arg_[l]; j >= 0; j = pred_[l][static_cast<std::size_t>(j)])
        o.push_back(points_[static_cast<std::size_t>(j)]);
      std::reverse(o.begin(), o.end());
    }
    Candidate c = make_candidate(s_.instance, std::move(pol));
    if (!res_.best || precedes(c, *res_.best)) {
      bar_ = std::min(bar_, c.cost.total);
      res_.best = std::move(c);
      res_.best_depth = d;
    }
  }

  const JointSearchSpec& s_;
  int T_;
  double K0_;
  int min_step_ = 1;
  std::vector<int> points_;
  std::vector<std::vector<double>> g_;  // prefix DP: orders up to and including point j
  std::vector<std::vector<int>> cnt_, pred_;
  std::vector<int> arg_;
  double bar_;
  bool stop_ = false;
  JointSearchResult res_;
};

// Folds task results in index order; precedes() keeps the choice independent
// of scheduling.
inline void absorb(JointSearchResult& into, JointSearchResult&& part) {
  into.nodes += part.nodes;
  into.candidates += part.candidates;
  into.node_cap_hit = into.node_cap_hit || part.node_cap_hit;
  into.deadline_hit = into.deadline_hit || part.deadline_hit;
  if (part.best && (!into.best || precedes(*part.best, *into.best))) {
    into.best = std::move(part.best);
    into.best_depth = part.best_depth;
  }
}

}  // namespace jrp::detail
