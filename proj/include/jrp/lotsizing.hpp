#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jrp/core.hpp"

namespace jrp {

/// Periods where a single item may order. The first point is mandatory in
/// every solution (inventory starts at zero there).
class AllowedPoints {
 public:
  AllowedPoints() = default;
  explicit AllowedPoints(std::vector<int> points) : points_(std::move(points)) {
    if (points_.empty()) throw std::invalid_argument("allowed point set is empty");
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (points_[i] < 1) throw std::invalid_argument("allowed points must be >= 1");
      if (i > 0 && points_[i] <= points_[i - 1])
        throw std::invalid_argument("allowed points must be strictly increasing");
    }
  }

  /// 1..periods.
  static AllowedPoints all(int periods) {
    std::vector<int> p(static_cast<std::size_t>(periods));
    for (int t = 0; t < periods; ++t) p[static_cast<std::size_t>(t)] = t + 1;
    return AllowedPoints(std::move(p));
  }

  /// start, start+step, ... up to and including end.
  static AllowedPoints uniform(int start, int step, int end) {
    std::vector<int> p;
    for (int t = start; t <= end; t += step) p.push_back(t);
    return AllowedPoints(std::move(p));
  }

  std::span<const int> points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  int front() const { return points_.front(); }
  int back() const { return points_.back(); }

 private:
  std::vector<int> points_;
};

struct LotSizingResult {
  OrderSet orders;
  int order_count = 0;
  std::int64_t squared_durations = 0;
  double cost = 0.0;
};

/// K·N + H·Q, always evaluated from the integer pair so that equal order
/// patterns yield bit-identical costs on every code path.
inline double single_item_cost(double K, double H, std::int64_t orders, std::int64_t q) {
  return K * static_cast<double>(orders) + H * static_cast<double>(q);
}

/// EOQ bound: any policy over a window of `length` periods costs
/// at least 2·length·sqrt(K·H).
inline double single_item_lower_bound(int length, double K, double H) {
  return 2.0 * static_cast<double>(length) * std::sqrt(K * H);
}

/// Minimum sum of squared durations for `orders` orders spread over `horizon`
/// periods: T²/N.
inline double q_lower_bound(int horizon, int orders) {
  if (orders < 1) throw std::invalid_argument("q_lower_bound: order count must be >= 1");
  const double t = static_cast<double>(horizon);
  return t * t / static_cast<double>(orders);
}

namespace detail {

inline void check_lot_sizing_args(int horizon, double K, double H, std::span<const int> allowed) {
  if (allowed.empty()) throw std::invalid_argument("lot sizing: empty allowed set");
  if (allowed.back() > horizon)
    throw std::invalid_argument("lot sizing: allowed point " + std::to_string(allowed.back()) +
                                " beyond horizon " + std::to_string(horizon));
  if (K < 0.0 || !(H > 0.0)) throw std::invalid_argument("lot sizing: need K >= 0 and H > 0");
}

struct SuffixState {
  double cost = std::numeric_limits<double>::infinity();
  std::int64_t count = 0;
  std::int64_t q = 0;
  int next = -1;  // index of the following order, -1 when terminal
};

// Candidate (count, q) beats the incumbent under (cost, count); exact ties keep
// the incumbent, which was generated from a lexicographically smaller suffix.
inline bool improves(double K, double H, std::int64_t count, std::int64_t q,
                     const SuffixState& cur) {
  const double c = single_item_cost(K, H, count, q);
  if (c != cur.cost) return c < cur.cost;
  return count < cur.count;
}

}  // namespace detail

/// Optimal order set restricted to `allowed` (first point forced), minimizing
/// K·|S| + H·Σ durations² with the final duration running to horizon + 1.
/// Ties prefer fewer orders, then the lexicographically smallest list.
inline LotSizingResult lot_size_restricted(int horizon, double K, double H,
                                           std::span<const int> allowed,
                                           std::optional<int> max_orders = std::nullopt) {
  detail::check_lot_sizing_args(horizon, K, H, allowed);
  if (max_orders && *max_orders < 1)
    throw std::invalid_argument("lot sizing: max_orders must be >= 1");
  const int m = static_cast<int>(allowed.size());
  const int budget = max_orders ? std::min(*max_orders, m) : m;
  auto sq = [](std::int64_t d) { return d * d; };

  // best[r][j]: best suffix starting with an order at allowed[j] using at most
  // r + 1 orders. Without a budget only the last layer is needed, and the
  // layered recurrence collapses to a single pass.
  const bool layered = max_orders.has_value() && budget < m;
  const int layers = layered ? budget : 1;
  std::vector<std::vector<detail::SuffixState>> best(
      static_cast<std::size_t>(layers), std::vector<detail::SuffixState>(static_cast<std::size_t>(m)));

  for (int r = 0; r < layers; ++r) {
    auto& row = best[static_cast<std::size_t>(r)];
    for (int j = m - 1; j >= 0; --j) {
      auto& s = row[static_cast<std::size_t>(j)];
      s.count = 1;
      s.q = sq(horizon + 1 - allowed[static_cast<std::size_t>(j)]);
      s.cost = single_item_cost(K, H, s.count, s.q);
      s.next = -1;
      if (layered && r == 0) continue;
      const auto& src = layered ? best[static_cast<std::size_t>(r - 1)] : row;
      for (int jn = j + 1; jn < m; ++jn) {
        const auto& t = src[static_cast<std::size_t>(jn)];
        const std::int64_t count = 1 + t.count;
        const std::int64_t q =
            sq(allowed[static_cast<std::size_t>(jn)] - allowed[static_cast<std::size_t>(j)]) + t.q;
        if (detail::improves(K, H, count, q, s)) {
          s.cost = single_item_cost(K, H, count, q);
          s.count = count;
          s.q = q;
          s.next = jn;
        }
      }
    }
  }

  LotSizingResult res;
  int r = layers - 1;
  int j = 0;
  const auto& head = best[static_cast<std::size_t>(r)][0];
  res.cost = head.cost;
  res.order_count = static_cast<int>(head.count);
  res.squared_durations = head.q;
  while (j >= 0) {
    res.orders.push_back(allowed[static_cast<std::size_t>(j)]);
    const int nx = best[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)].next;
    if (layered) --r;
    j = nx;
  }
  return res;
}

inline LotSizingResult lot_size_restricted(int horizon, double K, double H, const AllowedPoints& allowed,
                                           std::optional<int> max_orders = std::nullopt) {
  return lot_size_restricted(horizon, K, H, allowed.points(), max_orders);
}

/// Exhaustive reference for lot_size_restricted; same objective and tie-break.
inline LotSizingResult lot_size_bruteforce(int horizon, double K, double H,
                                           std::span<const int> allowed) {
  detail::check_lot_sizing_args(horizon, K, H, allowed);
  if (allowed.size() > 20) throw LimitExceeded("lot_size_bruteforce: more than 20 allowed points");
  const std::size_t m = allowed.size();
  LotSizingResult best;
  best.cost = std::numeric_limits<double>::infinity();
  OrderSet cur;
  for (std::uint32_t mask = 0; mask < (1u << (m - 1)); ++mask) {
    cur.assign(1, allowed[0]);
    for (std::size_t b = 1; b < m; ++b)
      if (mask & (1u << (b - 1))) cur.push_back(allowed[b]);
    const std::int64_t q = squared_durations(cur, horizon);
    const auto count = static_cast<std::int64_t>(cur.size());
    const double c = single_item_cost(K, H, count, q);
    const bool better = c < best.cost ||
                        (c == best.cost && (count < best.order_count ||
                                            (count == best.order_count && cur < best.orders)));
    if (better) {
      best.orders = cur;
      best.cost = c;
      best.order_count = static_cast<int>(count);
      best.squared_durations = q;
    }
  }
  return best;
}

}  // namespace jrp
