#pragma once

// Exact baselines for small instances and the certified lower bound on the
// optimal weighted maximum-absence cost.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "patrol/error.hpp"
#include "patrol/instance.hpp"
#include "patrol/mst.hpp"
#include "patrol/schedule.hpp"

namespace patrol {

// Hard limits; every oracle below is exponential in these.
inline constexpr std::size_t kHeldKarpMaxPoints = 16;     // 2^15 * 15 states
inline constexpr std::size_t kBruteForceMaxPoints = 6;    // (n-1)^(period-1) sequences
inline constexpr std::size_t kBruteForceMaxPeriod = 10;
inline constexpr std::size_t kPartitionMaxPoints = 10;    // Bell(10) partitions
inline constexpr std::size_t kPartitionMaxParts = 4;

struct SearchBound {
  std::string method;
  std::size_t max_period = 0;
  /// True when `value` only bounds the optimum from above.
  bool upper_bound_only = false;
};

struct OracleResult {
  CostValue value;
  std::optional<Schedule> schedule;
  std::vector<std::vector<PointId>> partition;
  SearchBound bound;
};

/// Exact optimal closed tour over `subset` by bitmask dynamic programming.
inline OracleResult held_karp_tsp(const Instance& inst, std::span<const PointId> subset) {
  const auto pts = detail::normalized_subset(inst, subset);
  if (pts.empty()) throw ValidationError("TSP over an empty subset");
  if (pts.size() > kHeldKarpMaxPoints) {
    throw LimitError("Held-Karp supports at most " + std::to_string(kHeldKarpMaxPoints) + " points, got " +
                     std::to_string(pts.size()));
  }
  OracleResult out;
  out.bound = {"held-karp", 0, false};
  if (pts.size() == 1) {
    out.value = CostValue(0.0);
    out.schedule = Schedule({pts.front()});
    return out;
  }

  const std::size_t m = pts.size();
  const std::size_t r = m - 1;  // points other than the fixed start pts[0]
  auto d = [&](std::size_t a, std::size_t b) { return inst.dist(pts[a], pts[b]); };
  const std::size_t masks = std::size_t{1} << r;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> cost(masks * r, kInf);
  std::vector<std::uint8_t> prev(masks * r, 0xFF);

  for (std::size_t j = 0; j < r; ++j) cost[(std::size_t{1} << j) * r + j] = d(0, j + 1);
  for (std::size_t mask = 1; mask < masks; ++mask) {
    for (std::size_t j = 0; j < r; ++j) {
      if (!(mask >> j & 1)) continue;
      const double cur = cost[mask * r + j];
      if (cur == kInf) continue;
      for (std::size_t nx = 0; nx < r; ++nx) {
        if (mask >> nx & 1) continue;
        const std::size_t nm = mask | (std::size_t{1} << nx);
        const double c = cur + d(j + 1, nx + 1);
        if (c < cost[nm * r + nx]) {
          cost[nm * r + nx] = c;
          prev[nm * r + nx] = static_cast<std::uint8_t>(j);
        }
      }
    }
  }

  const std::size_t full = masks - 1;
  double best = kInf;
  std::size_t last = 0;
  for (std::size_t j = 0; j < r; ++j) {
    const double c = cost[full * r + j] + d(j + 1, 0);
    if (c < best) {
      best = c;
      last = j;
    }
  }

  std::vector<PointId> order;
  std::size_t mask = full;
  std::size_t j = last;
  while (true) {
    order.push_back(pts[j + 1]);
    const std::uint8_t pj = prev[mask * r + j];
    mask &= ~(std::size_t{1} << j);
    if (mask == 0) break;
    j = pj;
  }
  order.push_back(pts[0]);
  std::reverse(order.begin(), order.end());

  out.value = CostValue(best);
  out.schedule = Schedule(std::move(order));
  return out;
}

namespace detail {

/// Objective of a cyclic visit sequence with every point present; scratch
/// buffers are reused across calls.
class SequenceEvaluator {
 public:
  SequenceEvaluator(const Instance& inst, double p) : inst_(inst), p_(p), gaps_(inst.size()) {}

  double operator()(std::span<const PointId> seq) {
    const std::size_t L = seq.size();
    arrival_.assign(L + 1, 0.0);
    for (std::size_t i = 0; i < L; ++i) arrival_[i + 1] = arrival_[i] + inst_.dist(seq[i], seq[(i + 1) % L]);
    for (auto& g : gaps_) g.clear();
    first_.assign(inst_.size(), L);
    last_.assign(inst_.size(), L);
    for (std::size_t i = 0; i < L; ++i) {
      const PointId x = seq[i];
      if (first_[x] == L) {
        first_[x] = i;
      } else {
        gaps_[x].push_back(arrival_[i] - arrival_[last_[x]]);
      }
      last_[x] = i;
    }
    double worst = 0.0;
    for (PointId x = 0; x < inst_.size(); ++x) {
      gaps_[x].push_back(arrival_[L] - arrival_[last_[x]] + arrival_[first_[x]]);
      worst = std::max(worst, inst_.weight(x) * profile_cost(gaps_[x], p_));
    }
    return worst;
  }

 private:
  const Instance& inst_;
  double p_;
  std::vector<std::vector<double>> gaps_;
  std::vector<double> arrival_;
  std::vector<std::size_t> first_, last_;
};

}  // namespace detail

/// Minimum weighted objective over every cyclic sequence of length
/// n..max_period that visits all points, starts at point 0 and has no
/// immediate repeats. Longer periods may do better, so the value is an upper
/// bound on the true optimum.
inline OracleResult brute_force_weighted_opt(const Instance& inst, double p, std::size_t max_period) {
  check_exponent(p);
  const std::size_t n = inst.size();
  if (n > kBruteForceMaxPoints || max_period > kBruteForceMaxPeriod) {
    throw LimitError("schedule enumeration supports n <= " + std::to_string(kBruteForceMaxPoints) +
                     " and max_period <= " + std::to_string(kBruteForceMaxPeriod));
  }
  OracleResult out;
  out.bound = {"periodic-enumeration", max_period, true};
  if (n == 1) {
    out.value = CostValue(0.0);
    out.schedule = Schedule({0});
    return out;
  }
  if (max_period < n) {
    throw std::invalid_argument("max_period " + std::to_string(max_period) + " cannot cover " +
                                std::to_string(n) + " points");
  }

  detail::SequenceEvaluator evaluate(inst, p);
  double best = std::numeric_limits<double>::infinity();
  std::vector<PointId> best_seq;
  std::vector<PointId> seq;
  std::vector<std::size_t> count(n, 0);
  std::size_t covered = 0;

  for (std::size_t L = n; L <= max_period; ++L) {
    seq.assign(L, 0);
    std::fill(count.begin(), count.end(), 0);
    count[0] = 1;
    covered = 1;
    // Depth-first over positions 1..L-1.
    auto recurse = [&](auto&& self, std::size_t pos) -> void {
      if (n - covered > L - pos) return;
      if (pos == L) {
        if (seq[L - 1] == seq[0]) return;
        const double v = evaluate(seq);
        if (v < best * (1.0 - 1e-12)) {
          best = v;
          best_seq = seq;
        }
        return;
      }
      for (PointId x = 0; x < n; ++x) {
        if (x == seq[pos - 1]) continue;
        seq[pos] = x;
        if (count[x]++ == 0) ++covered;
        self(self, pos + 1);
        if (--count[x] == 0) --covered;
      }
    };
    recurse(recurse, 1);
  }

  out.value = CostValue(best);
  out.schedule = Schedule(std::move(best_seq));
  return out;
}

namespace detail {

/// MST cost only, Prim's algorithm in O(m^2).
inline double mst_cost(const Instance& inst, std::span<const PointId> pts) {
  const std::size_t m = pts.size();
  if (m <= 1) return 0.0;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> key(m, kInf);
  std::vector<bool> in(m, false);
  key[0] = 0.0;
  double total = 0.0;
  for (std::size_t step = 0; step < m; ++step) {
    std::size_t u = m;
    for (std::size_t i = 0; i < m; ++i)
      if (!in[i] && (u == m || key[i] < key[u])) u = i;
    in[u] = true;
    total += key[u];
    for (std::size_t i = 0; i < m; ++i)
      if (!in[i]) key[i] = std::min(key[i], inst.dist(pts[u], pts[i]));
  }
  return total;
}

}  // namespace detail

/// Best partition of `subset` into at most k parts, scored by the most
/// expensive part MST. Covers may overlap, so this bounds the min-max tree
/// cover optimum from above.
inline OracleResult partition_tree_cover_oracle(const Instance& inst, std::span<const PointId> subset, std::size_t k) {
  const auto pts = detail::normalized_subset(inst, subset);
  if (pts.empty()) throw ValidationError("tree cover of an empty subset");
  if (k == 0) throw std::invalid_argument("tree count k must be at least 1");
  const std::size_t m = pts.size();
  if (m > kPartitionMaxPoints || (k > kPartitionMaxParts && k < m)) {
    throw LimitError("partition oracle supports |subset| <= " + std::to_string(kPartitionMaxPoints) +
                     " and k <= " + std::to_string(kPartitionMaxParts));
  }
  const std::size_t parts = std::min(k, m);

  std::vector<double> mask_cost(std::size_t{1} << m);
  std::vector<PointId> members;
  for (std::size_t mask = 1; mask < mask_cost.size(); ++mask) {
    members.clear();
    for (std::size_t i = 0; i < m; ++i)
      if (mask >> i & 1) members.push_back(pts[i]);
    mask_cost[mask] = detail::mst_cost(inst, members);
  }

  // Restricted growth strings: block[i] <= 1 + max(block[0..i-1]).
  std::vector<std::size_t> block(m, 0), best_block;
  double best = std::numeric_limits<double>::infinity();
  auto recurse = [&](auto&& self, std::size_t i, std::size_t used) -> void {
    if (i == m) {
      std::vector<std::size_t> masks(used, 0);
      for (std::size_t j = 0; j < m; ++j) masks[block[j]] |= std::size_t{1} << j;
      double worst = 0.0;
      for (std::size_t mk : masks) worst = std::max(worst, mask_cost[mk]);
      if (worst < best) {
        best = worst;
        best_block = block;
      }
      return;
    }
    for (std::size_t b = 0; b <= used && b < parts; ++b) {
      block[i] = b;
      self(self, i + 1, std::max(used, b + 1));
    }
  };
  block[0] = 0;
  recurse(recurse, 1, 1);

  OracleResult out;
  out.value = CostValue(best);
  out.bound = {"vertex-partition", 0, true};
  std::size_t nparts = *std::max_element(best_block.begin(), best_block.end()) + 1;
  out.partition.assign(nparts, {});
  for (std::size_t j = 0; j < m; ++j) out.partition[best_block[j]].push_back(pts[j]);
  return out;
}

struct ThresholdBound {
  double weight = 0.0;
  std::size_t points = 0;
  /// Optimal tour of the points with weight >= `weight`, or their MST cost
  /// when the set is too large for Held-Karp.
  double tour_bound = 0.0;
  bool exact_tsp = true;
  double value = 0.0;  // weight * tour_bound
};

struct LowerBound {
  double value = 0.0;
  double pairwise = 0.0;  // largest pairwise distance
  std::vector<ThresholdBound> thresholds;
};

/// Certified lower bound on the optimal weighted maximum-absence cost:
/// the largest of w * TSP({x : w_x >= w}) over weight values w, and the
/// largest pairwise distance.
inline LowerBound lower_bound_certificate(const Instance& inst) {
  LowerBound lb;
  const std::size_t n = inst.size();
  for (PointId a = 0; a < n; ++a)
    for (PointId b = a + 1; b < n; ++b) lb.pairwise = std::max(lb.pairwise, inst.dist(a, b));
  lb.value = lb.pairwise;

  std::vector<PointId> order = all_points(inst);
  std::stable_sort(order.begin(), order.end(), [&](PointId a, PointId b) { return inst.weight(a) > inst.weight(b); });
  std::vector<PointId> heavy;
  for (std::size_t i = 0; i < n;) {
    const double w = inst.weight(order[i]);
    while (i < n && inst.weight(order[i]) == w) heavy.push_back(order[i++]);
    ThresholdBound t;
    t.weight = w;
    t.points = heavy.size();
    t.exact_tsp = heavy.size() <= kHeldKarpMaxPoints;
    t.tour_bound = t.exact_tsp ? held_karp_tsp(inst, heavy).value.value() : detail::mst_cost(inst, heavy);
    t.value = w * t.tour_bound;
    lb.value = std::max(lb.value, t.value);
    lb.thresholds.push_back(t);
  }
  return lb;
}

inline double lower_bound(const Instance& inst) { return lower_bound_certificate(inst).value; }

}  // namespace patrol
