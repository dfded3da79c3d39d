#pragma once

// Patrol security game: an attacker picks a target x and a duration t against
// a periodic schedule started at a uniformly random offset, and collects
// w_x * t if the defender stays away for the whole attack.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "patrol/error.hpp"
#include "patrol/instance.hpp"
#include "patrol/schedule.hpp"

namespace patrol {

/// Probability that an attack of length t on x, started at a uniformly random
/// time, sees no visit: sum_k max(l_k - t, 0) / D. Unvisited targets give 1.
inline double success_probability(const Schedule& s, const Instance& inst, PointId x, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("attack duration must be nonnegative");
  const auto profile = absence_profile(s, x, inst);
  if (!profile) return 1.0;
  const double period = std::accumulate(profile->lengths.begin(), profile->lengths.end(), 0.0);
  if (period == 0.0) return t == 0.0 ? 1.0 : 0.0;
  double survive = 0.0;
  for (double l : profile->lengths) survive += std::max(l - t, 0.0);
  return survive / period;
}

inline double attack_utility(const Schedule& s, const Instance& inst, PointId x, double t) {
  return inst.weight(x) * t * success_probability(s, inst, x, t);
}

/// Mean time until the defender's next visit: half the quadratic cost.
inline CostValue expected_return_time(const Schedule& s, const Instance& inst, PointId x) {
  const CostValue c = point_cost(s, x, inst, 2.0);
  return c.is_unbounded() ? c : CostValue(c.value() / 2.0);
}

struct TargetAttack {
  double duration = 0.0;
  CostValue utility;
};

struct AttackOutcome {
  PointId target = 0;
  double duration = 0.0;
  CostValue utility;
};

namespace detail {

inline bool improves(double candidate, double incumbent) {
  return candidate > incumbent + 1e-12 * std::max(1.0, std::abs(incumbent));
}

}  // namespace detail

/// Exact best duration against a fixed absence profile. The payoff
/// w t sum_k (l_k - t)^+ / D is a concave quadratic between consecutive sorted
/// absence lengths, so each piece peaks at its vertex clamped to the piece.
/// Ties go to the shortest duration.
inline TargetAttack best_attack_on_profile(std::span<const double> lengths, double weight) {
  std::vector<double> l(lengths.begin(), lengths.end());
  std::sort(l.begin(), l.end());
  const double period = std::accumulate(l.begin(), l.end(), 0.0);
  TargetAttack best{0.0, CostValue(0.0)};
  if (period == 0.0) return best;

  const std::size_t m = l.size();
  std::vector<double> suffix(m + 1, 0.0);
  for (std::size_t k = m; k-- > 0;) suffix[k] = suffix[k + 1] + l[k];

  double lo = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    // On [lo, l[j]] the intervals l[j..m-1] are still open.
    const double hi = l[j];
    if (hi > lo) {
      const double open_sum = suffix[j];
      const double open = static_cast<double>(m - j);
      const double t = std::clamp(open_sum / (2.0 * open), lo, hi);
      const double u = weight * t * (open_sum - open * t) / period;
      if (detail::improves(u, best.utility.value())) best = {t, CostValue(u)};
    }
    lo = std::max(lo, hi);
  }
  return best;
}

inline TargetAttack best_attack_on_target(const Schedule& s, const Instance& inst, PointId x) {
  const auto profile = absence_profile(s, x, inst);
  if (!profile) return {std::numeric_limits<double>::infinity(), CostValue::unbounded()};
  return best_attack_on_profile(profile->lengths, inst.weight(x));
}

/// Best (target, duration) over all targets; ties go to the lowest target id.
/// A schedule that skips a target yields an UNBOUNDED outcome on the first
/// skipped target.
inline AttackOutcome attacker_best_response(const Schedule& s, const Instance& inst) {
  const auto profiles = absence_profiles(s, inst);
  for (PointId x = 0; x < inst.size(); ++x) {
    if (!profiles[x]) return {x, std::numeric_limits<double>::infinity(), CostValue::unbounded()};
  }
  AttackOutcome best{0, 0.0, CostValue(-1.0)};
  for (PointId x = 0; x < inst.size(); ++x) {
    const TargetAttack a = best_attack_on_profile(profiles[x]->lengths, inst.weight(x));
    if (detail::improves(a.utility.value(), best.utility.value())) best = {x, a.duration, a.utility};
  }
  return best;
}

// ---------------------------------------------------------------------------
// Derandomizing a mixed strategy into one periodic tour

struct MixedStrategyEntry {
  Schedule schedule;
  double probability = 0.0;
};

struct MixedStrategy {
  std::vector<MixedStrategyEntry> entries;
};

inline void validate_strategy(const MixedStrategy& m, const Instance& inst) {
  if (m.entries.empty()) throw ValidationError("mixed strategy has no entries");
  double total = 0.0;
  for (const auto& e : m.entries) {
    if (!(e.probability > 0.0)) throw ValidationError("mixed strategy probabilities must be positive");
    total += e.probability;
    const auto profiles = absence_profiles(e.schedule, inst);
    for (PointId x = 0; x < inst.size(); ++x) {
      if (!profiles[x]) throw ValidationError("strategy schedule skips point '" + inst.label(x) + "'");
    }
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ValidationError("mixed strategy probabilities sum to " + std::to_string(total) + ", expected 1");
  }
}

/// Output visits above this count are refused.
inline constexpr std::size_t kMaxMixedVisits = 20'000'000;

struct MixResult {
  Schedule schedule;
  std::vector<std::size_t> order;        // entry indices used, by probability descending
  std::vector<std::size_t> repetitions;  // N_i, aligned with `order`
  double threshold_probability = 0.0;    // q
  double longest_period = 0.0;           // D-bar over the used entries
  double scale = 0.0;                    // K
  bool scale_fallback = false;           // K forced to 1: some quadratic cost was zero
};

/// Keeps the most likely tours until they hold half the probability mass and
/// plays tour i N_i = ceil(K (p_i / q) (Dbar / D_i)) times in a row, with
/// K = max_{i,x} 8 Dbar / C2(x, sigma_i). Each point's quadratic cost ends up
/// within 8x of its expectation under the mixed strategy.
inline MixResult mix_tours(const MixedStrategy& m, const Instance& inst) {
  validate_strategy(m, inst);
  std::vector<std::size_t> order(m.entries.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return m.entries[a].probability > m.entries[b].probability;
  });
  std::size_t used = 0;
  double mass = 0.0;
  while (used < order.size() && mass < 0.5) mass += m.entries[order[used++]].probability;
  order.resize(used);

  MixResult r{m.entries[order.front()].schedule, order, {}, m.entries[order.back()].probability};
  std::vector<double> periods;
  double scale = 0.0;
  for (std::size_t idx : order) {
    const Schedule& s = m.entries[idx].schedule;
    periods.push_back(period_length(s, inst));
    r.longest_period = std::max(r.longest_period, periods.back());
  }
  for (std::size_t idx : order) {
    for (const CostValue c : point_costs(m.entries[idx].schedule, inst, 2.0)) {
      if (c.value() == 0.0) {
        r.scale_fallback = true;
      } else {
        scale = std::max(scale, 8.0 * r.longest_period / c.value());
      }
    }
  }
  if (r.scale_fallback) scale = 1.0;
  r.scale = scale;

  std::size_t total_visits = 0;
  std::vector<PointId> visits;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& e = m.entries[order[i]];
    const double reps = periods[i] == 0.0
                            ? 1.0
                            : std::ceil(scale * (e.probability / r.threshold_probability) * (r.longest_period / periods[i]));
    const auto n_i = static_cast<std::size_t>(std::max(1.0, reps));
    total_visits += n_i * e.schedule.size();
    if (total_visits > kMaxMixedVisits) {
      throw LimitError("mixed tour would exceed " + std::to_string(kMaxMixedVisits) + " visits");
    }
    r.repetitions.push_back(n_i);
    for (std::size_t c = 0; c < n_i; ++c) visits.insert(visits.end(), e.schedule.visits().begin(), e.schedule.visits().end());
  }
  r.schedule = Schedule(std::move(visits));
  return r;
}

/// Strategy document: {"entries": [{"schedule": {"visits": [...]}, "prob": p}, ...]}
inline MixedStrategy strategy_from_json(const nlohmann::json& doc, const Instance& inst) {
  MixedStrategy m;
  try {
    for (const auto& e : doc.at("entries")) {
      m.entries.push_back({schedule_from_json(e.at("schedule"), inst), e.at("prob").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed strategy document: ") + e.what());
  }
  return m;
}

inline nlohmann::json strategy_to_json(const MixedStrategy& m, const Instance& inst) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : m.entries) entries.push_back({{"schedule", schedule_to_json(e.schedule, inst)}, {"prob", e.probability}});
  return {{"entries", entries}};
}

}  // namespace patrol
