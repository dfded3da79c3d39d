#pragma once

// Periodic tours and the absence-based cost functions.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "patrol/error.hpp"
#include "patrol/instance.hpp"

namespace patrol {

/// Exponent value selecting the maximum-absence cost.
inline constexpr double kInfiniteExponent = std::numeric_limits<double>::infinity();

inline void check_exponent(double p) {
  if (!(p >= 2.0)) throw std::invalid_argument("cost exponent must be >= 2 or inf, got " + std::to_string(p));
}

/// One period of an infinite tour; the tour repeats the period forever and
/// travels d(last, first) to close it. Immediate repeats, including the
/// cyclic last/first pair, are collapsed on construction.
class Schedule {
 public:
  explicit Schedule(std::vector<PointId> visits) : visits_(std::move(visits)) {
    if (visits_.empty()) throw ValidationError("schedule must visit at least one point");
    visits_.erase(std::unique(visits_.begin(), visits_.end()), visits_.end());
    while (visits_.size() > 1 && visits_.back() == visits_.front()) visits_.pop_back();
  }

  std::span<const PointId> visits() const noexcept { return visits_; }
  std::size_t size() const noexcept { return visits_.size(); }
  PointId operator[](std::size_t i) const { return visits_[i]; }

  bool operator==(const Schedule&) const = default;

 private:
  std::vector<PointId> visits_;
};

/// Concatenates periods into one longer period.
inline Schedule concatenate(std::span<const Schedule> parts) {
  std::vector<PointId> visits;
  for (const auto& s : parts) visits.insert(visits.end(), s.visits().begin(), s.visits().end());
  return Schedule(std::move(visits));
}

inline Schedule repeat(const Schedule& s, std::size_t times) {
  std::vector<PointId> visits;
  visits.reserve(s.size() * times);
  for (std::size_t i = 0; i < times; ++i) visits.insert(visits.end(), s.visits().begin(), s.visits().end());
  return Schedule(std::move(visits));
}

inline Schedule rotate(const Schedule& s, std::size_t shift) {
  std::vector<PointId> visits(s.visits().begin(), s.visits().end());
  std::rotate(visits.begin(), visits.begin() + static_cast<std::ptrdiff_t>(shift % visits.size()), visits.end());
  return Schedule(std::move(visits));
}

/// A nonnegative cost or the distinguished UNBOUNDED value (the point is
/// never visited). UNBOUNDED orders above every finite value.
class CostValue {
 public:
  constexpr CostValue() = default;
  constexpr explicit CostValue(double v) : value_(v) {}
  static constexpr CostValue unbounded() { return CostValue(std::numeric_limits<double>::infinity()); }

  constexpr bool is_unbounded() const noexcept { return value_ == std::numeric_limits<double>::infinity(); }
  constexpr bool is_finite() const noexcept { return !is_unbounded(); }
  /// Finite value; +inf when unbounded.
  constexpr double value() const noexcept { return value_; }

  constexpr auto operator<=>(const CostValue&) const = default;

 private:
  double value_ = 0.0;
};

inline nlohmann::json to_json(CostValue c) {
  if (c.is_unbounded()) return "UNBOUNDED";
  return c.value();
}

/// Cyclic gaps (distance units) between consecutive visits of `point`; one
/// entry per visit, summing to the period length.
struct AbsenceProfile {
  PointId point = 0;
  std::vector<double> lengths;
};

namespace detail {

inline void check_ids(const Schedule& s, const Instance& inst) {
  for (PointId p : s.visits()) {
    if (p >= inst.size()) throw ValidationError("schedule visits unknown point id " + std::to_string(p));
  }
}

}  // namespace detail

inline double period_length(const Schedule& s, const Instance& inst) {
  detail::check_ids(s, inst);
  const auto v = s.visits();
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) total += inst.dist(v[i], v[(i + 1) % v.size()]);
  return total;
}

/// Profiles for every point of the instance in one pass; std::nullopt marks
/// a point that is never visited.
inline std::vector<std::optional<AbsenceProfile>> absence_profiles(const Schedule& s, const Instance& inst) {
  detail::check_ids(s, inst);
  const auto v = s.visits();
  const std::size_t m = v.size();

  // arrival[i] = distance travelled from visit 0 to visit i.
  std::vector<double> arrival(m + 1, 0.0);
  for (std::size_t i = 0; i < m; ++i) arrival[i + 1] = arrival[i] + inst.dist(v[i], v[(i + 1) % m]);
  const double period = arrival[m];

  std::vector<std::optional<AbsenceProfile>> out(inst.size());
  std::vector<std::size_t> first(inst.size(), m);
  std::vector<std::size_t> last(inst.size(), m);
  for (std::size_t i = 0; i < m; ++i) {
    const PointId x = v[i];
    if (!out[x]) {
      out[x] = AbsenceProfile{x, {}};
      first[x] = i;
    } else {
      out[x]->lengths.push_back(arrival[i] - arrival[last[x]]);
    }
    last[x] = i;
  }
  for (PointId x = 0; x < inst.size(); ++x) {
    if (out[x]) out[x]->lengths.push_back(period - arrival[last[x]] + arrival[first[x]]);
  }
  return out;
}

inline std::optional<AbsenceProfile> absence_profile(const Schedule& s, PointId x, const Instance& inst) {
  if (x >= inst.size()) throw ValidationError("unknown point id " + std::to_string(x));
  return std::move(absence_profiles(s, inst)[x]);
}

/// Cost of one point from its cyclic absence lengths:
/// p = inf gives the longest absence, finite p gives sum(l^p) / sum(l^(p-1)).
inline double profile_cost(std::span<const double> lengths, double p) {
  check_exponent(p);
  double longest = 0.0;
  for (double l : lengths) longest = std::max(longest, l);
  if (longest == 0.0) return 0.0;
  if (p == kInfiniteExponent) return longest;
  if (p == 2.0) {
    double num = 0.0, den = 0.0;
    for (double l : lengths) {
      num += l * l;
      den += l;
    }
    return num / den;
  }
  // Scale by the longest absence to keep l^p representable.
  double num = 0.0, den = 0.0;
  for (double l : lengths) {
    const double r = l / longest;
    const double rp1 = std::pow(r, p - 1.0);
    num += rp1 * r;
    den += rp1;
  }
  return longest * num / den;
}

inline CostValue point_cost(const Schedule& s, PointId x, const Instance& inst, double p) {
  check_exponent(p);
  const auto profile = absence_profile(s, x, inst);
  if (!profile) return CostValue::unbounded();
  return CostValue(profile_cost(profile->lengths, p));
}

/// Per-point costs for every point of the instance (unweighted).
inline std::vector<CostValue> point_costs(const Schedule& s, const Instance& inst, double p) {
  check_exponent(p);
  std::vector<CostValue> out;
  out.reserve(inst.size());
  for (const auto& profile : absence_profiles(s, inst)) {
    out.push_back(profile ? CostValue(profile_cost(profile->lengths, p)) : CostValue::unbounded());
  }
  return out;
}

/// max_x w_x * cost_x; UNBOUNDED if any point is missing from the period.
inline CostValue weighted_objective(const Schedule& s, const Instance& inst, double p) {
  const auto costs = point_costs(s, inst, p);
  double best = 0.0;
  for (PointId x = 0; x < inst.size(); ++x) {
    if (costs[x].is_unbounded()) return CostValue::unbounded();
    best = std::max(best, inst.weight(x) * costs[x].value());
  }
  return CostValue(best);
}

// ---------------------------------------------------------------------------
// Schedule document: {"visits": [label, ...]}

inline nlohmann::json schedule_to_json(const Schedule& s, const Instance& inst) {
  detail::check_ids(s, inst);
  std::vector<std::string> labels;
  labels.reserve(s.size());
  for (PointId p : s.visits()) labels.push_back(inst.label(p));
  return {{"visits", labels}};
}

inline Schedule schedule_from_json(const nlohmann::json& doc, const Instance& inst) {
  std::vector<std::string> labels;
  try {
    labels = doc.at("visits").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed schedule document: ") + e.what());
  }
  std::vector<PointId> visits;
  visits.reserve(labels.size());
  for (const auto& l : labels) {
    auto id = inst.find(l);
    if (!id) throw ValidationError("schedule label '" + l + "' is not a point of the instance");
    visits.push_back(*id);
  }
  return Schedule(std::move(visits));
}

inline Schedule load_schedule(std::string_view text, const Instance& inst) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("schedule document is not valid JSON: ") + e.what());
  }
  return schedule_from_json(doc, inst);
}

/// Parses "2", "inf" or any numeric value >= 2.
inline double parse_exponent(std::string_view text) {
  if (text == "inf" || text == "INF" || text == "infinity") return kInfiniteExponent;
  double p = 0.0;
  try {
    std::size_t used = 0;
    p = std::stod(std::string(text), &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    throw std::invalid_argument("cannot parse exponent '" + std::string(text) + "'");
  }
  check_exponent(p);
  return p;
}

inline std::string exponent_name(double p) {
  if (p == kInfiniteExponent) return "inf";
  std::ostringstream os;
  os << p;
  return os.str();
}

}  // namespace patrol
