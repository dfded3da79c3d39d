#pragma once

// The O(log n) patrol planner: round weights to powers of two, cover each
// weight class with min(n_i, 2^i) trees, shortcut the trees into tours, group
// the tours into lists of geometrically growing length, and cycle through the
// lists phase by phase.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "patrol/instance.hpp"
#include "patrol/mst.hpp"
#include "patrol/oracle.hpp"
#include "patrol/schedule.hpp"
#include "patrol/treecover.hpp"

namespace patrol {

/// Constant of the approximation envelope obj_inf <= 18 (I + 1) LB: factor 4
/// from the tree cover, 2 from shortcutting, 2 from weight rounding, plus one
/// maximum-distance hop per list and phase.
inline constexpr double kEnvelopeFactor = 18.0;

struct WeightClass {
  std::size_t index = 0;  // rounded weight is 2^-index
  double rounded_weight = 1.0;
  std::vector<PointId> members;
  std::size_t theta = 0;  // min(|members|, 2^index)
};

struct RoundedInstance {
  Instance instance;  // weights rounded down to powers of two
  std::vector<WeightClass> classes;  // nonempty classes, ascending index
  std::vector<std::size_t> class_of;  // class index per point
};

/// Index i with 2^-i <= w < 2^-i+1, for w in (0, 1].
inline std::size_t weight_class_index(double w) {
  int e = 0;
  std::frexp(w, &e);  // w = m * 2^e, m in [0.5, 1)
  return static_cast<std::size_t>(1 - e);
}

inline RoundedInstance round_weights(const Instance& inst) {
  std::vector<double> rounded(inst.size());
  std::vector<std::size_t> class_of(inst.size());
  std::size_t max_index = 0;
  for (PointId x = 0; x < inst.size(); ++x) {
    class_of[x] = weight_class_index(inst.weight(x));
    rounded[x] = std::ldexp(1.0, -static_cast<int>(class_of[x]));
    max_index = std::max(max_index, class_of[x]);
  }
  std::vector<WeightClass> by_index(max_index + 1);
  for (PointId x = 0; x < inst.size(); ++x) by_index[class_of[x]].members.push_back(x);
  std::vector<WeightClass> classes;
  for (std::size_t i = 0; i <= max_index; ++i) {
    auto& c = by_index[i];
    if (c.members.empty()) continue;
    c.index = i;
    c.rounded_weight = std::ldexp(1.0, -static_cast<int>(i));
    const std::size_t cap = i < 63 ? std::size_t{1} << i : c.members.size();
    c.theta = std::min(c.members.size(), cap);
    classes.push_back(std::move(c));
  }
  return RoundedInstance{Instance(inst.labels(), std::move(rounded), inst.distances()), std::move(classes),
                         std::move(class_of)};
}

/// Tours sigma_1..sigma_J, heaviest class first, with their provenance.
struct ClassTours {
  std::vector<Schedule> tours;
  std::vector<std::size_t> tour_class;  // class index of each tour
  std::vector<Tree> trees;              // tree each tour was shortcut from
  std::vector<TreeCover> covers;        // one per class, same order as classes
};

inline ClassTours build_class_tours(const Instance& inst, std::span<const WeightClass> classes, double eps) {
  ClassTours out;
  for (const auto& c : classes) {
    TreeCover cover = minmax_tree_cover(inst, c.members, c.theta, eps);
    for (const auto& tree : cover.trees) {
      out.tours.push_back(euler_shortcut(tree));
      out.tour_class.push_back(c.index);
      out.trees.push_back(tree);
    }
    out.covers.push_back(std::move(cover));
  }
  return out;
}

struct TourList {
  std::size_t index = 0;
  std::vector<std::size_t> tour_ids;  // zero-based positions in sigma_1..sigma_J
  std::vector<Schedule> tours;
  std::size_t lambda = 0;
};

/// I = ceil(log2(J + 1)) - 1.
inline std::size_t list_count_minus_one(std::size_t J) { return static_cast<std::size_t>(std::bit_width(J)) - 1; }

/// L_i holds sigma_{2^i} .. sigma_{2^{i+1}-1} for i < I; L_I takes the rest.
inline std::vector<TourList> build_lists(std::span<const Schedule> tours) {
  const std::size_t J = tours.size();
  if (J == 0) throw std::invalid_argument("cannot build tour lists from zero tours");
  const std::size_t I = list_count_minus_one(J);
  std::vector<TourList> lists(I + 1);
  for (std::size_t i = 0; i <= I; ++i) {
    const std::size_t begin = (std::size_t{1} << i) - 1;
    const std::size_t end = i < I ? (std::size_t{1} << (i + 1)) - 1 : J;
    lists[i].index = i;
    for (std::size_t t = begin; t < end; ++t) {
      lists[i].tour_ids.push_back(t);
      lists[i].tours.push_back(tours[t]);
    }
    lists[i].lambda = end - begin;
  }
  return lists;
}

inline std::size_t phase_count(std::span<const TourList> lists) {
  std::size_t period = 1;
  for (const auto& l : lists) period = std::lcm(period, l.lambda);
  return period;
}

/// One full period: for each phase j < lcm(lambda_i) run tour (j mod lambda_i)
/// of every list, lists in index order.
inline Schedule emit_schedule(std::span<const TourList> lists) {
  if (lists.empty()) throw std::invalid_argument("no tour lists to emit");
  const std::size_t phases = phase_count(lists);
  std::vector<PointId> visits;
  for (std::size_t j = 0; j < phases; ++j) {
    for (const auto& l : lists) {
      const auto& tour = l.tours[j % l.lambda];
      visits.insert(visits.end(), tour.visits().begin(), tour.visits().end());
    }
  }
  return Schedule(std::move(visits));
}

struct InvariantCheck {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct PlanResult {
  Schedule schedule;
  std::vector<WeightClass> classes;
  std::vector<std::size_t> class_of;
  ClassTours tours;
  std::vector<TourList> lists;
  std::size_t I = 0;
  std::size_t J = 0;
  std::size_t phases = 0;
  double eps = 0.0;
  CostValue objective_inf;
  CostValue objective_2;
  LowerBound lower_bound;
  std::vector<InvariantCheck> checks;

  double envelope_limit() const { return kEnvelopeFactor * static_cast<double>(I + 1) * lower_bound.value; }
  /// objective_inf / lower bound (0 when both vanish).
  double lower_bound_ratio() const {
    if (lower_bound.value == 0.0) {
      return objective_inf.value() == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return objective_inf.value() / lower_bound.value;
  }
  bool all_checks_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
  }
};

/// Every point on a tour of L_i has rounded weight at most 2^-i.
inline InvariantCheck check_list_for_weight(const PlanResult& r) {
  InvariantCheck c{"list-for-weight", true, {}};
  for (const auto& l : r.lists) {
    for (const auto& tour : l.tours) {
      for (PointId x : tour.visits()) {
        if (r.class_of[x] < l.index) {
          c.passed = false;
          std::ostringstream os;
          os << "point " << x << " of class " << r.class_of[x] << " appears in list " << l.index;
          c.detail = os.str();
          return c;
        }
      }
    }
  }
  return c;
}

/// theta_i * max_j d(T^i_j) <= 4 (1 + eps) MST(P_i) whenever theta_i = 2^i.
inline InvariantCheck check_key_lower_bound(const PlanResult& r, const Instance& inst) {
  InvariantCheck c{"key-lower-bound", true, {}};
  for (std::size_t k = 0; k < r.classes.size(); ++k) {
    const auto& cls = r.classes[k];
    if (cls.index >= 63 || cls.theta != (std::size_t{1} << cls.index)) continue;
    const double lhs = static_cast<double>(cls.theta) * r.tours.covers[k].max_cost();
    const double rhs = 4.0 * (1.0 + r.eps) * minimum_spanning_tree(inst, cls.members).cost;
    if (lhs > rhs) {
      c.passed = false;
      std::ostringstream os;
      os.precision(17);
      os << "class " << cls.index << ": theta * max tree cost " << lhs << " > " << rhs;
      c.detail = os.str();
      return c;
    }
  }
  return c;
}

inline std::vector<InvariantCheck> run_plan_checks(const PlanResult& r, const Instance& inst) {
  std::vector<InvariantCheck> checks;
  checks.push_back(check_list_for_weight(r));
  checks.push_back(check_key_lower_bound(r, inst));

  InvariantCheck shortcut{"shortcut-length", true, {}};
  for (std::size_t t = 0; t < r.tours.tours.size(); ++t) {
    const double len = period_length(r.tours.tours[t], inst);
    if (len > 2.0 * r.tours.trees[t].cost * (1.0 + 1e-9)) {
      shortcut.passed = false;
      shortcut.detail = "tour " + std::to_string(t) + " is longer than twice its tree";
      break;
    }
  }
  checks.push_back(shortcut);

  InvariantCheck covers{"visits-every-point", r.objective_inf.is_finite(), {}};
  if (!covers.passed) covers.detail = "emitted schedule misses a point";
  checks.push_back(covers);

  InvariantCheck envelope{"envelope", r.objective_inf.value() <= r.envelope_limit(), {}};
  if (!envelope.passed) {
    std::ostringstream os;
    os.precision(17);
    os << "objective " << r.objective_inf.value() << " > " << r.envelope_limit();
    envelope.detail = os.str();
  }
  checks.push_back(envelope);
  return checks;
}

/// Runs the full pipeline; objectives and diagnostics use the original
/// (normalized) weights, rounding only shapes the plan.
inline PlanResult plan(const Instance& inst, double eps = 1e-6) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  RoundedInstance rounded = round_weights(inst);
  ClassTours tours = build_class_tours(inst, rounded.classes, eps);
  std::vector<TourList> lists = build_lists(tours.tours);
  Schedule schedule = emit_schedule(lists);

  PlanResult r{std::move(schedule), std::move(rounded.classes), std::move(rounded.class_of), std::move(tours),
               std::move(lists), 0, 0, 0, eps, {}, {}, {}, {}};
  r.J = r.tours.tours.size();
  r.I = r.lists.size() - 1;
  r.phases = phase_count(r.lists);
  r.objective_inf = weighted_objective(r.schedule, inst, kInfiniteExponent);
  r.objective_2 = weighted_objective(r.schedule, inst, 2.0);
  r.lower_bound = lower_bound_certificate(inst);
  r.checks = run_plan_checks(r, inst);
  return r;
}

}  // namespace patrol
