#pragma once

// Min-max tree cover: cover a point subset with at most k trees while keeping
// the most expensive tree cheap. Budgeted 4-approximation plus a bisection on
// the budget.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "patrol/error.hpp"
#include "patrol/instance.hpp"
#include "patrol/mst.hpp"

namespace patrol {

struct TreeCover {
  std::vector<Tree> trees;
  /// The successful budget B; every tree costs less than 4B.
  double budget_used = 0.0;
  /// Largest budget seen to fail, 0 if none. A failure certifies the
  /// optimum exceeds this value.
  double budget_failed = 0.0;
  std::size_t k = 0;

  double max_cost() const {
    double m = 0.0;
    for (const auto& t : trees) m = std::max(m, t.cost);
    return m;
  }
};

/// Edge-decomposes `t` into connected, edge-disjoint pieces: at most one
/// piece (listed first) costs less than 2B and every other piece costs in
/// [2B, 4B). Pieces may share vertices.
inline std::vector<Tree> decompose_tree(const Tree& t, double budget) {
  if (!(budget > 0.0)) throw std::invalid_argument("decomposition budget must be positive");
  for (const auto& e : t.edges) {
    if (e.length > budget) {
      throw ValidationError("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                            ") exceeds the decomposition budget");
    }
  }
  if (t.vertices.empty()) throw ValidationError("cannot decompose an empty tree");
  if (t.cost < 2.0 * budget) return {t};

  const std::size_t m = t.vertices.size();
  auto slot = [&](PointId p) {
    return static_cast<std::size_t>(std::lower_bound(t.vertices.begin(), t.vertices.end(), p) - t.vertices.begin());
  };
  // adjacency: (neighbour slot, edge index), ascending neighbour
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(m);
  for (std::size_t i = 0; i < t.edges.size(); ++i) {
    adj[slot(t.edges[i].u)].emplace_back(slot(t.edges[i].v), i);
    adj[slot(t.edges[i].v)].emplace_back(slot(t.edges[i].u), i);
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());

  // Preorder from the lowest vertex; parents are settled before children.
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> parent(m, kNone), parent_edge(m, kNone), preorder;
  preorder.reserve(m);
  std::vector<std::size_t> stack{0};
  std::vector<bool> seen(m, false);
  seen[0] = true;
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    preorder.push_back(u);
    for (auto it = adj[u].rbegin(); it != adj[u].rend(); ++it) {
      if (seen[it->first]) continue;
      seen[it->first] = true;
      parent[it->first] = u;
      parent_edge[it->first] = it->second;
      stack.push_back(it->first);
    }
  }

  const double low = 2.0 * budget;
  std::vector<std::vector<std::size_t>> pending(m);
  std::vector<double> pending_cost(m, 0.0);
  std::vector<Tree> emitted;
  auto emit = [&](const std::vector<std::size_t>& edge_ids) {
    std::vector<Edge> edges;
    edges.reserve(edge_ids.size());
    for (std::size_t id : edge_ids) edges.push_back(t.edges[id]);
    emitted.push_back(tree_from_edges(std::move(edges)));
  };

  // Children before parents; a child's bundle is its pending set plus the
  // edge to its parent, which keeps every bundle connected through the parent.
  for (auto it = preorder.rbegin(); it != preorder.rend(); ++it) {
    const std::size_t u = *it;
    for (const auto& [c, eid] : adj[u]) {
      if (parent[c] != u) continue;
      std::vector<std::size_t> bundle = std::move(pending[c]);
      bundle.push_back(eid);
      const double bundle_cost = pending_cost[c] + t.edges[eid].length;
      if (bundle_cost >= low) {
        emit(bundle);  // < 2B + B
        continue;
      }
      pending[u].insert(pending[u].end(), bundle.begin(), bundle.end());
      pending_cost[u] += bundle_cost;
      if (pending_cost[u] >= low) {
        emit(pending[u]);  // < 2B + 2B
        pending[u].clear();
        pending_cost[u] = 0.0;
      }
    }
  }

  std::vector<Tree> pieces;
  pieces.reserve(emitted.size() + 1);
  if (!pending[0].empty()) {
    std::vector<Edge> edges;
    for (std::size_t id : pending[0]) edges.push_back(t.edges[id]);
    pieces.push_back(tree_from_edges(std::move(edges)));
  }
  for (auto& piece : emitted) pieces.push_back(std::move(piece));
  return pieces;
}

/// Diagnostics of one budget probe: the light-edge components, their MSTs and
/// the per-component piece allowance floor(d(MST_i) / 2B).
struct BudgetComponent {
  Tree mst;
  std::size_t extra_pieces = 0;
};

struct BudgetAttempt {
  double budget = 0.0;
  std::vector<BudgetComponent> components;
  std::size_t required = 0;  // sum of (extra_pieces + 1)
  bool success = false;
  std::vector<Tree> trees;  // filled on success
};

namespace detail {

/// Budget probe given the Kruskal-ordered MST edges of the subset. The light
/// part of the MST is exactly the spanning forest of the light-edge graph.
inline BudgetAttempt probe_budget(std::span<const PointId> pts, std::span<const Edge> mst_edges, std::size_t k,
                                  double budget) {
  BudgetAttempt out;
  out.budget = budget;
  const std::size_t m = pts.size();
  auto slot = [&](PointId p) {
    return static_cast<std::size_t>(std::lower_bound(pts.begin(), pts.end(), p) - pts.begin());
  };

  DisjointSets sets(m);
  std::size_t light = 0;
  while (light < mst_edges.size() && mst_edges[light].length <= budget) {
    sets.unite(slot(mst_edges[light].u), slot(mst_edges[light].v));
    ++light;
  }
  // Components ordered by their lowest vertex.
  std::vector<std::size_t> comp_of_root(m, static_cast<std::size_t>(-1));
  std::vector<std::size_t> comp(m);
  std::vector<std::vector<Edge>> comp_edges;
  std::vector<PointId> comp_first;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t r = sets.find(i);
    if (comp_of_root[r] == static_cast<std::size_t>(-1)) {
      comp_of_root[r] = comp_edges.size();
      comp_edges.emplace_back();
      comp_first.push_back(pts[i]);
    }
    comp[i] = comp_of_root[r];
  }
  for (std::size_t i = 0; i < light; ++i) comp_edges[comp[slot(mst_edges[i].u)]].push_back(mst_edges[i]);

  for (std::size_t c = 0; c < comp_edges.size(); ++c) {
    BudgetComponent bc;
    bc.mst = comp_edges[c].empty() ? singleton_tree(comp_first[c]) : tree_from_edges(std::move(comp_edges[c]));
    bc.extra_pieces = static_cast<std::size_t>(std::floor(bc.mst.cost / (2.0 * budget)));
    out.required += bc.extra_pieces + 1;
    out.components.push_back(std::move(bc));
  }
  out.success = out.required <= k;
  if (out.success) {
    for (const auto& bc : out.components) {
      for (auto& piece : decompose_tree(bc.mst, budget)) out.trees.push_back(std::move(piece));
    }
  }
  return out;
}

}  // namespace detail

/// Full diagnostics of a single budget probe on `subset`.
inline BudgetAttempt evaluate_budget(const Instance& inst, std::span<const PointId> subset, std::size_t k,
                                     double budget) {
  if (!(budget > 0.0)) throw std::invalid_argument("budget must be positive");
  if (k == 0) throw std::invalid_argument("tree count k must be at least 1");
  const auto pts = detail::normalized_subset(inst, subset);
  if (pts.empty()) throw ValidationError("tree cover of an empty subset");
  const Tree mst = minimum_spanning_tree(inst, pts);
  return detail::probe_budget(pts, mst.edges, k, budget);
}

/// One budgeted run: std::nullopt means the budget is below the optimum.
inline std::optional<TreeCover> try_budget(const Instance& inst, std::span<const PointId> subset, std::size_t k,
                                           double budget) {
  auto attempt = evaluate_budget(inst, subset, k, budget);
  if (!attempt.success) return std::nullopt;
  return TreeCover{std::move(attempt.trees), budget, 0.0, k};
}

/// Bisects the budget to relative precision `eps` over
/// [min distance / 2, MST cost]; the result costs at most 4(1+eps) OPT per tree.
inline TreeCover minmax_tree_cover(const Instance& inst, std::span<const PointId> subset, std::size_t k,
                                   double eps = 1e-6) {
  if (k == 0) throw std::invalid_argument("tree count k must be at least 1");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  const auto pts = detail::normalized_subset(inst, subset);
  if (pts.empty()) throw ValidationError("tree cover of an empty subset");
  if (pts.size() == 1) return TreeCover{{singleton_tree(pts.front())}, 0.0, 0.0, k};

  const Tree mst = minimum_spanning_tree(inst, pts);
  auto probe = [&](double b) { return detail::probe_budget(pts, mst.edges, k, b); };
  auto finish = [&](BudgetAttempt&& a, double failed) {
    return TreeCover{std::move(a.trees), a.budget, failed, k};
  };

  double lo = 0.5 * mst.edges.front().length;  // smallest pairwise distance
  if (auto a = probe(lo); a.success) return finish(std::move(a), 0.0);
  double hi = mst.cost;

  for (int iter = 0; iter < 200 && hi > lo * (1.0 + eps); ++iter) {
    const double mid = lo + 0.5 * (hi - lo);
    if (probe(mid).success) {
      hi = mid;
    } else {
      lo = mid;
    }
  }

  // Snap down to a pairwise distance inside the final bracket when one works.
  std::vector<double> candidates;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double d = inst.dist(pts[i], pts[j]);
      if (d > lo && d < hi) candidates.push_back(d);
    }
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  for (double d : candidates) {
    if (auto a = probe(d); a.success) return finish(std::move(a), lo);
  }
  return finish(probe(hi), lo);
}

}  // namespace patrol
