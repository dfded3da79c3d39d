#pragma once

// Minimum spanning trees over point subsets and Euler-tour shortcutting.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <tuple>
#include <vector>

#include "patrol/error.hpp"
#include "patrol/instance.hpp"
#include "patrol/schedule.hpp"

namespace patrol {

/// Undirected edge with u < v.
struct Edge {
  PointId u = 0;
  PointId v = 0;
  double length = 0.0;

  bool operator==(const Edge&) const = default;
};

inline Edge make_edge(const Instance& inst, PointId a, PointId b) {
  return a < b ? Edge{a, b, inst.dist(a, b)} : Edge{b, a, inst.dist(a, b)};
}

/// Sort key: length, then lexicographic endpoint ids.
inline bool edge_less(const Edge& a, const Edge& b) {
  return std::tie(a.length, a.u, a.v) < std::tie(b.length, b.u, b.v);
}

struct Tree {
  std::vector<PointId> vertices;  // sorted ascending
  std::vector<Edge> edges;
  double cost = 0.0;
};

/// Rebuilds a tree from an edge set (vertices derived, cost summed).
inline Tree tree_from_edges(std::vector<Edge> edges) {
  Tree t;
  for (const auto& e : edges) {
    t.vertices.push_back(e.u);
    t.vertices.push_back(e.v);
    t.cost += e.length;
  }
  std::sort(t.vertices.begin(), t.vertices.end());
  t.vertices.erase(std::unique(t.vertices.begin(), t.vertices.end()), t.vertices.end());
  t.edges = std::move(edges);
  return t;
}

inline Tree singleton_tree(PointId p) { return Tree{{p}, {}, 0.0}; }

/// Union-find with path halving and union by size.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

/// All pairwise edges of `subset`, sorted by edge_less.
inline std::vector<Edge> sorted_pair_edges(const Instance& inst, std::span<const PointId> subset) {
  std::vector<Edge> edges;
  edges.reserve(subset.size() * (subset.size() - (subset.empty() ? 0 : 1)) / 2);
  for (std::size_t i = 0; i < subset.size(); ++i)
    for (std::size_t j = i + 1; j < subset.size(); ++j) edges.push_back(make_edge(inst, subset[i], subset[j]));
  std::sort(edges.begin(), edges.end(), edge_less);
  return edges;
}

namespace detail {

inline std::vector<PointId> normalized_subset(const Instance& inst, std::span<const PointId> subset) {
  std::vector<PointId> pts(subset.begin(), subset.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  for (PointId p : pts) {
    if (p >= inst.size()) throw ValidationError("unknown point id " + std::to_string(p));
  }
  return pts;
}

}  // namespace detail

/// Kruskal over the complete graph on `subset`.
inline Tree minimum_spanning_tree(const Instance& inst, std::span<const PointId> subset) {
  const auto pts = detail::normalized_subset(inst, subset);
  if (pts.empty()) throw ValidationError("minimum spanning tree of an empty subset");
  if (pts.size() == 1) return singleton_tree(pts.front());

  std::vector<std::size_t> slot(inst.size());
  for (std::size_t i = 0; i < pts.size(); ++i) slot[pts[i]] = i;

  DisjointSets sets(pts.size());
  std::vector<Edge> chosen;
  chosen.reserve(pts.size() - 1);
  for (const auto& e : sorted_pair_edges(inst, pts)) {
    if (sets.unite(slot[e.u], slot[e.v])) {
      chosen.push_back(e);
      if (chosen.size() + 1 == pts.size()) break;
    }
  }
  return tree_from_edges(std::move(chosen));
}

/// True when `t` is connected, acyclic and its cost matches its edges.
inline bool is_tree(const Tree& t, const Instance& inst, double tol = 1e-9) {
  if (t.vertices.empty()) return false;
  if (t.edges.size() + 1 != t.vertices.size()) return false;
  DisjointSets sets(t.vertices.size());
  auto slot = [&](PointId p) -> std::ptrdiff_t {
    auto it = std::lower_bound(t.vertices.begin(), t.vertices.end(), p);
    return it != t.vertices.end() && *it == p ? it - t.vertices.begin() : -1;
  };
  double cost = 0.0;
  for (const auto& e : t.edges) {
    const auto a = slot(e.u), b = slot(e.v);
    if (a < 0 || b < 0) return false;
    if (!sets.unite(static_cast<std::size_t>(a), static_cast<std::size_t>(b))) return false;
    cost += inst.dist(e.u, e.v);
  }
  return std::abs(cost - t.cost) <= tol * std::max(1.0, cost);
}

/// Depth-first preorder of `t` from `start`, children in ascending index
/// order. Period length is at most twice the tree cost.
inline Schedule euler_shortcut(const Tree& t, PointId start) {
  if (!std::binary_search(t.vertices.begin(), t.vertices.end(), start)) {
    throw ValidationError("shortcut start " + std::to_string(start) + " is not a tree vertex");
  }
  const std::size_t m = t.vertices.size();
  auto slot = [&](PointId p) {
    return static_cast<std::size_t>(std::lower_bound(t.vertices.begin(), t.vertices.end(), p) - t.vertices.begin());
  };
  std::vector<std::vector<std::size_t>> adj(m);
  for (const auto& e : t.edges) {
    adj[slot(e.u)].push_back(slot(e.v));
    adj[slot(e.v)].push_back(slot(e.u));
  }
  for (auto& nbrs : adj) std::sort(nbrs.begin(), nbrs.end());  // slot order == id order

  std::vector<PointId> order;
  order.reserve(m);
  std::vector<bool> seen(m, false);
  std::vector<std::size_t> stack{slot(start)};
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    if (seen[u]) continue;
    seen[u] = true;
    order.push_back(t.vertices[u]);
    for (auto it = adj[u].rbegin(); it != adj[u].rend(); ++it) {
      if (!seen[*it]) stack.push_back(*it);
    }
  }
  return Schedule(std::move(order));
}

/// Shortcut from the canonical start, the lowest vertex id.
inline Schedule euler_shortcut(const Tree& t) { return euler_shortcut(t, t.vertices.front()); }

}  // namespace patrol
