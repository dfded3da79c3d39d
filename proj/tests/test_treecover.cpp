#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

#include "patrol/oracle.hpp"
#include "patrol/treecover.hpp"
#include "support/reference.hpp"

using namespace patrol;

namespace {

std::multiset<std::tuple<PointId, PointId>> edge_keys(const std::vector<Tree>& trees) {
  std::multiset<std::tuple<PointId, PointId>> out;
  for (const auto& t : trees)
    for (const auto& e : t.edges) out.insert({e.u, e.v});
  return out;
}

void expect_covers(const std::vector<Tree>& trees, const std::vector<PointId>& pts) {
  std::set<PointId> seen;
  for (const auto& t : trees) seen.insert(t.vertices.begin(), t.vertices.end());
  EXPECT_EQ(std::vector<PointId>(seen.begin(), seen.end()), pts);
}

}  // namespace

TEST(Decompose, LineOfUnitEdges) {
  const Instance inst = ref::line_instance({0, 1, 2, 3, 4, 5, 6});
  const Tree path = minimum_spanning_tree(inst, all_points(inst));
  const auto pieces = decompose_tree(path, 1.0);
  ASSERT_EQ(pieces.size(), 3u);
  for (const auto& p : pieces) {
    EXPECT_TRUE(is_tree(p, inst));
    EXPECT_DOUBLE_EQ(p.cost, 2.0);
  }
  EXPECT_EQ(edge_keys(pieces), edge_keys({path}));
}

TEST(Decompose, CheapTreeIsKeptWhole) {
  const Instance inst = ref::line_instance({0, 1, 2});
  const Tree path = minimum_spanning_tree(inst, all_points(inst));
  const auto pieces = decompose_tree(path, 1.5);
  ASSERT_EQ(pieces.size(), 1u);
  EXPECT_EQ(pieces[0].edges, path.edges);
  EXPECT_EQ(decompose_tree(singleton_tree(2), 1.0).size(), 1u);
}

TEST(Decompose, ErrorPaths) {
  const Instance inst = ref::line_instance({0, 3});
  const Tree t = minimum_spanning_tree(inst, all_points(inst));
  EXPECT_THROW(decompose_tree(t, 0.0), std::invalid_argument);
  EXPECT_THROW(decompose_tree(t, 2.0), ValidationError);
  EXPECT_THROW(decompose_tree(Tree{}, 1.0), ValidationError);
}

// Property: pieces are connected, partition the edges, and all but the first
// cost in [2B, 4B); the first costs less than 4B.
TEST(DecomposeProperty, PiecesAreConnectedAndBounded) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t n = 2 + ref::below(rng, 40);
    const Instance inst = ref::weighted_instance(rng, n);
    const Tree t = minimum_spanning_tree(inst, all_points(inst));
    double longest = 0.0;
    for (const auto& e : t.edges) longest = std::max(longest, e.length);
    const double budget = longest * (1.0 + 3.0 * ref::uniform(rng));
    const auto pieces = decompose_tree(t, budget);
    EXPECT_EQ(edge_keys(pieces), edge_keys({t}));
    expect_covers(pieces, t.vertices);
    EXPECT_LE(pieces.size(), static_cast<std::size_t>(std::floor(t.cost / (2 * budget))) + 1);
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      EXPECT_TRUE(is_tree(pieces[i], inst));
      EXPECT_LT(pieces[i].cost, 4.0 * budget);
    }
    for (std::size_t i = 1; i < pieces.size(); ++i) EXPECT_GE(pieces[i].cost, 2.0 * budget * (1 - 1e-12));
  }
}

TEST(TreeCover, LineOfFourWithTwoTrees) {
  const Instance inst = ref::line_instance({0, 1, 2, 3});
  const auto cover = minmax_tree_cover(inst, all_points(inst), 2);
  EXPECT_DOUBLE_EQ(cover.budget_used, 1.0);
  EXPECT_DOUBLE_EQ(cover.max_cost(), 2.0);
  EXPECT_LE(cover.trees.size(), 2u);
  expect_covers(cover.trees, {0, 1, 2, 3});
  EXPECT_LT(cover.budget_failed, 1.0);
  EXPECT_FALSE(try_budget(inst, all_points(inst), 2, cover.budget_failed).has_value());
}

TEST(TreeCover, SingletonAndTrivialBudgets) {
  const Instance inst = ref::line_instance({0, 1, 2, 3});
  const auto one = minmax_tree_cover(inst, std::vector<PointId>{2}, 1);
  ASSERT_EQ(one.trees.size(), 1u);
  EXPECT_DOUBLE_EQ(one.max_cost(), 0.0);
  // k >= n: every point alone, found at the lowest probe.
  const auto spread = minmax_tree_cover(inst, all_points(inst), 4);
  EXPECT_DOUBLE_EQ(spread.max_cost(), 0.0);
  EXPECT_EQ(spread.trees.size(), 4u);
}

TEST(TreeCover, ErrorPaths) {
  const Instance inst = ref::line_instance({0, 1, 2});
  EXPECT_THROW(minmax_tree_cover(inst, all_points(inst), 0), std::invalid_argument);
  EXPECT_THROW(minmax_tree_cover(inst, all_points(inst), 2, 0.0), std::invalid_argument);
  EXPECT_THROW(minmax_tree_cover(inst, std::vector<PointId>{}, 2), ValidationError);
  EXPECT_THROW(evaluate_budget(inst, all_points(inst), 2, -1.0), std::invalid_argument);
}

TEST(TreeCover, BudgetDiagnostics) {
  const Instance inst = ref::line_instance({0, 1, 2, 10, 11});
  const auto a = evaluate_budget(inst, all_points(inst), 3, 1.0);
  ASSERT_EQ(a.components.size(), 2u);
  EXPECT_DOUBLE_EQ(a.components[0].mst.cost, 2.0);
  EXPECT_EQ(a.components[0].extra_pieces, 1u);
  EXPECT_EQ(a.components[1].extra_pieces, 0u);
  EXPECT_EQ(a.required, 3u);
  EXPECT_TRUE(a.success);
  EXPECT_FALSE(evaluate_budget(inst, all_points(inst), 2, 1.0).success);
}

// Success is not monotone in the budget: two tight clusters succeed
// separately at B = 0.49 but fail once the gap edge becomes light.
TEST(TreeCover, BudgetSuccessIsNotMonotone) {
  const Instance inst = ref::line_instance({0, 0.475, 0.95, 1.45, 1.925, 2.4});
  EXPECT_TRUE(try_budget(inst, all_points(inst), 2, 0.49).has_value());
  EXPECT_FALSE(try_budget(inst, all_points(inst), 2, 0.5).has_value());
}

// Property: a failed budget is below the optimum, so below any partition.
TEST(TreeCoverProperty, FailureCertifiesBudgetBelowOptimum) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 2 + ref::below(rng, 7);
    const std::size_t k = 1 + ref::below(rng, 3);
    const Instance inst = ref::weighted_instance(rng, n);
    const auto pts = all_points(inst);
    const double opt_ub = partition_tree_cover_oracle(inst, pts, k).value.value();
    for (int probe = 0; probe < 20; ++probe) {
      const double b = 0.01 + 2.0 * ref::uniform(rng);
      if (!try_budget(inst, pts, k, b)) {
        EXPECT_LT(b, opt_ub + 1e-12);
      }
    }
  }
}

// Property: at most k trees, all points covered, within 4(1+eps) of a partition.
TEST(TreeCoverProperty, GuaranteeAgainstExhaustivePartition) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 80; ++trial) {
    const std::size_t n = 1 + ref::below(rng, 8);
    const std::size_t k = 1 + ref::below(rng, 3);
    const Instance inst = ref::weighted_instance(rng, n);
    const auto pts = all_points(inst);
    const double eps = 1e-6;
    const auto cover = minmax_tree_cover(inst, pts, k, eps);
    EXPECT_LE(cover.trees.size(), k);
    expect_covers(cover.trees, pts);
    for (const auto& t : cover.trees) EXPECT_TRUE(is_tree(t, inst));
    const double part = ref::partition_cover(inst, pts, k);
    EXPECT_LE(cover.max_cost(), 4.0 * (1.0 + eps) * part + 1e-12);
    if (cover.budget_failed > 0.0) {
      EXPECT_LT(cover.budget_failed, part + 1e-12);
    }
  }
}
