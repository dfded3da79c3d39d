#include <gtest/gtest.h>

#include <random>

#include "patrol/security.hpp"
#include "support/reference.hpp"

using namespace patrol;

namespace {

Instance triangle() {
  return Instance({"a", "b", "c"}, {1.0, 0.5, 0.5}, DistanceMatrix::from_rows({{0, 1, 1}, {1, 0, 1}, {1, 1, 0}}));
}

}  // namespace

TEST(Attack, SuccessProbability) {
  const Instance inst = triangle();
  const Schedule s({0, 1, 0, 2});
  EXPECT_DOUBLE_EQ(success_probability(s, inst, 0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(success_probability(s, inst, 0, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(success_probability(s, inst, 0, 2.0), 0.0);
  EXPECT_DOUBLE_EQ(success_probability(s, inst, 1, 1.0), 0.75);
  EXPECT_DOUBLE_EQ(attack_utility(s, inst, 1, 2.0), 0.5 * 2.0 * 0.5);
  EXPECT_THROW(success_probability(s, inst, 0, -1.0), std::invalid_argument);
  EXPECT_DOUBLE_EQ(success_probability(Schedule({0, 1}), inst, 2, 5.0), 1.0);
}

TEST(Attack, TriangleBestResponseTieGoesToLowestTarget) {
  const Instance inst = triangle();
  const Schedule s({0, 1, 0, 2});
  const auto best = attacker_best_response(s, inst);
  EXPECT_EQ(best.target, 0u);
  EXPECT_DOUBLE_EQ(best.duration, 1.0);
  EXPECT_DOUBLE_EQ(best.utility.value(), 0.5);
  const auto on_b = best_attack_on_target(s, inst, 1);
  EXPECT_DOUBLE_EQ(on_b.duration, 2.0);
  EXPECT_DOUBLE_EQ(on_b.utility.value(), 0.5);
  EXPECT_DOUBLE_EQ(expected_return_time(s, inst, 1).value(), 2.0);
}

TEST(Attack, UnvisitedTargetIsUnbounded) {
  const Instance inst = triangle();
  const auto best = attacker_best_response(Schedule({0, 1}), inst);
  EXPECT_EQ(best.target, 2u);
  EXPECT_TRUE(best.utility.is_unbounded());
  EXPECT_TRUE(expected_return_time(Schedule({0, 1}), inst, 2).is_unbounded());
}

TEST(Attack, ZeroPeriodGivesZeroUtility) {
  const Instance inst({"a"}, {1.0}, DistanceMatrix::from_rows({{0}}));
  const auto best = attacker_best_response(Schedule({0}), inst);
  EXPECT_DOUBLE_EQ(best.utility.value(), 0.0);
  EXPECT_DOUBLE_EQ(best.duration, 0.0);
}

// Property: the exact maximizer matches its own payoff and is never beaten by
// a dense grid search; it also respects the upper bracket w C2 / 2.
TEST(AttackProperty, ExactMaximizerBeatsGrid) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 400; ++trial) {
    std::vector<double> l(1 + ref::below(rng, 6));
    for (auto& v : l) v = 0.01 + ref::uniform(rng) * 5.0;
    const double w = 0.1 + ref::uniform(rng);
    const TargetAttack a = best_attack_on_profile(l, w);
    EXPECT_NEAR(a.utility.value(), ref::attack_payoff(l, w, a.duration), 1e-12);
    EXPECT_GE(a.utility.value(), ref::attack_grid(l, w) * (1 - 1e-12));
    EXPECT_LE(a.utility.value(), w * ref::cost(l, 2.0) / 2 * (1 + 1e-9));
  }
}

TEST(Mix, RepetitionCountsAndBound) {
  const Instance inst = triangle();
  MixedStrategy m{{{Schedule({0, 1, 0, 2}), 0.25}, {Schedule({0, 1, 2}), 0.75}}};
  const MixResult r = mix_tours(m, inst);
  EXPECT_EQ(r.order, (std::vector<std::size_t>{1}));
  EXPECT_DOUBLE_EQ(r.threshold_probability, 0.75);
  EXPECT_DOUBLE_EQ(r.longest_period, 3.0);
  EXPECT_DOUBLE_EQ(r.scale, 8.0);
  EXPECT_EQ(r.repetitions, (std::vector<std::size_t>{8}));
  EXPECT_EQ(r.schedule, repeat(Schedule({0, 1, 2}), 8));
}

TEST(Mix, ValidationErrors) {
  const Instance inst = triangle();
  EXPECT_THROW(mix_tours(MixedStrategy{}, inst), ValidationError);
  EXPECT_THROW(mix_tours(MixedStrategy{{{Schedule({0, 1, 2}), 0.5}}}, inst), ValidationError);
  EXPECT_THROW(mix_tours(MixedStrategy{{{Schedule({0, 1}), 1.0}}}, inst), ValidationError);
  EXPECT_THROW(mix_tours(MixedStrategy{{{Schedule({0, 1, 2}), 1.2}, {Schedule({0, 2, 1}), -0.2}}}, inst),
               ValidationError);
}

TEST(Mix, StrategyDocument) {
  const Instance inst = triangle();
  const MixedStrategy m{{{Schedule({0, 1, 0, 2}), 0.6}, {Schedule({0, 1, 2}), 0.4}}};
  const MixedStrategy back = strategy_from_json(strategy_to_json(m, inst), inst);
  ASSERT_EQ(back.entries.size(), 2u);
  EXPECT_EQ(back.entries[0].schedule, m.entries[0].schedule);
  EXPECT_DOUBLE_EQ(back.entries[1].probability, 0.4);
  EXPECT_THROW(strategy_from_json(nlohmann::json::parse(R"({"entries":[{"prob":1}]})"), inst), ParseError);
}

// Property: each point's quadratic cost under the mixed tour stays within 8x
// of its expectation under the strategy.
TEST(MixProperty, QuadraticCostWithinEightTimesExpectation) {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 2 + ref::below(rng, 5);
    const Instance inst = ref::weighted_instance(rng, n);
    const std::size_t support = 1 + ref::below(rng, 4);
    MixedStrategy m;
    double total = 0.0;
    std::vector<double> raw;
    for (std::size_t i = 0; i < support; ++i) raw.push_back(0.1 + ref::uniform(rng));
    for (double r : raw) total += r;
    for (std::size_t i = 0; i < support; ++i) {
      m.entries.push_back({Schedule(ref::random_covering_sequence(rng, n, ref::below(rng, 4))), raw[i] / total});
    }
    const MixResult r = mix_tours(m, inst);
    for (PointId x = 0; x < n; ++x) {
      double expect = 0.0;
      for (const auto& e : m.entries) expect += e.probability * point_cost(e.schedule, x, inst, 2.0).value();
      EXPECT_LE(point_cost(r.schedule, x, inst, 2.0).value(), 8.0 * expect * (1 + 1e-9));
    }
  }
}
