#include <doctest.h>

#include "polytree/branching.hpp"
#include "polytree/error.hpp"
#include "polytree/generators.hpp"
#include "test_support.hpp"

using namespace polytree;
using polytree::testing::random_distribution;

TEST_CASE("independent coins give the empty branching") {
  const Distribution coins({{"A", 2}, {"B", 2}, {"C", 2}}, std::vector<double>(8, 0.125));
  const auto b = learn_optimal_branching(coins);
  CHECK(b == Structure(3));
  CHECK(score(b, coins).total == doctest::Approx(3.0));
}

TEST_CASE("parity fixture has no informative pair") {
  const auto ex2 = example_fixture(Fixture::kExample2);
  const auto b = learn_optimal_branching(ex2);
  CHECK(b == Structure(4));
  CHECK(score(b, ex2).total == doctest::Approx(4.0));
  CHECK(score(brute_force_branching(ex2), ex2).total == doctest::Approx(4.0));
}

TEST_CASE("copied bit plus an independent coin") {
  // X2 = X1, X3 independent; all fair.
  std::vector<double> probs(8, 0.0);
  for (int x1 = 0; x1 < 2; ++x1) {
    for (int x3 = 0; x3 < 2; ++x3) probs[(x1 << 2) | (x1 << 1) | x3] = 0.25;
  }
  const Distribution d({{"X1", 2}, {"X2", 2}, {"X3", 2}}, probs);
  const auto b = learn_optimal_branching(d);
  CHECK(b == Structure({{}, {0}, {}}));
  // H(X1) + H(X3) = 2, also the brute-force minimum over all 3-node branchings.
  CHECK(score(b, d).total == doctest::Approx(2.0));
  CHECK(score(brute_force_branching(d), d).total == doctest::Approx(2.0));
}

TEST_CASE("single variable") {
  const Distribution d({{"A", 3}}, {0.2, 0.3, 0.5});
  CHECK(learn_optimal_branching(d) == Structure(1));
  CHECK(brute_force_branching(d) == Structure(1));
}

TEST_CASE("learner matches the brute-force oracle") {
  for (std::uint64_t seed = 0; seed < 120; ++seed) {
    const std::size_t n = 2 + seed % 5;
    const auto d = random_distribution(n, 3, seed * 7 + 1);
    const auto learned = learn_optimal_branching(d);
    const auto oracle = brute_force_branching(d);
    CHECK(is_branching(learned));
    CHECK(is_branching(oracle));
    CHECK(score(learned, d).total == doctest::Approx(score(oracle, d).total).epsilon(1e-9));
  }
}

TEST_CASE("re-rooting a component preserves the score") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto d = random_distribution(5, 2, seed);
    const auto b = learn_optimal_branching(d);
    // Re-root by orienting the same undirected edges away from the largest index.
    std::vector<WeightedEdge> undirected;
    for (const auto& [p, c] : b.edges()) undirected.push_back({std::min(p, c), std::max(p, c), 0.0});
    std::vector<WeightedEdge> relabeled;
    for (const auto& e : undirected) relabeled.push_back({4 - e.b, 4 - e.a, 0.0});
    const auto mirrored = orient_forest(5, relabeled);
    Structure rerooted(5);
    for (const auto& [p, c] : mirrored.edges()) rerooted.add_edge(4 - p, 4 - c);
    CHECK(is_branching(rerooted));
    CHECK(score(rerooted, d).total == doctest::Approx(score(b, d).total).epsilon(1e-9));
  }
}

TEST_CASE("determinism and thread independence") {
  const auto d = random_distribution(6, 2, 77);
  const auto a = learn_optimal_branching(d, 1);
  CHECK(learn_optimal_branching(d, 1) == a);
  CHECK(learn_optimal_branching(d, 4) == a);
}

TEST_CASE("ties broken by lexicographic pair order") {
  // X1 = X2 = X3: all three pairs carry one bit; Kruskal keeps (0,1), (0,2).
  const Distribution d({{"A", 2}, {"B", 2}, {"C", 2}}, {0.5, 0, 0, 0, 0, 0, 0, 0.5});
  CHECK(learn_optimal_branching(d) == Structure({{}, {0}, {0}}));
}

TEST_CASE("brute force cap") {
  const auto d = random_distribution(9, 2, 1);
  CHECK_THROWS_AS(brute_force_branching(d), DomainError);
}
