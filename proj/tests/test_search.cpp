#include <doctest.h>

#include <limits>

#include "polytree/branching.hpp"
#include "polytree/error.hpp"
#include "polytree/generators.hpp"
#include "polytree/search.hpp"
#include "test_support.hpp"

using namespace polytree;
using polytree::testing::random_distribution;

namespace {

// Independent oracle: every parent-set assignment, filtered by the predicates.
double naive_optimal_polytree(const Distribution& d, std::size_t k) {
  const std::size_t n = d.num_variables();
  EntropyCache cache(d);
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::uint64_t> masks(n, 0);
  const std::uint64_t per_node = std::uint64_t{1} << (n - 1);
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= per_node;
  for (std::uint64_t code = 0; code < total; ++code) {
    std::uint64_t rest = code;
    std::vector<std::vector<std::size_t>> parents(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint64_t local = rest % per_node;
      rest /= per_node;
      // Expand the (n-1)-bit local mask over the other nodes.
      for (std::size_t j = 0, b = 0; j < n; ++j) {
        if (j == i) continue;
        if (local >> b++ & 1) parents[i].push_back(j);
      }
    }
    Structure s(parents);
    if (!is_k_polytree(s, k)) continue;
    best = std::min(best, score(s, cache).total);
  }
  return best;
}

Distribution independent_coins(std::size_t n) {
  std::vector<VariableMeta> vars;
  for (std::size_t i = 0; i < n; ++i) vars.push_back({"C" + std::to_string(i), 2});
  return Distribution(vars, std::vector<double>(std::size_t{1} << n, 1.0 / (1 << n)));
}

}  // namespace

TEST_CASE("exact search on independent coins") {
  for (std::size_t k : {std::size_t{1}, std::size_t{2}, kUnbounded}) {
    const auto r = exact_optimal_polytree(independent_coins(4), k);
    CHECK(r.best == Structure(4));
    CHECK(r.best_score == doctest::Approx(4.0));
    REQUIRE(r.ratio.has_value());
    CHECK(*r.ratio == doctest::Approx(1.0));
  }
}

TEST_CASE("exact search on the parity fixture") {
  const auto ex2 = example_fixture(Fixture::kExample2);
  const auto k3 = exact_optimal_polytree(ex2, 3);
  CHECK(k3.best_score == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(max_indegree(k3.best) == 3);
  CHECK(exact_optimal_polytree(ex2, kUnbounded).best_score == doctest::Approx(3.0));
  CHECK(exact_optimal_polytree(ex2, 2).best_score == doctest::Approx(4.0).epsilon(1e-12));
  const auto ratio = approximation_ratio(ex2, 3);
  REQUIRE(ratio.ratio.has_value());
  CHECK(std::abs(*ratio.ratio - 4.0 / 3.0) < 1e-9);
}

TEST_CASE("exact search matches the naive assignment oracle") {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const std::size_t n = 3 + seed % 2;
    const auto d = random_distribution(n, 2, seed + 500);
    for (std::size_t k : {std::size_t{1}, std::size_t{2}, kUnbounded}) {
      const auto r = exact_optimal_polytree(d, k);
      CHECK(is_k_polytree(r.best, k));
      CHECK(r.best_score == doctest::Approx(naive_optimal_polytree(d, k)).epsilon(1e-9));
    }
  }
}

TEST_CASE("exact k=1 equals the brute-force branching") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto d = random_distribution(2 + seed % 5, 3, seed);
    const auto r = exact_optimal_polytree(d, 1);
    CHECK(r.best_score == doctest::Approx(score(brute_force_branching(d), d).total).epsilon(1e-9));
    CHECK(r.best_score <= r.branching_score + 1e-9);
  }
}

TEST_CASE("exact search is independent of the worker count") {
  const auto d = random_polytree_instance({.n = 6, .k = 3, .max_arity = 3, .seed = 4}).distribution;
  const auto one = exact_optimal_polytree(d, kUnbounded, {.jobs = 1});
  const auto three = exact_optimal_polytree(d, kUnbounded, {.jobs = 3});
  CHECK(one.best == three.best);
  CHECK(one.best_score == three.best_score);
  CHECK(one.instances_enumerated == three.instances_enumerated);
}

TEST_CASE("exact search respects its cap") {
  const auto d = random_distribution(8, 2, 1);
  CHECK_THROWS_AS(exact_optimal_polytree(d), DomainError);
  CHECK_NOTHROW(exact_optimal_polytree(random_distribution(5, 2, 1), kUnbounded, {.max_variables = 5}));
  CHECK_THROWS_AS(exact_optimal_polytree(random_distribution(6, 2, 1), kUnbounded, {.max_variables = 5}),
                  DomainError);
}

TEST_CASE("degenerate optimum leaves the ratio undefined") {
  const Distribution constant({{"A", 2}, {"B", 2}}, {1.0, 0.0, 0.0, 0.0});
  const auto r = exact_optimal_polytree(constant);
  CHECK_FALSE(r.ratio.has_value());
  CHECK(r.additive_excess == doctest::Approx(0.0));
}

TEST_CASE("local search with zero budget returns the seed") {
  const auto d = random_distribution(5, 2, 3);
  const Structure seed({{}, {0}, {}, {2}, {}});
  const auto r = local_search_polytree(d, 2, seed, {.budget = 0});
  CHECK(r.iterations == 0);
  // The branching may replace the seed only if strictly better.
  CHECK(r.best_score <= score(seed, d).total);
}

TEST_CASE("local search from an optimal seed keeps its score") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto d = random_polytree_instance({.n = 5, .k = 2, .seed = seed}).distribution;
    const auto opt = exact_optimal_polytree(d, 2);
    const auto r = local_search_polytree(d, 2, opt.best);
    CHECK(r.best_score == doctest::Approx(opt.best_score).epsilon(1e-9));
  }
}

TEST_CASE("local search invariants along the path") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto d = random_polytree_instance({.n = 5, .k = 2, .max_arity = 3, .seed = seed}).distribution;
    const auto start = learn_optimal_branching(d);
    double previous = score(start, d).total;
    bool valid = true;
    bool monotone = true;
    const auto r = local_search_polytree(d, 2, start, {.on_step = [&](const Structure& s) {
                                           valid = valid && is_k_polytree(s, 2);
                                           const double now = score(s, d).total;
                                           monotone = monotone && now <= previous + 1e-12;
                                           previous = now;
                                         }});
    CHECK(valid);
    CHECK(monotone);
    CHECK(r.best_score <= score(start, d).total + 1e-12);
    CHECK(is_k_polytree(r.best, 2));
    CHECK(r.best_score >= exact_optimal_polytree(d, 2).best_score - 1e-9);
  }
}

TEST_CASE("local search on the parity fixture from an empty seed") {
  // No single move lowers the score: every pair of parents is uninformative,
  // so the descent stops where it started.
  const auto ex2 = example_fixture(Fixture::kExample2);
  const auto r = local_search_polytree(ex2, 3, Structure(4));
  CHECK(r.best_score == doctest::Approx(4.0));
  CHECK(r.iterations == 0);
  // Seeding with two of the three parents lets one addition finish the job.
  const auto near = local_search_polytree(ex2, 3, Structure({{1, 2}, {}, {}, {}}));
  CHECK(near.best_score == doctest::Approx(3.0));
}

TEST_CASE("local search rejects invalid seeds") {
  const auto ex2 = example_fixture(Fixture::kExample2);
  CHECK_THROWS_AS(local_search_polytree(ex2, 2, Structure({{1, 2, 3}, {}, {}, {}})), DomainError);
  CHECK_THROWS_AS(local_search_polytree(ex2, 2, Structure(3)), DomainError);
  CHECK_THROWS_AS(local_search_polytree(ex2, 0, Structure(4)), DomainError);
}

TEST_CASE("swap moves escape a spanning seed") {
  // Chain 0-1-2-3 spans the nodes, so only swaps, removals and reversals apply.
  const auto inst = random_polytree_instance({.n = 4, .k = 2, .seed = 21, .edge_drop_probability = 0.0});
  const Structure chain({{}, {0}, {1}, {2}});
  const auto r = local_search_polytree(inst.distribution, 2, chain);
  CHECK(r.best_score <= score(chain, inst.distribution).total);
  CHECK(is_k_polytree(r.best, 2));
}

TEST_CASE("XOR tree depth 2 ratio cross-checked against the generating polytree") {
  const auto inst = xor_tree_family(2, 0.5);
  const auto r = approximation_ratio(inst.distribution, kUnbounded);
  // The generating tree attains the joint entropy, so nothing can beat it.
  const double generating = score(inst.structure, inst.distribution).total;
  std::vector<std::size_t> all(7);
  for (std::size_t i = 0; i < 7; ++i) all[i] = i;
  CHECK(generating == doctest::Approx(entropy(inst.distribution, all)).epsilon(1e-12));
  CHECK(r.best_score == doctest::Approx(generating).epsilon(1e-9));
  REQUIRE(r.ratio.has_value());
  CHECK(*r.ratio == doctest::Approx(r.branching_score / generating).epsilon(1e-12));
  CHECK(*r.ratio > 1.0);
}
