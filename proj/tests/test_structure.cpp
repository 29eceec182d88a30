#include <doctest.h>

#include "polytree/branching.hpp"
#include "polytree/error.hpp"
#include "polytree/generators.hpp"
#include "polytree/structure.hpp"
#include "test_support.hpp"

using namespace polytree;
using polytree::testing::random_distribution;

namespace {

using Parents = std::vector<std::vector<std::size_t>>;

Structure three_parents_of_x1() { return Structure({{1, 2, 3}, {}, {}, {}}); }

}  // namespace

TEST_CASE("well-formedness") {
  CHECK_THROWS_AS(Structure(Parents{{0}}), DomainError);
  CHECK_THROWS_AS(Structure(Parents{{3}, {}}), DomainError);
  CHECK_THROWS_AS(Structure(Parents{{1, 1}, {}}), DomainError);
  Structure s({{2, 1}, {}, {}});
  CHECK(s.parents(0) == std::vector<std::size_t>{1, 2});
}

TEST_CASE("polytree predicate") {
  CHECK(is_polytree(Structure(5)));
  // 1 -> 2 -> 3 -> 1: skeleton triangle.
  CHECK_FALSE(is_polytree(Structure({{2}, {0}, {1}})));
  // Converging edges in a tree are fine.
  CHECK(is_polytree(Structure({{}, {}, {0, 1}})));
  // Undirected cycle with no directed cycle.
  CHECK_FALSE(is_polytree(Structure({{}, {0}, {0}, {1, 2}})));
  // Mutual edges are a 2-cycle.
  CHECK_FALSE(is_polytree(Structure({{1}, {0}})));
}

TEST_CASE("three-layer reduction skeleton is a polytree only when clauses choose once") {
  // Clauses C0, C1; variables X2, X3; third-layer node L4 joins X2 and X3.
  Structure ok(5);
  ok.add_edge(0, 2);
  ok.add_edge(1, 3);
  ok.add_edge(2, 4);
  ok.add_edge(3, 4);
  CHECK(is_polytree(ok));
  Structure twice = ok;
  twice.add_edge(0, 3);  // C0 chooses two variables
  CHECK_FALSE(is_polytree(twice));
}

TEST_CASE("indegree and source counts") {
  CHECK(max_indegree(Structure(4)) == 0);
  CHECK(max_indegree(three_parents_of_x1()) == 3);
  const auto empty = count_sources_and_multiparents(Structure(4));
  CHECK(empty.sources == 4);
  CHECK(empty.multi_parent == 0);
  const auto chain = count_sources_and_multiparents(Structure({{}, {0}, {1}, {2}}));
  CHECK(chain.sources == 1);
  CHECK(chain.multi_parent == 0);
  const auto ex2 = count_sources_and_multiparents(three_parents_of_x1());
  CHECK(ex2.sources == 3);
  CHECK(ex2.multi_parent == 1);
  CHECK(is_branching(Structure({{}, {0}, {1}, {2}})));
  CHECK_FALSE(is_branching(three_parents_of_x1()));
  CHECK(is_k_polytree(three_parents_of_x1(), 3));
  CHECK_FALSE(is_k_polytree(three_parents_of_x1(), 2));
}

TEST_CASE("scores on the parity fixture") {
  const auto ex2 = example_fixture(Fixture::kExample2);
  CHECK(score(Structure(4), ex2).total == doctest::Approx(4.0).epsilon(1e-12));
  const auto s = score(three_parents_of_x1(), ex2);
  CHECK(s.total == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(s.per_node[0] == doctest::Approx(0.0));
  CHECK_THROWS_AS(score(Structure(3), ex2), DomainError);
}

TEST_CASE("score matches the naive oracle") {
  const auto d = random_distribution(4, 3, 3);
  const std::vector<std::vector<std::size_t>> parents{{1, 2}, {}, {3}, {}};
  CHECK(score(Structure(parents), d).total ==
        doctest::Approx(polytree::testing::naive_score(d, parents)).epsilon(1e-12));
}

TEST_CASE("branching score equals sum of entropies minus edge informations") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const std::size_t n = 2 + seed % 5;
    const auto d = random_distribution(n, 3, seed);
    const auto b = learn_optimal_branching(d);
    double expected = 0.0;
    for (std::size_t i = 0; i < n; ++i) expected += entropy(d, {i});
    for (const auto& [p, c] : b.edges()) expected -= mutual_information(d, p, c);
    CHECK(score(b, d).total == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("adding a parent never increases a node's term") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto d = random_distribution(5, 2, seed);
    EntropyCache cache(d);
    for (std::size_t x = 0; x < 5; ++x) {
      for (std::uint64_t mask = 0; mask < 32; ++mask) {
        if (mask >> x & 1) continue;
        for (std::size_t y = 0; y < 5; ++y) {
          if (y == x || (mask >> y & 1)) continue;
          CHECK(cache.conditional(x, mask | (1u << y)) <= cache.conditional(x, mask) + 1e-9);
        }
      }
    }
  }
}

TEST_CASE("polytrees never exceed n-1 edges") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto inst = random_polytree_instance({.n = 6, .k = 3, .seed = seed});
    CHECK(is_polytree(inst.structure));
    CHECK(inst.structure.edge_count() <= 5);
  }
}

TEST_CASE("DOT and JSON round trips") {
  const std::vector<std::string> names{"X1", "X 2", "X\"3", "X4"};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = random_polytree_instance({.n = 4, .k = 3, .seed = seed}).structure;
    CHECK(structure_from_dot(structure_to_dot(s, names), names) == s);
    const auto j = nlohmann::json::parse(structure_to_json(s, names).dump());
    CHECK(structure_from_json(j, names) == s);
  }
  CHECK(structure_from_dot("digraph g {\n  a -> b;\n}\n", {"a", "b"}) == Structure({{}, {0}}));
  CHECK_THROWS_AS(structure_from_dot("digraph g {\n  a -> c;\n}\n", {"a", "b"}), DomainError);
  CHECK_THROWS_AS(structure_from_dot("a -> b;\n", {"a", "b"}), DomainError);
  CHECK_THROWS_AS(structure_from_json(nlohmann::json{{"nodes", 1}}, {"a"}), DomainError);
}

TEST_CASE("score report JSON shape") {
  const auto ex2 = example_fixture(Fixture::kExample2);
  const auto s = three_parents_of_x1();
  const auto j = score_report_json(s, score(s, ex2), ex2.names());
  CHECK(j["total_bits"].get<double>() == 3.0);
  CHECK(j["per_node"][0]["parents"] == nlohmann::json({"X2", "X3", "X4"}));
  CHECK(j["per_node"][1]["h_bits"].get<double>() == 1.0);
}
