#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>

#include "polytree/distribution.hpp"
#include "polytree/error.hpp"
#include "polytree/gadget.hpp"
#include "polytree/io.hpp"
#include "test_support.hpp"

using namespace polytree;
using polytree::testing::h2;

namespace {

const char* kUnitFormula = "p cnf 1 3\n1 0\n1 0\n-1 0\n";
const char* kPairFormula = "p cnf 2 3\n1 2 0\n1 -2 0\n-1 2 0\n";

std::vector<std::filesystem::path> corpus() {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(std::string(POLYTREE_SOURCE_DIR) + "/data/cnf")) {
    if (e.path().extension() == ".cnf") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

TEST_CASE("gadget constants") {
  const auto params = make_gadget_params();
  CHECK(std::abs(h2(params.p) - 0.5) < 1e-10);
  CHECK(params.p == doctest::Approx(0.11002786443835957).epsilon(1e-12));
  const double q = 2 * params.p * (1 - params.p);
  CHECK(params.delta == doctest::Approx(1 - h2(q)).epsilon(1e-12));
  CHECK(params.delta == doctest::Approx(0.2864632714340216).epsilon(1e-12));
  CHECK_FALSE(params.include_inedge_blockers);

  // k (H(2q(1-q)) - H(q)) must exceed one bit.
  CHECK_NOTHROW(make_gadget_params(true, 0.1, 5));
  CHECK_THROWS_AS(make_gadget_params(true, 0.1, 1), DomainError);
  CHECK_THROWS_AS(make_gadget_params(true, 0.6, 5), DomainError);
}

TEST_CASE("DIMACS round trip and errors") {
  const auto f = parse_dimacs("c comment\np cnf 2 3\n1 2 0\n1 -2 0 -1\n2 0\n");
  CHECK(f.num_vars == 2);
  REQUIRE(f.clauses.size() == 3);
  CHECK(f.clauses[2] == std::vector<int>{-1, 2});
  CHECK(parse_dimacs(to_dimacs(f)).clauses == f.clauses);

  CHECK_THROWS_AS(parse_dimacs("1 2 0\n"), DomainError);
  CHECK_THROWS_AS(parse_dimacs("p cnf 2 1\n1 2\n"), DomainError);
  CHECK_THROWS_AS(parse_dimacs("p cnf 2 2\n1 2 0\n"), DomainError);
  CHECK_THROWS_AS(parse_dimacs("p cnf 2 1\n1 3 0\n"), DomainError);
  CHECK_THROWS_AS(parse_dimacs("p cnf 2 1\n1 x 0\n"), DomainError);
}

TEST_CASE("MAX3SAT(3) validation") {
  CHECK_NOTHROW(validate_max3sat3(parse_dimacs(kUnitFormula)));
  CHECK_NOTHROW(validate_max3sat3(parse_dimacs(kPairFormula)));
  // All three occurrences positive.
  CHECK_THROWS_AS(validate_max3sat3(parse_dimacs("p cnf 1 3\n1 0\n1 0\n1 0\n")), DomainError);
  // Only two occurrences.
  CHECK_THROWS_AS(validate_max3sat3(parse_dimacs("p cnf 1 2\n1 0\n-1 0\n")), DomainError);
  // Repeated variable inside one clause.
  CHECK_THROWS_AS(validate_max3sat3(parse_dimacs("p cnf 1 2\n1 -1 0\n1 0\n")), DomainError);
  // Clause of width four.
  CHECK_THROWS_AS(validate_max3sat3(parse_dimacs(
                      "p cnf 4 3\n1 2 3 4 0\n1 2 3 4 0\n-1 -2 -3 -4 0\n")),
                  DomainError);
  // Empty clause.
  CHECK_THROWS_AS(validate_max3sat3(parse_dimacs("p cnf 1 4\n0\n1 0\n1 0\n-1 0\n")), DomainError);
}

TEST_CASE("single-variable gadget against the dense joint") {
  const auto g = compile_cnf(parse_dimacs(kUnitFormula), make_gadget_params());
  CHECK(g.clause_nodes.size() == 3);
  CHECK(g.principal_nodes.size() == 1);
  CHECK(g.link_nodes.empty());
  const auto d = dense_distribution(g.net);
  CHECK(d.num_variables() == g.net.nodes().size());

  const std::size_t x = g.principal_nodes[0];
  const std::size_t r = g.satellite_nodes[0];
  const auto& o = g.occurrences[0];
  const std::size_t c1 = g.clause_nodes[o.same_first];
  const std::size_t c2 = g.clause_nodes[o.same_second];
  const std::size_t c3 = g.clause_nodes[o.opposite];
  CHECK(o.majority_positive);
  CHECK(c3 == g.clause_nodes[2]);

  const double hx = polytree::testing::naive_entropy(d, {x});
  const double hq = h2(2 * g.params.p * (1 - g.params.p));
  CHECK(hx == doctest::Approx(hq + 3.0).epsilon(1e-12));
  auto dec = [&](std::vector<std::size_t> given) {
    return hx - polytree::testing::naive_conditional(d, x, given);
  };
  const double delta = g.params.delta;
  CHECK(dec({r}) == doctest::Approx(delta).epsilon(1e-10));
  CHECK(dec({r, c1}) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(dec({r, c3}) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(dec({c1, c2}) == doctest::Approx(1 - delta).epsilon(1e-10));
  CHECK(dec({c1, c3}) == doctest::Approx(0.5 - delta).epsilon(1e-10));

  // The net's own entropy queries agree with the dense table.
  for (std::size_t v = 0; v < d.num_variables(); ++v) {
    const std::size_t single[] = {v};
    CHECK(g.net.entropy(single) == doctest::Approx(entropy(d, {v})).epsilon(1e-12));
  }
  const std::size_t pair[] = {c1, c3};
  CHECK(g.net.conditional_entropy(x, pair) ==
        doctest::Approx(conditional_entropy(d, x, {c1, c3})).epsilon(1e-12));

  const auto report = verify_gadget(g);
  CHECK(report.all_pass());
  CHECK(report.decreases.size() == 7);
  CHECK(report.cost_drops.size() == 2);
  CHECK(report.best_satisfied == 2);
}

TEST_CASE("gadget corpus") {
  const auto files = corpus();
  REQUIRE(files.size() >= 5);
  for (bool blockers : {false, true}) {
    for (const auto& path : files) {
      CAPTURE(path.string());
      const auto formula = parse_dimacs(read_text_file(path.string()));
      validate_max3sat3(formula);
      const auto g = compile_cnf(formula, make_gadget_params(blockers));
      CHECK(std::abs(g.top.measured - g.top.target) < 1e-9);
      CHECK(std::abs(g.middle.measured - g.middle.target) < 1e-9);
      CHECK(std::abs(g.third.measured - g.third.target) < 1e-9);
      CHECK(g.blocker_nodes.size() == (blockers ? 2 * formula.num_vars : 0));
      const auto report = verify_gadget(g);
      CHECK(report.all_pass());
      CHECK(report.exhaustive_assignments);
      CHECK(report.cost_drops.size() == (std::size_t{1} << formula.num_vars));
    }
  }
}

TEST_CASE("gadget sampler matches node entropies") {
  const auto g = compile_cnf(parse_dimacs(kPairFormula), make_gadget_params());
  LayeredSampler sampler(g.net, 11);
  const auto data = sampler.sample(1000000);
  const auto emp = empirical_distribution(data);
  for (std::size_t v = 0; v < g.net.nodes().size(); ++v) {
    const std::size_t single[] = {v};
    CHECK(std::abs(entropy(emp, {v}) - g.net.entropy(single)) < 0.01);
  }
  LayeredSampler again(g.net, 11);
  CHECK(again.sample(50).rows == std::vector<std::vector<int>>(data.rows.begin(), data.rows.begin() + 50));
}

TEST_CASE("gadget metadata JSON") {
  const auto g = compile_cnf(parse_dimacs(kPairFormula), make_gadget_params());
  const auto j = gadget_metadata_json(g);
  CHECK(j["m"].get<std::size_t>() == 3);
  CHECK(j["n"].get<std::size_t>() == 2);
  CHECK(j["layer_entropies"]["third"]["target_bits"].get<double>() == 1.0);
  CHECK(j["layer_entropies"]["top"]["pass"].get<bool>());
  CHECK_FALSE(j["inedge_blockers"].get<bool>());
}
