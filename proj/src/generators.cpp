#include "polytree/generators.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <cmath>
#include <numeric>

#include "polytree/error.hpp"

namespace polytree {

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw DomainError("invalid_argument", "Rng::below(0)");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x = next();
  while (x >= limit) x = next();
  return x % bound;
}

double Rng::exponential() { return -std::log1p(-uniform()); }

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double solve_binary_entropy(double target) {
  if (!(target > 0.0 && target <= 1.0)) {
    throw DomainError("invalid_argument", "target entropy must lie in (0, 1]");
  }
  if (target == 1.0) return 0.5;
  // H is strictly increasing on (0, 1/2).
  double lo = 0.0;
  double hi = 0.5;
  for (int iter = 0; iter < 200 && hi - lo > 1e-17; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (binary_entropy(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

GeneratedInstance xor_tree_family(int depth, double eps, std::size_t max_states) {
  if (depth < 1 || depth > kMaxXorTreeDepth) {
    throw DomainError("invalid_argument", "XOR tree depth must be in [1, " +
                                              std::to_string(kMaxXorTreeDepth) + "]");
  }
  if (!(eps > 0.0 && eps <= 1.0)) {
    throw DomainError("invalid_argument", "source entropy eps must be in (0, 1]");
  }
  const std::size_t n = (std::size_t{1} << (depth + 1)) - 1;
  const std::size_t first_source = (std::size_t{1} << depth) - 1;
  const std::size_t num_sources = n - first_source;

  std::vector<VariableMeta> vars;
  for (std::size_t i = 0; i < n; ++i) vars.push_back({"X" + std::to_string(i + 1), 2});
  const std::size_t states = joint_state_count(vars, max_states);

  const double p = solve_binary_entropy(eps);
  std::vector<double> probs(states, 0.0);
  std::vector<int> value(n);
  for (std::uint64_t assignment = 0; assignment < (std::uint64_t{1} << num_sources); ++assignment) {
    double weight = 1.0;
    for (std::size_t s = 0; s < num_sources; ++s) {
      const int bit = static_cast<int>(assignment >> s & 1);
      value[first_source + s] = bit;
      weight *= bit ? p : 1.0 - p;
    }
    for (std::size_t i = first_source; i-- > 0;) value[i] = value[2 * i + 1] ^ value[2 * i + 2];
    std::size_t index = 0;
    for (int v : value) index = index * 2 + static_cast<std::size_t>(v);
    probs[index] += weight;
  }

  Structure s(n);
  for (std::size_t i = 0; i < first_source; ++i) {
    s.add_edge(2 * i + 1, i);
    s.add_edge(2 * i + 2, i);
  }
  return {Distribution(std::move(vars), std::move(probs), max_states), std::move(s)};
}

Distribution example_fixture(Fixture which) {
  const std::size_t n = which == Fixture::kExample1 ? 3 : 4;
  std::vector<VariableMeta> vars;
  for (std::size_t i = 0; i < n; ++i) vars.push_back({"X" + std::to_string(i + 1), 2});
  std::vector<double> probs(std::size_t{1} << n, 0.0);
  // X2..Xn are fair coins and X1 is their parity.
  const double weight = 1.0 / static_cast<double>(std::size_t{1} << (n - 1));
  for (std::uint64_t rest = 0; rest < (std::uint64_t{1} << (n - 1)); ++rest) {
    const auto parity = static_cast<std::uint64_t>(std::popcount(rest) & 1);
    probs[(parity << (n - 1)) | rest] = weight;
  }
  return Distribution(std::move(vars), std::move(probs));
}

Fixture fixture_from_name(const std::string& name) {
  if (name == "example1") return Fixture::kExample1;
  if (name == "example2") return Fixture::kExample2;
  throw DomainError("invalid_argument", "unknown fixture '" + name + "' (expected example1|example2)");
}

GeneratedInstance random_polytree_instance(const RandomInstanceOptions& options) {
  const std::size_t n = options.n;
  if (n == 0) throw DomainError("invalid_argument", "instance needs at least one variable");
  if (options.k == 0) throw DomainError("invalid_argument", "parent bound k must be >= 1");
  if (options.min_arity < 2 || options.max_arity < options.min_arity) {
    throw DomainError("invalid_argument", "arity range must satisfy 2 <= min <= max");
  }
  Rng rng(options.seed);

  std::vector<VariableMeta> vars;
  for (std::size_t i = 0; i < n; ++i) {
    const auto span = static_cast<std::uint64_t>(options.max_arity - options.min_arity + 1);
    vars.push_back({"X" + std::to_string(i + 1),
                    options.min_arity + static_cast<int>(rng.below(span))});
  }
  const std::size_t states = joint_state_count(vars, options.max_states);

  // Random labelled tree: attach nodes in random order to an earlier node.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  Structure s(n);
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t u = order[i];
    const std::size_t v = order[rng.below(i)];
    const bool drop = rng.bernoulli(options.edge_drop_probability);
    auto [parent, child] = rng.bernoulli(0.5) ? std::pair(u, v) : std::pair(v, u);
    if (drop) continue;
    if (s.parents(child).size() >= options.k) std::swap(parent, child);
    if (s.parents(child).size() >= options.k) continue;
    s.add_edge(parent, child);
  }

  // Conditional tables, one row per parent configuration.
  std::vector<std::vector<double>> cpt(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t rows = 1;
    for (std::size_t p : s.parents(i)) rows *= static_cast<std::size_t>(vars[p].arity);
    const auto arity = static_cast<std::size_t>(vars[i].arity);
    cpt[i].resize(rows * arity);
    for (std::size_t r = 0; r < rows; ++r) {
      double total = 0.0;
      for (std::size_t a = 0; a < arity; ++a) total += cpt[i][r * arity + a] = rng.exponential();
      for (std::size_t a = 0; a < arity; ++a) cpt[i][r * arity + a] /= total;
    }
  }

  std::vector<double> probs(states);
  std::vector<int> digits(n, 0);
  for (std::size_t state = 0; state < states; ++state) {
    double weight = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t row = 0;
      for (std::size_t p : s.parents(i)) {
        row = row * static_cast<std::size_t>(vars[p].arity) + static_cast<std::size_t>(digits[p]);
      }
      weight *= cpt[i][row * static_cast<std::size_t>(vars[i].arity) +
                       static_cast<std::size_t>(digits[i])];
    }
    probs[state] = weight;
    for (std::size_t j = n; j-- > 0;) {
      if (++digits[j] < vars[j].arity) break;
      digits[j] = 0;
    }
  }
  // Renormalize away accumulated round-off.
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  for (double& p : probs) p /= total;

  return {Distribution(std::move(vars), std::move(probs), options.max_states), std::move(s)};
}

}  // namespace polytree
