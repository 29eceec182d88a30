#pragma once

// Shared fixtures and brute-force oracles for the unit tests. Nothing here
// calls into the library's entropy code, so it can be used to check it.

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "polytree/distribution.hpp"
#include "polytree/generators.hpp"

namespace polytree::testing {

/// Random full joint table (not a polytree), arities drawn from [2, max_arity].
inline Distribution random_distribution(std::size_t n, int max_arity, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<VariableMeta> vars;
  std::size_t states = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const int arity = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_arity - 1)));
    vars.push_back({"V" + std::to_string(i), arity});
    states *= static_cast<std::size_t>(arity);
  }
  std::vector<double> probs(states);
  double total = 0.0;
  for (double& p : probs) {
    // Cubing skews the table so that variables are visibly dependent.
    const double u = rng.uniform();
    p = u * u * u;
    total += p;
  }
  for (double& p : probs) p /= total;
  return Distribution(std::move(vars), std::move(probs));
}

/// Entropy of the marginal over `vars` by direct enumeration of full states.
inline double naive_entropy(const Distribution& dist, const std::vector<std::size_t>& vars) {
  std::map<std::vector<int>, double> table;
  for (std::size_t s = 0; s < dist.num_states(); ++s) {
    const auto full = dist.decode_state(s);
    std::vector<int> key;
    for (std::size_t v : vars) key.push_back(full[v]);
    table[key] += dist.probabilities()[s];
  }
  double h = 0.0;
  for (const auto& [key, p] : table) {
    if (p > 0) h -= p * std::log2(p);
  }
  return h;
}

inline double naive_conditional(const Distribution& dist, std::size_t target,
                                std::vector<std::size_t> given) {
  const double hg = given.empty() ? 0.0 : naive_entropy(dist, given);
  given.push_back(target);
  return naive_entropy(dist, given) - hg;
}

/// Score of a parent assignment through the naive oracle.
inline double naive_score(const Distribution& dist, const std::vector<std::vector<std::size_t>>& parents) {
  double total = 0.0;
  for (std::size_t i = 0; i < parents.size(); ++i) total += naive_conditional(dist, i, parents[i]);
  return total;
}

/// Binary entropy written out independently of the library.
inline double h2(double p) {
  if (p <= 0 || p >= 1) return 0.0;
  return -(p * std::log(p) + (1 - p) * std::log(1 - p)) / std::log(2.0);
}

}  // namespace polytree::testing
