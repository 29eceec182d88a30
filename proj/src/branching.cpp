#include "polytree/branching.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <thread>

#include "polytree/error.hpp"
#include "union_find.hpp"

namespace polytree {

std::vector<WeightedEdge> mutual_information_edges(const Distribution& dist, std::size_t jobs) {
  const std::size_t n = dist.num_variables();
  std::vector<WeightedEdge> edges;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) edges.push_back({a, b, 0.0});
  }
  if (edges.empty()) return edges;

  // Singletons first so every worker reads, never writes, them.
  std::vector<double> single(n);
  for (std::size_t i = 0; i < n; ++i) single[i] = entropy(dist, {i});

  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t e = begin; e < edges.size(); e += stride) {
      auto& edge = edges[e];
      edge.weight =
          clamp_information(single[edge.a] + single[edge.b] - entropy(dist, {edge.a, edge.b}));
    }
  };
  jobs = std::clamp<std::size_t>(jobs, 1, edges.size());
  if (jobs == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> workers;
    for (std::size_t t = 0; t < jobs; ++t) workers.emplace_back(work, t, jobs);
  }
  return edges;
}

Structure orient_forest(std::size_t n, const std::vector<WeightedEdge>& forest_edges) {
  std::vector<std::vector<std::size_t>> adjacency(n);
  for (const auto& e : forest_edges) {
    adjacency[e.a].push_back(e.b);
    adjacency[e.b].push_back(e.a);
  }
  for (auto& nb : adjacency) std::sort(nb.begin(), nb.end());

  Structure s(n);
  std::vector<bool> visited(n, false);
  for (std::size_t root = 0; root < n; ++root) {
    if (visited[root]) continue;
    visited[root] = true;
    std::deque<std::size_t> queue{root};
    while (!queue.empty()) {
      const std::size_t u = queue.front();
      queue.pop_front();
      for (std::size_t v : adjacency[u]) {
        if (visited[v]) continue;
        visited[v] = true;
        s.add_edge(u, v);
        queue.push_back(v);
      }
    }
  }
  return s;
}

Structure learn_optimal_branching(const Distribution& dist, std::size_t jobs) {
  auto edges = mutual_information_edges(dist, jobs);
  std::stable_sort(edges.begin(), edges.end(), [](const WeightedEdge& x, const WeightedEdge& y) {
    if (x.weight != y.weight) return x.weight > y.weight;
    return std::pair(x.a, x.b) < std::pair(y.a, y.b);
  });

  const std::size_t n = dist.num_variables();
  detail::DisjointSets sets(n);
  std::vector<WeightedEdge> forest;
  for (const auto& e : edges) {
    if (e.weight <= kZeroWeightThreshold) break;
    if (sets.unite(e.a, e.b)) forest.push_back(e);
  }
  return orient_forest(n, forest);
}

namespace {

struct BranchingEnumerator {
  std::size_t n;
  EntropyCache& cache;
  std::vector<std::size_t> parent;  // n means "no parent"
  std::vector<std::size_t> best_parent;
  double best_score = std::numeric_limits<double>::infinity();

  // True if following parent pointers from `node` returns to it.
  bool on_cycle(std::size_t node) const {
    std::size_t cur = parent[node];
    for (std::size_t steps = 0; cur != n && steps <= n; ++steps) {
      if (cur == node) return true;
      cur = parent[cur];
    }
    return false;
  }

  void run(std::size_t node, double partial) {
    if (partial >= best_score) return;
    if (node == n) {
      best_score = partial;
      best_parent = parent;
      return;
    }
    // p == n stands for "no parent".
    for (std::size_t p = 0; p <= n; ++p) {
      if (p == node) continue;
      parent[node] = p;
      // With at most one parent per node, the skeleton has a cycle exactly when
      // the parent pointers do.
      if (p != n && on_cycle(node)) continue;
      const std::uint64_t mask = p == n ? 0 : (std::uint64_t{1} << p);
      run(node + 1, partial + cache.conditional(node, mask));
    }
    parent[node] = n;
  }
};

}  // namespace

Structure brute_force_branching(const Distribution& dist) {
  const std::size_t n = dist.num_variables();
  if (n > kBruteForceBranchingCap) {
    throw DomainError("cap_exceeded", "brute-force branching supports at most " +
                                          std::to_string(kBruteForceBranchingCap) + " variables");
  }
  EntropyCache cache(dist);
  BranchingEnumerator e{n, cache, std::vector<std::size_t>(n, n), {}, std::numeric_limits<double>::infinity()};
  e.run(0, 0.0);
  Structure s(n);
  for (std::size_t child = 0; child < n; ++child) {
    if (e.best_parent[child] != n) s.add_edge(e.best_parent[child], child);
  }
  return s;
}

}  // namespace polytree
