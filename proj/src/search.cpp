#include "polytree/search.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <limits>
#include <thread>
#include <tuple>

#include "polytree/branching.hpp"
#include "polytree/error.hpp"
#include "polytree/io.hpp"

namespace polytree {

namespace {

constexpr double kImprovementTolerance = 1e-9;
constexpr std::size_t kHardExactLimit = 16;

struct Candidate {
  double score = std::numeric_limits<double>::infinity();
  std::vector<std::uint64_t> masks;
  std::size_t enumerated = 0;

  bool beats(const Candidate& other) const {
    if (score != other.score) return score < other.score;
    return masks < other.masks;
  }
};

class ExactEnumerator {
 public:
  ExactEnumerator(const Distribution& dist, std::size_t k) : n_(dist.num_variables()), k_(k) {
    EntropyCache cache(dist);
    const std::uint64_t subsets = std::uint64_t{1} << n_;
    conditional_.assign(n_, std::vector<double>(subsets, 0.0));
    for (std::size_t i = 0; i < n_; ++i) {
      const std::uint64_t bit = std::uint64_t{1} << i;
      for (std::uint64_t mask = 0; mask < subsets; ++mask) {
        if (!(mask & bit)) conditional_[i][mask] = cache.conditional(i, mask);
      }
    }
    for (std::size_t a = 0; a < n_; ++a) {
      for (std::size_t b = a + 1; b < n_; ++b) pairs_.emplace_back(a, b);
    }
    split_depth_ = std::min<std::size_t>(pairs_.size(), 8);
  }

  Candidate run(std::size_t worker, std::size_t workers) {
    Candidate best;
    std::array<std::uint8_t, kHardExactLimit> labels{};
    for (std::size_t i = 0; i < n_; ++i) labels[i] = static_cast<std::uint8_t>(i);
    std::vector<std::size_t> chosen;
    std::size_t prefix_counter = 0;
    descend(0, labels, chosen, best, worker, workers, prefix_counter);
    return best;
  }

 private:
  void descend(std::size_t e, std::array<std::uint8_t, kHardExactLimit> labels,
               std::vector<std::size_t>& chosen, Candidate& best, std::size_t worker,
               std::size_t workers, std::size_t& prefix_counter) {
    if (e == split_depth_) {
      // Prefixes are handed out round-robin so workers see disjoint subtrees.
      if (prefix_counter++ % workers != worker) return;
    }
    if (e == pairs_.size()) {
      score_orientations(chosen, best);
      return;
    }
    const auto [a, b] = pairs_[e];
    // Exclude the edge.
    descend(e + 1, labels, chosen, best, worker, workers, prefix_counter);
    // Include it if it joins two different trees.
    if (labels[a] != labels[b]) {
      const std::uint8_t from = labels[b];
      const std::uint8_t to = labels[a];
      for (std::size_t i = 0; i < n_; ++i) {
        if (labels[i] == from) labels[i] = to;
      }
      chosen.push_back(e);
      descend(e + 1, labels, chosen, best, worker, workers, prefix_counter);
      chosen.pop_back();
    }
  }

  void score_orientations(const std::vector<std::size_t>& chosen, Candidate& best) {
    const std::size_t m = chosen.size();
    std::vector<std::uint64_t> masks(n_);
    for (std::uint64_t orientation = 0; orientation < (std::uint64_t{1} << m); ++orientation) {
      std::fill(masks.begin(), masks.end(), 0);
      for (std::size_t j = 0; j < m; ++j) {
        auto [a, b] = pairs_[chosen[j]];
        if (orientation >> j & 1) std::swap(a, b);
        masks[b] |= std::uint64_t{1} << a;
      }
      bool within_bound = true;
      for (std::size_t i = 0; i < n_ && within_bound; ++i) {
        within_bound = static_cast<std::size_t>(std::popcount(masks[i])) <= k_;
      }
      if (!within_bound) continue;
      ++best.enumerated;
      double total = 0.0;
      for (std::size_t i = 0; i < n_; ++i) total += conditional_[i][masks[i]];
      if (total < best.score || (total == best.score && masks < best.masks)) {
        best.score = total;
        best.masks = masks;
      }
    }
  }

  std::size_t n_;
  std::size_t k_;
  std::vector<std::vector<double>> conditional_;
  std::vector<std::pair<std::size_t, std::size_t>> pairs_;
  std::size_t split_depth_ = 0;
};

Structure structure_from_masks(const std::vector<std::uint64_t>& masks) {
  std::vector<std::vector<std::size_t>> parents;
  parents.reserve(masks.size());
  for (auto mask : masks) parents.push_back(from_mask(mask));
  return Structure(std::move(parents));
}

void fill_ratio(SearchReport& report) {
  report.additive_excess = report.branching_score - report.best_score;
  if (report.best_score > kDegenerateScore) {
    report.ratio = report.branching_score / report.best_score;
  } else {
    report.ratio.reset();
  }
}

// Move encoding doubles as the deterministic tie-break key.
enum class MoveKind { kAdd = 0, kRemove = 1, kReverse = 2, kSwap = 3 };

struct Move {
  MoveKind kind = MoveKind::kAdd;
  std::size_t a = 0, b = 0, c = 0, d = 0;  // edge a->b; for swaps, c->d is added
  double delta = 0.0;

  auto key() const { return std::tuple(static_cast<int>(kind), a, b, c, d); }
};

class LocalSearch {
 public:
  LocalSearch(const Distribution& dist, std::size_t k, const Structure& seed)
      : cache_(dist), k_(k), n_(seed.size()), masks_(n_), terms_(n_) {
    for (std::size_t i = 0; i < n_; ++i) {
      masks_[i] = seed.parent_mask(i);
      terms_[i] = cache_.conditional(i, masks_[i]);
    }
  }

  double total() const {
    double t = 0.0;
    for (double x : terms_) t += x;
    return t;
  }

  Structure structure() const { return structure_from_masks(masks_); }

  std::size_t evaluated() const { return evaluated_; }

  // Finds the steepest improving move; returns false at a local optimum.
  bool step() {
    const auto labels = component_labels();
    std::optional<Move> best;
    auto consider = [&](const Move& m) {
      ++evaluated_;
      if (m.delta >= -kImprovementTolerance) return;
      if (!best || m.delta < best->delta || (m.delta == best->delta && m.key() < best->key())) {
        best = m;
      }
    };

    for (std::size_t u = 0; u < n_; ++u) {
      for (std::size_t v = 0; v < n_; ++v) {
        if (u == v || labels[u] == labels[v] || indegree(v) + 1 > k_) continue;
        consider({MoveKind::kAdd, u, v, 0, 0, change_delta(v, masks_[v] | bit(u))});
      }
    }

    for (std::size_t v = 0; v < n_; ++v) {
      for (std::size_t u : from_mask(masks_[v])) {
        const std::uint64_t without = masks_[v] & ~bit(u);
        consider({MoveKind::kRemove, u, v, 0, 0, change_delta(v, without)});

        if (indegree(u) + 1 <= k_) {
          const double delta = change_delta(v, without) + change_delta(u, masks_[u] | bit(v));
          consider({MoveKind::kReverse, u, v, 0, 0, delta});
        }

        // Swap: drop u->v, then add any edge reconnecting two separate trees.
        const auto split = component_labels_without(u, v);
        for (std::size_t x = 0; x < n_; ++x) {
          for (std::size_t y = 0; y < n_; ++y) {
            if (x == y || split[x] == split[y] || (x == u && y == v)) continue;
            const std::uint64_t y_before = y == v ? without : masks_[y];
            if (static_cast<std::size_t>(std::popcount(y_before)) + 1 > k_) continue;
            double delta = 0.0;
            if (y == v) {
              delta = change_delta(v, without | bit(x));
            } else {
              delta = change_delta(v, without) + change_delta(y, masks_[y] | bit(x));
            }
            consider({MoveKind::kSwap, u, v, x, y, delta});
          }
        }
      }
    }

    if (!best) return false;
    apply(*best);
    return true;
  }

 private:
  static std::uint64_t bit(std::size_t i) { return std::uint64_t{1} << i; }

  std::size_t indegree(std::size_t v) const {
    return static_cast<std::size_t>(std::popcount(masks_[v]));
  }

  double change_delta(std::size_t node, std::uint64_t new_mask) {
    return cache_.conditional(node, new_mask) - terms_[node];
  }

  void set_mask(std::size_t node, std::uint64_t mask) {
    masks_[node] = mask;
    terms_[node] = cache_.conditional(node, mask);
  }

  void apply(const Move& m) {
    switch (m.kind) {
      case MoveKind::kAdd:
        set_mask(m.b, masks_[m.b] | bit(m.a));
        break;
      case MoveKind::kRemove:
        set_mask(m.b, masks_[m.b] & ~bit(m.a));
        break;
      case MoveKind::kReverse:
        set_mask(m.b, masks_[m.b] & ~bit(m.a));
        set_mask(m.a, masks_[m.a] | bit(m.b));
        break;
      case MoveKind::kSwap:
        set_mask(m.b, masks_[m.b] & ~bit(m.a));
        set_mask(m.d, masks_[m.d] | bit(m.c));
        break;
    }
  }

  std::vector<std::size_t> component_labels() const { return labels_impl(n_, n_); }

  std::vector<std::size_t> component_labels_without(std::size_t parent, std::size_t child) const {
    return labels_impl(parent, child);
  }

  // Skeleton component labels, ignoring edge skip_parent->skip_child.
  std::vector<std::size_t> labels_impl(std::size_t skip_parent, std::size_t skip_child) const {
    std::vector<std::vector<std::size_t>> adjacency(n_);
    for (std::size_t v = 0; v < n_; ++v) {
      for (std::size_t u : from_mask(masks_[v])) {
        if (u == skip_parent && v == skip_child) continue;
        adjacency[u].push_back(v);
        adjacency[v].push_back(u);
      }
    }
    std::vector<std::size_t> label(n_, n_);
    std::vector<std::size_t> stack;
    for (std::size_t root = 0; root < n_; ++root) {
      if (label[root] != n_) continue;
      label[root] = root;
      stack.push_back(root);
      while (!stack.empty()) {
        const std::size_t u = stack.back();
        stack.pop_back();
        for (std::size_t w : adjacency[u]) {
          if (label[w] == n_) {
            label[w] = root;
            stack.push_back(w);
          }
        }
      }
    }
    return label;
  }

  EntropyCache cache_;
  std::size_t k_;
  std::size_t n_;
  std::vector<std::uint64_t> masks_;
  std::vector<double> terms_;
  std::size_t evaluated_ = 0;
};

}  // namespace

SearchReport exact_optimal_polytree(const Distribution& dist, std::size_t k,
                                    const ExactSearchOptions& options) {
  const std::size_t n = dist.num_variables();
  const std::size_t cap = std::min(options.max_variables, kHardExactLimit);
  if (n > cap) {
    throw DomainError("cap_exceeded", "exact polytree search supports at most " +
                                          std::to_string(cap) + " variables (got " +
                                          std::to_string(n) + "; see --exact-cap)");
  }
  if (k == 0) throw DomainError("invalid_argument", "parent bound k must be >= 1");

  ExactEnumerator enumerator(dist, k);
  const std::size_t workers = std::max<std::size_t>(1, options.jobs);
  std::vector<Candidate> partial(workers);
  if (workers == 1) {
    partial[0] = enumerator.run(0, 1);
  } else {
    std::vector<std::jthread> threads;
    for (std::size_t t = 0; t < workers; ++t) {
      threads.emplace_back([&, t] { partial[t] = enumerator.run(t, workers); });
    }
  }

  Candidate best;
  std::size_t enumerated = 0;
  for (const auto& c : partial) {
    enumerated += c.enumerated;
    if (!c.masks.empty() && (best.masks.empty() || c.beats(best))) best = c;
  }

  SearchReport report;
  report.best = structure_from_masks(best.masks);
  // Rescored through the public path so the reported value matches score().
  report.best_score = score(report.best, dist).total;
  report.branching_score = score(learn_optimal_branching(dist), dist).total;
  report.instances_enumerated = enumerated;
  fill_ratio(report);
  return report;
}

SearchReport local_search_polytree(const Distribution& dist, std::size_t k, const Structure& seed,
                                   const LocalSearchOptions& options) {
  if (k == 0) throw DomainError("invalid_argument", "parent bound k must be >= 1");
  if (seed.size() != dist.num_variables()) {
    throw DomainError("invalid_argument", "seed structure size does not match the distribution");
  }
  if (!is_k_polytree(seed, k)) {
    throw DomainError("invalid_argument", "seed is not a valid k-polytree");
  }
  if (dist.num_variables() > 64) {
    throw DomainError("cap_exceeded", "local search supports at most 64 variables");
  }

  LocalSearch search(dist, k, seed);
  if (options.on_step) options.on_step(seed);
  std::size_t iterations = 0;
  while (iterations < options.budget && search.step()) {
    ++iterations;
    if (options.on_step) options.on_step(search.structure());
  }

  SearchReport report;
  report.best = search.structure();
  report.best_score = score(report.best, dist).total;
  const Structure branching = learn_optimal_branching(dist, options.jobs);
  report.branching_score = score(branching, dist).total;
  if (report.branching_score < report.best_score) {
    report.best = branching;
    report.best_score = report.branching_score;
  }
  report.instances_enumerated = search.evaluated();
  report.iterations = iterations;
  fill_ratio(report);
  return report;
}

SearchReport local_search_polytree(const Distribution& dist, std::size_t k,
                                   const LocalSearchOptions& options) {
  return local_search_polytree(dist, k, learn_optimal_branching(dist, options.jobs), options);
}

SearchReport approximation_ratio(const Distribution& dist, std::size_t k,
                                 const ExactSearchOptions& options) {
  return exact_optimal_polytree(dist, k, options);
}

nlohmann::json search_report_json(const SearchReport& report, const std::vector<std::string>& names,
                                  std::size_t k) {
  nlohmann::json j;
  j["best"] = structure_to_json(report.best, names);
  j["best_score_bits"] = round_report(report.best_score);
  j["branching_score_bits"] = round_report(report.branching_score);
  j["ratio"] = report.ratio ? nlohmann::json(round_report(*report.ratio)) : nlohmann::json(nullptr);
  j["additive_excess_bits"] = round_report(report.additive_excess);
  j["instances_enumerated"] = report.instances_enumerated;
  j["iterations"] = report.iterations;
  j["k"] = k == kUnbounded ? nlohmann::json("unbounded") : nlohmann::json(k);
  return j;
}

}  // namespace polytree
