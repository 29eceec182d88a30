#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <utility>

#include "polytree/distribution.hpp"
#include "polytree/structure.hpp"

namespace polytree {

/// Deterministic 64-bit generator. Draws are derived from raw mt19937_64 output
/// so sequences are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  /// Uniform on [0, bound).
  std::uint64_t below(std::uint64_t bound);
  double exponential();
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

/// H(p) in bits for a Bernoulli(p) variable.
double binary_entropy(double p);

/// The p in (0, 1/2] with H(p) = target, by bisection. target in (0, 1].
double solve_binary_entropy(double target);

struct GeneratedInstance {
  Distribution distribution;
  Structure structure;  // the generating polytree
};

inline constexpr int kMaxXorTreeDepth = 4;

/// Complete binary tree with edges toward a single sink.
///
/// Sources are i.i.d. Bernoulli with entropy `eps`; every internal node is
/// the XOR of its two parents. Nodes are in heap order: node 0 is the sink
/// and node i has parents 2i+1 and 2i+2. Depth d gives 2^d sources.
GeneratedInstance xor_tree_family(int depth, double eps, std::size_t max_states = kDefaultMaxStates);

enum class Fixture { kExample1, kExample2 };

/// example1: X1 = X2 xor X3 over fair coins X2, X3.
/// example2: X1 = X2 xor X3 xor X4 over fair coins X2..X4.
Distribution example_fixture(Fixture which);
Fixture fixture_from_name(const std::string& name);

struct RandomInstanceOptions {
  std::size_t n = 4;
  std::size_t k = 2;
  int min_arity = 2;
  int max_arity = 2;
  std::uint64_t seed = 0;
  double edge_drop_probability = 0.1;
  std::size_t max_states = kDefaultMaxStates;
};

/// Random k-polytree skeleton with conditional tables whose rows are drawn
/// uniformly from the simplex (normalized exponentials).
GeneratedInstance random_polytree_instance(const RandomInstanceOptions& options);

}  // namespace polytree
