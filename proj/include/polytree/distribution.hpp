#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace polytree {

inline constexpr std::size_t kDefaultMaxStates = std::size_t{1} << 24;

// Round-off tolerance for information quantities. Negative values no larger
// than this in magnitude are clamped to zero; anything below is a bug.
inline constexpr double kClampTolerance = 1e-12;

struct VariableMeta {
  std::string name;
  int arity = 2;

  bool operator==(const VariableMeta&) const = default;
};

/// Exact joint probability table over discrete variables.
///
/// The table is dense and stored in mixed-radix order with the last variable
/// varying fastest. Instances are immutable once constructed.
class Distribution {
 public:
  Distribution(std::vector<VariableMeta> variables, std::vector<double> probabilities,
               std::size_t max_states = kDefaultMaxStates);

  std::size_t num_variables() const { return variables_.size(); }
  const std::vector<VariableMeta>& variables() const { return variables_; }
  const VariableMeta& variable(std::size_t i) const { return variables_.at(i); }
  const std::vector<double>& probabilities() const { return probabilities_; }
  std::size_t num_states() const { return probabilities_.size(); }
  std::vector<std::string> names() const;

  /// Linear index of a full joint assignment.
  std::size_t state_index(std::span<const int> values) const;
  /// Inverse of state_index.
  std::vector<int> decode_state(std::size_t index) const;

  bool operator==(const Distribution&) const = default;

 private:
  std::vector<VariableMeta> variables_;
  std::vector<double> probabilities_;
};

struct Dataset {
  std::vector<VariableMeta> variables;
  std::vector<std::vector<int>> rows;
};

/// Throws DomainError if any row has the wrong width or an out-of-range value.
void validate_dataset(const Dataset& data);

struct EmpiricalOptions {
  double pseudocount = 0.0;  // additive smoothing; 0 gives the plug-in estimate
  std::size_t max_states = kDefaultMaxStates;
};

/// Maximum-likelihood (plug-in) estimate of the joint distribution.
Distribution empirical_distribution(const Dataset& data, const EmpiricalOptions& options = {});

/// Checked product of arities; throws DomainError("cap_exceeded") past the cap.
std::size_t joint_state_count(std::span<const VariableMeta> variables, std::size_t max_states);

Distribution marginal(const Distribution& dist, std::span<const std::size_t> vars);

/// Shannon entropy in bits of the marginal over `vars`. 0·log 0 = 0.
double entropy(const Distribution& dist, std::span<const std::size_t> vars);
double entropy(const Distribution& dist, std::initializer_list<std::size_t> vars);

/// H(target | given) = H(target ∪ given) − H(given).
double conditional_entropy(const Distribution& dist, std::size_t target,
                           std::span<const std::size_t> given);
double conditional_entropy(const Distribution& dist, std::size_t target,
                           std::initializer_list<std::size_t> given);

double mutual_information(const Distribution& dist, std::size_t a, std::size_t b);

/// Applies the round-off clamp: tiny negatives become 0, large negatives throw.
double clamp_information(double value);

/// Memoized subset entropies over one distribution, keyed by variable bitmask.
/// Supports at most 64 variables. Not thread-safe; use one per thread.
class EntropyCache {
 public:
  explicit EntropyCache(const Distribution& dist);

  const Distribution& distribution() const { return *dist_; }
  std::size_t num_variables() const { return dist_->num_variables(); }

  double joint(std::uint64_t mask);
  double conditional(std::size_t target, std::uint64_t given_mask);
  double mutual_information(std::size_t a, std::size_t b);

 private:
  const Distribution* dist_;
  std::unordered_map<std::uint64_t, double> cache_;
};

std::uint64_t to_mask(std::span<const std::size_t> vars);
std::vector<std::size_t> from_mask(std::uint64_t mask);

}  // namespace polytree
