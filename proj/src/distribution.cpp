#include "polytree/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include "polytree/error.hpp"

namespace polytree {

namespace {

constexpr double kNormalizationTolerance = 1e-9;

void check_indices(const Distribution& dist, std::span<const std::size_t> vars) {
  for (std::size_t v : vars) {
    if (v >= dist.num_variables()) {
      throw DomainError("invalid_argument",
                        "variable index " + std::to_string(v) + " out of range (n = " +
                            std::to_string(dist.num_variables()) + ")");
    }
  }
}

std::vector<std::size_t> canonical_set(std::span<const std::size_t> vars) {
  std::vector<std::size_t> out(vars.begin(), vars.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Sums the dense table into the marginal over `vars` (sorted, unique).
std::vector<double> marginal_table(const Distribution& dist, const std::vector<std::size_t>& vars) {
  const auto& meta = dist.variables();
  const std::size_t n = meta.size();

  // Stride of each original variable inside the marginal table; 0 if summed out.
  std::vector<std::size_t> out_stride(n, 0);
  std::size_t out_size = 1;
  for (auto it = vars.rbegin(); it != vars.rend(); ++it) {
    out_stride[*it] = out_size;
    out_size *= static_cast<std::size_t>(meta[*it].arity);
  }

  std::vector<double> out(out_size, 0.0);
  std::vector<int> digits(n, 0);
  std::size_t out_index = 0;
  const auto& probs = dist.probabilities();
  for (std::size_t s = 0; s < probs.size(); ++s) {
    out[out_index] += probs[s];
    // Odometer increment, last variable fastest.
    for (std::size_t j = n; j-- > 0;) {
      if (++digits[j] < meta[j].arity) {
        out_index += out_stride[j];
        break;
      }
      out_index -= out_stride[j] * static_cast<std::size_t>(meta[j].arity - 1);
      digits[j] = 0;
    }
  }
  return out;
}

double table_entropy(const std::vector<double>& table) {
  double h = 0.0;
  for (double p : table) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return clamp_information(h);
}

}  // namespace

double clamp_information(double value) {
  if (value >= 0.0) return value;
  if (value >= -kClampTolerance) return 0.0;
  throw InternalError("information quantity is negative beyond round-off: " +
                      std::to_string(value));
}

std::size_t joint_state_count(std::span<const VariableMeta> variables, std::size_t max_states) {
  std::size_t size = 1;
  for (const auto& v : variables) {
    if (v.arity < 2) {
      throw DomainError("invalid_argument",
                        "variable '" + v.name + "' has arity " + std::to_string(v.arity) +
                            " (must be >= 2)");
    }
    if (size > max_states / static_cast<std::size_t>(v.arity)) {
      throw DomainError("cap_exceeded", "joint state space exceeds the cap of " +
                                            std::to_string(max_states) +
                                            " states (raise --max-states)");
    }
    size *= static_cast<std::size_t>(v.arity);
  }
  return size;
}

Distribution::Distribution(std::vector<VariableMeta> variables, std::vector<double> probabilities,
                           std::size_t max_states)
    : variables_(std::move(variables)), probabilities_(std::move(probabilities)) {
  if (variables_.empty()) throw DomainError("invalid_argument", "distribution has no variables");
  if (variables_.size() > 64) {
    throw DomainError("cap_exceeded", "at most 64 variables are supported");
  }
  std::set<std::string> seen;
  for (const auto& v : variables_) {
    if (!seen.insert(v.name).second) {
      throw DomainError("invalid_argument", "duplicate variable name '" + v.name + "'");
    }
  }
  const std::size_t expected = joint_state_count(variables_, max_states);
  if (probabilities_.size() != expected) {
    throw DomainError("invalid_argument", "probability table has " +
                                              std::to_string(probabilities_.size()) +
                                              " entries, expected " + std::to_string(expected));
  }
  double total = 0.0;
  for (double p : probabilities_) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw DomainError("invalid_argument", "probabilities must be finite and non-negative");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > kNormalizationTolerance) {
    throw DomainError("invalid_argument",
                      "probabilities sum to " + std::to_string(total) + ", not 1");
  }
}

std::vector<std::string> Distribution::names() const {
  std::vector<std::string> out;
  out.reserve(variables_.size());
  for (const auto& v : variables_) out.push_back(v.name);
  return out;
}

std::size_t Distribution::state_index(std::span<const int> values) const {
  if (values.size() != variables_.size()) {
    throw DomainError("invalid_argument", "assignment width does not match variable count");
  }
  std::size_t index = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < 0 || values[i] >= variables_[i].arity) {
      throw DomainError("invalid_argument", "value out of range for '" + variables_[i].name + "'");
    }
    index = index * static_cast<std::size_t>(variables_[i].arity) +
            static_cast<std::size_t>(values[i]);
  }
  return index;
}

std::vector<int> Distribution::decode_state(std::size_t index) const {
  std::vector<int> values(variables_.size());
  for (std::size_t i = variables_.size(); i-- > 0;) {
    const auto arity = static_cast<std::size_t>(variables_[i].arity);
    values[i] = static_cast<int>(index % arity);
    index /= arity;
  }
  return values;
}

void validate_dataset(const Dataset& data) {
  for (const auto& v : data.variables) {
    if (v.arity < 2) {
      throw DomainError("invalid_argument", "variable '" + v.name + "' has arity < 2");
    }
  }
  for (std::size_t r = 0; r < data.rows.size(); ++r) {
    const auto& row = data.rows[r];
    if (row.size() != data.variables.size()) {
      throw DomainError("invalid_argument", "row " + std::to_string(r) + " has " +
                                                std::to_string(row.size()) + " values, expected " +
                                                std::to_string(data.variables.size()));
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (row[i] < 0 || row[i] >= data.variables[i].arity) {
        throw DomainError("invalid_argument",
                          "row " + std::to_string(r) + ": value " + std::to_string(row[i]) +
                              " out of range for '" + data.variables[i].name + "' (arity " +
                              std::to_string(data.variables[i].arity) + ")");
      }
    }
  }
}

Distribution empirical_distribution(const Dataset& data, const EmpiricalOptions& options) {
  if (data.rows.empty()) throw DomainError("invalid_argument", "dataset has no rows");
  if (options.pseudocount < 0.0) {
    throw DomainError("invalid_argument", "pseudocount must be non-negative");
  }
  validate_dataset(data);
  const std::size_t size = joint_state_count(data.variables, options.max_states);

  std::vector<double> counts(size, 0.0);
  for (const auto& row : data.rows) {
    std::size_t index = 0;
    for (std::size_t i = 0; i < row.size(); ++i) {
      index = index * static_cast<std::size_t>(data.variables[i].arity) +
              static_cast<std::size_t>(row[i]);
    }
    counts[index] += 1.0;
  }
  const double total =
      static_cast<double>(data.rows.size()) + options.pseudocount * static_cast<double>(size);
  for (double& c : counts) c = (c + options.pseudocount) / total;
  return Distribution(data.variables, std::move(counts), options.max_states);
}

Distribution marginal(const Distribution& dist, std::span<const std::size_t> vars) {
  check_indices(dist, vars);
  auto set = canonical_set(vars);
  if (set.empty()) throw DomainError("invalid_argument", "marginal over an empty variable set");
  std::vector<VariableMeta> meta;
  for (std::size_t v : set) meta.push_back(dist.variable(v));
  return Distribution(std::move(meta), marginal_table(dist, set),
                      std::numeric_limits<std::size_t>::max());
}

double entropy(const Distribution& dist, std::span<const std::size_t> vars) {
  check_indices(dist, vars);
  auto set = canonical_set(vars);
  if (set.empty()) throw DomainError("invalid_argument", "entropy of an empty variable set");
  if (set.size() == dist.num_variables()) return table_entropy(dist.probabilities());
  return table_entropy(marginal_table(dist, set));
}

double entropy(const Distribution& dist, std::initializer_list<std::size_t> vars) {
  return entropy(dist, std::span<const std::size_t>(vars.begin(), vars.size()));
}

double conditional_entropy(const Distribution& dist, std::size_t target,
                           std::span<const std::size_t> given) {
  check_indices(dist, given);
  const std::size_t single[] = {target};
  check_indices(dist, single);
  if (std::find(given.begin(), given.end(), target) != given.end()) {
    throw DomainError("invalid_argument", "target variable appears in the conditioning set");
  }
  if (given.empty()) return entropy(dist, single);
  std::vector<std::size_t> both(given.begin(), given.end());
  both.push_back(target);
  return clamp_information(entropy(dist, both) - entropy(dist, given));
}

double conditional_entropy(const Distribution& dist, std::size_t target,
                           std::initializer_list<std::size_t> given) {
  return conditional_entropy(dist, target, std::span<const std::size_t>(given.begin(), given.size()));
}

double mutual_information(const Distribution& dist, std::size_t a, std::size_t b) {
  if (a == b) throw DomainError("invalid_argument", "mutual information of a variable with itself");
  // Canonical order so that I(a;b) and I(b;a) are bit-identical.
  const std::size_t lo = std::min(a, b);
  const std::size_t hi = std::max(a, b);
  return clamp_information(entropy(dist, {lo}) + entropy(dist, {hi}) - entropy(dist, {lo, hi}));
}

std::uint64_t to_mask(std::span<const std::size_t> vars) {
  std::uint64_t mask = 0;
  for (std::size_t v : vars) {
    if (v >= 64) throw DomainError("invalid_argument", "variable index exceeds 63");
    mask |= std::uint64_t{1} << v;
  }
  return mask;
}

std::vector<std::size_t> from_mask(std::uint64_t mask) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; mask != 0; ++i, mask >>= 1) {
    if (mask & 1) out.push_back(i);
  }
  return out;
}

EntropyCache::EntropyCache(const Distribution& dist) : dist_(&dist) {}

double EntropyCache::joint(std::uint64_t mask) {
  if (mask == 0) return 0.0;
  if (auto it = cache_.find(mask); it != cache_.end()) return it->second;
  const auto vars = from_mask(mask);
  const double h = entropy(*dist_, vars);
  cache_.emplace(mask, h);
  return h;
}

double EntropyCache::conditional(std::size_t target, std::uint64_t given_mask) {
  const std::uint64_t bit = std::uint64_t{1} << target;
  if (given_mask & bit) {
    throw DomainError("invalid_argument", "target variable appears in the conditioning set");
  }
  if (given_mask == 0) return joint(bit);
  return clamp_information(joint(given_mask | bit) - joint(given_mask));
}

double EntropyCache::mutual_information(std::size_t a, std::size_t b) {
  if (a == b) throw DomainError("invalid_argument", "mutual information of a variable with itself");
  const std::size_t lo = std::min(a, b);
  const std::size_t hi = std::max(a, b);
  const std::uint64_t lo_bit = std::uint64_t{1} << lo;
  const std::uint64_t hi_bit = std::uint64_t{1} << hi;
  return clamp_information(joint(lo_bit) + joint(hi_bit) - joint(lo_bit | hi_bit));
}

}  // namespace polytree
