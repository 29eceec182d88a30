#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "polytree/distribution.hpp"

namespace polytree {

using ArityMap = std::map<std::string, int>;

/// Reads a dataset CSV: a header of variable names followed by integer rows.
/// Arity is max observed value + 1 unless `arities` names the variable.
Dataset read_dataset_csv(std::istream& in, const std::optional<ArityMap>& arities = std::nullopt);
void write_dataset_csv(std::ostream& out, const Dataset& data);

ArityMap arity_map_from_json(const nlohmann::json& j);

// {"variables":[{"name","arity"}...], "probabilities":[...]}, last variable fastest.
nlohmann::json distribution_to_json(const Distribution& dist);
Distribution distribution_from_json(const nlohmann::json& j,
                                    std::size_t max_states = kDefaultMaxStates);

/// Rounds to 12 significant digits so that reports print stably.
double round_report(double value);

nlohmann::json read_json_file(const std::string& path);
std::string read_text_file(const std::string& path);

}  // namespace polytree
