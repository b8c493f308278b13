#ifndef NNPRUNE_SERIALIZATION_HPP
#define NNPRUNE_SERIALIZATION_HPP

#include "nnprune/network.hpp"
#include "nnprune/sensitivity.hpp"
#include "nnprune/transparency.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>

namespace nnprune {

using json = nlohmann::json;

/// Network document. Tombstoned neurons and synapses are dropped and neuron
/// indices compacted; `src_layer` is -1 for input features. Weights
/// round-trip bit-exactly.
json network_to_json(const Network& net);
Network network_from_json(const json& doc);
std::string serialize(const Network& net);
/// FNV-1a hash of the serialized form, used to witness exact restores.
std::uint64_t digest(const Network& net);

json ruleset_to_json(const RuleSet& rules);
RuleSet ruleset_from_json(const json& doc);

json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

void save_network(const Network& net, const std::filesystem::path& path);
Network load_network(const std::filesystem::path& path);
void save_ruleset(const RuleSet& rules, const std::filesystem::path& path);
RuleSet load_ruleset(const std::filesystem::path& path);

/// CSV rows: element,class,indicator,mode
void write_indicators_csv(std::ostream& out, std::span<const Indicator> indicators, ElementClass element_class,
                          IndicatorMode mode);
/// Header of universe feature names followed by r1,r2; one row per disagreement.
void write_disagreements_csv(std::ostream& out, const Agreement& agreement, const RuleSet& names);

}  // namespace nnprune

#endif  // NNPRUNE_SERIALIZATION_HPP
