#include "nnprune/serialization.hpp"

#include <fstream>
#include <sstream>

namespace nnprune {

namespace {

template <typename T>
T field(const json& doc, const char* name) {
  if (!doc.is_object() || !doc.contains(name)) throw Error(ErrorKind::parse, std::string("missing field '") + name + "'");
  try {
    return doc.at(name).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("field '") + name + "': " + e.what());
  }
}

}  // namespace

json network_to_json(const Network& net) {
  json doc;
  doc["input_dim"] = net.input_dim();
  json active = json::array();
  for (Index k = 0; k < net.input_dim(); ++k) active.push_back(static_cast<bool>(net.active_inputs()(k)));
  doc["active_inputs"] = active;

  std::vector<int> previous_index;  // compacted index of each neuron in the previous layer
  json layers = json::array();
  for (int l = 0; l < net.depth(); ++l) {
    const Layer& L = net.layer(l);
    json neurons = json::array();
    std::vector<int> index(static_cast<std::size_t>(L.size()), -1);
    int next = 0;
    for (Index r = 0; r < L.size(); ++r) {
      if (!L.neuron_live(r)) continue;
      index[static_cast<std::size_t>(r)] = next++;
      json n;
      n["bias"] = {{"w", L.bias(r)}, {"trainable", static_cast<bool>(L.bias_trainable(r))}};
      json synapses = json::array();
      for (Index s = 0; s < L.sources(); ++s) {
        if (!L.weight_live(r, s)) continue;
        synapses.push_back({{"src_layer", l - 1},
                            {"src_index", l == 0 ? static_cast<int>(s) : previous_index[static_cast<std::size_t>(s)]},
                            {"w", L.weights(r, s)},
                            {"trainable", static_cast<bool>(L.weight_trainable(r, s))}});
      }
      n["synapses"] = synapses;
      n["activation"] = std::string(to_string(L.activation[static_cast<std::size_t>(r)]));
      neurons.push_back(n);
    }
    layers.push_back(neurons);
    previous_index = std::move(index);
  }
  doc["layers"] = layers;
  doc["output_labels"] = net.output_labels();
  return doc;
}

Network network_from_json(const json& doc) {
  const int input_dim = field<int>(doc, "input_dim");
  const auto active = field<std::vector<bool>>(doc, "active_inputs");
  const json layers = field<json>(doc, "layers");
  const auto labels = field<std::vector<std::string>>(doc, "output_labels");
  if (static_cast<int>(active.size()) != input_dim) throw Error(ErrorKind::parse, "active_inputs length differs from input_dim");
  if (!layers.is_array() || layers.empty()) throw Error(ErrorKind::parse, "layers must be a non-empty array");

  std::vector<int> sizes;
  for (const auto& layer : layers) {
    if (!layer.is_array()) throw Error(ErrorKind::parse, "each layer must be an array of neurons");
    sizes.push_back(static_cast<int>(layer.size()));
  }
  // hidden layers may be emptied by pruning; Network requires positive sizes,
  // so build with at least one neuron and tombstone the placeholder
  std::vector<int> build = sizes;
  for (int& s : build) s = std::max(s, 1);
  Network net(input_dim, build, Activation::tanh, labels);

  MaskVector mask(input_dim);
  for (int k = 0; k < input_dim; ++k) mask(k) = active[static_cast<std::size_t>(k)];
  net.set_active_inputs(mask);

  for (int l = 0; l < net.depth(); ++l) {
    Layer& L = net.mutable_layer(l);
    L.weights.setZero();
    L.weight_live.setConstant(false);
    L.weight_trainable.setConstant(false);
    const json& neurons = layers[static_cast<std::size_t>(l)];
    if (neurons.empty()) {
      if (l == net.output_layer()) throw Error(ErrorKind::parse, "output layer is empty");
      L.neuron_live.setConstant(false);
      L.bias.setZero();
      L.bias_trainable.setConstant(false);
      continue;
    }
    for (std::size_t r = 0; r < neurons.size(); ++r) {
      const json& n = neurons[r];
      const json bias = field<json>(n, "bias");
      const auto ri = static_cast<Index>(r);
      L.bias(ri) = field<double>(bias, "w");
      L.bias_trainable(ri) = field<bool>(bias, "trainable");
      L.activation[r] = parse_activation(field<std::string>(n, "activation"));
      for (const auto& syn : field<json>(n, "synapses")) {
        const int src_layer = field<int>(syn, "src_layer");
        const int src = field<int>(syn, "src_index");
        if (src_layer != l - 1) throw Error(ErrorKind::parse, "synapses must connect adjacent layers");
        const int limit = l == 0 ? input_dim : sizes[static_cast<std::size_t>(l - 1)];
        if (src < 0 || src >= limit) throw Error(ErrorKind::parse, "synapse source index out of range");
        if (l == 0 && !active[static_cast<std::size_t>(src)])
          throw Error(ErrorKind::parse, "synapse sourced at a masked-off feature");
        if (L.weight_live(ri, src)) throw Error(ErrorKind::parse, "duplicate synapse");
        L.weights(ri, src) = field<double>(syn, "w");
        L.weight_live(ri, src) = true;
        L.weight_trainable(ri, src) = field<bool>(syn, "trainable");
      }
    }
  }
  return net;
}

std::string serialize(const Network& net) { return network_to_json(net).dump(1); }

std::uint64_t digest(const Network& net) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : serialize(net)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

json ruleset_to_json(const RuleSet& rs) {
  json doc;
  doc["labels"] = rs.labels;
  doc["feature_names"] = rs.feature_names;
  doc["feature_text"] = rs.feature_text;
  json rules = json::array();
  for (const auto& rule : rs.rules) {
    json statements = json::array();
    for (const auto& s : rule.statements) {
      statements.push_back({{s.source == Statement::Source::feature ? "feature" : "rule", s.index},
                            {"affirmed", s.affirmed}});
    }
    rules.push_back({{"name", rule.name}, {"k", rule.k}, {"statements", statements}});
  }
  doc["rules"] = rules;
  doc["outputs"] = rs.outputs;
  return doc;
}

RuleSet ruleset_from_json(const json& doc) {
  RuleSet rs;
  rs.labels = field<std::vector<std::string>>(doc, "labels");
  rs.outputs = field<std::vector<int>>(doc, "outputs");
  if (doc.contains("feature_names")) rs.feature_names = field<std::vector<std::string>>(doc, "feature_names");
  if (doc.contains("feature_text")) rs.feature_text = field<std::vector<std::string>>(doc, "feature_text");
  for (const auto& r : field<json>(doc, "rules")) {
    ThresholdRule rule;
    rule.name = field<std::string>(r, "name");
    rule.k = field<int>(r, "k");
    for (const auto& s : field<json>(r, "statements")) {
      Statement st;
      if (s.contains("feature")) {
        st.source = Statement::Source::feature;
        st.index = field<int>(s, "feature");
      } else {
        st.source = Statement::Source::rule;
        st.index = field<int>(s, "rule");
        if (st.index < 0 || static_cast<std::size_t>(st.index) >= rs.rules.size())
          throw Error(ErrorKind::parse, "rule '" + rule.name + "' references an unknown or later rule");
      }
      st.affirmed = field<bool>(s, "affirmed");
      rule.statements.push_back(st);
    }
    rs.rules.push_back(std::move(rule));
  }
  for (int o : rs.outputs) {
    if (o < 0 || static_cast<std::size_t>(o) >= rs.rules.size()) throw Error(ErrorKind::parse, "output references an unknown rule");
  }
  if (!(rs.sign_convention() || rs.outputs.size() == rs.labels.size()) || rs.outputs.empty())
    throw Error(ErrorKind::parse, "outputs and labels do not match");
  return rs;
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out << text;
}

void save_network(const Network& net, const std::filesystem::path& path) { write_text(path, serialize(net) + "\n"); }

Network load_network(const std::filesystem::path& path) { return network_from_json(read_json(path)); }

void save_ruleset(const RuleSet& rules, const std::filesystem::path& path) {
  write_text(path, ruleset_to_json(rules).dump(1) + "\n");
}

RuleSet load_ruleset(const std::filesystem::path& path) { return ruleset_from_json(read_json(path)); }

void write_indicators_csv(std::ostream& out, std::span<const Indicator> indicators, ElementClass element_class,
                          IndicatorMode mode) {
  out << "element,class,indicator,mode\n";
  std::ostringstream value;
  value.precision(17);
  for (const auto& ind : indicators) {
    value.str("");
    value << ind.value;
    out << ind.ref.str() << ',' << to_string(element_class) << ',' << value.str() << ',' << to_string(mode) << '\n';
  }
}

void write_disagreements_csv(std::ostream& out, const Agreement& agreement, const RuleSet& names) {
  for (int f : agreement.universe) out << names.feature_name(f) << ',';
  out << "r1,r2\n";
  for (std::size_t i = 0; i < agreement.disagreements.size(); ++i) {
    for (int v : agreement.disagreements[i]) out << v << ',';
    out << agreement.disagreement_labels[i].first << ',' << agreement.disagreement_labels[i].second << '\n';
  }
}

}  // namespace nnprune
