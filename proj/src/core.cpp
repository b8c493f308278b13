#include "nnprune/core.hpp"

#include <charconv>
#include <vector>

namespace nnprune {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::input_shape: return "input_shape";
    case ErrorKind::non_differentiable: return "non_differentiable";
    case ErrorKind::stale_reference: return "stale_reference";
    case ErrorKind::illegal_modification: return "illegal_modification";
    case ErrorKind::excluded_element: return "excluded_element";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::empty_dataset: return "empty_dataset";
    case ErrorKind::empty_ledger: return "empty_ledger";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::not_ternary: return "not_ternary";
    case ErrorKind::missing_attribute: return "missing_attribute";
    case ErrorKind::oversize_universe: return "oversize_universe";
    case ErrorKind::parse: return "parse";
    case ErrorKind::io: return "io";
    case ErrorKind::config: return "config";
  }
  return "unknown";
}

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
    case Activation::step: return "step";
  }
  return "unknown";
}

Activation parse_activation(std::string_view s) {
  if (s == "tanh") return Activation::tanh;
  if (s == "sigmoid") return Activation::sigmoid;
  if (s == "step") return Activation::step;
  throw Error(ErrorKind::parse, "unknown activation '" + std::string(s) + "'");
}

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

int parse_int(std::string_view s, std::string_view whole) {
  if (!s.empty() && (s.front() == 'L' || s.front() == 'N')) s.remove_prefix(1);
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || value < 0) {
    throw Error(ErrorKind::parse, "malformed element reference '" + std::string(whole) + "'");
  }
  return value;
}

}  // namespace

std::string ElementRef::str() const {
  switch (kind) {
    case Kind::input: return "input:" + std::to_string(neuron);
    case Kind::neuron:
      return "neuron:L" + std::to_string(layer) + ":N" + std::to_string(neuron);
    case Kind::synapse:
      return "synapse:L" + std::to_string(layer) + ":N" + std::to_string(neuron) + ":" +
             std::to_string(input);
    case Kind::bias:
      return "bias:L" + std::to_string(layer) + ":N" + std::to_string(neuron);
  }
  return "?";
}

ElementRef ElementRef::parse(std::string_view text) {
  auto parts = split(text, ':');
  auto fail = [&] {
    return Error(ErrorKind::parse, "malformed element reference '" + std::string(text) + "'");
  };
  if (parts.empty()) throw fail();
  if (parts[0] == "input" && parts.size() == 2) return feature(parse_int(parts[1], text));
  if (parts[0] == "neuron" && parts.size() == 3)
    return unit(parse_int(parts[1], text), parse_int(parts[2], text));
  if (parts[0] == "bias" && parts.size() == 3)
    return bias(parse_int(parts[1], text), parse_int(parts[2], text));
  if (parts[0] == "synapse" && parts.size() == 4) {
    int in = parse_int(parts[3], text);
    if (in == 0) throw fail();
    return synapse(parse_int(parts[1], text), parse_int(parts[2], text), in - 1);
  }
  throw fail();
}

}  // namespace nnprune
