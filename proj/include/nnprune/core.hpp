#ifndef NNPRUNE_CORE_HPP
#define NNPRUNE_CORE_HPP

#include <Eigen/Dense>

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace nnprune {

using Scalar = double;
using Index = Eigen::Index;
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;
using MaskVector = Eigen::Array<bool, Eigen::Dynamic, 1>;

enum class ErrorKind {
  input_shape,
  non_differentiable,
  stale_reference,
  illegal_modification,
  excluded_element,
  divergence,
  empty_dataset,
  empty_ledger,
  precondition,
  not_ternary,
  missing_attribute,
  oversize_universe,
  parse,
  io,
  config,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

enum class Activation : std::uint8_t { tanh, sigmoid, step };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view s);

/// The step function: -1 below zero, +1 otherwise (zero maps to +1).
template <typename T>
constexpr T step(T x) noexcept {
  return x < T(0) ? T(-1) : T(1);
}

/// Logistic sigmoid rescaled to the (-1, 1) range, i.e. tanh(x / 2).
template <typename T>
T bipolar_sigmoid(T x) {
  using std::exp;
  return T(2) / (T(1) + exp(-x)) - T(1);
}

template <typename T>
T activate(Activation a, T x) {
  using std::tanh;
  switch (a) {
    case Activation::tanh: return tanh(x);
    case Activation::sigmoid: return bipolar_sigmoid(x);
    case Activation::step: return step(x);
  }
  return x;
}

/// Derivative expressed through the activation output y = f(x).
template <typename T>
T activate_derivative(Activation a, T y) {
  switch (a) {
    case Activation::tanh: return T(1) - y * y;
    case Activation::sigmoid: return T(0.5) * (T(1) - y * y);
    case Activation::step:
      throw Error(ErrorKind::non_differentiable,
                  "step activation has no derivative");
  }
  return T(0);
}

/// Address of one structural element. Neuron layers are numbered from 0 (the
/// layer fed by the inputs); for synapses `input` is 1 + the source index in
/// the previous layer, 0 is reserved for the bias.
struct ElementRef {
  enum class Kind : std::uint8_t { input, neuron, synapse, bias };

  Kind kind = Kind::input;
  int layer = 0;
  int neuron = 0;
  int input = 0;

  static ElementRef feature(int k) { return {Kind::input, 0, k, 0}; }
  static ElementRef unit(int layer, int r) { return {Kind::neuron, layer, r, 0}; }
  static ElementRef synapse(int layer, int r, int source) {
    return {Kind::synapse, layer, r, source + 1};
  }
  static ElementRef bias(int layer, int r) { return {Kind::bias, layer, r, 0}; }

  [[nodiscard]] bool is_weight() const noexcept {
    return kind == Kind::synapse || kind == Kind::bias;
  }
  /// Source index in the previous layer (synapses only).
  [[nodiscard]] int source() const noexcept { return input - 1; }

  [[nodiscard]] std::string str() const;
  static ElementRef parse(std::string_view text);

  friend bool operator==(const ElementRef&, const ElementRef&) = default;
  friend std::strong_ordering operator<=>(const ElementRef& a, const ElementRef& b) {
    // synapses and biases share one ordering so that the bias (input 0)
    // precedes the synapses of the same neuron
    auto group = [](Kind k) { return k == Kind::bias ? 2 : static_cast<int>(k); };
    if (auto c = group(a.kind) <=> group(b.kind); c != 0) return c;
    if (auto c = a.layer <=> b.layer; c != 0) return c;
    if (auto c = a.neuron <=> b.neuron; c != 0) return c;
    return a.input <=> b.input;
  }
};

}  // namespace nnprune

#endif  // NNPRUNE_CORE_HPP
