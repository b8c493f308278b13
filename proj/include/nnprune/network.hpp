#ifndef NNPRUNE_NETWORK_HPP
#define NNPRUNE_NETWORK_HPP

#include "nnprune/core.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace nnprune {

/// One layer of neurons fed by the previous layer (or by the inputs).
/// Row r of `weights` holds the synaptic weights of neuron r. Removed
/// elements are tombstoned: their weight is zero, their live bit is cleared
/// and they are never trainable again.
struct Layer {
  Matrix weights;
  Vector bias;
  Mask weight_live;
  Mask weight_trainable;
  MaskVector bias_trainable;
  MaskVector neuron_live;
  std::vector<Activation> activation;

  Layer() = default;
  Layer(Index neurons, Index sources, Activation a);

  [[nodiscard]] Index size() const noexcept { return weights.rows(); }
  [[nodiscard]] Index sources() const noexcept { return weights.cols(); }

  friend bool operator==(const Layer& a, const Layer& b);
};

/// Strictly layered feed-forward network addressed at element granularity.
class Network {
 public:
  Network() = default;
  /// Fully connected network with zero weights; `layer_sizes` excludes the
  /// input layer and its last entry is the number of output neurons.
  Network(int input_dim, const std::vector<int>& layer_sizes, Activation activation,
          std::vector<std::string> output_labels);

  [[nodiscard]] int input_dim() const noexcept { return input_dim_; }
  [[nodiscard]] const MaskVector& active_inputs() const noexcept { return active_inputs_; }
  [[nodiscard]] std::span<const Layer> layers() const noexcept { return layers_; }
  [[nodiscard]] const Layer& layer(int l) const { return layers_.at(static_cast<std::size_t>(l)); }
  [[nodiscard]] int depth() const noexcept { return static_cast<int>(layers_.size()); }
  [[nodiscard]] int output_layer() const noexcept { return depth() - 1; }
  [[nodiscard]] int output_count() const noexcept {
    return static_cast<int>(layers_.back().size());
  }
  [[nodiscard]] const std::vector<std::string>& output_labels() const noexcept {
    return output_labels_;
  }

  [[nodiscard]] bool is_live(const ElementRef& ref) const;
  [[nodiscard]] bool is_trainable(const ElementRef& ref) const;
  [[nodiscard]] double weight(const ElementRef& ref) const;
  [[nodiscard]] bool is_output(const ElementRef& ref) const noexcept {
    return ref.kind == ElementRef::Kind::neuron && ref.layer == output_layer();
  }

  /// Number of live synapses (bias excluded) that are nonzero or still trainable.
  [[nodiscard]] int fan_in(int layer, int neuron) const;
  [[nodiscard]] int fan_in(const ElementRef& neuron) const { return fan_in(neuron.layer, neuron.neuron); }

  void set_weight(const ElementRef& ref, double value, bool freeze);
  void set_activation(int layer, int neuron, Activation a);
  void set_activation(Activation a);

  /// Tombstones `ref` and everything that no longer reaches an output.
  /// Returns the cascade victims (excluding `ref` itself).
  std::vector<ElementRef> remove_element(const ElementRef& ref);

  /// Elements that a cleanup pass would still remove; empty on a consistent
  /// network.
  [[nodiscard]] std::vector<ElementRef> audit() const;

  /// Uniform initialization of every live trainable weight and bias.
  void randomize(std::uint64_t seed, double half_width = 0.5);

  /// Every live element of the given kind in ElementRef order.
  [[nodiscard]] std::vector<ElementRef> live_weights() const;
  [[nodiscard]] std::vector<ElementRef> live_hidden_neurons() const;
  [[nodiscard]] std::vector<ElementRef> live_features() const;

  [[nodiscard]] bool has_trainable() const;
  [[nodiscard]] bool is_smooth() const;

  // Structural access for serialization.
  Layer& mutable_layer(int l) { return layers_.at(static_cast<std::size_t>(l)); }
  void set_active_inputs(const MaskVector& mask) { active_inputs_ = mask; }

  friend bool operator==(const Network& a, const Network& b);

 private:
  void check_live(const ElementRef& ref) const;
  void kill_neuron(int l, int r, std::vector<ElementRef>& victims);
  void cleanup(std::vector<ElementRef>& victims);

  int input_dim_ = 0;
  MaskVector active_inputs_;
  std::vector<Layer> layers_;
  std::vector<std::string> output_labels_;
};

/// Per-neuron summator outputs and activations for a single input.
struct ForwardTrace {
  Vector input;
  std::vector<Vector> sigma;
  std::vector<Vector> y;

  [[nodiscard]] const Vector& output() const { return y.back(); }
};

/// Same as ForwardTrace for a batch of inputs stored one per column.
struct BatchTrace {
  Matrix input;
  std::vector<Matrix> sigma;
  std::vector<Matrix> y;

  [[nodiscard]] const Matrix& output() const { return y.back(); }
  [[nodiscard]] Index samples() const noexcept { return input.cols(); }
};

/// Reverse-mode derivatives of one sample's loss.
struct GradientBundle {
  std::vector<Matrix> weights;  // dL/dw, shaped like Layer::weights
  std::vector<Vector> bias;     // dL/dw0
  std::vector<Vector> output;   // dL/dy per neuron
  Vector input;                 // dL/du

  /// Derivative for any ElementRef (weights, biases, neurons, features).
  [[nodiscard]] double at(const ElementRef& ref) const;
};

ForwardTrace forward(const Network& net, const Eigen::Ref<const Vector>& input);
BatchTrace forward_batch(const Network& net, const Eigen::Ref<const Matrix>& inputs);

/// Backpropagates dL/dz through a trace of `net`; throws on step activations.
GradientBundle backward(const Network& net, const ForwardTrace& trace,
                        const Eigen::Ref<const Vector>& output_gradient);

/// Batched backward pass: per-layer dL/dsigma for every sample (one column per
/// sample) plus dL/du. Parameter gradients are formed by the caller.
struct BatchBackward {
  std::vector<Matrix> delta;   // dL/dsigma
  std::vector<Matrix> output;  // dL/dy
  Matrix input;                // dL/du
};
BatchBackward backward_batch(const Network& net, const BatchTrace& trace,
                             const Eigen::Ref<const Matrix>& output_gradient);

}  // namespace nnprune

#endif  // NNPRUNE_NETWORK_HPP
