#include "nnprune/network.hpp"

#include <algorithm>
#include <random>

namespace nnprune {

namespace {

template <typename A, typename B>
bool same(const A& a, const B& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

bool uniform_activation(const Layer& layer) {
  return std::all_of(layer.activation.begin(), layer.activation.end(),
                     [&](Activation a) { return a == layer.activation.front(); });
}

void activate_rows(const Layer& layer, const Matrix& sigma, Matrix& y) {
  if (layer.size() == 0) {
    y.resize(0, sigma.cols());
    return;
  }
  if (uniform_activation(layer)) {
    const Activation a = layer.activation.front();
    y = sigma.unaryExpr([a](Scalar s) { return activate(a, s); });
  } else {
    y.resize(sigma.rows(), sigma.cols());
    for (Index r = 0; r < layer.size(); ++r) {
      const Activation a = layer.activation[static_cast<std::size_t>(r)];
      y.row(r) = sigma.row(r).unaryExpr([a](Scalar s) { return activate(a, s); });
    }
  }
}

}  // namespace

Layer::Layer(Index neurons, Index sources, Activation a)
    : weights(Matrix::Zero(neurons, sources)),
      bias(Vector::Zero(neurons)),
      weight_live(Mask::Constant(neurons, sources, true)),
      weight_trainable(Mask::Constant(neurons, sources, true)),
      bias_trainable(MaskVector::Constant(neurons, true)),
      neuron_live(MaskVector::Constant(neurons, true)),
      activation(static_cast<std::size_t>(neurons), a) {}

bool operator==(const Layer& a, const Layer& b) {
  return same(a.weights, b.weights) && same(a.bias, b.bias) && same(a.weight_live, b.weight_live) &&
         same(a.weight_trainable, b.weight_trainable) && same(a.bias_trainable, b.bias_trainable) &&
         same(a.neuron_live, b.neuron_live) && a.activation == b.activation;
}

bool operator==(const Network& a, const Network& b) {
  return a.input_dim_ == b.input_dim_ && same(a.active_inputs_, b.active_inputs_) &&
         a.layers_ == b.layers_ && a.output_labels_ == b.output_labels_;
}

Network::Network(int input_dim, const std::vector<int>& layer_sizes, Activation activation,
                 std::vector<std::string> output_labels)
    : input_dim_(input_dim),
      active_inputs_(MaskVector::Constant(input_dim, true)),
      output_labels_(std::move(output_labels)) {
  if (input_dim <= 0) throw Error(ErrorKind::config, "input dimension must be positive");
  if (layer_sizes.empty()) throw Error(ErrorKind::config, "network needs at least one layer");
  int sources = input_dim;
  for (int n : layer_sizes) {
    if (n <= 0) throw Error(ErrorKind::config, "layer sizes must be positive");
    layers_.emplace_back(n, sources, activation);
    sources = n;
  }
  const auto outputs = static_cast<std::size_t>(layer_sizes.back());
  if (output_labels_.empty()) {
    for (std::size_t i = 0; i < std::max<std::size_t>(outputs, 2); ++i)
      output_labels_.push_back("c" + std::to_string(i));
  }
  const bool one_per_output = output_labels_.size() == outputs;
  const bool sign_rule = outputs == 1 && output_labels_.size() == 2;
  if (!one_per_output && !sign_rule) {
    throw Error(ErrorKind::config,
                "output labels must name each output neuron, or two classes for a single output");
  }
}

bool Network::is_live(const ElementRef& ref) const {
  using K = ElementRef::Kind;
  if (ref.kind == K::input) return ref.neuron >= 0 && ref.neuron < input_dim_ && active_inputs_(ref.neuron);
  if (ref.layer < 0 || ref.layer >= depth()) return false;
  const Layer& L = layers_[static_cast<std::size_t>(ref.layer)];
  if (ref.neuron < 0 || ref.neuron >= L.size()) return false;
  switch (ref.kind) {
    case K::neuron:
    case K::bias: return L.neuron_live(ref.neuron);
    case K::synapse:
      return ref.source() >= 0 && ref.source() < L.sources() && L.weight_live(ref.neuron, ref.source());
    default: return false;
  }
}

void Network::check_live(const ElementRef& ref) const {
  if (!is_live(ref)) throw Error(ErrorKind::stale_reference, "element " + ref.str() + " is not live");
}

bool Network::is_trainable(const ElementRef& ref) const {
  if (!is_live(ref)) return false;
  const Layer& L = layers_[static_cast<std::size_t>(ref.layer)];
  switch (ref.kind) {
    case ElementRef::Kind::synapse: return L.weight_trainable(ref.neuron, ref.source());
    case ElementRef::Kind::bias: return L.bias_trainable(ref.neuron);
    default: return true;
  }
}

double Network::weight(const ElementRef& ref) const {
  check_live(ref);
  const Layer& L = layers_[static_cast<std::size_t>(ref.layer)];
  if (ref.kind == ElementRef::Kind::synapse) return L.weights(ref.neuron, ref.source());
  if (ref.kind == ElementRef::Kind::bias) return L.bias(ref.neuron);
  throw Error(ErrorKind::illegal_modification, ref.str() + " is not a weight");
}

int Network::fan_in(int layer, int neuron) const {
  const Layer& L = layers_.at(static_cast<std::size_t>(layer));
  int count = 0;
  for (Index s = 0; s < L.sources(); ++s) {
    if (L.weight_live(neuron, s) && (L.weights(neuron, s) != 0.0 || L.weight_trainable(neuron, s)))
      ++count;
  }
  return count;
}

void Network::set_weight(const ElementRef& ref, double value, bool freeze) {
  check_live(ref);
  Layer& L = layers_[static_cast<std::size_t>(ref.layer)];
  if (ref.kind == ElementRef::Kind::synapse) {
    L.weights(ref.neuron, ref.source()) = value;
    L.weight_trainable(ref.neuron, ref.source()) = !freeze;
  } else if (ref.kind == ElementRef::Kind::bias) {
    L.bias(ref.neuron) = value;
    L.bias_trainable(ref.neuron) = !freeze;
  } else {
    throw Error(ErrorKind::illegal_modification, ref.str() + " is not a weight");
  }
}

void Network::set_activation(int layer, int neuron, Activation a) {
  layers_.at(static_cast<std::size_t>(layer)).activation.at(static_cast<std::size_t>(neuron)) = a;
}

void Network::set_activation(Activation a) {
  for (auto& L : layers_) std::fill(L.activation.begin(), L.activation.end(), a);
}

void Network::kill_neuron(int l, int r, std::vector<ElementRef>& victims) {
  Layer& L = layers_[static_cast<std::size_t>(l)];
  for (Index s = 0; s < L.sources(); ++s) {
    if (L.weight_live(r, s)) victims.push_back(ElementRef::synapse(l, r, static_cast<int>(s)));
  }
  L.weights.row(r).setZero();
  L.weight_live.row(r).setConstant(false);
  L.weight_trainable.row(r).setConstant(false);
  L.bias(r) = 0.0;
  L.bias_trainable(r) = false;
  L.neuron_live(r) = false;
  if (l + 1 < depth()) {
    Layer& next = layers_[static_cast<std::size_t>(l + 1)];
    for (Index t = 0; t < next.size(); ++t) {
      if (next.weight_live(t, r)) victims.push_back(ElementRef::synapse(l + 1, static_cast<int>(t), r));
    }
    next.weights.col(r).setZero();
    next.weight_live.col(r).setConstant(false);
    next.weight_trainable.col(r).setConstant(false);
  }
}

void Network::cleanup(std::vector<ElementRef>& victims) {
  bool changed = true;
  while (changed) {
    changed = false;
    // neurons that no longer reach an output, or that emit a constant zero
    for (int l = depth() - 2; l >= 0; --l) {
      Layer& L = layers_[static_cast<std::size_t>(l)];
      const Layer& next = layers_[static_cast<std::size_t>(l + 1)];
      for (Index r = 0; r < L.size(); ++r) {
        if (!L.neuron_live(r)) continue;
        bool reaches = false;
        for (Index t = 0; t < next.size() && !reaches; ++t)
          reaches = next.neuron_live(t) && next.weight_live(t, r);
        const bool silent = !L.weight_live.row(r).any() && !L.bias_trainable(r) && L.bias(r) == 0.0 &&
                            L.activation[static_cast<std::size_t>(r)] == Activation::tanh;
        if (!reaches || silent) {
          victims.push_back(ElementRef::unit(l, static_cast<int>(r)));
          kill_neuron(l, static_cast<int>(r), victims);
          changed = true;
        }
      }
    }
    // features without outgoing synapses
    const Layer& first = layers_.front();
    for (Index k = 0; k < input_dim_; ++k) {
      if (active_inputs_(k) && !first.weight_live.col(k).any()) {
        active_inputs_(k) = false;
        victims.push_back(ElementRef::feature(static_cast<int>(k)));
        changed = true;
      }
    }
  }
}

std::vector<ElementRef> Network::remove_element(const ElementRef& ref) {
  check_live(ref);
  std::vector<ElementRef> victims;
  switch (ref.kind) {
    case ElementRef::Kind::input: {
      active_inputs_(ref.neuron) = false;
      Layer& first = layers_.front();
      for (Index r = 0; r < first.size(); ++r) {
        if (first.weight_live(r, ref.neuron)) victims.push_back(ElementRef::synapse(0, static_cast<int>(r), ref.neuron));
      }
      first.weights.col(ref.neuron).setZero();
      first.weight_live.col(ref.neuron).setConstant(false);
      first.weight_trainable.col(ref.neuron).setConstant(false);
      break;
    }
    case ElementRef::Kind::neuron:
      if (is_output(ref)) throw Error(ErrorKind::illegal_modification, "output neurons cannot be removed");
      kill_neuron(ref.layer, ref.neuron, victims);
      break;
    case ElementRef::Kind::synapse: {
      Layer& L = layers_[static_cast<std::size_t>(ref.layer)];
      L.weights(ref.neuron, ref.source()) = 0.0;
      L.weight_live(ref.neuron, ref.source()) = false;
      L.weight_trainable(ref.neuron, ref.source()) = false;
      break;
    }
    case ElementRef::Kind::bias:
      throw Error(ErrorKind::illegal_modification, "biases are zeroed with set_weight, not removed");
  }
  cleanup(victims);
  return victims;
}

std::vector<ElementRef> Network::audit() const {
  Network copy = *this;
  std::vector<ElementRef> victims;
  copy.cleanup(victims);
  // tombstone consistency: dead synapses carry no weight and are frozen
  for (int l = 0; l < depth(); ++l) {
    const Layer& L = layers_[static_cast<std::size_t>(l)];
    for (Index r = 0; r < L.size(); ++r) {
      for (Index s = 0; s < L.sources(); ++s) {
        bool source_dead = l == 0 ? !active_inputs_(s) : !layers_[static_cast<std::size_t>(l - 1)].neuron_live(s);
        bool dead = !L.weight_live(r, s);
        if ((dead && (L.weights(r, s) != 0.0 || L.weight_trainable(r, s))) ||
            (!dead && (source_dead || !L.neuron_live(r))))
          victims.push_back(ElementRef::synapse(l, static_cast<int>(r), static_cast<int>(s)));
      }
    }
  }
  return victims;
}

void Network::randomize(std::uint64_t seed, double half_width) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-half_width, half_width);
  for (auto& L : layers_) {
    for (Index r = 0; r < L.size(); ++r) {
      if (!L.neuron_live(r)) continue;
      if (L.bias_trainable(r)) L.bias(r) = dist(rng);
      for (Index s = 0; s < L.sources(); ++s) {
        if (L.weight_live(r, s) && L.weight_trainable(r, s)) L.weights(r, s) = dist(rng);
      }
    }
  }
}

std::vector<ElementRef> Network::live_weights() const {
  std::vector<ElementRef> out;
  for (int l = 0; l < depth(); ++l) {
    const Layer& L = layers_[static_cast<std::size_t>(l)];
    for (Index r = 0; r < L.size(); ++r) {
      if (!L.neuron_live(r)) continue;
      out.push_back(ElementRef::bias(l, static_cast<int>(r)));
      for (Index s = 0; s < L.sources(); ++s) {
        if (L.weight_live(r, s)) out.push_back(ElementRef::synapse(l, static_cast<int>(r), static_cast<int>(s)));
      }
    }
  }
  return out;
}

std::vector<ElementRef> Network::live_hidden_neurons() const {
  std::vector<ElementRef> out;
  for (int l = 0; l + 1 < depth(); ++l) {
    const Layer& L = layers_[static_cast<std::size_t>(l)];
    for (Index r = 0; r < L.size(); ++r) {
      if (L.neuron_live(r)) out.push_back(ElementRef::unit(l, static_cast<int>(r)));
    }
  }
  return out;
}

std::vector<ElementRef> Network::live_features() const {
  std::vector<ElementRef> out;
  for (int k = 0; k < input_dim_; ++k) {
    if (active_inputs_(k)) out.push_back(ElementRef::feature(k));
  }
  return out;
}

bool Network::has_trainable() const {
  return std::any_of(layers_.begin(), layers_.end(), [](const Layer& L) {
    return (L.weight_live && L.weight_trainable).any() || (L.neuron_live && L.bias_trainable).any();
  });
}

bool Network::is_smooth() const {
  for (const auto& L : layers_) {
    for (Index r = 0; r < L.size(); ++r) {
      if (L.neuron_live(r) && L.activation[static_cast<std::size_t>(r)] == Activation::step) return false;
    }
  }
  return true;
}

double GradientBundle::at(const ElementRef& ref) const {
  switch (ref.kind) {
    case ElementRef::Kind::input: return input(ref.neuron);
    case ElementRef::Kind::neuron: return output.at(static_cast<std::size_t>(ref.layer))(ref.neuron);
    case ElementRef::Kind::synapse:
      return weights.at(static_cast<std::size_t>(ref.layer))(ref.neuron, ref.source());
    case ElementRef::Kind::bias: return bias.at(static_cast<std::size_t>(ref.layer))(ref.neuron);
  }
  return 0.0;
}

BatchTrace forward_batch(const Network& net, const Eigen::Ref<const Matrix>& inputs) {
  if (inputs.rows() != net.input_dim()) {
    throw Error(ErrorKind::input_shape, "input has " + std::to_string(inputs.rows()) +
                                            " features, network expects " + std::to_string(net.input_dim()));
  }
  BatchTrace trace;
  trace.input = inputs;
  Matrix x = inputs;
  for (Index k = 0; k < x.rows(); ++k) {
    if (!net.active_inputs()(k)) x.row(k).setZero();
  }
  trace.sigma.reserve(static_cast<std::size_t>(net.depth()));
  trace.y.reserve(static_cast<std::size_t>(net.depth()));
  for (const Layer& L : net.layers()) {
    Matrix sigma = L.weights * x;
    sigma.colwise() += L.bias;
    Matrix y;
    activate_rows(L, sigma, y);
    for (Index r = 0; r < L.size(); ++r) {
      if (!L.neuron_live(r)) {
        sigma.row(r).setZero();
        y.row(r).setZero();
      }
    }
    x = y;
    trace.sigma.push_back(std::move(sigma));
    trace.y.push_back(std::move(y));
  }
  return trace;
}

ForwardTrace forward(const Network& net, const Eigen::Ref<const Vector>& input) {
  BatchTrace batch = forward_batch(net, input);
  ForwardTrace trace;
  trace.input = input;
  for (std::size_t l = 0; l < batch.sigma.size(); ++l) {
    trace.sigma.emplace_back(batch.sigma[l].col(0));
    trace.y.emplace_back(batch.y[l].col(0));
  }
  return trace;
}

BatchBackward backward_batch(const Network& net, const BatchTrace& trace,
                             const Eigen::Ref<const Matrix>& output_gradient) {
  if (!net.is_smooth()) throw Error(ErrorKind::non_differentiable, "network contains step activations");
  if (output_gradient.rows() != net.output_count() || output_gradient.cols() != trace.samples()) {
    throw Error(ErrorKind::input_shape, "output gradient shape does not match the trace");
  }
  const auto depth = static_cast<std::size_t>(net.depth());
  BatchBackward result;
  result.delta.resize(depth);
  result.output.resize(depth);
  Matrix dy = output_gradient;
  for (std::size_t l = depth; l-- > 0;) {
    const Layer& L = net.layers()[l];
    Matrix delta(dy.rows(), dy.cols());
    for (Index r = 0; r < L.size(); ++r) {
      if (!L.neuron_live(r)) {
        delta.row(r).setZero();
        continue;
      }
      const Activation a = L.activation[static_cast<std::size_t>(r)];
      delta.row(r) = dy.row(r).cwiseProduct(
          trace.y[l].row(r).unaryExpr([a](Scalar y) { return activate_derivative(a, y); }));
    }
    Matrix upstream = L.weights.transpose() * delta;
    result.output[l] = std::move(dy);
    result.delta[l] = std::move(delta);
    dy = std::move(upstream);
  }
  result.input = std::move(dy);
  return result;
}

GradientBundle backward(const Network& net, const ForwardTrace& trace,
                        const Eigen::Ref<const Vector>& output_gradient) {
  BatchTrace batch;
  batch.input = trace.input;
  for (std::size_t l = 0; l < trace.y.size(); ++l) {
    batch.sigma.emplace_back(trace.sigma[l]);
    batch.y.emplace_back(trace.y[l]);
  }
  BatchBackward back = backward_batch(net, batch, output_gradient);
  GradientBundle bundle;
  Vector x = trace.input;
  for (Index k = 0; k < x.size(); ++k) {
    if (!net.active_inputs()(k)) x(k) = 0.0;
  }
  for (std::size_t l = 0; l < back.delta.size(); ++l) {
    const Vector delta = back.delta[l].col(0);
    bundle.weights.emplace_back(delta * x.transpose());
    bundle.bias.push_back(delta);
    bundle.output.emplace_back(back.output[l].col(0));
    x = trace.y[l];
  }
  bundle.input = back.input.col(0);
  return bundle;
}

}  // namespace nnprune
