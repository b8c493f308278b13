#include "nnprune/training.hpp"

#include <algorithm>
#include <cmath>

namespace nnprune {

namespace {

bool finite(const Matrix& m) { return m.allFinite(); }

Matrix masked_inputs(const Network& net, const Dataset& data) {
  Matrix x = data.inputs;
  for (Index k = 0; k < x.rows(); ++k) {
    if (!net.active_inputs()(k)) x.row(k).setZero();
  }
  return x;
}

}  // namespace

double Loss::value(const Eigen::Ref<const Vector>& target, const Eigen::Ref<const Vector>& output) const {
  if (kind == LossKind::mse) return 0.5 * (target - output).squaredNorm();
  return (margin - target.array() * output.array()).cwiseMax(0.0).sum();
}

Vector Loss::values(const Matrix& targets, const Matrix& outputs) const {
  if (kind == LossKind::mse) return 0.5 * (targets - outputs).colwise().squaredNorm().transpose();
  return (margin - targets.array() * outputs.array()).cwiseMax(0.0).colwise().sum().transpose();
}

Matrix Loss::gradient(const Matrix& targets, const Matrix& outputs) const {
  if (kind == LossKind::mse) return outputs - targets;
  return ((margin - targets.array() * outputs.array()) > 0.0).select(-targets, Matrix::Zero(targets.rows(), targets.cols()));
}

ElementTable ElementTable::zeros_like(const Network& net) {
  ElementTable t;
  t.inputs = Vector::Zero(net.input_dim());
  for (const Layer& L : net.layers()) {
    t.neurons.push_back(Vector::Zero(L.size()));
    t.weights.push_back(Matrix::Zero(L.size(), L.sources()));
    t.biases.push_back(Vector::Zero(L.size()));
  }
  return t;
}

ElementTable& ElementTable::operator+=(const ElementTable& other) {
  inputs += other.inputs;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    neurons[l] += other.neurons[l];
    weights[l] += other.weights[l];
    biases[l] += other.biases[l];
  }
  return *this;
}

ElementTable& ElementTable::operator*=(double factor) {
  inputs *= factor;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    neurons[l] *= factor;
    weights[l] *= factor;
    biases[l] *= factor;
  }
  return *this;
}

ElementTable ElementTable::cwise_max(const ElementTable& other) const {
  ElementTable t = *this;
  t.inputs = inputs.cwiseMax(other.inputs);
  for (std::size_t l = 0; l < weights.size(); ++l) {
    t.neurons[l] = neurons[l].cwiseMax(other.neurons[l]);
    t.weights[l] = weights[l].cwiseMax(other.weights[l]);
    t.biases[l] = biases[l].cwiseMax(other.biases[l]);
  }
  return t;
}

double ElementTable::at(const ElementRef& ref) const {
  const auto l = static_cast<std::size_t>(ref.layer);
  switch (ref.kind) {
    case ElementRef::Kind::input: return inputs(ref.neuron);
    case ElementRef::Kind::neuron: return neurons.at(l)(ref.neuron);
    case ElementRef::Kind::synapse: return weights.at(l)(ref.neuron, ref.source());
    case ElementRef::Kind::bias: return biases.at(l)(ref.neuron);
  }
  return 0.0;
}

double total_loss(const Network& net, const Dataset& data, const Loss& loss) {
  const Matrix targets = target_matrix(net, data);
  const BatchTrace trace = forward_batch(net, data.inputs);
  return loss.values(targets, trace.output()).sum();
}

GradientRecord gradient_record(const Network& net, const Dataset& data, const Loss& loss,
                               bool with_statistics) {
  const Matrix targets = target_matrix(net, data);
  const BatchTrace trace = forward_batch(net, data.inputs);
  const Matrix out_grad = loss.gradient(targets, trace.output());
  const BatchBackward back = backward_batch(net, trace, out_grad);

  GradientRecord rec;
  rec.samples = data.size();
  rec.total_loss = loss.values(targets, trace.output()).sum();
  rec.gradient = ElementTable::zeros_like(net);

  const Matrix x0 = masked_inputs(net, data);
  for (std::size_t l = 0; l < back.delta.size(); ++l) {
    const Matrix& x = l == 0 ? x0 : trace.y[l - 1];
    rec.gradient.weights[l] = back.delta[l] * x.transpose();
    rec.gradient.biases[l] = back.delta[l].rowwise().sum();
  }
  rec.gradient.inputs = back.input.rowwise().sum();
  for (std::size_t l = 0; l < back.output.size(); ++l) rec.gradient.neurons[l] = back.output[l].rowwise().sum();
  if (!with_statistics) return rec;

  rec.abs_max = ElementTable::zeros_like(net);
  rec.abs_sum = ElementTable::zeros_like(net);
  const Matrix input_terms = (back.input.array() * data.inputs.array()).abs().matrix();
  rec.abs_max.inputs = input_terms.rowwise().maxCoeff();
  rec.abs_sum.inputs = input_terms.rowwise().sum();
  for (std::size_t l = 0; l < back.delta.size(); ++l) {
    const Matrix abs_delta = back.delta[l].cwiseAbs();
    const Matrix abs_x = (l == 0 ? x0 : trace.y[l - 1]).cwiseAbs();
    // |∂L^j/∂w_rs| = |δ_rj| |x_sj|
    rec.abs_sum.weights[l] = abs_delta * abs_x.transpose();
    Matrix& wmax = rec.abs_max.weights[l];
    for (Index j = 0; j < abs_delta.cols(); ++j)
      wmax = wmax.cwiseMax(abs_delta.col(j) * abs_x.col(j).transpose());
    rec.abs_sum.biases[l] = abs_delta.rowwise().sum();
    rec.abs_max.biases[l] = abs_delta.rowwise().maxCoeff();
    const Matrix neuron_terms = (back.output[l].array() * trace.y[l].array()).abs().matrix();
    rec.abs_sum.neurons[l] = neuron_terms.rowwise().sum();
    rec.abs_max.neurons[l] = neuron_terms.rowwise().maxCoeff();
  }
  return rec;
}

namespace {

GradientRecord epoch(Network& net, const Dataset& data, const Loss& loss, const TrainConfig& config,
                     TrainState& state, bool with_statistics) {
  GradientRecord rec = gradient_record(net, data, loss, with_statistics);
  if (!std::isfinite(rec.total_loss) || !finite(rec.gradient.inputs) ||
      std::any_of(rec.gradient.weights.begin(), rec.gradient.weights.end(),
                  [](const Matrix& g) { return !g.allFinite(); })) {
    throw Error(ErrorKind::divergence, "non-finite loss or gradient during training");
  }
  if (state.weight_velocity.size() != static_cast<std::size_t>(net.depth())) {
    state.weight_velocity.clear();
    state.bias_velocity.clear();
    for (const Layer& L : net.layers()) {
      state.weight_velocity.push_back(Matrix::Zero(L.size(), L.sources()));
      state.bias_velocity.push_back(Vector::Zero(L.size()));
    }
  }
  for (int l = 0; l < net.depth(); ++l) {
    const auto i = static_cast<std::size_t>(l);
    Layer& L = net.mutable_layer(l);
    const Matrix w_mask = (L.weight_live && L.weight_trainable).cast<Scalar>().matrix();
    const Vector b_mask = (L.neuron_live && L.bias_trainable).cast<Scalar>().matrix();
    Matrix& vw = state.weight_velocity[i];
    Vector& vb = state.bias_velocity[i];
    vw = (config.momentum * vw - config.learning_rate * rec.gradient.weights[i]).cwiseProduct(w_mask);
    vb = (config.momentum * vb - config.learning_rate * rec.gradient.biases[i]).cwiseProduct(b_mask);
    const Mask w_on = L.weight_live && L.weight_trainable;
    const MaskVector b_on = L.neuron_live && L.bias_trainable;
    L.weights = w_on.select(L.weights + vw, L.weights);
    L.bias = b_on.select(L.bias + vb, L.bias);
  }
  return rec;
}

}  // namespace

GradientRecord train_epoch(Network& net, const Dataset& data, const Loss& loss, const TrainConfig& config,
                           TrainState& state) {
  return epoch(net, data, loss, config, state, true);
}

GradientRecord train_epoch(Network& net, const Dataset& data, const Loss& loss, const TrainConfig& config) {
  TrainState state;
  return train_epoch(net, data, loss, config, state);
}

bool meets_criterion(const Network& net, const Dataset& data, const Loss& loss, const TrainConfig& config) {
  if (config.success == SuccessCriterion::zero_classification_error)
    return evaluate_classification(net, data).accuracy == 1.0;
  return total_loss(net, data, loss) <= config.loss_threshold;
}

TrainOutcome train_until(Network& net, const Dataset& data, const Loss& loss, const TrainConfig& config) {
  TrainOutcome outcome;
  TrainState state;
  for (int e = 0;; ++e) {
    if (meets_criterion(net, data, loss, config)) {
      outcome.converged = true;
      outcome.epochs_used = e;
      break;
    }
    if (e >= config.max_epochs) {
      outcome.epochs_used = e;
      break;
    }
    epoch(net, data, loss, config, state, false);
  }
  outcome.final_total_loss = total_loss(net, data, loss);
  if (data.is_classification()) outcome.final_accuracy = evaluate_classification(net, data).accuracy;
  return outcome;
}

int classify(const Network& net, const Eigen::Ref<const Vector>& output) {
  if (output.size() == 1 && net.output_labels().size() == 2) return output(0) >= 0.0 ? 0 : 1;
  Index best = 0;
  for (Index i = 1; i < output.size(); ++i) {
    if (output(i) > output(best)) best = i;
  }
  return static_cast<int>(best);
}

Classification evaluate_classification(const Network& net, const Dataset& data) {
  if (!data.is_classification()) throw Error(ErrorKind::precondition, "dataset has no class labels");
  if (data.size() == 0) throw Error(ErrorKind::empty_dataset, "dataset has no samples");
  const BatchTrace trace = forward_batch(net, data.inputs);
  Classification result;
  Index correct = 0;
  const auto& names = net.output_labels();
  for (Index j = 0; j < data.size(); ++j) {
    const int c = classify(net, trace.output().col(j));
    result.predicted.push_back(c);
    if (names[static_cast<std::size_t>(c)] == data.labels[static_cast<std::size_t>(j)]) ++correct;
  }
  result.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  return result;
}

}  // namespace nnprune
