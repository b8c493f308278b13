#ifndef NNPRUNE_TRAINING_HPP
#define NNPRUNE_TRAINING_HPP

#include "nnprune/dataset.hpp"
#include "nnprune/network.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nnprune {

enum class LossKind { mse, margin };

/// Per-sample loss: ½‖z − ẑ‖² or the per-output hinge Σ max(0, m − z·ẑ).
struct Loss {
  LossKind kind = LossKind::mse;
  double margin = 1.0;

  [[nodiscard]] double value(const Eigen::Ref<const Vector>& target,
                             const Eigen::Ref<const Vector>& output) const;
  /// Per-sample losses, one per column.
  [[nodiscard]] Vector values(const Matrix& targets, const Matrix& outputs) const;
  /// dL^j/dẑ for every sample; the hinge uses subgradient 0 at the kink.
  [[nodiscard]] Matrix gradient(const Matrix& targets, const Matrix& outputs) const;
};

enum class SuccessCriterion { loss_below_threshold, zero_classification_error };

struct TrainConfig {
  double learning_rate = 0.05;
  double momentum = 0.0;
  int max_epochs = 1000;
  double loss_threshold = 0.0;
  SuccessCriterion success = SuccessCriterion::zero_classification_error;
  std::uint64_t seed = 1;
};

struct TrainOutcome {
  bool converged = false;
  int epochs_used = 0;
  double final_total_loss = 0.0;
  std::optional<double> final_accuracy;
};

/// Values indexed like the elements of a network: one entry per feature,
/// neuron, synapse and bias.
struct ElementTable {
  Vector inputs;
  std::vector<Vector> neurons;
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  static ElementTable zeros_like(const Network& net);
  ElementTable& operator+=(const ElementTable& other);
  ElementTable& operator*=(double factor);
  [[nodiscard]] ElementTable cwise_max(const ElementTable& other) const;
  [[nodiscard]] double at(const ElementRef& ref) const;
};

/// Everything one full-batch epoch learned about the gradient. `abs_max` and
/// `abs_sum` hold, across samples, the max and sum of |∂L^j/∂w| for weights,
/// |∂L^j/∂y · y| for neurons and |∂L^j/∂u · u| for features.
struct GradientRecord {
  Index samples = 0;
  double total_loss = 0.0;
  ElementTable gradient;
  ElementTable abs_max;
  ElementTable abs_sum;
};

/// Momentum buffers of one training session.
struct TrainState {
  std::vector<Matrix> weight_velocity;
  std::vector<Vector> bias_velocity;
};

double total_loss(const Network& net, const Dataset& data, const Loss& loss);

/// Gradient statistics at the current weights without updating them.
GradientRecord gradient_record(const Network& net, const Dataset& data, const Loss& loss,
                               bool with_statistics = true);

/// One gradient-descent step (with momentum) on the summed loss. Only live
/// trainable weights move.
GradientRecord train_epoch(Network& net, const Dataset& data, const Loss& loss,
                           const TrainConfig& config, TrainState& state);
GradientRecord train_epoch(Network& net, const Dataset& data, const Loss& loss,
                           const TrainConfig& config);

bool meets_criterion(const Network& net, const Dataset& data, const Loss& loss,
                     const TrainConfig& config);

/// Trains until the success criterion holds or `max_epochs` is spent.
TrainOutcome train_until(Network& net, const Dataset& data, const Loss& loss,
                         const TrainConfig& config);

struct Classification {
  double accuracy = 0.0;
  std::vector<int> predicted;  // index into Network::output_labels()
};

/// Class index for one output vector: argmax with first-label tie-break, or
/// the sign rule (ŷ ≥ 0 picks the first label) for a single output.
int classify(const Network& net, const Eigen::Ref<const Vector>& output);
Classification evaluate_classification(const Network& net, const Dataset& data);

}  // namespace nnprune

#endif  // NNPRUNE_TRAINING_HPP
