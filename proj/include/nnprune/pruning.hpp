#ifndef NNPRUNE_PRUNING_HPP
#define NNPRUNE_PRUNING_HPP

#include "nnprune/sensitivity.hpp"
#include "nnprune/training.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nnprune {

enum class ProblemKind {
  feature_selection,
  neuron_removal,
  synapse_removal,
  precision_reduction,
  uniform_simplification,
};

std::string_view to_string(ProblemKind k);
ProblemKind parse_problem(std::string_view s);

struct PruningProblem {
  ProblemKind kind = ProblemKind::synapse_removal;
  ValidSet valid = ValidSet::removal();
  int target_fan_in = 3;

  [[nodiscard]] ElementClass element_class() const noexcept;

  static PruningProblem feature_selection() { return {ProblemKind::feature_selection}; }
  static PruningProblem neuron_removal() { return {ProblemKind::neuron_removal}; }
  static PruningProblem synapse_removal() { return {ProblemKind::synapse_removal}; }
  static PruningProblem precision_reduction(ValidSet s) { return {ProblemKind::precision_reduction, std::move(s)}; }
  static PruningProblem uniform_simplification(int target = 3) {
    return {ProblemKind::uniform_simplification, ValidSet::removal(), target};
  }
};

enum class PruneAlgorithm { basic, accelerated };

struct PruneStepRecord;

struct PruneConfig {
  PruningProblem problem;
  PruneAlgorithm algorithm = PruneAlgorithm::basic;
  IndicatorMode mode = IndicatorMode::max;
  int accumulation_epochs = 10;
  TrainConfig retrain;
  Loss loss;
  /// Batch size of the accelerated loop; unset means half of the pool.
  std::optional<int> initial_m;
  std::function<void(const PruneStepRecord&)> log_sink;
};

struct PruneStepRecord {
  int step = 0;
  int m = 0;
  int staleness = 0;  // failed attempts since the indicators were computed
  std::vector<ElementRef> refs;
  std::vector<ElementRef> cascade;
  TrainOutcome retrain;
  bool accepted = false;
  double loss_after = 0.0;
  std::uint64_t saved_digest = 0;
  std::optional<std::uint64_t> restored_digest;  // rejected steps only
};

enum class Termination { single_element_failed, pool_exhausted };

struct PruneResult {
  Network network;
  std::vector<PruneStepRecord> steps;
  bool minimality_certificate = false;
  Termination termination = Termination::pool_exhausted;
};

struct Candidate {
  ElementRef ref;
  double target = 0.0;
  double indicator = 0.0;
};

/// Live trainable elements of the problem's class with the smallest
/// indicators, ascending, ties by ElementRef. The uniform problem only draws
/// from neurons at the current maximal fan-in above the target.
std::vector<Candidate> select_candidates(std::span<const Indicator> indicators, const Network& net,
                                         const PruningProblem& problem, int m);

/// Number of elements a problem could still modify.
int candidate_pool_size(const Network& net, const PruningProblem& problem);

struct Modification {
  std::vector<ElementRef> modified;
  std::vector<ElementRef> cascade;
};

/// Deletes or freezes the candidates. Refs that vanished in an earlier
/// cascade of the same batch are skipped.
Modification apply_modification(Network& net, std::span<const Candidate> candidates, const PruningProblem& problem);

PruneResult prune_basic(Network net, const Dataset& data, const PruneConfig& config);
PruneResult prune_accelerated(Network net, const Dataset& data, const PruneConfig& config);
PruneResult prune(Network net, const Dataset& data, const PruneConfig& config);

struct PipelineResult {
  Network network;
  std::vector<PruneResult> stages;
  int stages_completed = 0;
  std::optional<std::string> error;
};

/// Runs the stages in order, each starting from the previous stage's result.
PipelineResult run_pipeline(Network net, const Dataset& data, std::span<const PruneConfig> stages);

}  // namespace nnprune

#endif  // NNPRUNE_PRUNING_HPP
