#include "nnprune/pruning.hpp"

#include "nnprune/serialization.hpp"

#include <algorithm>
#include <limits>
#include <map>

namespace nnprune {

std::string_view to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::feature_selection: return "feature-selection";
    case ProblemKind::neuron_removal: return "neuron-removal";
    case ProblemKind::synapse_removal: return "synapse-removal";
    case ProblemKind::precision_reduction: return "precision-reduction";
    case ProblemKind::uniform_simplification: return "uniform-simplification";
  }
  return "unknown";
}

ProblemKind parse_problem(std::string_view s) {
  for (auto k : {ProblemKind::feature_selection, ProblemKind::neuron_removal, ProblemKind::synapse_removal,
                 ProblemKind::precision_reduction, ProblemKind::uniform_simplification}) {
    if (s == to_string(k)) return k;
  }
  throw Error(ErrorKind::parse, "unknown pruning problem '" + std::string(s) + "'");
}

ElementClass PruningProblem::element_class() const noexcept {
  switch (kind) {
    case ProblemKind::feature_selection: return ElementClass::input;
    case ProblemKind::neuron_removal: return ElementClass::neuron;
    default: return ElementClass::weight;
  }
}

namespace {

bool in_class(const ElementRef& ref, const PruningProblem& problem) {
  switch (problem.kind) {
    case ProblemKind::feature_selection: return ref.kind == ElementRef::Kind::input;
    case ProblemKind::neuron_removal: return ref.kind == ElementRef::Kind::neuron;
    case ProblemKind::uniform_simplification: return ref.kind == ElementRef::Kind::synapse;
    default: return ref.is_weight();
  }
}

bool eligible(const ElementRef& ref, const Network& net, const PruningProblem& problem) {
  if (!in_class(ref, problem) || !net.is_live(ref) || !net.is_trainable(ref)) return false;
  if (ref.kind == ElementRef::Kind::neuron && net.is_output(ref)) return false;
  if (problem.kind == ProblemKind::uniform_simplification)
    return net.fan_in(ref.layer, ref.neuron) > problem.target_fan_in;
  return true;
}

std::vector<ElementRef> pool(const Network& net, const PruningProblem& problem) {
  std::vector<ElementRef> all;
  switch (problem.element_class()) {
    case ElementClass::input: all = net.live_features(); break;
    case ElementClass::neuron: all = net.live_hidden_neurons(); break;
    case ElementClass::weight: all = net.live_weights(); break;
  }
  std::erase_if(all, [&](const ElementRef& r) { return !eligible(r, net, problem); });
  return all;
}

TrainOutcome retrain(Network& net, const Dataset& data, const PruneConfig& config) {
  try {
    return train_until(net, data, config.loss, config.retrain);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::divergence) throw;
    TrainOutcome failed;
    failed.epochs_used = config.retrain.max_epochs;
    failed.final_total_loss = std::numeric_limits<double>::infinity();
    return failed;
  }
}

void require_trained(const Network& net, const Dataset& data, const PruneConfig& config) {
  if (!meets_criterion(net, data, config.loss, config.retrain))
    throw Error(ErrorKind::precondition, "network does not satisfy the success criterion before pruning");
}

std::vector<Indicator> indicators(Network& net, const Dataset& data, const PruneConfig& config) {
  auto ledger = accumulate_indicators(net, data, config.loss, config.retrain, config.problem.element_class(),
                                      config.mode, config.accumulation_epochs);
  return ledger.finalize(net, config.problem.valid);
}

void emit(PruneResult& result, const PruneConfig& config, PruneStepRecord record) {
  if (config.log_sink) config.log_sink(record);
  result.steps.push_back(std::move(record));
}

/// One modify-and-retrain attempt; restores `saved` on failure.
bool attempt(Network& net, const Network& saved, std::uint64_t saved_digest, std::span<const Candidate> batch,
             int m, int staleness, const Dataset& data, const PruneConfig& config, PruneResult& result) {
  PruneStepRecord rec;
  rec.step = static_cast<int>(result.steps.size());
  rec.m = m;
  rec.staleness = staleness;
  rec.saved_digest = saved_digest;
  Modification mod = apply_modification(net, batch, config.problem);
  rec.refs = std::move(mod.modified);
  rec.cascade = std::move(mod.cascade);
  rec.retrain = retrain(net, data, config);
  rec.loss_after = rec.retrain.final_total_loss;
  rec.accepted = rec.retrain.converged;
  if (!rec.accepted) {
    net = saved;
    rec.restored_digest = digest(net);
  }
  emit(result, config, std::move(rec));
  return result.steps.back().accepted;
}

}  // namespace

int candidate_pool_size(const Network& net, const PruningProblem& problem) {
  return static_cast<int>(pool(net, problem).size());
}

std::vector<Candidate> select_candidates(std::span<const Indicator> indicators, const Network& net,
                                         const PruningProblem& problem, int m) {
  if (m < 1) throw Error(ErrorKind::config, "batch size must be at least 1");
  std::vector<Candidate> pool_items;
  for (const auto& ind : indicators) {
    if (eligible(ind.ref, net, problem)) pool_items.push_back({ind.ref, ind.target, ind.value});
  }
  auto by_indicator = [](const Candidate& a, const Candidate& b) {
    if (a.indicator != b.indicator) return a.indicator < b.indicator;
    return a.ref < b.ref;
  };

  if (problem.kind != ProblemKind::uniform_simplification) {
    std::sort(pool_items.begin(), pool_items.end(), by_indicator);
    if (static_cast<int>(pool_items.size()) > m) pool_items.resize(static_cast<std::size_t>(m));
    return pool_items;
  }

  // uniform: the highest fan-in tier that still has trainable synapses
  std::map<std::pair<int, int>, int> fan;
  int top = -1;
  for (const auto& c : pool_items) {
    const int f = net.fan_in(c.ref.layer, c.ref.neuron);
    fan[{c.ref.layer, c.ref.neuron}] = f;
    top = std::max(top, f);
  }
  std::vector<Candidate> tier;
  for (const auto& c : pool_items) {
    if (fan[{c.ref.layer, c.ref.neuron}] == top) tier.push_back(c);
  }
  std::sort(tier.begin(), tier.end(), by_indicator);
  std::map<std::pair<int, int>, int> taken;
  std::vector<Candidate> out;
  for (const auto& c : tier) {
    if (static_cast<int>(out.size()) >= m) break;
    auto key = std::make_pair(c.ref.layer, c.ref.neuron);
    if (fan[key] - taken[key] <= problem.target_fan_in) continue;
    ++taken[key];
    out.push_back(c);
  }
  return out;
}

Modification apply_modification(Network& net, std::span<const Candidate> candidates, const PruningProblem& problem) {
  Modification mod;
  for (const auto& c : candidates) {
    if (!net.is_live(c.ref)) continue;
    switch (problem.kind) {
      case ProblemKind::precision_reduction:
        net.set_weight(c.ref, c.target, true);
        break;
      case ProblemKind::synapse_removal:
      case ProblemKind::uniform_simplification:
        if (c.ref.kind == ElementRef::Kind::bias) {
          net.set_weight(c.ref, 0.0, true);
          break;
        }
        [[fallthrough]];
      default: {
        auto victims = net.remove_element(c.ref);
        mod.cascade.insert(mod.cascade.end(), victims.begin(), victims.end());
      }
    }
    mod.modified.push_back(c.ref);
  }
  return mod;
}

PruneResult prune_basic(Network net, const Dataset& data, const PruneConfig& config) {
  require_trained(net, data, config);
  PruneResult result;
  while (true) {
    const Network saved = net;
    const std::uint64_t saved_digest = digest(saved);
    const auto inds = indicators(net, data, config);
    const auto batch = select_candidates(inds, net, config.problem, 1);
    if (batch.empty()) {
      net = saved;
      result.termination = Termination::pool_exhausted;
      break;
    }
    if (!attempt(net, saved, saved_digest, batch, 1, 0, data, config, result)) {
      result.termination = Termination::single_element_failed;
      break;
    }
  }
  result.minimality_certificate = true;
  result.network = std::move(net);
  return result;
}

PruneResult prune_accelerated(Network net, const Dataset& data, const PruneConfig& config) {
  require_trained(net, data, config);
  PruneResult result;
  int m = config.initial_m.value_or(candidate_pool_size(net, config.problem) / 2);
  m = std::max(m, 1);
  bool done = false;
  while (!done) {
    const Network saved = net;
    const std::uint64_t saved_digest = digest(saved);
    const auto inds = indicators(net, data, config);
    // inner loop reuses the same (increasingly stale) indicators
    for (int staleness = 0;; ++staleness) {
      const auto batch = select_candidates(inds, net, config.problem, m);
      if (batch.empty()) {
        net = saved;
        result.termination = Termination::pool_exhausted;
        done = true;
        break;
      }
      if (attempt(net, saved, saved_digest, batch, m, staleness, data, config, result)) break;
      if (m > 1) {
        m /= 2;
      } else {
        result.termination = Termination::single_element_failed;
        done = true;
        break;
      }
    }
  }
  result.minimality_certificate = true;
  result.network = std::move(net);
  return result;
}

PruneResult prune(Network net, const Dataset& data, const PruneConfig& config) {
  if (config.algorithm == PruneAlgorithm::accelerated) return prune_accelerated(std::move(net), data, config);
  return prune_basic(std::move(net), data, config);
}

PipelineResult run_pipeline(Network net, const Dataset& data, std::span<const PruneConfig> stages) {
  PipelineResult out;
  for (const auto& stage : stages) {
    try {
      PruneResult r = prune(net, data, stage);
      net = r.network;
      out.stages.push_back(std::move(r));
      ++out.stages_completed;
    } catch (const Error& e) {
      out.error = "stage " + std::to_string(out.stages_completed) + " (" + std::string(to_string(stage.problem.kind)) +
                  ") failed: " + e.what();
      break;
    }
  }
  out.network = std::move(net);
  return out;
}

}  // namespace nnprune
