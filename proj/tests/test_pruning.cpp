#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "support.hpp"

#include "nnprune/pruning.hpp"
#include "nnprune/serialization.hpp"
#include "nnprune/tasks.hpp"

#include <algorithm>

using namespace nnprune;

namespace {

Network trained_xor(std::uint64_t seed = 1) {
  Network net(2, {6, 1}, Activation::tanh, {"T", "F"});
  net.randomize(seed);
  REQUIRE(train_until(net, xor_task(), Loss{}, toy_train_config()).converged);
  return net;
}

PruneConfig synapse_config() {
  PruneConfig c;
  c.problem = PruningProblem::synapse_removal();
  c.retrain = toy_train_config();
  c.retrain.max_epochs = 1000;
  return c;
}

std::vector<Indicator> flat_indicators(const Network& net, double value = 1.0) {
  std::vector<Indicator> out;
  for (const auto& ref : net.live_weights()) out.push_back({ref, value, 0.0});
  for (const auto& ref : net.live_features()) out.push_back({ref, value, 0.0});
  for (const auto& ref : net.live_hidden_neurons()) out.push_back({ref, value, 0.0});
  return out;
}

int max_fan_in(const Network& net) {
  int m = 0;
  for (int l = 0; l < net.depth(); ++l) {
    for (int r = 0; r < net.layer(l).size(); ++r) {
      if (net.layer(l).neuron_live(r)) m = std::max(m, net.fan_in(l, r));
    }
  }
  return m;
}

}  // namespace

TEST_CASE("problem names round-trip") {
  for (auto k : {ProblemKind::feature_selection, ProblemKind::neuron_removal, ProblemKind::synapse_removal,
                 ProblemKind::precision_reduction, ProblemKind::uniform_simplification})
    CHECK(parse_problem(to_string(k)) == k);
  CHECK_THROWS_AS(parse_problem("pruning"), Error);
}

TEST_CASE("selection takes the smallest indicators") {
  Network net(2, {2, 1}, Activation::tanh, {});
  auto inds = flat_indicators(net);
  // 9 weights: 3 biases and 6 synapses
  for (std::size_t i = 0; i < inds.size(); ++i) inds[i].value = 10.0 - static_cast<double>(i);
  auto all = select_candidates(inds, net, PruningProblem::synapse_removal(), 100);
  CHECK(all.size() == 9);
  CHECK(std::is_sorted(all.begin(), all.end(), [](auto& a, auto& b) { return a.indicator < b.indicator; }));
  auto two = select_candidates(inds, net, PruningProblem::synapse_removal(), 2);
  REQUIRE(two.size() == 2);
  CHECK(two[0].indicator <= two[1].indicator);
  CHECK(two[1].indicator <= all[2].indicator);
  CHECK_THROWS_AS(select_candidates(inds, net, PruningProblem::synapse_removal(), 0), Error);
}

TEST_CASE("ties go to the lower reference") {
  Network net(3, {2, 1}, Activation::tanh, {});
  auto inds = flat_indicators(net, 0.5);
  std::reverse(inds.begin(), inds.end());
  auto picked = select_candidates(inds, net, PruningProblem::feature_selection(), 2);
  REQUIRE(picked.size() == 2);
  CHECK(picked[0].ref == ElementRef::feature(0));
  CHECK(picked[1].ref == ElementRef::feature(1));
  auto neurons = select_candidates(inds, net, PruningProblem::neuron_removal(), 5);
  CHECK(neurons.size() == 2);  // the output neuron is protected
}

TEST_CASE("frozen weights are never candidates") {
  Network net(2, {2, 1}, Activation::tanh, {});
  net.set_weight(ElementRef::synapse(0, 0, 0), 0.0, true);
  auto picked = select_candidates(flat_indicators(net), net, PruningProblem::synapse_removal(), 100);
  for (const auto& c : picked) CHECK(c.ref != ElementRef::synapse(0, 0, 0));
  CHECK(candidate_pool_size(net, PruningProblem::synapse_removal()) == 8);
}

TEST_CASE("uniform simplification draws from the widest neuron") {
  Network net(5, {3, 1}, Activation::tanh, {});
  // fan-ins 5, 3, 2 in the first layer; the output neuron has 3
  net.remove_element(ElementRef::synapse(0, 1, 0));
  net.remove_element(ElementRef::synapse(0, 1, 1));
  net.remove_element(ElementRef::synapse(0, 2, 0));
  net.remove_element(ElementRef::synapse(0, 2, 1));
  net.remove_element(ElementRef::synapse(0, 2, 2));
  REQUIRE(net.fan_in(0, 0) == 5);
  REQUIRE(net.fan_in(0, 1) == 3);
  REQUIRE(net.fan_in(0, 2) == 2);
  const auto problem = PruningProblem::uniform_simplification(3);
  auto picked = select_candidates(flat_indicators(net), net, problem, 10);
  CHECK(picked.size() == 2);  // 5 - 3
  for (const auto& c : picked) {
    CHECK(c.ref.kind == ElementRef::Kind::synapse);
    CHECK(c.ref.layer == 0);
    CHECK(c.ref.neuron == 0);
  }
  CHECK(candidate_pool_size(net, problem) == 5);
  apply_modification(net, picked, problem);
  CHECK(max_fan_in(net) == 3);
  CHECK(select_candidates(flat_indicators(net), net, problem, 10).empty());
}

TEST_CASE("modification semantics") {
  Network net(3, {2, 1}, Activation::tanh, {});
  const auto w = ElementRef::synapse(0, 0, 1);
  net.set_weight(w, 0.4, false);
  Candidate c{w, nearest_valid(0.4, ValidSet::ternary()), 0.0};
  apply_modification(net, std::vector<Candidate>{c}, PruningProblem::precision_reduction(ValidSet::ternary()));
  CHECK(net.weight(w) == 0.0);
  CHECK_FALSE(net.is_trainable(w));
  CHECK(net.is_live(w));

  auto mod = apply_modification(net, std::vector<Candidate>{{ElementRef::unit(0, 1), 0, 0}}, PruningProblem::neuron_removal());
  CHECK_FALSE(net.is_live(ElementRef::unit(0, 1)));
  CHECK_FALSE(net.is_live(ElementRef::synapse(1, 0, 1)));
  CHECK_FALSE(mod.cascade.empty());

  apply_modification(net, std::vector<Candidate>{{ElementRef::feature(2), 0, 0}}, PruningProblem::feature_selection());
  CHECK_FALSE(net.active_inputs()(2));

  // biases are zeroed and frozen by removal problems
  apply_modification(net, std::vector<Candidate>{{ElementRef::bias(0, 0), 0, 0}}, PruningProblem::synapse_removal());
  CHECK(net.weight(ElementRef::bias(0, 0)) == 0.0);
  CHECK_FALSE(net.is_trainable(ElementRef::bias(0, 0)));
}

TEST_CASE("a batch skips refs removed earlier in the same batch") {
  Network net(2, {2, 1}, Activation::tanh, {});
  std::vector<Candidate> batch{{ElementRef::synapse(1, 0, 0), 0, 0}, {ElementRef::synapse(0, 0, 1), 0, 0}};
  auto mod = apply_modification(net, batch, PruningProblem::synapse_removal());
  CHECK(mod.modified.size() == 1);
  CHECK(std::find(mod.cascade.begin(), mod.cascade.end(), ElementRef::synapse(0, 0, 1)) != mod.cascade.end());
}

TEST_CASE("pruning requires a trained network") {
  Network net(2, {6, 1}, Activation::tanh, {"T", "F"});
  try {
    prune_basic(net, xor_task(), synapse_config());
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::precondition);
  }
  const std::vector<PruneConfig> stages{synapse_config()};
  auto r = run_pipeline(net, xor_task(), stages);
  CHECK(r.stages_completed == 0);
  CHECK(r.error.has_value());
}

TEST_CASE("nothing to prune on a fully frozen network") {
  Network net = trained_xor();
  for (const auto& ref : net.live_weights()) net.set_weight(ref, net.weight(ref), true);
  const std::string before = serialize(net);
  for (auto alg : {PruneAlgorithm::basic, PruneAlgorithm::accelerated}) {
    auto cfg = synapse_config();
    cfg.algorithm = alg;
    auto r = prune(net, xor_task(), cfg);
    CHECK(r.steps.empty());
    CHECK(r.minimality_certificate);
    CHECK(serialize(r.network) == serialize(net));
  }
  CHECK(serialize(net) == before);
}

TEST_CASE("basic synapse removal on XOR is safe and minimal") {
  const auto data = xor_task();
  Network net = trained_xor();
  auto cfg = synapse_config();
  auto r = prune_basic(net, data, cfg);
  CHECK(r.minimality_certificate);
  CHECK(meets_criterion(r.network, data, cfg.loss, cfg.retrain));
  CHECK(r.network.audit().empty());
  int rejected = 0;
  for (const auto& s : r.steps) {
    CHECK(s.m == 1);
    if (!s.accepted) {
      ++rejected;
      REQUIRE(s.restored_digest.has_value());
      CHECK(*s.restored_digest == s.saved_digest);
    }
  }
  CHECK(rejected <= 1);
  if (r.termination == Termination::single_element_failed) CHECK(rejected == 1);

  // replaying the final iteration from the restored network reproduces the
  // rejected attempt: same candidate, same failed retrain
  REQUIRE(r.termination == Termination::single_element_failed);
  Network replay = r.network;
  const auto ledger = accumulate_indicators(replay, data, cfg.loss, cfg.retrain, ElementClass::weight, cfg.mode,
                                            cfg.accumulation_epochs);
  const auto pick = select_candidates(ledger.finalize(replay, cfg.problem.valid), replay, cfg.problem, 1);
  REQUIRE(pick.size() == 1);
  CHECK(pick[0].ref == r.steps.back().refs.front());
  apply_modification(replay, pick, cfg.problem);
  CHECK_FALSE(train_until(replay, data, cfg.loss, cfg.retrain).converged);
}

TEST_CASE("accelerated pruning halves the batch and restores exactly") {
  const auto data = xor_task();
  Network net = trained_xor(2);
  auto cfg = synapse_config();
  cfg.algorithm = PruneAlgorithm::accelerated;
  auto r = prune_accelerated(net, data, cfg);
  CHECK(r.minimality_certificate);
  CHECK(meets_criterion(r.network, data, cfg.loss, cfg.retrain));
  for (std::size_t i = 0; i < r.steps.size(); ++i) {
    const auto& s = r.steps[i];
    if (!s.accepted) CHECK(s.restored_digest.value() == s.saved_digest);
    if (i + 1 < r.steps.size()) {
      const auto& next = r.steps[i + 1];
      if (s.accepted) {
        CHECK(next.staleness == 0);
        CHECK(next.m == s.m);
      } else {
        CHECK(next.m == std::max(1, s.m / 2));
        CHECK(next.staleness == s.staleness + 1);
      }
    }
  }
}

TEST_CASE("M halves 8, 4, 2, 1 then stops") {
  // every candidate is pushed far away and the retrain budget is zero, so
  // no batch can survive
  Network net(4, {4, 1}, Activation::tanh, {"O", "P"});
  Matrix x = support::all_assignments(4);
  std::vector<std::string> labels;
  for (Index j = 0; j < x.cols(); ++j) labels.push_back(x(0, j) > 0 ? "O" : "P");
  const auto data = Dataset::classification(x, labels);
  net.randomize(3);
  REQUIRE(train_until(net, data, Loss{}, toy_train_config()).converged);

  PruneConfig cfg;
  cfg.problem = PruningProblem::precision_reduction(ValidSet({-50.0}));
  cfg.algorithm = PruneAlgorithm::accelerated;
  cfg.initial_m = 8;
  cfg.retrain = toy_train_config();
  cfg.retrain.max_epochs = 0;
  std::vector<int> ms;
  cfg.log_sink = [&](const PruneStepRecord& rec) { ms.push_back(rec.m); };
  cfg.accumulation_epochs = 1;
  auto r = prune_accelerated(net, data, cfg);
  CHECK(ms == std::vector<int>{8, 4, 2, 1});
  CHECK(r.termination == Termination::single_element_failed);
  for (const auto& s : r.steps) CHECK_FALSE(s.accepted);
  CHECK(r.steps.size() == 4);
}

TEST_CASE("accelerated with M = 1 ends minimal like basic") {
  const auto data = xor_task();
  for (std::uint64_t seed : {1u, 3u}) {
    Network net = trained_xor(seed);
    auto cfg = synapse_config();
    auto basic = prune_basic(net, data, cfg);
    cfg.algorithm = PruneAlgorithm::accelerated;
    cfg.initial_m = 1;
    auto acc = prune_accelerated(net, data, cfg);
    CHECK(basic.minimality_certificate == acc.minimality_certificate);
    CHECK(meets_criterion(basic.network, data, cfg.loss, cfg.retrain));
    CHECK(meets_criterion(acc.network, data, cfg.loss, cfg.retrain));
    for (const auto& s : acc.steps) CHECK(s.m == 1);
  }
}

TEST_CASE("pipeline stages chain") {
  const auto data = xor_task();
  Network net = trained_xor();
  auto empty = run_pipeline(net, data, {});
  CHECK(serialize(empty.network) == serialize(net));
  CHECK(empty.stages.empty());

  auto stages = transparency_stages(synapse_config().retrain);
  auto r = run_pipeline(net, data, stages);
  REQUIRE_FALSE(r.error.has_value());
  CHECK(r.stages_completed == 3);
  CHECK(max_fan_in(r.stages[0].network) <= 3);
  CHECK(meets_criterion(r.network, data, Loss{}, stages[2].retrain));
  // precision reduction leaves each weight frozen in S or still trainable
  for (const auto& ref : r.network.live_weights()) {
    if (!r.network.is_trainable(ref)) CHECK(ValidSet::ternary().contains(r.network.weight(ref)));
  }
}

TEST_CASE("uniform simplification reaches the target fan-in on the majority task") {
  const auto data = majority_task();
  Network net(8, {4, 1}, Activation::tanh, {"O", "P"});
  net.randomize(2);
  REQUIRE(train_until(net, data, Loss{}, toy_train_config()).converged);
  auto cfg = transparency_stages(toy_train_config())[0];
  cfg.retrain.max_epochs = 1000;
  auto r = prune(net, data, cfg);
  CHECK(r.termination == Termination::pool_exhausted);
  CHECK(max_fan_in(r.network) <= 3);
  CHECK(meets_criterion(r.network, data, cfg.loss, cfg.retrain));
}
