#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "support.hpp"

#include "nnprune/serialization.hpp"
#include "nnprune/training.hpp"

#include <algorithm>

using namespace nnprune;

namespace {

Network single_step_neuron(double w1, double w2, double bias) {
  Network net(2, {1}, Activation::step, {"yes", "no"});
  net.set_weight(ElementRef::synapse(0, 0, 0), w1, true);
  net.set_weight(ElementRef::synapse(0, 0, 1), w2, true);
  net.set_weight(ElementRef::bias(0, 0), bias, true);
  return net;
}

bool contains(const std::vector<ElementRef>& v, const ElementRef& r) { return std::find(v.begin(), v.end(), r) != v.end(); }

}  // namespace

TEST_CASE("step neuron evaluates the weighted sum") {
  auto net = single_step_neuron(1, -1, 0);
  Vector u(2);
  u << 1, -1;
  auto t = forward(net, u);
  CHECK(t.sigma[0](0) == 2.0);
  CHECK(t.output()(0) == 1.0);

  auto zero = single_step_neuron(1, 1, 0);
  u << 1, -1;
  CHECK(forward(zero, u).sigma[0](0) == 0.0);
  CHECK(forward(zero, u).output()(0) == 1.0);
}

TEST_CASE("bias-only step neuron is constant") {
  Network net(2, {1}, Activation::step, {"yes", "no"});
  net.remove_element(ElementRef::synapse(0, 0, 0));
  net.remove_element(ElementRef::synapse(0, 0, 1));
  net.set_weight(ElementRef::bias(0, 0), -1, true);
  CHECK(net.fan_in(0, 0) == 0);
  const Matrix x = support::all_assignments(2);
  const Matrix y = forward_batch(net, x).output();
  CHECK((y.array() == -1.0).all());
}

TEST_CASE("forward rejects the wrong input length") {
  Network net(3, {2, 1}, Activation::tanh, {});
  CHECK_THROWS_AS(forward(net, Vector::Zero(2)), Error);
  try {
    forward(net, Vector::Zero(4));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::input_shape);
  }
}

TEST_CASE("forward is deterministic and matches a loop evaluator") {
  std::mt19937_64 rng(7);
  for (int seed = 0; seed < 20; ++seed) {
    Network net = support::random_smooth_network(seed, rng);
    Vector u = support::random_uniform(net.input_dim(), rng);
    auto a = forward(net, u);
    auto b = forward(net, u);
    const auto naive = support::naive_output(net, u);
    for (Index o = 0; o < a.output().size(); ++o) {
      CHECK(a.output()(o) == b.output()(o));
      CHECK(support::close(a.output()(o), naive[o], 1e-12, 1e-14));
    }
  }
}

TEST_CASE("masked features are ignored") {
  Network net(3, {2, 1}, Activation::tanh, {});
  net.randomize(3);
  net.remove_element(ElementRef::feature(1));
  Vector u(3), v(3);
  u << 0.5, 9.0, -1.0;
  v << 0.5, -4.0, -1.0;
  CHECK(forward(net, u).output()(0) == forward(net, v).output()(0));
}

TEST_CASE("single tanh neuron gradient") {
  Network net(1, {1}, Activation::tanh, {});
  net.set_weight(ElementRef::synapse(0, 0, 0), 0.5, false);
  net.set_weight(ElementRef::bias(0, 0), 0.0, false);
  Vector u(1), z(1);
  u << 1.0;
  z << 1.0;
  auto t = forward(net, u);
  auto g = backward(net, t, -(z - t.output()));
  const double analytic = -(1 - std::tanh(0.5)) * (1 - std::tanh(0.5) * std::tanh(0.5));
  CHECK(g.at(ElementRef::synapse(0, 0, 0)) == doctest::Approx(analytic).epsilon(1e-14));
  const double fd = support::finite_difference(net, u, z, ElementRef::synapse(0, 0, 0));
  CHECK(support::close(g.at(ElementRef::synapse(0, 0, 0)), fd));
}

TEST_CASE("every derivative matches central differences on random networks") {
  std::mt19937_64 rng(2024);
  for (int seed = 0; seed < 50; ++seed) {
    Network net = support::random_smooth_network(seed, rng);
    Vector u = support::random_uniform(net.input_dim(), rng);
    Vector z = support::random_pm1(net.output_count(), rng);
    auto t = forward(net, u);
    auto g = backward(net, t, -(z - t.output()));
    std::vector<ElementRef> refs = net.live_weights();
    for (auto r : net.live_features()) refs.push_back(r);
    for (int l = 0; l < net.depth(); ++l) {
      for (int r = 0; r < net.layer(l).size(); ++r) refs.push_back(ElementRef::unit(l, r));
    }
    for (const auto& ref : refs) {
      const double fd = support::finite_difference(net, u, z, ref);
      INFO(ref.str(), " seed ", seed);
      CHECK(support::close(g.at(ref), fd));
    }
  }
}

TEST_CASE("zero output gradient gives zero derivatives") {
  Network net(3, {4, 2}, Activation::tanh, {});
  net.randomize(5);
  auto t = forward(net, Vector::Ones(3));
  auto g = backward(net, t, Vector::Zero(2));
  CHECK(g.input.isZero(0));
  for (std::size_t l = 0; l < g.weights.size(); ++l) {
    CHECK(g.weights[l].isZero(0));
    CHECK(g.bias[l].isZero(0));
    CHECK(g.output[l].isZero(0));
  }
}

TEST_CASE("frozen synapses still report derivatives") {
  Network net(2, {1}, Activation::tanh, {});
  net.randomize(2);
  const auto ref = ElementRef::synapse(0, 0, 1);
  net.set_weight(ref, 0.3, true);
  Vector u = Vector::Ones(2), z = Vector::Ones(1);
  auto t = forward(net, u);
  auto g = backward(net, t, -(z - t.output()));
  CHECK(g.at(ref) != 0.0);
  CHECK(support::close(g.at(ref), support::finite_difference(net, u, z, ref)));
}

TEST_CASE("backward refuses step activations") {
  auto net = single_step_neuron(1, 1, 0);
  auto t = forward(net, Vector::Ones(2));
  try {
    backward(net, t, Vector::Ones(1));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::non_differentiable);
  }
}

TEST_CASE("set_weight freezes") {
  Network net(2, {1}, Activation::tanh, {});
  const auto ref = ElementRef::synapse(0, 0, 0);
  net.set_weight(ref, 0.37, false);
  CHECK(net.is_trainable(ref));
  net.set_weight(ref, 0.0, true);
  CHECK(net.weight(ref) == 0.0);
  CHECK_FALSE(net.is_trainable(ref));

  const auto other = ElementRef::synapse(0, 0, 1);
  net.set_weight(other, 0.25, false);
  net.set_weight(other, net.weight(other), true);
  CHECK(net.weight(other) == 0.25);
  CHECK_FALSE(net.is_trainable(other));
}

TEST_CASE("set_weight on a removed synapse is a stale reference") {
  Network net(3, {2, 1}, Activation::tanh, {});
  const auto ref = ElementRef::synapse(0, 1, 2);
  net.remove_element(ref);
  try {
    net.set_weight(ref, 1.0, true);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::stale_reference);
  }
}

TEST_CASE("frozen weights survive training bit for bit") {
  Network net(2, {3, 1}, Activation::tanh, {"T", "F"});
  net.randomize(11);
  for (const auto& ref : net.live_weights()) net.set_weight(ref, net.weight(ref), true);
  const std::string before = serialize(net);
  Matrix x(2, 4);
  x << -1, -1, 1, 1, -1, 1, -1, 1;
  const auto data = Dataset::classification(x, {"F", "T", "T", "F"});
  TrainConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.momentum = 0.5;
  for (int e = 0; e < 100; ++e) train_epoch(net, data, Loss{}, cfg);
  CHECK(serialize(net) == before);
}

TEST_CASE("removing the only outgoing synapse cascades the neuron") {
  Network net(2, {2, 1}, Activation::tanh, {});
  auto victims = net.remove_element(ElementRef::synapse(1, 0, 0));
  CHECK(contains(victims, ElementRef::unit(0, 0)));
  CHECK_FALSE(net.is_live(ElementRef::unit(0, 0)));
  CHECK_FALSE(net.is_live(ElementRef::synapse(0, 0, 0)));
  CHECK_FALSE(net.is_live(ElementRef::synapse(0, 0, 1)));
  CHECK(net.is_live(ElementRef::unit(0, 1)));
  CHECK(net.audit().empty());
}

TEST_CASE("removing a feature removes its synapses and silent neurons") {
  Network net(1, {2, 1}, Activation::tanh, {});
  net.randomize(4);
  net.set_weight(ElementRef::bias(0, 0), 0.0, true);
  auto victims = net.remove_element(ElementRef::feature(0));
  CHECK_FALSE(net.active_inputs()(0));
  CHECK_FALSE(net.is_live(ElementRef::synapse(0, 0, 0)));
  CHECK_FALSE(net.is_live(ElementRef::synapse(0, 1, 0)));
  // neuron 0 has nothing left to say, neuron 1 still carries a trainable bias
  CHECK(contains(victims, ElementRef::unit(0, 0)));
  CHECK(net.is_live(ElementRef::unit(0, 1)));
}

TEST_CASE("removing a feature preserves constant neurons of every activation") {
  for (auto act : {Activation::tanh, Activation::sigmoid, Activation::step}) {
    CAPTURE(to_string(act));
    Network net(2, {2, 1}, act, {});
    net.randomize(7);
    net.set_weight(ElementRef::bias(0, 0), 0.0, true);
    net.remove_element(ElementRef::synapse(0, 0, 1));
    // zeroing the feature's synapses is the reference for removing it
    Network zeroed = net;
    zeroed.set_weight(ElementRef::synapse(0, 0, 0), 0.0, true);
    zeroed.set_weight(ElementRef::synapse(0, 1, 0), 0.0, true);
    net.remove_element(ElementRef::feature(0));
    CHECK(net.is_live(ElementRef::unit(0, 0)) == (act != Activation::tanh));
    for (double a : {-1.0, 1.0}) {
      for (double b : {-1.0, 1.0}) {
        Vector x(2);
        x << a, b;
        CHECK(forward(net, x).output()(0) == forward(zeroed, x).output()(0));
      }
    }
  }
}

TEST_CASE("removing a synapse of a fully connected net has no cascade") {
  Network net(2, {2, 1}, Activation::tanh, {});
  CHECK(net.remove_element(ElementRef::synapse(0, 0, 1)).empty());
}

TEST_CASE("output neurons are protected") {
  Network net(2, {2, 1}, Activation::tanh, {});
  try {
    net.remove_element(ElementRef::unit(1, 0));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::illegal_modification);
  }
}

TEST_CASE("fan-in counts live non-bias synapses") {
  Network net(12, {10, 10, 2}, Activation::tanh, {"P", "O"});
  for (int r = 0; r < 10; ++r) CHECK(net.fan_in(0, r) == 12);
  net.remove_element(ElementRef::synapse(0, 3, 7));
  CHECK(net.fan_in(0, 3) == 11);
  CHECK(net.fan_in(0, 4) == 12);
  // a frozen zero is as good as absent
  net.set_weight(ElementRef::synapse(0, 4, 0), 0.0, true);
  CHECK(net.fan_in(0, 4) == 11);
}

TEST_CASE("cleanup leaves nothing for a second audit") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    Network net(5, {4, 3, 2}, Activation::tanh, {});
    for (int k = 0; k < 8; ++k) {
      auto weights = net.live_weights();
      std::erase_if(weights, [](const ElementRef& r) { return r.kind == ElementRef::Kind::bias; });
      if (weights.empty()) break;
      net.remove_element(weights[rng() % weights.size()]);
      CHECK(net.audit().empty());
    }
    auto features = net.live_features();
    if (features.size() > 1) net.remove_element(features.front());
    CHECK(net.audit().empty());
    auto hidden = net.live_hidden_neurons();
    if (!hidden.empty()) net.remove_element(hidden.back());
    CHECK(net.audit().empty());
  }
}
