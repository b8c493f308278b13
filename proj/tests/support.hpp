// Helpers shared by the test binaries. The naive evaluator below is written
// with plain loops so that it can act as an oracle for the Eigen code paths.
#ifndef NNPRUNE_TESTS_SUPPORT_HPP
#define NNPRUNE_TESTS_SUPPORT_HPP

#include "nnprune/network.hpp"
#include "nnprune/training.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace support {

using namespace nnprune;

struct Nudge {
  int layer = -2;  // -2: none, -1: input feature, >= 0: neuron output
  int index = 0;
  double amount = 0.0;
};

inline std::vector<double> naive_output(const Network& net, const Vector& u, Nudge nudge = {}) {
  std::vector<double> x(u.data(), u.data() + u.size());
  for (int k = 0; k < net.input_dim(); ++k) {
    if (!net.active_inputs()(k)) x[k] = 0.0;
  }
  if (nudge.layer == -1) x[nudge.index] += nudge.amount;
  for (int l = 0; l < net.depth(); ++l) {
    const Layer& L = net.layer(l);
    std::vector<double> y(static_cast<std::size_t>(L.size()), 0.0);
    for (int r = 0; r < L.size(); ++r) {
      if (!L.neuron_live(r)) continue;
      double sigma = L.bias(r);
      for (int s = 0; s < L.sources(); ++s) {
        if (L.weight_live(r, s)) sigma += L.weights(r, s) * x[s];
      }
      y[r] = activate(L.activation[r], sigma);
      if (nudge.layer == l && nudge.index == r) y[r] += nudge.amount;
    }
    x = std::move(y);
  }
  return x;
}

inline double naive_loss(const Network& net, const Vector& u, const Vector& z, Nudge nudge = {}) {
  auto out = naive_output(net, u, nudge);
  double loss = 0.0;
  for (std::size_t o = 0; o < out.size(); ++o) loss += 0.5 * (z(o) - out[o]) * (z(o) - out[o]);
  return loss;
}

/// Central difference of the naive loss with respect to `ref`.
inline double finite_difference(const Network& net, const Vector& u, const Vector& z, const ElementRef& ref,
                                double h = 1e-4) {
  if (ref.is_weight()) {
    Network plus = net, minus = net;
    const double w = net.weight(ref);
    plus.set_weight(ref, w + h, false);
    minus.set_weight(ref, w - h, false);
    return (naive_loss(plus, u, z) - naive_loss(minus, u, z)) / (2 * h);
  }
  Nudge p, m;
  if (ref.kind == ElementRef::Kind::input) {
    p = {-1, ref.neuron, h};
  } else {
    p = {ref.layer, ref.neuron, h};
  }
  m = p;
  m.amount = -h;
  return (naive_loss(net, u, z, p) - naive_loss(net, u, z, m)) / (2 * h);
}

inline bool close(double a, double b, double rel = 1e-6, double abs = 1e-9) {
  return std::abs(a - b) <= std::max(abs, rel * std::max(std::abs(a), std::abs(b)));
}

/// Random tanh network with up to 3 layers of up to 8 neurons.
inline Network random_smooth_network(std::uint64_t seed, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> width(1, 8), depth(1, 3);
  const int d = width(rng);
  std::vector<int> sizes(static_cast<std::size_t>(depth(rng)));
  for (int& s : sizes) s = width(rng);
  Network net(d, sizes, Activation::tanh, {});
  net.randomize(seed, 1.0);
  return net;
}

inline Vector random_pm1(int d, std::mt19937_64& rng) {
  Vector u(d);
  for (int k = 0; k < d; ++k) u(k) = rng() & 1 ? 1.0 : -1.0;
  return u;
}

inline Vector random_uniform(int d, std::mt19937_64& rng, double half_width = 1.0) {
  std::uniform_real_distribution<double> dist(-half_width, half_width);
  Vector u(d);
  for (int k = 0; k < d; ++k) u(k) = dist(rng);
  return u;
}

/// Column i holds assignment i: feature b is +1 when bit b of i is set.
inline Matrix all_assignments(int d) {
  Matrix x(d, Index{1} << d);
  for (Index i = 0; i < x.cols(); ++i) {
    for (int b = 0; b < d; ++b) x(b, i) = (i >> b) & 1 ? 1.0 : -1.0;
  }
  return x;
}

/// Frozen step network with ternary weights drawn uniformly from {-1,0,1}.
inline Network random_ternary_step_network(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> inputs(1, 10), hidden_layers(0, 2), width(1, 5), tern(-1, 1), outs(1, 2);
  const int d = inputs(rng);
  std::vector<int> sizes(static_cast<std::size_t>(hidden_layers(rng)));
  for (int& s : sizes) s = width(rng);
  const int o = outs(rng);
  sizes.push_back(o);
  Network net(d, sizes, Activation::step, o == 1 ? std::vector<std::string>{"O", "P"} : std::vector<std::string>{"P", "O"});
  for (const auto& ref : net.live_weights()) net.set_weight(ref, tern(rng), true);
  return net;
}

}  // namespace support

#endif  // NNPRUNE_TESTS_SUPPORT_HPP
