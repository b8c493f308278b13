#include "nnprune/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nnprune {

std::string_view to_string(ElementClass c) {
  switch (c) {
    case ElementClass::input: return "input";
    case ElementClass::weight: return "weight";
    case ElementClass::neuron: return "neuron";
  }
  return "unknown";
}

std::string_view to_string(IndicatorMode m) { return m == IndicatorMode::max ? "max" : "avg"; }

ElementClass parse_element_class(std::string_view s) {
  if (s == "input") return ElementClass::input;
  if (s == "weight") return ElementClass::weight;
  if (s == "neuron") return ElementClass::neuron;
  throw Error(ErrorKind::parse, "unknown element class '" + std::string(s) + "'");
}

IndicatorMode parse_indicator_mode(std::string_view s) {
  if (s == "max") return IndicatorMode::max;
  if (s == "avg") return IndicatorMode::avg;
  throw Error(ErrorKind::parse, "unknown indicator mode '" + std::string(s) + "'");
}

ValidSet::ValidSet(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw Error(ErrorKind::config, "valid set must not be empty");
  std::sort(values_.begin(), values_.end());
  if (std::adjacent_find(values_.begin(), values_.end()) != values_.end())
    throw Error(ErrorKind::config, "valid set contains duplicates");
}

bool ValidSet::contains(double v) const {
  return std::binary_search(values_.begin(), values_.end(), v);
}

double ValidSet::nearest(double w) const {
  double best = values_.front();
  for (double v : values_) {
    const double d = std::abs(v - w);
    const double db = std::abs(best - w);
    if (d < db || (d == db && std::abs(v) < std::abs(best))) best = v;
  }
  return best;
}

double input_indicator_sample(const Network& net, const GradientBundle& grad, const ForwardTrace& trace,
                              int feature) {
  const auto ref = ElementRef::feature(feature);
  if (!net.is_live(ref)) throw Error(ErrorKind::stale_reference, ref.str() + " is masked off");
  return std::abs(grad.input(feature) * trace.input(feature));
}

double weight_indicator_sample(const Network& net, const GradientBundle& grad, const ElementRef& weight,
                               double target) {
  if (!weight.is_weight() || !net.is_live(weight))
    throw Error(ErrorKind::stale_reference, weight.str() + " is not a live weight");
  if (!net.is_trainable(weight))
    throw Error(ErrorKind::excluded_element, weight.str() + " is frozen");
  return std::abs(grad.at(weight)) * std::abs(target - net.weight(weight));
}

double neuron_indicator_sample(const Network& net, const GradientBundle& grad, const ForwardTrace& trace,
                               const ElementRef& neuron) {
  if (neuron.kind != ElementRef::Kind::neuron || !net.is_live(neuron))
    throw Error(ErrorKind::stale_reference, neuron.str() + " is not a live neuron");
  if (net.is_output(neuron)) throw Error(ErrorKind::excluded_element, "output neurons are protected");
  const auto l = static_cast<std::size_t>(neuron.layer);
  return std::abs(grad.output[l](neuron.neuron) * trace.y[l](neuron.neuron));
}

double aggregate_samples(std::span<const double> values, IndicatorMode mode) {
  if (values.empty()) throw Error(ErrorKind::empty_dataset, "cannot aggregate over zero samples");
  if (mode == IndicatorMode::max) return *std::max_element(values.begin(), values.end());
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double aggregate_weight_samples(std::span<const double> gradient_magnitudes, double displacement,
                                IndicatorMode mode) {
  return std::abs(displacement) * aggregate_samples(gradient_magnitudes, mode);
}

void SensitivityLedger::accumulate(const GradientRecord& epoch) {
  if (epoch.samples == 0) throw Error(ErrorKind::empty_dataset, "epoch without samples");
  ElementTable aggregate = mode_ == IndicatorMode::max ? epoch.abs_max : epoch.abs_sum;
  if (mode_ == IndicatorMode::avg) aggregate *= 1.0 / static_cast<double>(epoch.samples);
  if (epochs_ == 0) {
    sum_ = std::move(aggregate);
  } else {
    sum_ += aggregate;
  }
  ++epochs_;
}

void SensitivityLedger::merge(const SensitivityLedger& other) {
  if (other.class_ != class_ || other.mode_ != mode_)
    throw Error(ErrorKind::precondition, "cannot merge ledgers of different class or mode");
  if (other.epochs_ == 0) return;
  if (epochs_ == 0) {
    sum_ = other.sum_;
  } else {
    sum_ += other.sum_;
  }
  epochs_ += other.epochs_;
}

std::vector<Indicator> SensitivityLedger::finalize(const Network& net, const ValidSet& valid) const {
  if (epochs_ == 0) throw Error(ErrorKind::empty_ledger, "no epochs accumulated");
  const double scale = 1.0 / static_cast<double>(epochs_);
  std::vector<Indicator> out;
  switch (class_) {
    case ElementClass::input:
      for (const auto& ref : net.live_features()) out.push_back({ref, sum_.at(ref) * scale, 0.0});
      break;
    case ElementClass::neuron:
      for (const auto& ref : net.live_hidden_neurons()) out.push_back({ref, sum_.at(ref) * scale, 0.0});
      break;
    case ElementClass::weight:
      for (const auto& ref : net.live_weights()) {
        if (!net.is_trainable(ref)) continue;
        const double w = net.weight(ref);
        const double v = valid.nearest(w);
        out.push_back({ref, sum_.at(ref) * scale * std::abs(v - w), v});
      }
      break;
  }
  return out;
}

SensitivityLedger accumulate_indicators(Network& net, const Dataset& data, const Loss& loss,
                                        const TrainConfig& config, ElementClass element_class,
                                        IndicatorMode mode, int epochs) {
  if (epochs < 1) throw Error(ErrorKind::config, "at least one accumulation epoch is required");
  SensitivityLedger ledger(element_class, mode);
  TrainState state;
  for (int e = 0; e < epochs; ++e) ledger.accumulate(train_epoch(net, data, loss, config, state));
  return ledger;
}

}  // namespace nnprune
