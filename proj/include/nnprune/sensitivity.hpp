#ifndef NNPRUNE_SENSITIVITY_HPP
#define NNPRUNE_SENSITIVITY_HPP

#include "nnprune/training.hpp"

#include <span>
#include <vector>

namespace nnprune {

enum class ElementClass { input, weight, neuron };
enum class IndicatorMode { max, avg };

std::string_view to_string(ElementClass c);
std::string_view to_string(IndicatorMode m);
ElementClass parse_element_class(std::string_view s);
IndicatorMode parse_indicator_mode(std::string_view s);

/// Finite set of admissible weight values, kept sorted and duplicate-free.
class ValidSet {
 public:
  explicit ValidSet(std::vector<double> values);

  static ValidSet removal() { return ValidSet({0.0}); }
  static ValidSet ternary() { return ValidSet({-1.0, 0.0, 1.0}); }

  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] bool contains(double v) const;
  /// Closest member; ties go to the smaller magnitude.
  [[nodiscard]] double nearest(double w) const;

 private:
  std::vector<double> values_;
};

inline double nearest_valid(double w, const ValidSet& s) { return s.nearest(w); }

// Per-sample indicators, each a first-order estimate of the change of L^j.
double input_indicator_sample(const Network& net, const GradientBundle& grad, const ForwardTrace& trace,
                              int feature);
double weight_indicator_sample(const Network& net, const GradientBundle& grad, const ElementRef& weight,
                               double target);
double neuron_indicator_sample(const Network& net, const GradientBundle& grad, const ForwardTrace& trace,
                               const ElementRef& neuron);

double aggregate_samples(std::span<const double> values, IndicatorMode mode);
/// Weight form: the displacement |v − w| multiplies the sample statistic of
/// |∂L^j/∂w|.
double aggregate_weight_samples(std::span<const double> gradient_magnitudes, double displacement,
                                IndicatorMode mode);

struct Indicator {
  ElementRef ref;
  double value = 0.0;
  double target = 0.0;  // nearest valid value (weights only)
};

/// Running per-epoch aggregates for one element class. Merging two ledgers
/// sums their epochs, so partial ledgers combine in any order.
class SensitivityLedger {
 public:
  SensitivityLedger(ElementClass element_class, IndicatorMode mode)
      : class_(element_class), mode_(mode) {}

  void accumulate(const GradientRecord& epoch);
  void merge(const SensitivityLedger& other);

  [[nodiscard]] int epochs() const noexcept { return epochs_; }
  [[nodiscard]] ElementClass element_class() const noexcept { return class_; }
  [[nodiscard]] IndicatorMode mode() const noexcept { return mode_; }

  /// Mean over epochs of the per-epoch aggregates for every live candidate
  /// element; weights are scaled by their displacement to the nearest valid
  /// value at the network's current weights. Frozen weights are excluded.
  [[nodiscard]] std::vector<Indicator> finalize(const Network& net,
                                                const ValidSet& valid = ValidSet::removal()) const;

 private:
  ElementClass class_;
  IndicatorMode mode_;
  int epochs_ = 0;
  ElementTable sum_;
};

/// Trains `net` for `epochs` epochs, folding each epoch's gradient statistics
/// into a ledger.
SensitivityLedger accumulate_indicators(Network& net, const Dataset& data, const Loss& loss,
                                        const TrainConfig& config, ElementClass element_class,
                                        IndicatorMode mode, int epochs);

}  // namespace nnprune

#endif  // NNPRUNE_SENSITIVITY_HPP
