#ifndef NNPRUNE_TRANSPARENCY_HPP
#define NNPRUNE_TRANSPARENCY_HPP

#include "nnprune/network.hpp"

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace nnprune {

/// One premise of a threshold rule: a feature answered yes/no, or an earlier
/// rule holding/not holding.
struct Statement {
  enum class Source { feature, rule };

  Source source = Source::feature;
  int index = 0;
  bool affirmed = true;

  friend bool operator==(const Statement&, const Statement&) = default;
};

/// Holds when at least `k` of its statements hold. A rule with k <= 0 always
/// holds and one with k > size() never does; both arise from neurons whose
/// bias dominates their inputs.
struct ThresholdRule {
  std::string name;
  std::vector<Statement> statements;
  int k = 1;

  friend bool operator==(const ThresholdRule&, const ThresholdRule&) = default;
};

/// Hierarchy of threshold rules plus the decision convention. With a single
/// output rule and two labels, the rule holding selects labels[0]; otherwise
/// outputs[i] belongs to labels[i] and the first label whose rule holds wins
/// (labels[0] if none does).
struct RuleSet {
  std::vector<ThresholdRule> rules;
  std::vector<int> outputs;
  std::vector<std::string> labels;
  std::vector<std::string> feature_names;
  std::vector<std::string> feature_text;

  [[nodiscard]] std::vector<int> universe() const;
  [[nodiscard]] std::string feature_name(int index) const;
  [[nodiscard]] bool sign_convention() const noexcept { return outputs.size() == 1 && labels.size() == 2; }

  friend bool operator==(const RuleSet&, const RuleSet&) = default;
};

/// Names and optional long descriptions of the input features.
struct FeatureText {
  std::vector<std::string> names;
  std::vector<std::string> descriptions;
};

struct Violation {
  enum class Kind { fan_in, non_ternary, trainable };
  ElementRef ref;
  Kind kind;
  double value = 0.0;
};

std::string_view to_string(Violation::Kind k);

struct TransparencyReport {
  bool transparent = false;
  std::vector<Violation> violations;
};

/// A network is logically transparent when every neuron has at most
/// `max_fan_in` inputs and every live weight and bias is frozen in {-1, 0, 1}.
TransparencyReport is_logically_transparent(const Network& net, int max_fan_in = 3);

/// Replaces every activation by the step function. Requires every live
/// weight to be frozen at a ternary value.
Network substitute_step(Network net);

/// Threshold rules equivalent to the step-activation version of a ternary,
/// frozen network on ±1 inputs. Rules unreachable from the outputs through
/// nonzero weights are dropped.
RuleSet verbalize(const Network& net, const FeatureText& text = {});

/// Class label for a ±1 assignment indexed by feature.
std::string evaluate_rules(const RuleSet& rules, std::span<const double> assignment);

struct Agreement {
  std::vector<int> universe;
  long total = 0;
  long agreements = 0;
  std::map<std::pair<std::string, std::string>, long> table;
  /// Disagreeing assignments over `universe`, in enumeration order.
  std::vector<std::vector<int>> disagreements;
  std::vector<std::pair<std::string, std::string>> disagreement_labels;

  /// e.g. "agree=98 r1P_r2O=19 r1O_r2P=11"
  [[nodiscard]] std::string summary() const;
};

/// Exhaustive comparison over every ±1 assignment of the union of both
/// universes (at most 20 attributes). Assignment i sets attribute b to +1
/// when bit b of i is set.
Agreement compare_rulesets(const RuleSet& r1, const RuleSet& r2);

/// Human-readable description in "at least k of the following" form.
std::string describe(const RuleSet& rules);

// Election task fixtures. Feature indices are 0-based, so question q4 is
// feature 3.
FeatureText election_features();
std::pair<RuleSet, RuleSet> election_algorithms();
/// The single-neuron election network: +1 on q3, q4, q6, q9, -1 on q8,
/// bias +1, step activation; a positive output means the power party wins.
Network election_single_neuron();

}  // namespace nnprune

#endif  // NNPRUNE_TRANSPARENCY_HPP
