#include "nnprune/transparency.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace nnprune {

namespace {

bool is_ternary(double w) { return w == -1.0 || w == 0.0 || w == 1.0; }

std::vector<Violation> weight_violations(const Network& net) {
  std::vector<Violation> out;
  for (const auto& ref : net.live_weights()) {
    const double w = net.weight(ref);
    if (net.is_trainable(ref)) out.push_back({ref, Violation::Kind::trainable, w});
    if (!is_ternary(w)) out.push_back({ref, Violation::Kind::non_ternary, w});
  }
  return out;
}

[[noreturn]] void throw_not_ternary(const std::vector<Violation>& v) {
  std::string msg = "network is not ternary-frozen:";
  for (std::size_t i = 0; i < v.size() && i < 8; ++i) msg += " " + v[i].ref.str() + "(" + std::string(to_string(v[i].kind)) + ")";
  if (v.size() > 8) msg += " ...";
  throw Error(ErrorKind::not_ternary, msg);
}

std::string count_word(int n) {
  static const char* words[] = {"zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten"};
  if (n >= 0 && n <= 10) return words[n];
  return std::to_string(n);
}

}  // namespace

std::string_view to_string(Violation::Kind k) {
  switch (k) {
    case Violation::Kind::fan_in: return "fan_in";
    case Violation::Kind::non_ternary: return "non_ternary";
    case Violation::Kind::trainable: return "trainable";
  }
  return "unknown";
}

std::vector<int> RuleSet::universe() const {
  std::set<int> u;
  for (const auto& rule : rules) {
    for (const auto& s : rule.statements) {
      if (s.source == Statement::Source::feature) u.insert(s.index);
    }
  }
  return {u.begin(), u.end()};
}

std::string RuleSet::feature_name(int index) const {
  if (index >= 0 && static_cast<std::size_t>(index) < feature_names.size())
    return feature_names[static_cast<std::size_t>(index)];
  return "x" + std::to_string(index + 1);
}

TransparencyReport is_logically_transparent(const Network& net, int max_fan_in) {
  TransparencyReport report;
  for (int l = 0; l < net.depth(); ++l) {
    for (Index r = 0; r < net.layer(l).size(); ++r) {
      if (!net.layer(l).neuron_live(r)) continue;
      const int fan = net.fan_in(l, static_cast<int>(r));
      if (fan > max_fan_in) report.violations.push_back({ElementRef::unit(l, static_cast<int>(r)), Violation::Kind::fan_in, static_cast<double>(fan)});
    }
  }
  auto weights = weight_violations(net);
  report.violations.insert(report.violations.end(), weights.begin(), weights.end());
  report.transparent = report.violations.empty();
  return report;
}

Network substitute_step(Network net) {
  if (auto v = weight_violations(net); !v.empty()) throw_not_ternary(v);
  net.set_activation(Activation::step);
  return net;
}

RuleSet verbalize(const Network& net, const FeatureText& text) {
  if (auto v = weight_violations(net); !v.empty()) throw_not_ternary(v);

  // neurons that influence an output through nonzero weights
  std::vector<std::vector<bool>> needed(static_cast<std::size_t>(net.depth()));
  for (int l = 0; l < net.depth(); ++l) needed[static_cast<std::size_t>(l)].assign(static_cast<std::size_t>(net.layer(l).size()), false);
  std::fill(needed.back().begin(), needed.back().end(), true);
  for (int l = net.depth() - 1; l > 0; --l) {
    const Layer& L = net.layer(l);
    for (Index r = 0; r < L.size(); ++r) {
      if (!needed[static_cast<std::size_t>(l)][static_cast<std::size_t>(r)] || !L.neuron_live(r)) continue;
      for (Index s = 0; s < L.sources(); ++s) {
        if (L.weight_live(r, s) && L.weights(r, s) != 0.0) needed[static_cast<std::size_t>(l - 1)][static_cast<std::size_t>(s)] = true;
      }
    }
  }

  RuleSet rs;
  rs.labels = net.output_labels();
  if (text.names.empty()) {
    for (int k = 0; k < net.input_dim(); ++k) rs.feature_names.push_back("x" + std::to_string(k + 1));
  } else {
    rs.feature_names = text.names;
  }
  rs.feature_text = text.descriptions;

  std::vector<int> previous_ids;
  for (int l = 0; l < net.depth(); ++l) {
    const Layer& L = net.layer(l);
    const bool output = l == net.output_layer();
    std::vector<int> ids(static_cast<std::size_t>(L.size()), -1);
    for (Index r = 0; r < L.size(); ++r) {
      if (!L.neuron_live(r) || !needed[static_cast<std::size_t>(l)][static_cast<std::size_t>(r)]) continue;
      ThresholdRule rule;
      if (!output) {
        rule.name = "layer-" + std::to_string(l) + "-neuron-" + std::to_string(r);
      } else if (net.output_count() == 1 && rs.labels.size() == 2) {
        rule.name = "diagnosis";
      } else {
        rule.name = "diagnosis-" + rs.labels[static_cast<std::size_t>(r)];
      }
      for (Index s = 0; s < L.sources(); ++s) {
        if (!L.weight_live(r, s) || L.weights(r, s) == 0.0) continue;
        Statement st;
        st.affirmed = L.weights(r, s) > 0.0;
        if (l == 0) {
          st.source = Statement::Source::feature;
          st.index = static_cast<int>(s);
        } else {
          st.source = Statement::Source::rule;
          st.index = previous_ids[static_cast<std::size_t>(s)];
        }
        rule.statements.push_back(st);
      }
      // t satisfied statements give sigma = w0 + 2t - m, so sigma >= 0 iff t >= (m - w0) / 2
      const auto m = static_cast<double>(rule.statements.size());
      rule.k = static_cast<int>(std::ceil((m - L.bias(r)) / 2.0));
      ids[static_cast<std::size_t>(r)] = static_cast<int>(rs.rules.size());
      rs.rules.push_back(std::move(rule));
      if (output) rs.outputs.push_back(ids[static_cast<std::size_t>(r)]);
    }
    previous_ids = std::move(ids);
  }
  return rs;
}

std::string evaluate_rules(const RuleSet& rules, std::span<const double> assignment) {
  std::vector<char> holds(rules.rules.size(), 0);
  for (std::size_t i = 0; i < rules.rules.size(); ++i) {
    const auto& rule = rules.rules[i];
    int satisfied = 0;
    for (const auto& s : rule.statements) {
      bool value = false;
      if (s.source == Statement::Source::feature) {
        if (s.index < 0 || static_cast<std::size_t>(s.index) >= assignment.size())
          throw Error(ErrorKind::missing_attribute, "assignment does not cover " + rules.feature_name(s.index));
        const double x = assignment[static_cast<std::size_t>(s.index)];
        if (x != 1.0 && x != -1.0)
          throw Error(ErrorKind::parse, "attribute " + rules.feature_name(s.index) + " is not ±1");
        value = x > 0.0;
      } else {
        if (s.index < 0 || static_cast<std::size_t>(s.index) >= i)
          throw Error(ErrorKind::parse, "rule " + rule.name + " references a later rule");
        value = holds[static_cast<std::size_t>(s.index)] != 0;
      }
      if (value == s.affirmed) ++satisfied;
    }
    holds[i] = satisfied >= rule.k ? 1 : 0;
  }
  if (rules.outputs.empty() || rules.labels.empty()) throw Error(ErrorKind::parse, "rule set has no outputs");
  if (rules.sign_convention()) return rules.labels[holds[static_cast<std::size_t>(rules.outputs[0])] ? 0 : 1];
  for (std::size_t c = 0; c < rules.outputs.size(); ++c) {
    if (holds[static_cast<std::size_t>(rules.outputs[c])]) return rules.labels[c];
  }
  return rules.labels.front();
}

std::string Agreement::summary() const {
  std::vector<std::pair<std::pair<std::string, std::string>, long>> off;
  for (const auto& [key, n] : table) {
    if (key.first != key.second) off.emplace_back(key, n);
  }
  std::stable_sort(off.begin(), off.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::string s = "agree=" + std::to_string(agreements);
  for (const auto& [key, n] : off) s += " r1" + key.first + "_r2" + key.second + "=" + std::to_string(n);
  return s;
}

Agreement compare_rulesets(const RuleSet& r1, const RuleSet& r2) {
  std::set<int> u;
  for (int i : r1.universe()) u.insert(i);
  for (int i : r2.universe()) u.insert(i);
  Agreement result;
  result.universe.assign(u.begin(), u.end());
  if (result.universe.size() > 20)
    throw Error(ErrorKind::oversize_universe, "union universe has " + std::to_string(result.universe.size()) + " attributes (limit 20)");
  for (const auto& a : r1.labels) {
    for (const auto& b : r2.labels) result.table[{a, b}] = 0;
  }
  const int width = result.universe.empty() ? 0 : result.universe.back() + 1;
  std::vector<double> assignment(static_cast<std::size_t>(width), -1.0);
  const long n = 1L << result.universe.size();
  for (long i = 0; i < n; ++i) {
    for (std::size_t b = 0; b < result.universe.size(); ++b)
      assignment[static_cast<std::size_t>(result.universe[b])] = ((i >> b) & 1) ? 1.0 : -1.0;
    std::string a = evaluate_rules(r1, assignment);
    std::string b = evaluate_rules(r2, assignment);
    ++result.table[{a, b}];
    if (a == b) {
      ++result.agreements;
    } else {
      std::vector<int> row;
      for (int f : result.universe) row.push_back(static_cast<int>(assignment[static_cast<std::size_t>(f)]));
      result.disagreements.push_back(std::move(row));
      result.disagreement_labels.emplace_back(std::move(a), std::move(b));
    }
  }
  result.total = n;
  return result;
}

std::string describe(const RuleSet& rs) {
  std::ostringstream out;
  auto statement_text = [&](const Statement& s) {
    if (s.source == Statement::Source::rule) {
      return "rule " + rs.rules[static_cast<std::size_t>(s.index)].name + (s.affirmed ? " holds" : " does not hold");
    }
    std::string t = rs.feature_name(s.index) + (s.affirmed ? " is yes" : " is no");
    if (static_cast<std::size_t>(s.index) < rs.feature_text.size() && !rs.feature_text[static_cast<std::size_t>(s.index)].empty())
      t += " (" + rs.feature_text[static_cast<std::size_t>(s.index)] + ")";
    return t;
  };
  int step = 1;
  for (const auto& rule : rs.rules) {
    const int m = static_cast<int>(rule.statements.size());
    out << step++ << ". Rule " << rule.name;
    if (rule.k <= 0) {
      out << " always holds.\n";
      continue;
    }
    if (rule.k > m) {
      out << " never holds.\n";
      continue;
    }
    if (m == 1) {
      out << " holds if " << statement_text(rule.statements[0]) << ".\n";
      continue;
    }
    out << " holds if at least " << count_word(rule.k) << " of the following " << count_word(m)
        << " statements are observed:\n";
    for (const auto& s : rule.statements) out << "   - " << statement_text(s) << "\n";
  }
  if (rs.sign_convention()) {
    out << step << ". Class " << rs.labels[0] << " if rule " << rs.rules[static_cast<std::size_t>(rs.outputs[0])].name
        << " holds, otherwise class " << rs.labels[1] << ".\n";
  } else {
    out << step << ". The class is the first of";
    for (std::size_t c = 0; c < rs.outputs.size(); ++c)
      out << (c ? "," : "") << " " << rs.labels[c] << " (rule " << rs.rules[static_cast<std::size_t>(rs.outputs[c])].name << ")";
    out << " whose rule holds; class " << rs.labels.front() << " if none holds.\n";
  }
  return out.str();
}

FeatureText election_features() {
  FeatureText t;
  t.descriptions = {
      "Has the incumbent party been in office more than a single term?",
      "Did the incumbent party gain more than 50% of the vote cast in the previous election?",
      "Was there major third party activity during the election year?",
      "Was there a serious contest for the nomination of the incumbent party candidate?",
      "Was the incumbent party candidate the sitting president?",
      "Was the election year a time of recession or depression?",
      "Was there a growth in the gross national product of more than 2.1% in the year of the election?",
      "Did the incumbent president initiate major changes in national policy?",
      "Was there major social unrest in the nation during the incumbent administration?",
      "Was the incumbent administration tainted by major scandal?",
      "Is the incumbent party candidate charismatic or a national hero?",
      "Is the challenging party candidate charismatic or a national hero?",
  };
  for (int q = 1; q <= 12; ++q) t.names.push_back("q" + std::to_string(q));
  return t;
}

namespace {

Statement question(int q, bool affirmed) { return {Statement::Source::feature, q - 1, affirmed}; }
Statement rule_ref(int i) { return {Statement::Source::rule, i, true}; }

RuleSet election_ruleset(ThresholdRule first, ThresholdRule second) {
  const FeatureText text = election_features();
  RuleSet rs;
  rs.feature_names = text.names;
  rs.feature_text = text.descriptions;
  rs.labels = {"O", "P"};
  rs.rules.push_back(std::move(first));
  rs.rules.push_back(std::move(second));
  rs.rules.push_back({"diagnosis", {rule_ref(0), rule_ref(1)}, 1});
  rs.outputs = {2};
  return rs;
}

}  // namespace

std::pair<RuleSet, RuleSet> election_algorithms() {
  RuleSet a1 = election_ruleset(
      {"inadequate-governance", {question(4, true), question(6, true), question(8, false)}, 2},
      {"political-instability", {question(3, true), question(4, true), question(9, true)}, 2});
  RuleSet a2 = election_ruleset(
      {"instability-or-stagnation", {question(3, true), question(4, true), question(8, false)}, 2},
      {"instability", {question(5, false), question(7, false), question(9, true)}, 2});
  return {std::move(a1), std::move(a2)};
}

Network election_single_neuron() {
  Network net(12, {1}, Activation::step, {"P", "O"});
  for (int q = 1; q <= 12; ++q) {
    const auto ref = ElementRef::synapse(0, 0, q - 1);
    if (q == 3 || q == 4 || q == 6 || q == 9) {
      net.set_weight(ref, 1.0, true);
    } else if (q == 8) {
      net.set_weight(ref, -1.0, true);
    } else {
      net.remove_element(ref);
    }
  }
  net.set_weight(ElementRef::bias(0, 0), 1.0, true);
  return net;
}

}  // namespace nnprune
