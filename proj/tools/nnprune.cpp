// Command-line front end: train, prune, indicators, verbalize, compare, eval.
#include "nnprune/config.hpp"
#include "nnprune/tasks.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

using namespace nnprune;
namespace fs = std::filesystem;

namespace {

constexpr int exit_usage = 1;
constexpr int exit_data = 2;
constexpr int exit_convergence = 3;

struct Failure {
  int code;
};

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return exit_usage;
    case ErrorKind::divergence:
    case ErrorKind::precondition: return exit_convergence;
    default: return exit_data;
  }
}

void print_error(std::string_view kind, std::string msg) {
  for (char& c : msg) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  std::cerr << "error: kind=" << kind << " msg=" << msg << "\n";
}

[[noreturn]] void fail(std::string_view kind, std::string msg, int code) {
  print_error(kind, std::move(msg));
  throw Failure{code};
}

json outcome_json(const TrainOutcome& o) {
  json j = {{"converged", o.converged}, {"epochs_used", o.epochs_used}, {"final_total_loss", o.final_total_loss}};
  if (o.final_accuracy) j["final_accuracy"] = *o.final_accuracy;
  return j;
}

FeatureText load_features(const fs::path& path) {
  const json doc = read_json(path);
  FeatureText t;
  t.names = doc.at("names").get<std::vector<std::string>>();
  if (doc.contains("descriptions")) t.descriptions = doc.at("descriptions").get<std::vector<std::string>>();
  return t;
}

json features_json(const FeatureText& t) { return {{"names", t.names}, {"descriptions", t.descriptions}}; }

// Values shared by several subcommands; empty or negative means "from config".
struct Options {
  std::string config;
  std::string data;
  std::string network;
  std::string out;
  std::vector<int> layers;
  std::string activation;
  std::vector<std::string> labels;
  long long seed = -1;
  double lr = -1;
  double momentum = -1;
  int epochs = -1;
  double threshold = -1;
  std::string success;
  std::string loss;
  std::vector<std::string> stages;
  std::string algorithm;
  std::string mode;
  std::vector<double> valid;
  int accumulation = -1;
  int initial_m = -1;
  int retrain_epochs = -1;
};

RunConfig resolve(const Options& o) {
  RunConfig rc = o.config.empty() ? RunConfig{} : load_run_config(o.config);
  if (!o.data.empty()) rc.dataset = o.data;
  if (!o.network.empty()) rc.network_file = o.network;
  if (!o.out.empty()) rc.output_dir = o.out;
  if (o.seed >= 0) rc.seed = rc.train.seed = static_cast<std::uint64_t>(o.seed);
  if (!o.layers.empty() || !o.activation.empty() || !o.labels.empty()) {
    NetworkSpec spec = rc.network.value_or(NetworkSpec{});
    if (!o.layers.empty()) spec.layers = o.layers;
    if (!o.activation.empty()) spec.activation = parse_activation(o.activation);
    if (!o.labels.empty()) spec.labels = o.labels;
    rc.network = spec;
  }
  json train = json::object();
  if (o.lr >= 0) train["learning_rate"] = o.lr;
  if (o.momentum >= 0) train["momentum"] = o.momentum;
  if (o.epochs >= 0) train["max_epochs"] = o.epochs;
  if (o.threshold >= 0) train["loss_threshold"] = o.threshold;
  if (!o.success.empty()) train["success"] = o.success;
  rc.train = train_config_from_json(train, rc.train);
  if (!o.loss.empty()) rc.loss = loss_from_json({{"kind", o.loss}}, rc.loss);

  if (!o.stages.empty()) {
    TrainConfig retrain = rc.train;
    if (o.retrain_epochs >= 0) retrain.max_epochs = o.retrain_epochs;
    rc.stages.clear();
    for (const auto& name : o.stages) rc.stages.push_back(stage_from_json({{"problem", name}}, retrain, rc.loss));
  }
  for (auto& s : rc.stages) {
    if (!o.algorithm.empty()) s.algorithm = stage_from_json({{"algorithm", o.algorithm}}, s.retrain, s.loss).algorithm;
    if (!o.mode.empty()) s.mode = parse_indicator_mode(o.mode);
    if (!o.valid.empty() && s.problem.kind == ProblemKind::precision_reduction) s.problem.valid = ValidSet(o.valid);
    if (o.accumulation > 0) s.accumulation_epochs = o.accumulation;
    if (o.initial_m > 0) s.initial_m = o.initial_m;
    if (o.retrain_epochs >= 0 && o.stages.empty()) s.retrain.max_epochs = o.retrain_epochs;
  }
  return rc;
}

Dataset dataset_of(const RunConfig& rc) {
  if (rc.dataset.empty()) fail("config", "no dataset given (--data or \"dataset\" in the config)", exit_usage);
  return load_dataset(rc.dataset);
}

Network network_of(const RunConfig& rc) {
  if (rc.network_file.empty()) fail("config", "no network given (--network or \"network_file\")", exit_usage);
  return load_network(rc.network_file);
}

void check_width(const Network& net, const Dataset& data) {
  if (net.input_dim() != data.dim())
    fail("input_shape", "network expects " + std::to_string(net.input_dim()) + " features, dataset has " +
                            std::to_string(data.dim()), exit_data);
}

int run_train(const Options& o) {
  RunConfig rc = resolve(o);
  const Dataset data = dataset_of(rc);
  Network net;
  if (!rc.network_file.empty()) {
    net = load_network(rc.network_file);
  } else {
    if (!rc.network) fail("config", "no network spec (--layers or \"network\")", exit_usage);
    NetworkSpec spec = *rc.network;
    if (spec.labels.empty()) spec.labels = data.class_names;
    net = build_network(static_cast<int>(data.dim()), spec, rc.seed);
  }
  check_width(net, data);
  const TrainOutcome out = train_until(net, data, rc.loss, rc.train);
  save_network(net, rc.output_dir / "network.json");
  std::cout << outcome_json(out).dump() << "\n";
  return out.converged ? 0 : exit_convergence;
}

int run_prune(const Options& o) {
  RunConfig rc = resolve(o);
  const Dataset data = dataset_of(rc);
  Network net = network_of(rc);
  check_width(net, data);
  if (rc.stages.empty()) fail("config", "no pruning stages (--stage or \"stages\")", exit_usage);

  fs::create_directories(rc.output_dir);
  std::ofstream log(rc.output_dir / "prune_log.jsonl");
  int stage_index = 0;
  for (auto& s : rc.stages) {
    s.log_sink = [&log, &stage_index](const PruneStepRecord& rec) {
      json line = step_record_to_json(rec);
      line["stage"] = stage_index;
      log << line.dump() << "\n";
      log.flush();
    };
  }
  PipelineResult result;
  for (const auto& s : rc.stages) {
    const std::vector<PruneConfig> one{s};
    auto r = run_pipeline(net, data, one);
    if (r.error) {
      save_network(net, rc.output_dir / "network.json");
      fail("precondition", *r.error, exit_convergence);
    }
    net = r.network;
    result.stages.push_back(std::move(r.stages.front()));
    ++stage_index;
  }
  save_network(net, rc.output_dir / "network.json");
  json summary = json::array();
  for (std::size_t i = 0; i < result.stages.size(); ++i) {
    const auto& r = result.stages[i];
    int accepted = 0;
    for (const auto& st : r.steps) accepted += st.accepted;
    summary.push_back({{"stage", i},
                       {"problem", to_string(rc.stages[i].problem.kind)},
                       {"steps", r.steps.size()},
                       {"accepted", accepted},
                       {"minimality_certificate", r.minimality_certificate},
                       {"termination", r.termination == Termination::pool_exhausted ? "pool-exhausted" : "single-element-failed"}});
  }
  const auto report = is_logically_transparent(net);
  std::cout << json{{"stages", summary},
                    {"accuracy", evaluate_classification(net, data).accuracy},
                    {"logically_transparent", report.transparent}}
                   .dump()
            << "\n";
  return 0;
}

int run_indicators(const Options& o, const std::string& element_class) {
  RunConfig rc = resolve(o);
  const Dataset data = dataset_of(rc);
  Network net = network_of(rc);
  check_width(net, data);
  const auto cls = parse_element_class(element_class);
  const auto mode = o.mode.empty() ? IndicatorMode::max : parse_indicator_mode(o.mode);
  const ValidSet valid = o.valid.empty() ? ValidSet::removal() : ValidSet(o.valid);
  const int epochs = o.accumulation > 0 ? o.accumulation : 10;
  auto ledger = accumulate_indicators(net, data, rc.loss, rc.train, cls, mode, epochs);
  std::ostringstream csv;
  write_indicators_csv(csv, ledger.finalize(net, valid), cls, mode);
  write_text(rc.output_dir / "indicators.csv", csv.str());
  std::cout << csv.str();
  return 0;
}

int run_verbalize(const Options& o, const std::string& features) {
  RunConfig rc = resolve(o);
  const Network net = network_of(rc);
  const auto report = is_logically_transparent(net);
  std::string refused;
  for (const auto& v : report.violations) {
    if (v.kind == Violation::Kind::fan_in) continue;
    if (!refused.empty()) refused += ";";
    std::ostringstream value;
    value << v.value;
    refused += v.ref.str() + "=" + std::string(to_string(v.kind)) + ":" + value.str();
  }
  if (!refused.empty()) fail("not_ternary", "violations=" + refused, exit_data);
  FeatureText text;
  if (!features.empty()) text = load_features(features);
  const RuleSet rs = verbalize(net, text);
  const std::string prose = describe(rs);
  write_text(rc.output_dir / "rules.txt", prose);
  save_ruleset(rs, rc.output_dir / "rules.json");
  std::cout << prose;
  return 0;
}

int run_compare(const Options& o, const std::string& first, const std::string& second) {
  const RuleSet r1 = load_ruleset(first);
  const RuleSet r2 = load_ruleset(second);
  const Agreement a = compare_rulesets(r1, r2);
  const fs::path out = o.out.empty() ? fs::path("out") : fs::path(o.out);
  std::ostringstream csv;
  write_disagreements_csv(csv, a, r1);
  write_text(out / "disagreements.csv", csv.str());
  std::cout << a.summary() << "\n";
  return 0;
}

int run_eval(const Options& o, const std::string& rules) {
  RunConfig rc = resolve(o);
  const Dataset data = dataset_of(rc);
  std::vector<std::string> predicted;
  if (!rules.empty()) {
    const RuleSet rs = load_ruleset(rules);
    for (Index j = 0; j < data.size(); ++j) {
      std::vector<double> x(data.inputs.col(j).data(), data.inputs.col(j).data() + data.dim());
      predicted.push_back(evaluate_rules(rs, x));
    }
  } else {
    const Network net = network_of(rc);
    check_width(net, data);
    for (int c : evaluate_classification(net, data).predicted) predicted.push_back(net.output_labels()[static_cast<std::size_t>(c)]);
  }
  int correct = 0;
  std::ostringstream rows;
  for (std::size_t j = 0; j < predicted.size(); ++j) {
    correct += predicted[j] == data.labels[j];
    rows << j << "," << data.labels[j] << "," << predicted[j] << "\n";
  }
  const double accuracy = data.size() ? static_cast<double>(correct) / static_cast<double>(data.size()) : 0.0;
  std::cout << "accuracy=" << accuracy << "\n" << "sample,label,predicted\n" << rows.str();
  return 0;
}

int run_fixtures(const Options& o) {
  const fs::path out = o.out.empty() ? fs::path("data") : fs::path(o.out);
  auto [a1, a2] = election_algorithms();
  save_ruleset(a1, out / "a1.json");
  save_ruleset(a2, out / "a2.json");
  write_text(out / "election_features.json", features_json(election_features()).dump(1) + "\n");
  save_network(election_single_neuron(), out / "election_single_neuron.json");
  std::ostringstream x, m;
  write_dataset_csv(x, xor_task());
  write_dataset_csv(m, majority_task());
  write_text(out / "xor.csv", x.str());
  write_text(out / "majority.csv", m.str());

  // every assignment of A1's attributes, labeled by A1
  const auto universe = a1.universe();
  const auto n = static_cast<Index>(1) << universe.size();
  Matrix cases = Matrix::Constant(12, n, -1.0);
  std::vector<std::string> labels;
  for (Index i = 0; i < n; ++i) {
    for (std::size_t b = 0; b < universe.size(); ++b) cases(universe[b], i) = (i >> b) & 1 ? 1.0 : -1.0;
    labels.push_back(evaluate_rules(a1, std::vector<double>(cases.col(i).data(), cases.col(i).data() + 12)));
  }
  std::ostringstream c;
  write_dataset_csv(c, Dataset::classification(cases, labels, election_features().names));
  write_text(out / "a1_cases.csv", c.str());
  std::cout << "wrote fixtures to " << out.string() << "\n";
  return 0;
}

void common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "JSON run configuration; flags override it");
  cmd->add_option("--data", o.data, "dataset CSV");
  cmd->add_option("--network", o.network, "network JSON file");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--lr", o.lr, "learning rate");
  cmd->add_option("--momentum", o.momentum, "momentum in [0, 1)");
  cmd->add_option("--epochs", o.epochs, "training epoch budget");
  cmd->add_option("--threshold", o.threshold, "loss threshold");
  cmd->add_option("--success", o.success, "zero-classification-error or loss-below-threshold");
  cmd->add_option("--loss", o.loss, "mse or margin");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Train, prune and verbalize small feed-forward networks"};
  app.require_subcommand(1);
  Options o;
  std::string element_class = "weight", features, rules, first, second;

  auto* train = app.add_subcommand("train", "train a network and write network.json");
  common(train, o);
  train->add_option("--layers", o.layers, "layer sizes after the inputs, e.g. 10,10,2")->delimiter(',');
  train->add_option("--activation", o.activation, "tanh, sigmoid or step");
  train->add_option("--labels", o.labels, "output labels")->delimiter(',');

  auto* prune = app.add_subcommand("prune", "run pruning stages; writes network.json and prune_log.jsonl");
  common(prune, o);
  prune->add_option("--stage", o.stages, "pruning problem, repeatable and run in order");
  prune->add_option("--algorithm", o.algorithm, "basic or accelerated");
  prune->add_option("--mode", o.mode, "max or avg");
  prune->add_option("--valid", o.valid, "valid set for precision reduction")->delimiter(',');
  prune->add_option("--accumulation-epochs", o.accumulation, "indicator accumulation epochs");
  prune->add_option("--initial-m", o.initial_m, "first batch size of the accelerated loop");
  prune->add_option("--retrain-epochs", o.retrain_epochs, "retraining budget per attempt");

  auto* ind = app.add_subcommand("indicators", "write indicators.csv");
  common(ind, o);
  ind->add_option("--class", element_class, "input, weight or neuron");
  ind->add_option("--mode", o.mode, "max or avg");
  ind->add_option("--valid", o.valid, "valid set for weight displacement")->delimiter(',');
  ind->add_option("--accumulation-epochs", o.accumulation, "epochs to accumulate");

  auto* verb = app.add_subcommand("verbalize", "write rules.txt and rules.json");
  common(verb, o);
  verb->add_option("--features", features, "JSON with feature names and descriptions");

  auto* cmp = app.add_subcommand("compare", "compare two rule sets; writes disagreements.csv");
  cmp->add_option("first", first, "first ruleset JSON")->required();
  cmp->add_option("second", second, "second ruleset JSON")->required();
  cmp->add_option("--out", o.out, "output directory");

  auto* eval = app.add_subcommand("eval", "accuracy and predictions of a network or ruleset");
  common(eval, o);
  eval->add_option("--rules", rules, "ruleset JSON instead of a network");

  auto* fix = app.add_subcommand("fixtures", "write the election fixture files");
  fix->add_option("--out", o.out, "output directory (default data)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    print_error("usage", e.what());
    return exit_usage;
  }

  try {
    if (train->parsed()) return run_train(o);
    if (prune->parsed()) return run_prune(o);
    if (ind->parsed()) return run_indicators(o, element_class);
    if (verb->parsed()) return run_verbalize(o, features);
    if (cmp->parsed()) return run_compare(o, first, second);
    if (eval->parsed()) return run_eval(o, rules);
    if (fix->parsed()) return run_fixtures(o);
  } catch (const Failure& f) {
    return f.code;
  } catch (const Error& e) {
    print_error(to_string(e.kind()), e.what());
    return exit_code(e.kind());
  } catch (const json::exception& e) {
    print_error("parse", e.what());
    return exit_data;
  } catch (const std::exception& e) {
    print_error("io", e.what());
    return exit_data;
  }
  return exit_usage;
}
