#include "nnprune/config.hpp"

#include <set>

namespace nnprune {

namespace {

template <typename T>
void read(const json& doc, const char* key, T& out) {
  if (!doc.contains(key)) return;
  try {
    out = doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::config, std::string("config field '") + key + "': " + e.what());
  }
}

void reject_unknown(const json& doc, std::initializer_list<const char*> known, const char* where) {
  if (!doc.is_object()) throw Error(ErrorKind::config, std::string(where) + " must be an object");
  std::set<std::string> ok(known.begin(), known.end());
  for (const auto& [key, value] : doc.items()) {
    if (!ok.count(key)) throw Error(ErrorKind::config, std::string("unknown field '") + key + "' in " + where);
  }
}

SuccessCriterion parse_success(const std::string& s) {
  if (s == "zero-classification-error") return SuccessCriterion::zero_classification_error;
  if (s == "loss-below-threshold") return SuccessCriterion::loss_below_threshold;
  throw Error(ErrorKind::config, "unknown success criterion '" + s + "'");
}

}  // namespace

TrainConfig train_config_from_json(const json& doc, TrainConfig c) {
  reject_unknown(doc, {"learning_rate", "momentum", "max_epochs", "loss_threshold", "success", "seed"}, "train");
  read(doc, "learning_rate", c.learning_rate);
  read(doc, "momentum", c.momentum);
  read(doc, "max_epochs", c.max_epochs);
  read(doc, "loss_threshold", c.loss_threshold);
  read(doc, "seed", c.seed);
  std::string success;
  read(doc, "success", success);
  if (!success.empty()) c.success = parse_success(success);
  if (!(c.learning_rate > 0)) throw Error(ErrorKind::config, "learning_rate must be positive");
  if (c.momentum < 0 || c.momentum >= 1) throw Error(ErrorKind::config, "momentum must lie in [0, 1)");
  if (c.max_epochs < 0) throw Error(ErrorKind::config, "max_epochs must be nonnegative");
  if (c.loss_threshold < 0) throw Error(ErrorKind::config, "loss_threshold must be nonnegative");
  return c;
}

Loss loss_from_json(const json& doc, Loss loss) {
  reject_unknown(doc, {"kind", "margin"}, "loss");
  std::string kind;
  read(doc, "kind", kind);
  if (kind == "mse") loss.kind = LossKind::mse;
  else if (kind == "margin") loss.kind = LossKind::margin;
  else if (!kind.empty()) throw Error(ErrorKind::config, "unknown loss '" + kind + "'");
  read(doc, "margin", loss.margin);
  return loss;
}

PruneConfig stage_from_json(const json& doc, const TrainConfig& retrain, const Loss& loss) {
  reject_unknown(doc, {"problem", "valid", "target_fan_in", "algorithm", "mode", "accumulation_epochs", "initial_m",
                       "retrain", "loss"},
                 "stage");
  PruneConfig c;
  c.retrain = retrain;
  c.loss = loss;
  std::string problem = "synapse-removal";
  read(doc, "problem", problem);
  c.problem.kind = parse_problem(problem);
  std::vector<double> valid;
  read(doc, "valid", valid);
  if (!valid.empty()) {
    c.problem.valid = ValidSet(valid);
  } else if (c.problem.kind == ProblemKind::precision_reduction) {
    c.problem.valid = ValidSet::ternary();
  }
  read(doc, "target_fan_in", c.problem.target_fan_in);
  std::string algorithm = "basic";
  read(doc, "algorithm", algorithm);
  if (algorithm == "basic") c.algorithm = PruneAlgorithm::basic;
  else if (algorithm == "accelerated") c.algorithm = PruneAlgorithm::accelerated;
  else throw Error(ErrorKind::config, "unknown algorithm '" + algorithm + "'");
  std::string mode = "max";
  read(doc, "mode", mode);
  c.mode = parse_indicator_mode(mode);
  read(doc, "accumulation_epochs", c.accumulation_epochs);
  if (c.accumulation_epochs < 1) throw Error(ErrorKind::config, "accumulation_epochs must be at least 1");
  if (doc.contains("initial_m") && !doc["initial_m"].is_null()) {
    int m = 0;
    read(doc, "initial_m", m);
    if (m < 1) throw Error(ErrorKind::config, "initial_m must be at least 1");
    c.initial_m = m;
  }
  if (doc.contains("retrain")) c.retrain = train_config_from_json(doc["retrain"], retrain);
  if (doc.contains("loss")) c.loss = loss_from_json(doc["loss"], loss);
  return c;
}

RunConfig run_config_from_json(const json& doc) {
  reject_unknown(doc, {"dataset", "network", "network_file", "train", "loss", "retrain", "stages", "output_dir", "seed"},
                 "config");
  RunConfig rc;
  std::string path;
  read(doc, "dataset", path);
  rc.dataset = path;
  path.clear();
  read(doc, "network_file", path);
  rc.network_file = path;
  path.clear();
  read(doc, "output_dir", path);
  if (!path.empty()) rc.output_dir = path;
  read(doc, "seed", rc.seed);
  if (doc.contains("network")) {
    const json& n = doc["network"];
    reject_unknown(n, {"layers", "activation", "labels"}, "network");
    NetworkSpec spec;
    read(n, "layers", spec.layers);
    std::string act = "tanh";
    read(n, "activation", act);
    spec.activation = parse_activation(act);
    read(n, "labels", spec.labels);
    if (spec.layers.empty()) throw Error(ErrorKind::config, "network.layers must list at least the output layer");
    for (int s : spec.layers) {
      if (s < 1) throw Error(ErrorKind::config, "layer sizes must be positive");
    }
    rc.network = spec;
  }
  rc.train.seed = rc.seed;
  if (doc.contains("train")) rc.train = train_config_from_json(doc["train"], rc.train);
  if (doc.contains("loss")) rc.loss = loss_from_json(doc["loss"]);
  TrainConfig retrain = rc.train;
  if (doc.contains("retrain")) retrain = train_config_from_json(doc["retrain"], rc.train);
  if (doc.contains("stages")) {
    if (!doc["stages"].is_array()) throw Error(ErrorKind::config, "stages must be an array");
    for (const auto& s : doc["stages"]) rc.stages.push_back(stage_from_json(s, retrain, rc.loss));
  }
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  try {
    return run_config_from_json(read_json(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::parse) throw Error(ErrorKind::config, e.what());
    throw;
  }
}

Network build_network(int input_dim, const NetworkSpec& spec, std::uint64_t seed) {
  if (input_dim < 1) throw Error(ErrorKind::config, "input dimension must be positive");
  for (int s : spec.layers) {
    if (s < 1) throw Error(ErrorKind::config, "layer sizes must be positive");
  }
  Network net(input_dim, spec.layers, spec.activation, spec.labels);
  net.randomize(seed);
  return net;
}

json step_record_to_json(const PruneStepRecord& rec) {
  json refs = json::array();
  for (const auto& r : rec.refs) refs.push_back(r.str());
  json cascade = json::array();
  for (const auto& r : rec.cascade) cascade.push_back(r.str());
  json line = {{"step", rec.step},
               {"m", rec.m},
               {"staleness", rec.staleness},
               {"refs", refs},
               {"cascade", cascade},
               {"accepted", rec.accepted},
               {"loss", rec.loss_after},
               {"epochs_used", rec.retrain.epochs_used},
               {"saved_digest", rec.saved_digest}};
  if (rec.restored_digest) line["restored_digest"] = *rec.restored_digest;
  return line;
}

}  // namespace nnprune
