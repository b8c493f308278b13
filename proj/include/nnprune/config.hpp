#ifndef NNPRUNE_CONFIG_HPP
#define NNPRUNE_CONFIG_HPP

#include "nnprune/pruning.hpp"
#include "nnprune/serialization.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace nnprune {

struct NetworkSpec {
  std::vector<int> layers;  // excluding the input layer
  Activation activation = Activation::tanh;
  std::vector<std::string> labels;  // empty: the dataset's class names
};

/// Everything one CLI run needs. Unset fields fall back to defaults.
struct RunConfig {
  std::filesystem::path dataset;
  std::optional<NetworkSpec> network;
  std::filesystem::path network_file;
  TrainConfig train;
  Loss loss;
  std::vector<PruneConfig> stages;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 1;
};

TrainConfig train_config_from_json(const json& doc, TrainConfig base = {});
Loss loss_from_json(const json& doc, Loss base = {});
/// A stage inherits `retrain` and `loss` unless it overrides them.
PruneConfig stage_from_json(const json& doc, const TrainConfig& retrain, const Loss& loss);
RunConfig run_config_from_json(const json& doc);
RunConfig load_run_config(const std::filesystem::path& path);

/// Fully connected network with seeded uniform weights.
Network build_network(int input_dim, const NetworkSpec& spec, std::uint64_t seed);

json step_record_to_json(const PruneStepRecord& rec);

}  // namespace nnprune

#endif  // NNPRUNE_CONFIG_HPP
