#ifndef NNPRUNE_DATASET_HPP
#define NNPRUNE_DATASET_HPP

#include "nnprune/network.hpp"

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

namespace nnprune {

/// Labeled samples stored one per column. Classification data carries a
/// label per sample; regression data carries an explicit target matrix.
struct Dataset {
  std::vector<std::string> feature_names;
  Matrix inputs;                        // features x samples
  std::vector<std::string> labels;      // per sample, empty for regression
  std::vector<std::string> class_names; // in order of first appearance
  Matrix targets;                       // outputs x samples, regression only

  [[nodiscard]] Index size() const noexcept { return inputs.cols(); }
  [[nodiscard]] Index dim() const noexcept { return inputs.rows(); }
  [[nodiscard]] bool is_classification() const noexcept { return !labels.empty(); }

  static Dataset classification(Matrix inputs, std::vector<std::string> labels,
                                std::vector<std::string> feature_names = {});
  static Dataset regression(Matrix inputs, Matrix targets);
};

/// ±1 target coding for the network's outputs: one +1 per sample on the
/// labeled output neuron, or the sign convention (+1 for the first label)
/// when a single output separates two classes.
Matrix target_matrix(const Network& net, const Dataset& data);

/// CSV with a header row naming the features and a `class` column. Feature
/// cells are -1, 1, yes or no.
Dataset parse_dataset_csv(std::istream& in);
Dataset load_dataset(const std::filesystem::path& path);
/// Inverse of parse_dataset_csv for classification data with ±1 features.
void write_dataset_csv(std::ostream& out, const Dataset& data);

}  // namespace nnprune

#endif  // NNPRUNE_DATASET_HPP
