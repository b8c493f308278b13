#include "nnprune/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace nnprune {

namespace {

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

Dataset Dataset::classification(Matrix inputs, std::vector<std::string> labels,
                                std::vector<std::string> feature_names) {
  if (static_cast<Index>(labels.size()) != inputs.cols())
    throw Error(ErrorKind::input_shape, "one label per sample required");
  Dataset d;
  if (feature_names.empty()) {
    for (Index k = 0; k < inputs.rows(); ++k) feature_names.push_back("x" + std::to_string(k + 1));
  }
  d.feature_names = std::move(feature_names);
  d.inputs = std::move(inputs);
  for (const auto& l : labels) {
    if (std::find(d.class_names.begin(), d.class_names.end(), l) == d.class_names.end())
      d.class_names.push_back(l);
  }
  d.labels = std::move(labels);
  return d;
}

Dataset Dataset::regression(Matrix inputs, Matrix targets) {
  if (targets.cols() != inputs.cols())
    throw Error(ErrorKind::input_shape, "one target column per sample required");
  Dataset d;
  for (Index k = 0; k < inputs.rows(); ++k) d.feature_names.push_back("x" + std::to_string(k + 1));
  d.inputs = std::move(inputs);
  d.targets = std::move(targets);
  return d;
}

Matrix target_matrix(const Network& net, const Dataset& data) {
  if (data.size() == 0) throw Error(ErrorKind::empty_dataset, "dataset has no samples");
  if (data.dim() != net.input_dim())
    throw Error(ErrorKind::input_shape, "dataset width does not match the network input dimension");
  if (!data.is_classification()) {
    if (data.targets.rows() != net.output_count())
      throw Error(ErrorKind::input_shape, "target rows do not match the network outputs");
    return data.targets;
  }
  const auto& names = net.output_labels();
  const bool sign_rule = net.output_count() == 1 && names.size() == 2;
  Matrix t = Matrix::Constant(net.output_count(), data.size(), -1.0);
  for (Index j = 0; j < data.size(); ++j) {
    const auto& label = data.labels[static_cast<std::size_t>(j)];
    auto it = std::find(names.begin(), names.end(), label);
    if (it == names.end())
      throw Error(ErrorKind::parse, "class '" + label + "' is not an output label of the network");
    const auto c = static_cast<Index>(it - names.begin());
    if (sign_rule) {
      t(0, j) = c == 0 ? 1.0 : -1.0;
    } else {
      t(c, j) = 1.0;
    }
  }
  return t;
}

Dataset parse_dataset_csv(std::istream& in) {
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) {
      header = split_csv(line);
      break;
    }
  }
  if (header.empty()) throw Error(ErrorKind::parse, "dataset is empty");
  auto class_it = std::find_if(header.begin(), header.end(),
                               [](const std::string& h) { return lower(h) == "class"; });
  if (class_it == header.end()) throw Error(ErrorKind::parse, "dataset header has no 'class' column");
  const auto class_col = static_cast<std::size_t>(class_it - header.begin());

  std::vector<std::string> features;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != class_col) features.push_back(header[c]);
  }
  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;
  std::size_t row_number = 1;
  while (std::getline(in, line)) {
    ++row_number;
    if (trim(line).empty()) continue;
    auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorKind::parse, "row " + std::to_string(row_number) + " has " +
                                        std::to_string(cells.size()) + " cells, expected " +
                                        std::to_string(header.size()));
    }
    std::vector<double> values;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == class_col) continue;
      const std::string v = lower(cells[c]);
      if (v == "1" || v == "+1" || v == "yes") {
        values.push_back(1.0);
      } else if (v == "-1" || v == "no") {
        values.push_back(-1.0);
      } else {
        throw Error(ErrorKind::parse, "row " + std::to_string(row_number) + " column '" + header[c] +
                                          "': cell '" + cells[c] + "' is not binary");
      }
    }
    if (cells[class_col].empty())
      throw Error(ErrorKind::parse, "row " + std::to_string(row_number) + " has an empty class");
    labels.push_back(cells[class_col]);
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw Error(ErrorKind::parse, "dataset has a header but no samples");

  Matrix inputs(static_cast<Index>(features.size()), static_cast<Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j) {
    for (std::size_t k = 0; k < features.size(); ++k)
      inputs(static_cast<Index>(k), static_cast<Index>(j)) = rows[j][k];
  }
  return Dataset::classification(std::move(inputs), std::move(labels), std::move(features));
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open dataset " + path.string());
  return parse_dataset_csv(in);
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  if (!data.is_classification()) throw Error(ErrorKind::precondition, "only classification data has a CSV form");
  for (const auto& name : data.feature_names) out << name << ',';
  out << "class\n";
  for (Index j = 0; j < data.size(); ++j) {
    for (Index k = 0; k < data.dim(); ++k) {
      const double v = data.inputs(k, j);
      if (v != 1.0 && v != -1.0) throw Error(ErrorKind::precondition, "feature values must be -1 or 1");
      out << (v > 0 ? "1" : "-1") << ',';
    }
    out << data.labels[static_cast<std::size_t>(j)] << '\n';
  }
}

}  // namespace nnprune
