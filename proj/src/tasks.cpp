#include "nnprune/tasks.hpp"

namespace nnprune {

Dataset xor_task() {
  Matrix x(2, 4);
  x << -1, -1, 1, 1,
       -1, 1, -1, 1;
  return Dataset::classification(x, {"F", "T", "T", "F"}, {"a", "b"});
}

Dataset majority_task() {
  Matrix x(8, 256);
  std::vector<std::string> labels;
  std::vector<std::string> names;
  for (int b = 0; b < 8; ++b) names.push_back("x" + std::to_string(b));
  for (int i = 0; i < 256; ++i) {
    for (int b = 0; b < 8; ++b) x(b, i) = (i >> b) & 1 ? 1.0 : -1.0;
    auto maj = [&](int a, int b, int c) { return x(a, i) + x(b, i) + x(c, i) > 0; };
    labels.push_back(maj(0, 1, 2) || maj(2, 3, 4) ? "O" : "P");
  }
  return Dataset::classification(x, labels, names);
}

TrainConfig toy_train_config() {
  TrainConfig c;
  c.learning_rate = 0.003;
  c.momentum = 0.9;
  c.max_epochs = 5000;
  return c;
}

std::vector<PruneConfig> transparency_stages(const TrainConfig& retrain) {
  std::vector<PruneConfig> stages(3);
  stages[0].problem = PruningProblem::uniform_simplification(3);
  stages[1].problem = PruningProblem::synapse_removal();
  stages[2].problem = PruningProblem::precision_reduction(ValidSet::ternary());
  for (auto& s : stages) s.retrain = retrain;
  return stages;
}

}  // namespace nnprune
