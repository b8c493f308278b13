#ifndef NNPRUNE_TASKS_HPP
#define NNPRUNE_TASKS_HPP

#include "nnprune/dataset.hpp"
#include "nnprune/pruning.hpp"

#include <vector>

namespace nnprune {

/// The four XOR patterns on ±1 inputs; class "T" when the inputs differ.
Dataset xor_task();

/// All 256 ±1 assignments of eight features x0..x7. The class is "O" when
/// maj(x0,x1,x2) or maj(x2,x3,x4) holds, "P" otherwise, so x5..x7 carry no
/// information.
Dataset majority_task();
inline constexpr int majority_task_irrelevant[] = {5, 6, 7};

/// Training settings that converge on both tasks with the summed loss.
TrainConfig toy_train_config();

/// uniform(3) -> synapse removal -> ternary precision reduction.
std::vector<PruneConfig> transparency_stages(const TrainConfig& retrain);

}  // namespace nnprune

#endif  // NNPRUNE_TASKS_HPP
