#pragma once

#include "efold/core.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace efold {

/// A seed-deterministic partition of a dataset into e_max folds. fold_of[i]
/// is the fold index of instance i; every fold index occurs and fold sizes
/// differ by at most one. For stratified assignments the per-class per-fold
/// counts also differ by at most one. `warnings` lists classes with fewer
/// instances than e_max (their members simply land in distinct folds).
struct FoldAssignment {
  std::vector<int> fold_of;
  int e_max = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;

  std::vector<Eigen::Index> fold_sizes() const;
};

/// Stratified e_max-way partition for classification datasets.
///
/// Deterministic recipe, replayable from the seed alone: one Rng(seed)
/// stream shuffles each class's instance list in label order 0..C-1, then a
/// global fold rotation r = bounded(e_max) is drawn; the shuffled class
/// lists are concatenated and position j of that list goes to fold
/// (j + r) % e_max. Dealing consecutive positions round-robin keeps both the
/// per-class and the overall fold sizes within one of each other.
///
/// Throws std::invalid_argument for non-classification input, fewer
/// instances than e_max, or labels outside {0..class_count-1}.
FoldAssignment stratified_kfold(const Dataset& dataset, int e_max, std::uint64_t seed);

/// Shuffled plain e_max-way partition for regression datasets: a Fisher-
/// Yates permutation of all rows is dealt round-robin, position j of the
/// permutation going to fold j % e_max.
FoldAssignment plain_kfold(const Dataset& dataset, int e_max, std::uint64_t seed);

/// Dispatches on the dataset's task kind.
FoldAssignment make_folds(const Dataset& dataset, int e_max, std::uint64_t seed);

/// Row indices of the training and validation sides for fold e (1-based):
/// validation is every instance with fold_of == e-1, training is the rest.
/// Both sides preserve the original relative row order.
std::pair<std::vector<Eigen::Index>, std::vector<Eigen::Index>> train_validation_split(
    const Dataset& dataset, const FoldAssignment& assignment, int e);

/// Materializes the given rows of a dataset as a dense matrix and target
/// vector, in the order given.
std::pair<Matrix, Vector> gather(const Dataset& dataset,
                                 const std::vector<Eigen::Index>& rows);

}  // namespace efold
