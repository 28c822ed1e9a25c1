#include "efold/splitting.hpp"

#include "efold/rng.hpp"

#include <stdexcept>

namespace efold {

std::vector<Eigen::Index> FoldAssignment::fold_sizes() const {
  std::vector<Eigen::Index> sizes(static_cast<std::size_t>(e_max), 0);
  for (int f : fold_of) {
    ++sizes[static_cast<std::size_t>(f)];
  }
  return sizes;
}

namespace {

void require_splittable(const Dataset& dataset, int e_max) {
  if (e_max < 1) {
    throw std::invalid_argument("e_max must be positive");
  }
  if (dataset.rows() < e_max) {
    throw std::invalid_argument("insufficient instances: " +
                                std::to_string(dataset.rows()) + " rows for e_max=" +
                                std::to_string(e_max));
  }
}

}  // namespace

FoldAssignment stratified_kfold(const Dataset& dataset, int e_max, std::uint64_t seed) {
  if (!dataset.is_classification()) {
    throw std::invalid_argument("stratified_kfold requires a classification dataset");
  }
  require_splittable(dataset, e_max);
  if (dataset.class_count < 1) {
    throw std::invalid_argument("classification dataset needs class_count >= 1");
  }

  std::vector<std::vector<Eigen::Index>> by_class(
      static_cast<std::size_t>(dataset.class_count));
  for (Eigen::Index i = 0; i < dataset.rows(); ++i) {
    const int label = dataset.label(i);
    if (label < 0 || label >= dataset.class_count) {
      throw std::invalid_argument("label out of range at row " + std::to_string(i));
    }
    by_class[static_cast<std::size_t>(label)].push_back(i);
  }

  FoldAssignment assignment;
  assignment.e_max = e_max;
  assignment.seed = seed;
  assignment.fold_of.assign(static_cast<std::size_t>(dataset.rows()), 0);

  Rng rng(seed);
  for (auto& members : by_class) {
    rng.shuffle(members);
  }
  const int rotation = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(e_max)));

  Eigen::Index position = 0;
  for (int c = 0; c < dataset.class_count; ++c) {
    const auto& members = by_class[static_cast<std::size_t>(c)];
    if (static_cast<int>(members.size()) < e_max) {
      assignment.warnings.push_back(
          "class " + std::to_string(c) + " has " + std::to_string(members.size()) +
          " instances, fewer than e_max=" + std::to_string(e_max));
    }
    for (Eigen::Index row : members) {
      assignment.fold_of[static_cast<std::size_t>(row)] =
          static_cast<int>((position + rotation) % e_max);
      ++position;
    }
  }
  return assignment;
}

FoldAssignment plain_kfold(const Dataset& dataset, int e_max, std::uint64_t seed) {
  require_splittable(dataset, e_max);

  std::vector<Eigen::Index> permutation(static_cast<std::size_t>(dataset.rows()));
  for (Eigen::Index i = 0; i < dataset.rows(); ++i) {
    permutation[static_cast<std::size_t>(i)] = i;
  }
  Rng rng(seed);
  rng.shuffle(permutation);

  FoldAssignment assignment;
  assignment.e_max = e_max;
  assignment.seed = seed;
  assignment.fold_of.assign(static_cast<std::size_t>(dataset.rows()), 0);
  for (std::size_t j = 0; j < permutation.size(); ++j) {
    assignment.fold_of[static_cast<std::size_t>(permutation[j])] =
        static_cast<int>(j % static_cast<std::size_t>(e_max));
  }
  return assignment;
}

FoldAssignment make_folds(const Dataset& dataset, int e_max, std::uint64_t seed) {
  return dataset.is_classification() ? stratified_kfold(dataset, e_max, seed)
                                     : plain_kfold(dataset, e_max, seed);
}

std::pair<std::vector<Eigen::Index>, std::vector<Eigen::Index>> train_validation_split(
    const Dataset& dataset, const FoldAssignment& assignment, int e) {
  if (e < 1 || e > assignment.e_max) {
    throw std::invalid_argument("fold index e=" + std::to_string(e) +
                                " out of range [1, " + std::to_string(assignment.e_max) +
                                "]");
  }
  if (static_cast<Eigen::Index>(assignment.fold_of.size()) != dataset.rows()) {
    throw std::invalid_argument("fold assignment does not match dataset row count");
  }

  std::vector<Eigen::Index> train;
  std::vector<Eigen::Index> validation;
  train.reserve(assignment.fold_of.size());
  for (std::size_t i = 0; i < assignment.fold_of.size(); ++i) {
    if (assignment.fold_of[i] == e - 1) {
      validation.push_back(static_cast<Eigen::Index>(i));
    } else {
      train.push_back(static_cast<Eigen::Index>(i));
    }
  }
  return {std::move(train), std::move(validation)};
}

std::pair<Matrix, Vector> gather(const Dataset& dataset,
                                 const std::vector<Eigen::Index>& rows) {
  Matrix x(static_cast<Eigen::Index>(rows.size()), dataset.cols());
  Vector y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = dataset.features.row(rows[i]);
    y[static_cast<Eigen::Index>(i)] = dataset.target[rows[i]];
  }
  return {std::move(x), std::move(y)};
}

}  // namespace efold
