#pragma once

#include "efold/core.hpp"

#include <map>
#include <variant>
#include <vector>

namespace efold {

enum class LearnerKind {
  AdaBoost,
  DecisionTreeClassifier,
  GaussianNB,
  KnnClassifier,
  LogisticRegression,
  DecisionTreeRegressor,
  KnnRegressor,
  Lasso,
  LinearRegression,
  Ridge,
};

std::string_view to_string(LearnerKind kind);
LearnerKind learner_from_string(std::string_view name);
bool is_classifier(LearnerKind kind);
bool compatible(LearnerKind kind, TaskKind task);

inline const std::vector<LearnerKind> kClassifierKinds = {
    LearnerKind::AdaBoost,       LearnerKind::DecisionTreeClassifier,
    LearnerKind::GaussianNB,     LearnerKind::KnnClassifier,
    LearnerKind::LogisticRegression,
};
inline const std::vector<LearnerKind> kRegressorKinds = {
    LearnerKind::DecisionTreeRegressor, LearnerKind::KnnRegressor,
    LearnerKind::Lasso,                 LearnerKind::LinearRegression,
    LearnerKind::Ridge,
};

/// A learner choice plus optional hyperparameter overrides. All learners run
/// with fixed defaults when the map is empty; recognized keys per kind:
///   knn_*:               k
///   adaboost:            rounds, learning_rate
///   ridge, lasso:        alpha
///   lasso:               tol, max_sweeps
///   logistic_regression: l2_strength, max_iter, tol
/// Unknown keys are rejected at fit time.
struct LearnerSpec {
  LearnerKind kind = LearnerKind::LinearRegression;
  std::map<std::string, double> hyperparameters;
};

// Learned state per family. These are value types; a fitted model is
// immutable and safe to share between threads.

struct LinearModel {
  Vector weights;
  double intercept = 0.0;
};

struct LogisticModel {
  Matrix weights;          // features x classes
  Eigen::RowVectorXd intercept;
  int class_count = 0;
};

struct GaussianNbModel {
  Matrix means;            // classes x features
  Matrix variances;        // classes x features, smoothed
  Vector log_priors;       // -inf for classes absent from training
  int class_count = 0;
};

struct KnnModel {
  Matrix points;
  Vector targets;
  int k = 5;
  bool classify = false;
  int class_count = 0;
};

/// One CART node; feature == -1 marks a leaf carrying `value` (majority label
/// for classifiers, mean target for regressors). Rows with
/// x[feature] <= threshold descend left.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

struct TreeModel {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  bool classify = false;
  int class_count = 0;
};

/// Depth-1 axis split voting left_label / right_label; feature == -1 is a
/// constant stump always voting left_label.
struct Stump {
  int feature = -1;
  double threshold = 0.0;
  int left_label = 0;
  int right_label = 0;
};

struct AdaBoostModel {
  std::vector<Stump> stumps;
  std::vector<double> alphas;
  int class_count = 0;
};

struct FittedModel {
  LearnerKind kind = LearnerKind::LinearRegression;
  Eigen::Index columns = 0;
  std::size_t training_size = 0;
  std::variant<LinearModel, LogisticModel, GaussianNbModel, KnnModel, TreeModel,
               AdaBoostModel>
      state;
};

/// Trains a model. `y` holds integer labels (as exact doubles) for
/// classifiers, in which case `class_count` must be the dataset's class
/// count; regressors ignore it. Deterministic: identical inputs give
/// identical models. Degenerate training data (single class, constant
/// features, rank deficiency) yields a constant-ish model, never a crash.
/// Throws std::invalid_argument on empty input or bad hyperparameters.
FittedModel fit(const LearnerSpec& spec, const Matrix& x, const Vector& y,
                int class_count = 0);

/// One prediction per row; classifiers return labels in {0..C-1} as exact
/// doubles. Throws std::invalid_argument when the column count differs from
/// training.
Vector predict(const FittedModel& model, const Matrix& x);

}  // namespace efold
