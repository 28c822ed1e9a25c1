#include "efold/learners.hpp"

#include "detail.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

namespace efold {

namespace {

struct KindName {
  LearnerKind kind;
  std::string_view name;
};

constexpr std::array<KindName, 10> kKindNames{{
    {LearnerKind::AdaBoost, "adaboost"},
    {LearnerKind::DecisionTreeClassifier, "decision_tree_classifier"},
    {LearnerKind::GaussianNB, "gaussian_nb"},
    {LearnerKind::KnnClassifier, "knn_classifier"},
    {LearnerKind::LogisticRegression, "logistic_regression"},
    {LearnerKind::DecisionTreeRegressor, "decision_tree_regressor"},
    {LearnerKind::KnnRegressor, "knn_regressor"},
    {LearnerKind::Lasso, "lasso"},
    {LearnerKind::LinearRegression, "linear_regression"},
    {LearnerKind::Ridge, "ridge"},
}};

/// Pulls hyperparameters with defaults and rejects unknown keys.
class Hyperparameters {
 public:
  explicit Hyperparameters(const std::map<std::string, double>& raw) : raw_(raw) {}

  double get(const std::string& key, double fallback) {
    seen_.push_back(key);
    const auto it = raw_.find(key);
    return it == raw_.end() ? fallback : it->second;
  }

  void reject_unknown(LearnerKind kind) const {
    for (const auto& [key, value] : raw_) {
      if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) {
        throw std::invalid_argument("unknown hyperparameter '" + key + "' for " +
                                    std::string(to_string(kind)));
      }
    }
  }

 private:
  const std::map<std::string, double>& raw_;
  std::vector<std::string> seen_;
};

int as_positive_int(double value, const std::string& key) {
  const int v = static_cast<int>(value);
  if (v < 1 || static_cast<double>(v) != value) {
    throw std::invalid_argument("hyperparameter '" + key +
                                "' must be a positive integer");
  }
  return v;
}

}  // namespace

std::string_view to_string(LearnerKind kind) {
  for (const auto& entry : kKindNames) {
    if (entry.kind == kind) return entry.name;
  }
  return "unknown";
}

LearnerKind learner_from_string(std::string_view name) {
  for (const auto& entry : kKindNames) {
    if (entry.name == name) return entry.kind;
  }
  throw std::invalid_argument("unknown learner kind: " + std::string(name));
}

bool is_classifier(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::AdaBoost:
    case LearnerKind::DecisionTreeClassifier:
    case LearnerKind::GaussianNB:
    case LearnerKind::KnnClassifier:
    case LearnerKind::LogisticRegression:
      return true;
    default:
      return false;
  }
}

bool compatible(LearnerKind kind, TaskKind task) {
  return is_classifier(kind) == (task != TaskKind::Regression);
}

FittedModel fit(const LearnerSpec& spec, const Matrix& x, const Vector& y,
                int class_count) {
  if (x.rows() == 0) {
    throw std::invalid_argument("cannot fit on an empty training set");
  }
  if (x.rows() != y.size()) {
    throw std::invalid_argument("feature rows and target length differ");
  }
  if (is_classifier(spec.kind) && class_count < 1) {
    throw std::invalid_argument("classifier fit needs class_count >= 1");
  }

  Hyperparameters params(spec.hyperparameters);
  FittedModel model;
  model.kind = spec.kind;
  model.columns = x.cols();
  model.training_size = static_cast<std::size_t>(x.rows());

  switch (spec.kind) {
    case LearnerKind::LinearRegression:
      model.state = detail::fit_linear_least_squares(x, y);
      break;
    case LearnerKind::Ridge:
      model.state = detail::fit_ridge(x, y, params.get("alpha", 1.0));
      break;
    case LearnerKind::Lasso: {
      const double alpha = params.get("alpha", 1.0);
      const double tol = params.get("tol", 1e-4);
      const int sweeps = as_positive_int(params.get("max_sweeps", 1000), "max_sweeps");
      model.state = detail::fit_lasso(x, y, alpha, tol, sweeps);
      break;
    }
    case LearnerKind::LogisticRegression: {
      const double l2 = params.get("l2_strength", 1.0);
      const int max_iter = as_positive_int(params.get("max_iter", 1000), "max_iter");
      const double tol = params.get("tol", 1e-6);
      model.state = detail::fit_logistic(x, y, class_count, l2, max_iter, tol);
      break;
    }
    case LearnerKind::GaussianNB:
      model.state = detail::fit_gaussian_nb(x, y, class_count);
      break;
    case LearnerKind::KnnClassifier:
    case LearnerKind::KnnRegressor: {
      const int k = as_positive_int(params.get("k", 5), "k");
      model.state =
          detail::fit_knn(x, y, k, is_classifier(spec.kind), class_count);
      break;
    }
    case LearnerKind::DecisionTreeClassifier:
      model.state = detail::fit_tree(x, y, true, class_count);
      break;
    case LearnerKind::DecisionTreeRegressor:
      model.state = detail::fit_tree(x, y, false, 0);
      break;
    case LearnerKind::AdaBoost: {
      const int rounds = as_positive_int(params.get("rounds", 50), "rounds");
      const double lr = params.get("learning_rate", 1.0);
      model.state = detail::fit_adaboost(x, y, class_count, rounds, lr);
      break;
    }
  }
  params.reject_unknown(spec.kind);
  return model;
}

Vector predict(const FittedModel& model, const Matrix& x) {
  if (x.cols() != model.columns) {
    throw std::invalid_argument("prediction column count " + std::to_string(x.cols()) +
                                " does not match training column count " +
                                std::to_string(model.columns));
  }
  return std::visit(
      [&x](const auto& state) -> Vector {
        using T = std::decay_t<decltype(state)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          return detail::predict_linear(state, x);
        } else if constexpr (std::is_same_v<T, LogisticModel>) {
          return detail::predict_logistic(state, x);
        } else if constexpr (std::is_same_v<T, GaussianNbModel>) {
          return detail::predict_gaussian_nb(state, x);
        } else if constexpr (std::is_same_v<T, KnnModel>) {
          return detail::predict_knn(state, x);
        } else if constexpr (std::is_same_v<T, TreeModel>) {
          return detail::predict_tree(state, x);
        } else {
          return detail::predict_adaboost(state, x);
        }
      },
      model.state);
}

}  // namespace efold
