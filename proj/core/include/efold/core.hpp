#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace efold {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class TaskKind { Binary, Multiclass, Regression };

std::string_view to_string(TaskKind task);
TaskKind task_from_string(std::string_view name);

enum class ScoreDirection { HigherIsBetter, LowerIsBetter };

inline constexpr int kDefaultEmax = 10;
inline constexpr int kDefaultCountThreshold = 2;
inline constexpr double kDefaultStabilityTolerance = 0.05;

/// Hyperparameters of the early-stopping rule. The rule watches the running
/// sample standard deviation of fold scores and stops once it has decreased
/// or stayed within `stability_tolerance` (relative) for `count_threshold`
/// consecutive folds. `score_direction` is carried for reporting only; the
/// rule itself is direction-agnostic.
struct EfoldConfig {
  int e_max = kDefaultEmax;
  int count_threshold = kDefaultCountThreshold;
  double stability_tolerance = kDefaultStabilityTolerance;
  ScoreDirection score_direction = ScoreDirection::HigherIsBetter;
};

/// Throws std::invalid_argument if the config violates its invariants
/// (e_max >= 4, count_threshold >= 1, 0 < stability_tolerance < 1).
void validate_config(const EfoldConfig& config);

/// An in-memory dataset. Rows of `features` are instances. For classification
/// tasks `target` holds integer class labels in {0..class_count-1} stored as
/// exact doubles; for regression it holds real values.
struct Dataset {
  std::string name;
  Matrix features;
  Vector target;
  TaskKind task = TaskKind::Regression;
  int class_count = 0;
  std::vector<std::string> feature_names;
  std::map<std::string, std::string> metadata;

  Eigen::Index rows() const { return features.rows(); }
  Eigen::Index cols() const { return features.cols(); }
  bool is_classification() const { return task != TaskKind::Regression; }
  int label(Eigen::Index i) const { return static_cast<int>(target[i]); }
};

/// Outcome of validate_dataset. Violations are values, not exceptions.
struct ValidationResult {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks every Dataset invariant: row/target agreement, at least e_max
/// instances, finite values, integral in-range labels with full coverage of
/// {0..class_count-1}, class_count consistent with the task kind. Each
/// violation names the failing invariant and the offending row or label.
ValidationResult validate_dataset(const Dataset& dataset, int e_max = kDefaultEmax);

/// Shortest decimal form that parses back to exactly `value`. Locale
/// independent; '.' decimal separator.
std::string format_double(double value);

/// Full-string numeric parse ('.' decimal separator, no locale). Returns
/// nullopt unless the whole text is exactly one number; "inf" and "nan"
/// count as parseable here, finiteness is the caller's check.
std::optional<double> parse_double(std::string_view text);

}  // namespace efold
