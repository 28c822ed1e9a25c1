#pragma once

#include "efold/core.hpp"

#include <span>

namespace efold {

enum class Metric { F1Binary, F1Weighted, MAE };

std::string_view to_string(Metric metric);

/// The metric each task kind is scored with. Binary -> F1, Multiclass ->
/// weighted F1, Regression -> MAE. The harness must never interchange these:
/// weighted F1 on a binary problem averages both classes and generally
/// differs from plain binary F1.
Metric metric_for(TaskKind task);
ScoreDirection direction_of(Metric metric);

/// One fold score tagged with the metric that produced it.
struct Score {
  double value = 0.0;
  Metric metric = Metric::MAE;
};

/// F1 = 2TP / (2TP + FP + FN) for the given positive label. Defined as 0
/// when the denominator is 0 (no true or predicted positives). Labels must
/// be in {0, 1}; throws std::invalid_argument on length mismatch or empty
/// input.
double f1_binary(std::span<const int> y_true, std::span<const int> y_pred,
                 int positive_label = 1);

/// Support-weighted mean of one-vs-rest F1 over classes {0..class_count-1};
/// classes with zero support contribute nothing.
double f1_weighted(std::span<const int> y_true, std::span<const int> y_pred,
                   int class_count);

/// Mean absolute error.
double mae(std::span<const double> y_true, std::span<const double> y_pred);

/// Sample standard deviation, divisor n-1. Throws on length < 2.
double sample_std(std::span<const double> xs);

/// Arithmetic mean, accumulated left to right. Throws on empty input.
double running_mean(std::span<const double> xs);

}  // namespace efold
