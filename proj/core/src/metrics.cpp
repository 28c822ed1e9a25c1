#include "efold/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace efold {

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::F1Binary: return "f1";
    case Metric::F1Weighted: return "f1_weighted";
    case Metric::MAE: return "mae";
  }
  return "unknown";
}

Metric metric_for(TaskKind task) {
  switch (task) {
    case TaskKind::Binary: return Metric::F1Binary;
    case TaskKind::Multiclass: return Metric::F1Weighted;
    case TaskKind::Regression: return Metric::MAE;
  }
  throw std::invalid_argument("unknown task kind");
}

ScoreDirection direction_of(Metric metric) {
  return metric == Metric::MAE ? ScoreDirection::LowerIsBetter
                               : ScoreDirection::HigherIsBetter;
}

namespace {

void require_same_nonempty(std::size_t a, std::size_t b) {
  if (a != b) {
    throw std::invalid_argument("label vector length mismatch: " +
                                std::to_string(a) + " vs " + std::to_string(b));
  }
  if (a == 0) {
    throw std::invalid_argument("empty label vectors");
  }
}

double f1_one_vs_rest(std::span<const int> y_true, std::span<const int> y_pred,
                      int positive) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const bool truth = y_true[i] == positive;
    const bool pred = y_pred[i] == positive;
    if (truth && pred) ++tp;
    if (!truth && pred) ++fp;
    if (truth && !pred) ++fn;
  }
  const std::size_t denom = 2 * tp + fp + fn;
  if (denom == 0) {
    return 0.0;
  }
  return 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

}  // namespace

double f1_binary(std::span<const int> y_true, std::span<const int> y_pred,
                 int positive_label) {
  require_same_nonempty(y_true.size(), y_pred.size());
  return f1_one_vs_rest(y_true, y_pred, positive_label);
}

double f1_weighted(std::span<const int> y_true, std::span<const int> y_pred,
                   int class_count) {
  require_same_nonempty(y_true.size(), y_pred.size());
  if (class_count < 1) {
    throw std::invalid_argument("class_count must be positive");
  }
  const double n = static_cast<double>(y_true.size());
  double total = 0.0;
  for (int c = 0; c < class_count; ++c) {
    std::size_t support = 0;
    for (int t : y_true) {
      if (t == c) ++support;
    }
    if (support == 0) {
      continue;
    }
    total += (static_cast<double>(support) / n) * f1_one_vs_rest(y_true, y_pred, c);
  }
  return total;
}

double mae(std::span<const double> y_true, std::span<const double> y_pred) {
  require_same_nonempty(y_true.size(), y_pred.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    sum += std::abs(y_true[i] - y_pred[i]);
  }
  return sum / static_cast<double>(y_true.size());
}

double sample_std(std::span<const double> xs) {
  if (xs.size() < 2) {
    throw std::invalid_argument("sample_std needs at least 2 values");
  }
  const double mean = running_mean(xs);
  double ss = 0.0;
  for (double x : xs) {
    const double d = x - mean;
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double running_mean(std::span<const double> xs) {
  if (xs.empty()) {
    throw std::invalid_argument("running_mean of empty vector");
  }
  double sum = 0.0;
  for (double x : xs) {
    sum += x;
  }
  return sum / static_cast<double>(xs.size());
}

}  // namespace efold
