#include "detail.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace efold::detail {

namespace {

struct StumpFit {
  Stump stump;
  double error = 0.0;
};

int weighted_argmax(const std::vector<double>& w) {
  int best = 0;
  for (int c = 1; c < static_cast<int>(w.size()); ++c) {
    if (w[static_cast<std::size_t>(c)] > w[static_cast<std::size_t>(best)]) best = c;
  }
  return best;
}

/// Exhaustive weighted decision stump. Candidate thresholds are midpoints of
/// consecutive distinct feature values; each side predicts its weighted
/// majority class. Ties fall to the lowest (feature, threshold) pair and the
/// smallest label. Weights are assumed normalized to sum 1.
StumpFit fit_stump(const Matrix& x, const Vector& y,
                   const std::vector<std::vector<Eigen::Index>>& sorted_by_feature,
                   const std::vector<double>& weights, int class_count) {
  const auto classes = static_cast<std::size_t>(class_count);
  std::vector<double> total_w(classes, 0.0);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    total_w[static_cast<std::size_t>(y[i])] += weights[static_cast<std::size_t>(i)];
  }

  StumpFit best;
  best.stump.feature = -1;
  best.stump.left_label = weighted_argmax(total_w);
  best.error = std::numeric_limits<double>::infinity();

  std::vector<double> left_w(classes);
  std::vector<double> right_w(classes);
  for (int feature = 0; feature < static_cast<int>(x.cols()); ++feature) {
    const auto& order = sorted_by_feature[static_cast<std::size_t>(feature)];
    std::fill(left_w.begin(), left_w.end(), 0.0);
    right_w = total_w;
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      const auto row = order[i];
      const auto label = static_cast<std::size_t>(y[row]);
      const double w = weights[static_cast<std::size_t>(row)];
      left_w[label] += w;
      right_w[label] -= w;
      const double lo = x(row, feature);
      const double hi = x(order[i + 1], feature);
      if (lo == hi) continue;
      const int ll = weighted_argmax(left_w);
      const int rl = weighted_argmax(right_w);
      const double error =
          1.0 - left_w[static_cast<std::size_t>(ll)] - right_w[static_cast<std::size_t>(rl)];
      if (error < best.error) {
        best.stump = {feature, split_threshold(lo, hi), ll, rl};
        best.error = error;
      }
    }
  }

  if (best.stump.feature < 0) {
    // Every feature is constant: constant stump predicting the majority class.
    best.error = 1.0 - total_w[static_cast<std::size_t>(best.stump.left_label)];
  }
  return best;
}

int stump_predict(const Stump& stump, const Eigen::RowVectorXd& row) {
  if (stump.feature < 0) return stump.left_label;
  return row[stump.feature] <= stump.threshold ? stump.left_label : stump.right_label;
}

}  // namespace

AdaBoostModel fit_adaboost(const Matrix& x, const Vector& y, int class_count,
                           int rounds, double learning_rate) {
  const auto n = static_cast<std::size_t>(x.rows());
  AdaBoostModel model;
  model.class_count = class_count;

  std::vector<std::vector<Eigen::Index>> sorted_by_feature(
      static_cast<std::size_t>(x.cols()));
  for (int feature = 0; feature < static_cast<int>(x.cols()); ++feature) {
    auto& order = sorted_by_feature[static_cast<std::size_t>(feature)];
    order.resize(n);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      const double va = x(a, feature);
      const double vb = x(b, feature);
      return va != vb ? va < vb : a < b;
    });
  }

  std::vector<double> weights(n, 1.0 / static_cast<double>(n));
  const double chance = 1.0 - 1.0 / static_cast<double>(class_count);

  for (int round = 0; round < rounds; ++round) {
    const StumpFit fit = fit_stump(x, y, sorted_by_feature, weights, class_count);

    if (fit.error >= chance) {
      // Worse than chance: stop boosting. A first-round failure keeps a
      // constant majority stump so the ensemble is never empty.
      if (model.stumps.empty()) {
        std::vector<double> total_w(static_cast<std::size_t>(class_count), 0.0);
        for (Eigen::Index i = 0; i < y.size(); ++i) {
          total_w[static_cast<std::size_t>(y[i])] +=
              weights[static_cast<std::size_t>(i)];
        }
        Stump constant;
        constant.feature = -1;
        constant.left_label = weighted_argmax(total_w);
        model.stumps.push_back(constant);
        model.alphas.push_back(1.0);
      }
      break;
    }

    const double clamped = std::max(fit.error, 1e-10);
    const double alpha = learning_rate * (std::log((1.0 - clamped) / clamped) +
                                          std::log(static_cast<double>(class_count) - 1.0));
    model.stumps.push_back(fit.stump);
    model.alphas.push_back(alpha);

    if (fit.error == 0.0) break;

    const double bump = std::exp(alpha);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      if (stump_predict(fit.stump, x.row(row)) != static_cast<int>(y[row])) {
        weights[i] *= bump;
      }
      sum += weights[i];
    }
    for (double& w : weights) {
      w /= sum;
    }
  }
  return model;
}

Vector predict_adaboost(const AdaBoostModel& model, const Matrix& x) {
  Vector out(x.rows());
  std::vector<double> votes(static_cast<std::size_t>(model.class_count));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    std::fill(votes.begin(), votes.end(), 0.0);
    for (std::size_t t = 0; t < model.stumps.size(); ++t) {
      votes[static_cast<std::size_t>(stump_predict(model.stumps[t], x.row(i)))] +=
          model.alphas[t];
    }
    out[i] = weighted_argmax(votes);
  }
  return out;
}

}  // namespace efold::detail
