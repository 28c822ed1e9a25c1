#pragma once

#include "efold/learners.hpp"

namespace efold::detail {

LinearModel fit_linear_least_squares(const Matrix& x, const Vector& y);
LinearModel fit_ridge(const Matrix& x, const Vector& y, double alpha);
LinearModel fit_lasso(const Matrix& x, const Vector& y, double alpha, double tol,
                      int max_sweeps);
Vector predict_linear(const LinearModel& model, const Matrix& x);

LogisticModel fit_logistic(const Matrix& x, const Vector& y, int class_count,
                           double l2_strength, int max_iter, double tol);
Vector predict_logistic(const LogisticModel& model, const Matrix& x);

GaussianNbModel fit_gaussian_nb(const Matrix& x, const Vector& y, int class_count);
Vector predict_gaussian_nb(const GaussianNbModel& model, const Matrix& x);

KnnModel fit_knn(const Matrix& x, const Vector& y, int k, bool classify,
                 int class_count);
Vector predict_knn(const KnnModel& model, const Matrix& x);

TreeModel fit_tree(const Matrix& x, const Vector& y, bool classify, int class_count);
Vector predict_tree(const TreeModel& model, const Matrix& x);
double tree_predict_row(const TreeModel& model, const Eigen::RowVectorXd& row);

AdaBoostModel fit_adaboost(const Matrix& x, const Vector& y, int class_count,
                           int rounds, double learning_rate);
Vector predict_adaboost(const AdaBoostModel& model, const Matrix& x);

/// Midpoint between two consecutive distinct feature values, nudged down to
/// `lo` when rounding would make it collide with `hi`, so that the x <= t
/// test always separates the two.
inline double split_threshold(double lo, double hi) {
  const double mid = lo + 0.5 * (hi - lo);
  return mid < hi ? mid : lo;
}

/// Index of the strictly largest entry; ties keep the lowest index.
template <typename Derived>
Eigen::Index argmax_lowest(const Eigen::DenseBase<Derived>& values) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) {
      best = i;
    }
  }
  return best;
}

}  // namespace efold::detail
