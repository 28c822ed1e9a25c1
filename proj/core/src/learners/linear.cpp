#include "detail.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace efold::detail {

namespace {

Matrix with_intercept_column(const Matrix& x) {
  Matrix augmented(x.rows(), x.cols() + 1);
  augmented.leftCols(x.cols()) = x;
  augmented.col(x.cols()).setOnes();
  return augmented;
}

LinearModel from_augmented(const Vector& beta) {
  LinearModel model;
  model.weights = beta.head(beta.size() - 1);
  model.intercept = beta[beta.size() - 1];
  return model;
}

}  // namespace

LinearModel fit_linear_least_squares(const Matrix& x, const Vector& y) {
  // Rank-revealing factorization; on rank deficiency this yields the
  // minimum-norm least-squares solution instead of blowing up.
  const Matrix augmented = with_intercept_column(x);
  const Vector beta = augmented.completeOrthogonalDecomposition().solve(y);
  return from_augmented(beta);
}

LinearModel fit_ridge(const Matrix& x, const Vector& y, double alpha) {
  // Normal equations on the augmented system with the intercept excluded
  // from the penalty. The regularized block makes the system positive
  // definite whenever the data is non-empty.
  const Matrix augmented = with_intercept_column(x);
  Matrix gram = augmented.transpose() * augmented;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    gram(j, j) += alpha;
  }
  const Vector beta = gram.ldlt().solve(augmented.transpose() * y);
  return from_augmented(beta);
}

LinearModel fit_lasso(const Matrix& x, const Vector& y, double alpha, double tol,
                      int max_sweeps) {
  // Cyclic coordinate descent on centered data, objective
  //   (1/2n) ||y - Xw - b||^2 + alpha * ||w||_1,
  // intercept recovered afterwards as b = mean(y) - mean(x) . w.
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  const Eigen::RowVectorXd x_mean = x.colwise().mean();
  const double y_mean = y.mean();

  Matrix xc = x.rowwise() - x_mean;
  Vector yc = y.array() - y_mean;

  const Vector col_sq = xc.colwise().squaredNorm();
  const double n_alpha = static_cast<double>(n) * alpha;

  Vector w = Vector::Zero(p);
  Vector residual = yc;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (col_sq[j] == 0.0) {
        continue;  // constant feature, coefficient stays 0
      }
      const double rho = xc.col(j).dot(residual) + w[j] * col_sq[j];
      double updated = 0.0;
      if (rho > n_alpha) {
        updated = (rho - n_alpha) / col_sq[j];
      } else if (rho < -n_alpha) {
        updated = (rho + n_alpha) / col_sq[j];
      }
      const double change = updated - w[j];
      if (change != 0.0) {
        residual -= xc.col(j) * change;
        w[j] = updated;
      }
      max_change = std::max(max_change, std::abs(change));
    }
    if (max_change < tol) {
      break;
    }
  }

  LinearModel model;
  model.weights = w;
  model.intercept = y_mean - x_mean.dot(w);
  return model;
}

Vector predict_linear(const LinearModel& model, const Matrix& x) {
  return (x * model.weights).array() + model.intercept;
}

}  // namespace efold::detail
