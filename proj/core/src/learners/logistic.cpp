#include "detail.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace efold::detail {

namespace {

/// Row-wise softmax of logits, computed against the row maximum.
Matrix softmax(const Matrix& logits) {
  const Vector row_max = logits.rowwise().maxCoeff();
  Matrix p = (logits.colwise() - row_max).array().exp();
  const Vector row_sum = p.rowwise().sum();
  return p.array().colwise() / row_sum.array();
}

double negative_log_likelihood(const Matrix& probabilities, const Vector& y) {
  double loss = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double p = probabilities(i, static_cast<Eigen::Index>(y[i]));
    loss -= std::log(std::max(p, 1e-300));
  }
  return loss;
}

}  // namespace

LogisticModel fit_logistic(const Matrix& x, const Vector& y, int class_count,
                           double l2_strength, int max_iter, double tol) {
  // Multinomial log-loss with an L2 penalty on the weights (intercept free),
  // minimized by batch gradient descent with Armijo backtracking from W = 0.
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  const Eigen::Index c = class_count;

  Matrix one_hot = Matrix::Zero(n, c);
  for (Eigen::Index i = 0; i < n; ++i) {
    one_hot(i, static_cast<Eigen::Index>(y[i])) = 1.0;
  }

  Matrix weights = Matrix::Zero(p, c);
  Eigen::RowVectorXd intercept = Eigen::RowVectorXd::Zero(c);

  auto objective = [&](const Matrix& w, const Eigen::RowVectorXd& b, Matrix* probs) {
    Matrix logits = x * w;
    logits.rowwise() += b;
    Matrix pr = softmax(logits);
    const double loss =
        negative_log_likelihood(pr, y) + 0.5 * l2_strength * w.squaredNorm();
    if (probs != nullptr) {
      *probs = std::move(pr);
    }
    return loss;
  };

  Matrix probabilities;
  double loss = objective(weights, intercept, &probabilities);
  double step = 1.0;

  for (int iter = 0; iter < max_iter; ++iter) {
    const Matrix delta = probabilities - one_hot;
    const Matrix grad_w = x.transpose() * delta + l2_strength * weights;
    const Eigen::RowVectorXd grad_b = delta.colwise().sum();

    const double grad_max =
        std::max(grad_w.cwiseAbs().maxCoeff(), grad_b.cwiseAbs().maxCoeff());
    if (grad_max <= tol) {
      break;
    }

    const double grad_sq = grad_w.squaredNorm() + grad_b.squaredNorm();
    constexpr double kArmijo = 1e-4;
    step = std::min(step * 2.0, 1.0);  // allow recovery after small steps
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving) {
      const Matrix w_next = weights - step * grad_w;
      const Eigen::RowVectorXd b_next = intercept - step * grad_b;
      Matrix probs_next;
      const double loss_next = objective(w_next, b_next, &probs_next);
      if (loss_next <= loss - kArmijo * step * grad_sq) {
        weights = w_next;
        intercept = b_next;
        loss = loss_next;
        probabilities = std::move(probs_next);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      break;  // no descent step representable, treat as converged
    }
  }

  LogisticModel model;
  model.weights = std::move(weights);
  model.intercept = std::move(intercept);
  model.class_count = class_count;
  return model;
}

Vector predict_logistic(const LogisticModel& model, const Matrix& x) {
  Matrix logits = x * model.weights;
  logits.rowwise() += model.intercept;
  Vector labels(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    labels[i] = static_cast<double>(argmax_lowest(logits.row(i)));
  }
  return labels;
}

}  // namespace efold::detail
