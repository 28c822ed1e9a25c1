#include "detail.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace efold::detail {

GaussianNbModel fit_gaussian_nb(const Matrix& x, const Vector& y, int class_count) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  const Eigen::Index c = class_count;

  GaussianNbModel model;
  model.class_count = class_count;
  model.means = Matrix::Zero(c, p);
  model.variances = Matrix::Zero(c, p);
  model.log_priors =
      Vector::Constant(c, -std::numeric_limits<double>::infinity());

  Vector counts = Vector::Zero(c);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<Eigen::Index>(y[i]);
    counts[k] += 1.0;
    model.means.row(k) += x.row(i);
  }
  for (Eigen::Index k = 0; k < c; ++k) {
    if (counts[k] > 0.0) {
      model.means.row(k) /= counts[k];
      model.log_priors[k] = std::log(counts[k] / static_cast<double>(n));
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<Eigen::Index>(y[i]);
    model.variances.row(k) +=
        (x.row(i) - model.means.row(k)).array().square().matrix();
  }
  for (Eigen::Index k = 0; k < c; ++k) {
    if (counts[k] > 0.0) {
      model.variances.row(k) /= counts[k];  // population variance per class
    }
  }

  // Smoothing proportional to the largest whole-training-set feature
  // variance keeps single-sample classes and constant features finite.
  const Eigen::RowVectorXd global_mean = x.colwise().mean();
  double max_variance = 0.0;
  for (Eigen::Index j = 0; j < p; ++j) {
    const double var = (x.col(j).array() - global_mean[j]).square().sum() /
                       static_cast<double>(n);
    max_variance = std::max(max_variance, var);
  }
  double epsilon = 1e-9 * max_variance;
  if (epsilon == 0.0) {
    epsilon = 1e-9;  // every feature constant; any positive floor works
  }
  model.variances.array() += epsilon;
  return model;
}

Vector predict_gaussian_nb(const GaussianNbModel& model, const Matrix& x) {
  const Eigen::Index c = model.class_count;
  Vector labels(x.rows());
  Eigen::RowVectorXd joint(c);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index k = 0; k < c; ++k) {
      if (!std::isfinite(model.log_priors[k])) {
        joint[k] = -std::numeric_limits<double>::infinity();
        continue;
      }
      const auto diff = (x.row(i) - model.means.row(k)).array();
      const auto var = model.variances.row(k).array();
      const double log_likelihood =
          (-0.5 * (var * 2.0 * std::numbers::pi).log() - diff.square() / (2.0 * var))
              .sum();
      joint[k] = model.log_priors[k] + log_likelihood;
    }
    labels[i] = static_cast<double>(argmax_lowest(joint));
  }
  return labels;
}

}  // namespace efold::detail
