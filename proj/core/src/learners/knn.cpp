#include "detail.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace efold::detail {

KnnModel fit_knn(const Matrix& x, const Vector& y, int k, bool classify,
                 int class_count) {
  KnnModel model;
  model.points = x;
  model.targets = y;
  model.k = std::min<int>(k, static_cast<int>(x.rows()));  // k capped at n
  model.classify = classify;
  model.class_count = class_count;
  return model;
}

Vector predict_knn(const KnnModel& model, const Matrix& x) {
  const Eigen::Index n = model.points.rows();
  const auto k = static_cast<std::size_t>(model.k);

  std::vector<std::pair<double, Eigen::Index>> distances(
      static_cast<std::size_t>(n));
  Vector out(x.rows());

  for (Eigen::Index q = 0; q < x.rows(); ++q) {
    for (Eigen::Index i = 0; i < n; ++i) {
      distances[static_cast<std::size_t>(i)] = {
          (model.points.row(i) - x.row(q)).squaredNorm(), i};
    }
    // Distance ties resolved by training-row index, so neighbor sets are
    // reproducible.
    std::nth_element(distances.begin(), distances.begin() + (k - 1), distances.end());
    std::sort(distances.begin(), distances.begin() + k);

    if (model.classify) {
      std::vector<int> votes(static_cast<std::size_t>(model.class_count), 0);
      for (std::size_t j = 0; j < k; ++j) {
        ++votes[static_cast<std::size_t>(model.targets[distances[j].second])];
      }
      int best = 0;
      for (int c = 1; c < model.class_count; ++c) {
        if (votes[static_cast<std::size_t>(c)] > votes[static_cast<std::size_t>(best)]) {
          best = c;  // strict, so vote ties keep the smallest label
        }
      }
      out[q] = static_cast<double>(best);
    } else {
      double sum = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        sum += model.targets[distances[j].second];
      }
      out[q] = sum / static_cast<double>(k);
    }
  }
  return out;
}

}  // namespace efold::detail
