#include "detail.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace efold::detail {

namespace {

/// CART builder: Gini impurity for classification, sum of squared errors for
/// regression. Nodes split until pure or smaller than 2 samples; candidate
/// thresholds are midpoints of consecutive distinct sorted feature values and
/// ties fall to the lowest (feature, threshold) pair.
class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, const Vector& y, bool classify, int class_count)
      : x_(x), y_(y), classify_(classify), class_count_(class_count) {}

  TreeModel build() {
    std::vector<Eigen::Index> all(static_cast<std::size_t>(x_.rows()));
    for (std::size_t i = 0; i < all.size(); ++i) {
      all[i] = static_cast<Eigen::Index>(i);
    }
    build_node(std::move(all));
    TreeModel model;
    model.nodes = std::move(nodes_);
    model.classify = classify_;
    model.class_count = class_count_;
    return model;
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double impurity = std::numeric_limits<double>::infinity();
  };

  bool pure(const std::vector<Eigen::Index>& idx) const {
    const double first = y_[idx.front()];
    for (Eigen::Index i : idx) {
      if (y_[i] != first) return false;
    }
    return true;
  }

  double leaf_value(const std::vector<Eigen::Index>& idx) const {
    if (classify_) {
      std::vector<Eigen::Index> counts(static_cast<std::size_t>(class_count_), 0);
      for (Eigen::Index i : idx) {
        ++counts[static_cast<std::size_t>(y_[i])];
      }
      std::size_t best = 0;
      for (std::size_t c = 1; c < counts.size(); ++c) {
        if (counts[c] > counts[best]) best = c;  // majority, ties keep lowest label
      }
      return static_cast<double>(best);
    }
    double sum = 0.0;
    for (Eigen::Index i : idx) {
      sum += y_[i];
    }
    return sum / static_cast<double>(idx.size());
  }

  Split best_split(const std::vector<Eigen::Index>& idx) const {
    Split best;
    const auto n = static_cast<double>(idx.size());
    std::vector<std::pair<double, Eigen::Index>> sorted(idx.size());

    for (int feature = 0; feature < static_cast<int>(x_.cols()); ++feature) {
      for (std::size_t i = 0; i < idx.size(); ++i) {
        sorted[i] = {x_(idx[i], feature), idx[i]};
      }
      std::sort(sorted.begin(), sorted.end());
      if (sorted.front().first == sorted.back().first) {
        continue;  // constant feature in this node
      }

      if (classify_) {
        std::vector<double> left_counts(static_cast<std::size_t>(class_count_), 0.0);
        std::vector<double> right_counts(static_cast<std::size_t>(class_count_), 0.0);
        for (Eigen::Index i : idx) {
          right_counts[static_cast<std::size_t>(y_[i])] += 1.0;
        }
        double left_sq = 0.0;
        double right_sq = 0.0;
        for (double c : right_counts) {
          right_sq += c * c;
        }
        for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
          const auto label = static_cast<std::size_t>(y_[sorted[i].second]);
          left_sq += 2.0 * left_counts[label] + 1.0;
          left_counts[label] += 1.0;
          right_counts[label] -= 1.0;
          right_sq -= 2.0 * right_counts[label] + 1.0;
          if (sorted[i].first == sorted[i + 1].first) {
            continue;
          }
          const double nl = static_cast<double>(i + 1);
          const double nr = n - nl;
          // Weighted Gini: nl*(1 - left_sq/nl^2) + nr*(1 - right_sq/nr^2)
          const double impurity = n - left_sq / nl - right_sq / nr;
          if (impurity < best.impurity) {
            best = {feature, split_threshold(sorted[i].first, sorted[i + 1].first),
                    impurity};
          }
        }
      } else {
        double left_sum = 0.0, left_sq = 0.0;
        double right_sum = 0.0, right_sq = 0.0;
        for (Eigen::Index i : idx) {
          right_sum += y_[i];
          right_sq += y_[i] * y_[i];
        }
        for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
          const double v = y_[sorted[i].second];
          left_sum += v;
          left_sq += v * v;
          right_sum -= v;
          right_sq -= v * v;
          if (sorted[i].first == sorted[i + 1].first) {
            continue;
          }
          const double nl = static_cast<double>(i + 1);
          const double nr = n - nl;
          const double impurity = (left_sq - left_sum * left_sum / nl) +
                                  (right_sq - right_sum * right_sum / nr);
          if (impurity < best.impurity) {
            best = {feature, split_threshold(sorted[i].first, sorted[i + 1].first),
                    impurity};
          }
        }
      }
    }
    return best;
  }

  int build_node(std::vector<Eigen::Index> idx) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();

    if (idx.size() < 2 || pure(idx)) {
      nodes_[static_cast<std::size_t>(id)].value = leaf_value(idx);
      return id;
    }
    const Split split = best_split(idx);
    if (split.feature < 0) {
      nodes_[static_cast<std::size_t>(id)].value = leaf_value(idx);
      return id;
    }

    std::vector<Eigen::Index> left, right;
    left.reserve(idx.size());
    right.reserve(idx.size());
    for (Eigen::Index i : idx) {
      (x_(i, split.feature) <= split.threshold ? left : right).push_back(i);
    }
    idx.clear();
    idx.shrink_to_fit();

    const int left_id = build_node(std::move(left));
    const int right_id = build_node(std::move(right));
    TreeNode& node = nodes_[static_cast<std::size_t>(id)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left_id;
    node.right = right_id;
    return id;
  }

  const Matrix& x_;
  const Vector& y_;
  bool classify_;
  int class_count_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

TreeModel fit_tree(const Matrix& x, const Vector& y, bool classify, int class_count) {
  return TreeBuilder(x, y, classify, class_count).build();
}

double tree_predict_row(const TreeModel& model, const Eigen::RowVectorXd& row) {
  const TreeNode* node = &model.nodes.front();
  while (node->feature >= 0) {
    node = &model.nodes[static_cast<std::size_t>(
        row[node->feature] <= node->threshold ? node->left : node->right)];
  }
  return node->value;
}

Vector predict_tree(const TreeModel& model, const Matrix& x) {
  Vector out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    out[i] = tree_predict_row(model, x.row(i));
  }
  return out;
}

}  // namespace efold::detail
