#include "efold/core.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace efold {

std::string_view to_string(TaskKind task) {
  switch (task) {
    case TaskKind::Binary: return "binary";
    case TaskKind::Multiclass: return "multiclass";
    case TaskKind::Regression: return "regression";
  }
  return "unknown";
}

TaskKind task_from_string(std::string_view name) {
  if (name == "binary") return TaskKind::Binary;
  if (name == "multiclass") return TaskKind::Multiclass;
  if (name == "regression") return TaskKind::Regression;
  throw std::invalid_argument("unknown task kind: " + std::string(name));
}

void validate_config(const EfoldConfig& config) {
  if (config.e_max < 4) {
    throw std::invalid_argument(
        "e_max must be at least 4 (the earliest possible stop), got " +
        std::to_string(config.e_max));
  }
  if (config.count_threshold < 1) {
    throw std::invalid_argument("count_threshold must be at least 1, got " +
                                std::to_string(config.count_threshold));
  }
  if (!(config.stability_tolerance > 0.0) || !(config.stability_tolerance < 1.0)) {
    throw std::invalid_argument("stability_tolerance must lie in (0, 1)");
  }
}

ValidationResult validate_dataset(const Dataset& dataset, int e_max) {
  ValidationResult result;
  auto violate = [&result](const std::string& message) {
    result.violations.push_back(message);
  };

  const Eigen::Index rows = dataset.features.rows();
  if (rows != dataset.target.size()) {
    std::ostringstream os;
    os << "feature row count " << rows << " != target length " << dataset.target.size();
    violate(os.str());
  }
  if (rows < e_max) {
    std::ostringstream os;
    os << "fewer instances than e_max: " << rows << " < " << e_max;
    violate(os.str());
  }
  if (!dataset.feature_names.empty() &&
      static_cast<Eigen::Index>(dataset.feature_names.size()) != dataset.features.cols()) {
    violate("feature_names length does not match feature column count");
  }

  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < dataset.features.cols(); ++j) {
      if (!std::isfinite(dataset.features(i, j))) {
        std::ostringstream os;
        os << "non-finite feature value at row " << i << ", column " << j;
        violate(os.str());
      }
    }
  }
  for (Eigen::Index i = 0; i < dataset.target.size(); ++i) {
    if (!std::isfinite(dataset.target[i])) {
      std::ostringstream os;
      os << "non-finite target value at row " << i;
      violate(os.str());
    }
  }

  if (dataset.is_classification()) {
    if (dataset.task == TaskKind::Binary && dataset.class_count != 2) {
      violate("binary task requires class_count == 2, got " +
              std::to_string(dataset.class_count));
    }
    if (dataset.task == TaskKind::Multiclass && dataset.class_count < 3) {
      violate("multiclass task requires class_count >= 3, got " +
              std::to_string(dataset.class_count));
    }
    if (dataset.class_count >= 1) {
      std::vector<Eigen::Index> counts(static_cast<std::size_t>(dataset.class_count), 0);
      for (Eigen::Index i = 0; i < dataset.target.size(); ++i) {
        const double raw = dataset.target[i];
        if (!std::isfinite(raw)) {
          continue;  // already reported above
        }
        if (raw != std::floor(raw) || raw < 0.0 ||
            raw >= static_cast<double>(dataset.class_count)) {
          std::ostringstream os;
          os << "label at row " << i << " (" << raw << ") is not an integer in {0.."
             << dataset.class_count - 1 << "}";
          violate(os.str());
          continue;
        }
        ++counts[static_cast<std::size_t>(raw)];
      }
      for (int c = 0; c < dataset.class_count; ++c) {
        if (counts[static_cast<std::size_t>(c)] == 0) {
          violate("label " + std::to_string(c) + " absent");
        }
      }
    }
  }

  return result;
}

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  if (ec != std::errc{}) throw std::logic_error("format_double: buffer too small");
  return std::string(buffer, ptr);
}

std::optional<double> parse_double(std::string_view text) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  // from_chars rejects a leading '+' that hand-written CSVs may carry.
  if (!text.empty() && text.front() == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || begin == end) return std::nullopt;
  return value;
}

}  // namespace efold
