#include "efold/harness.hpp"

#include "efold/splitting.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace efold {

namespace {

std::vector<int> to_labels(const Vector& values) {
  std::vector<int> labels(static_cast<std::size_t>(values.size()));
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    labels[static_cast<std::size_t>(i)] = static_cast<int>(std::llround(values[i]));
  }
  return labels;
}

std::span<const double> as_span(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

double score_fold(TaskKind task, int class_count, const Vector& truth,
                  const Vector& predicted) {
  switch (task) {
    case TaskKind::Binary:
      return f1_binary(to_labels(truth), to_labels(predicted));
    case TaskKind::Multiclass:
      return f1_weighted(to_labels(truth), to_labels(predicted), class_count);
    case TaskKind::Regression:
      return mae(as_span(truth), as_span(predicted));
  }
  throw std::logic_error("unhandled task kind");
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

}  // namespace

std::string_view to_string(RunMode mode) {
  return mode == RunMode::Simulate ? "simulate" : "early-stop";
}

RunMode run_mode_from_string(std::string_view text) {
  if (text == "simulate") return RunMode::Simulate;
  if (text == "early-stop") return RunMode::EarlyStop;
  throw std::invalid_argument("unknown run mode: " + std::string(text));
}

double pct_difference(double m_e, double m_full) {
  if (m_full == 0.0) {
    throw std::domain_error("pct_difference is undefined for zero ground truth");
  }
  return std::abs(m_e - m_full) / std::abs(m_full) * 100.0;
}

double t_quantile(double p, int df) {
  if (df < 1) throw std::invalid_argument("t_quantile: df must be >= 1");
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("t_quantile: p must be in (0, 1)");
  }
  return boost::math::quantile(boost::math::students_t(static_cast<double>(df)), p);
}

ConfidenceInterval confidence_interval(std::span<const double> fold_scores,
                                       double level, bool use_standard_error) {
  if (fold_scores.size() < 2) {
    throw std::invalid_argument("confidence_interval: need at least 2 scores");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("confidence_interval: level must be in (0, 1)");
  }
  const double mean = running_mean(fold_scores);
  const double sd = sample_std(fold_scores);
  const double k = static_cast<double>(fold_scores.size());
  const double t = t_quantile((1.0 + level) / 2.0, static_cast<int>(fold_scores.size()) - 1);
  const double margin = use_standard_error ? t * sd / std::sqrt(k) : t * sd;
  return {mean - margin, mean + margin};
}

RunRecord evaluate_run(const Dataset& dataset, const LearnerSpec& spec,
                       const EfoldConfig& config, std::uint64_t seed, RunMode mode,
                       bool ci_uses_standard_error) {
  return evaluate_run_with(
      [](const LearnerSpec& s, const Matrix& x, const Vector& y, int class_count) {
        return fit(s, x, y, class_count);
      },
      dataset, spec, config, seed, mode, ci_uses_standard_error);
}

RunRecord evaluate_run_with(const FitFunction& fit_fn, const Dataset& dataset,
                            const LearnerSpec& spec, const EfoldConfig& config,
                            std::uint64_t seed, RunMode mode,
                            bool ci_uses_standard_error) {
  validate_config(config);
  if (!compatible(spec.kind, dataset.task)) {
    throw std::invalid_argument("learner " + std::string(to_string(spec.kind)) +
                                " is incompatible with dataset " + dataset.name);
  }
  const ValidationResult validation = validate_dataset(dataset, config.e_max);
  if (!validation.ok()) {
    throw std::invalid_argument("invalid dataset " + dataset.name + ": " +
                                validation.violations.front());
  }

  RunRecord record;
  record.learner = std::string(to_string(spec.kind));
  record.dataset = dataset.name;
  record.task = dataset.task;
  record.metric = metric_for(dataset.task);
  record.mode = mode;
  record.seed = seed;

  const FoldAssignment folds = make_folds(dataset, config.e_max, seed);
  EfoldController controller(config);

  for (int e = 1; e <= config.e_max; ++e) {
    const auto start = std::chrono::steady_clock::now();
    double score = 0.0;
    try {
      const auto [train_rows, validation_rows] = train_validation_split(dataset, folds, e);
      const auto [x_train, y_train] = gather(dataset, train_rows);
      const auto [x_validation, y_validation] = gather(dataset, validation_rows);
      const FittedModel model = fit_fn(spec, x_train, y_train, dataset.class_count);
      const Vector predicted = predict(model, x_validation);
      score = score_fold(dataset.task, dataset.class_count, y_validation, predicted);
    } catch (const std::exception& ex) {
      record.failed = true;
      record.failed_fold = e;
      record.failure_message = ex.what();
      return record;
    }
    record.fold_scores.push_back(score);
    record.per_fold_wall_time.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());

    if (mode == RunMode::EarlyStop) {
      const StopDecision decision = controller.observe(score);
      if (decision.terminal()) {
        record.stop_fold = decision.stop_fold;
        record.m_e = decision.final_mean;
        break;
      }
    }
  }

  if (mode == RunMode::Simulate) {
    const StopDecision decision = run_sequence(config, record.fold_scores);
    record.stop_fold = decision.stop_fold;
    record.m_e = decision.final_mean;
    const double m_full = running_mean(record.fold_scores);
    record.m_full = m_full;
    const ConfidenceInterval ci =
        confidence_interval(record.fold_scores, 0.95, ci_uses_standard_error);
    record.ci_low = ci.low;
    record.ci_high = ci.high;
    record.within_ci = ci.low <= record.m_e && record.m_e <= ci.high;
    if (record.stop_fold < config.e_max && m_full != 0.0) {
      record.pct_diff = pct_difference(record.m_e, m_full);
    }
  }
  record.saved_folds = config.e_max - record.stop_fold;
  return record;
}

std::vector<RunRecord> run_all(std::span<const RunPlan> plans,
                               const EfoldConfig& config, RunMode mode, int workers,
                               bool ci_uses_standard_error) {
  std::vector<RunRecord> results(plans.size());
  if (plans.empty()) return results;
  if (workers < 1) throw std::invalid_argument("run_all: workers must be >= 1");
  const int pool_size = std::min<int>(workers, static_cast<int>(plans.size()));

  std::atomic<std::size_t> cursor{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto drain = [&] {
    while (true) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= plans.size()) return;
      try {
        results[i] = evaluate_run(*plans[i].dataset, plans[i].learner, config,
                                  plans[i].seed, mode, ci_uses_standard_error);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(pool_size));
  for (int w = 0; w < pool_size; ++w) {
    pool.emplace_back(drain);
  }
  for (std::thread& worker : pool) {
    worker.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

AggregateReport aggregate(std::span<const RunRecord> records) {
  if (records.empty()) {
    throw std::invalid_argument("aggregate: no records");
  }
  const int e_max = static_cast<int>(records.front().fold_scores.size());
  for (const RunRecord& record : records) {
    if (record.mode != RunMode::Simulate) {
      throw std::invalid_argument("aggregate: record for " + record.dataset + "/" +
                                  record.learner + " is not from Simulate mode");
    }
    if (record.failed) {
      throw std::invalid_argument("aggregate: failed record for " + record.dataset +
                                  "/" + record.learner + " (exclude failures first)");
    }
    if (static_cast<int>(record.fold_scores.size()) != e_max) {
      throw std::invalid_argument("aggregate: mixed e_max across records");
    }
    if (record.stop_fold < 1 || record.stop_fold > e_max || !record.within_ci) {
      throw std::invalid_argument("aggregate: malformed record for " + record.dataset +
                                  "/" + record.learner);
    }
  }

  AggregateReport report;
  report.e_max = e_max;
  report.total_runs = static_cast<long>(records.size());
  report.stop_fold_counts.assign(static_cast<std::size_t>(e_max) + 1, 0);

  std::map<std::pair<std::string, std::string>, std::vector<const RunRecord*>> by_combination;
  long stop_sum = 0;
  long within_sum = 0;
  std::map<TaskKind, std::pair<double, long>> pct_by_task;  // sum, count
  for (const RunRecord& record : records) {
    by_combination[{record.dataset, record.learner}].push_back(&record);
    ++report.stop_fold_counts[static_cast<std::size_t>(record.stop_fold)];
    stop_sum += record.stop_fold;
    within_sum += *record.within_ci ? 1 : 0;
    if (record.pct_diff) {
      auto& [sum, count] = pct_by_task[record.task];
      sum += *record.pct_diff;
      ++count;
    }
  }

  const double n = static_cast<double>(records.size());
  report.overall_mean_stop_fold = static_cast<double>(stop_sum) / n;
  report.overall_within_ci_fraction = static_cast<double>(within_sum) / n;
  report.mean_saved_fraction =
      (static_cast<double>(e_max) - report.overall_mean_stop_fold) / static_cast<double>(e_max);

  auto task_mean = [&](TaskKind task) -> std::optional<double> {
    const auto it = pct_by_task.find(task);
    if (it == pct_by_task.end()) return std::nullopt;
    return it->second.first / static_cast<double>(it->second.second);
  };
  report.mean_pct_diff_binary = task_mean(TaskKind::Binary);
  report.mean_pct_diff_multiclass = task_mean(TaskKind::Multiclass);
  report.mean_pct_diff_regression = task_mean(TaskKind::Regression);

  for (const auto& [key, group] : by_combination) {
    CombinationStats stats;
    stats.dataset = key.first;
    stats.learner = key.second;
    stats.task = group.front()->task;
    stats.runs = static_cast<int>(group.size());
    long group_stop = 0;
    long group_within = 0;
    std::vector<double> pct_diffs;
    for (const RunRecord* record : group) {
      group_stop += record->stop_fold;
      group_within += *record->within_ci ? 1 : 0;
      if (record->pct_diff) pct_diffs.push_back(*record->pct_diff);
    }
    stats.mean_stop_fold = static_cast<double>(group_stop) / static_cast<double>(group.size());
    stats.within_ci_fraction =
        static_cast<double>(group_within) / static_cast<double>(group.size());
    stats.pct_diff_count = static_cast<int>(pct_diffs.size());
    if (!pct_diffs.empty()) {
      stats.mean_pct_diff = running_mean(pct_diffs);
      stats.median_pct_diff = median_of(std::move(pct_diffs));
    }
    report.combinations.push_back(std::move(stats));
  }
  return report;
}

}  // namespace efold
