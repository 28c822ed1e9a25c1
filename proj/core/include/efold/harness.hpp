#pragma once

#include "efold/controller.hpp"
#include "efold/core.hpp"
#include "efold/learners.hpp"
#include "efold/metrics.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace efold {

/// Simulate runs every fold, then replays the stopping rule on the full
/// trace: the ground-truth comparison (m_full, the confidence interval,
/// pct_diff) is available. EarlyStop physically halts at the stopping
/// decision, so only the consumed folds exist and no ground truth does.
/// Both modes reach the same (stop_fold, m_e) for the same inputs.
enum class RunMode { Simulate, EarlyStop };

std::string_view to_string(RunMode mode);
RunMode run_mode_from_string(std::string_view text);

/// Outcome of one cross-validation run of one learner on one dataset.
/// fold_scores and per_fold_wall_time cover the folds actually evaluated
/// (all e_max in Simulate mode, stop_fold many in EarlyStop mode). When
/// failed is set, only the fields up to the failing fold are meaningful;
/// stop_fold stays 0 and the run is excluded from aggregation.
struct RunRecord {
  std::string learner;
  std::string dataset;
  TaskKind task = TaskKind::Binary;
  Metric metric = Metric::F1Binary;
  RunMode mode = RunMode::Simulate;
  std::uint64_t seed = 0;

  std::vector<double> fold_scores;
  std::vector<double> per_fold_wall_time;  // seconds, same length as fold_scores

  int stop_fold = 0;
  double m_e = 0.0;
  int saved_folds = 0;  // e_max - stop_fold

  std::optional<double> m_full;  // ground truth M_{e_max}, Simulate only
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  std::optional<bool> within_ci;   // ci_low <= m_e <= ci_high
  std::optional<double> pct_diff;  // absent when stop_fold == e_max or m_full == 0

  bool failed = false;
  std::optional<int> failed_fold;  // 1-based
  std::string failure_message;
};

/// |m_e - m_full| / |m_full| * 100. The normalizer is the ground truth, so
/// the function is asymmetric in its arguments. Throws std::domain_error
/// when m_full == 0 (callers report the value as absent instead).
double pct_difference(double m_e, double m_full);

struct ConfidenceInterval {
  double low = 0.0;
  double high = 0.0;
};

/// Student's t quantile (inverse CDF) at probability p for df degrees of
/// freedom. Throws std::invalid_argument for df < 1 or p outside (0, 1).
double t_quantile(double p, int df);

/// Two-sided t interval around the mean of the fold scores:
///   mean +/- t_{(1+level)/2, k-1} * s / sqrt(k)
/// where s is the sample standard deviation. With use_standard_error false
/// the sqrt(k) divisor is dropped (mean +/- t * s), the reading of the
/// source protocol that treats sigma_k itself as the interval width. Throws
/// std::invalid_argument on fewer than 2 scores or a level outside (0, 1).
ConfidenceInterval confidence_interval(std::span<const double> fold_scores,
                                       double level = 0.95,
                                       bool use_standard_error = true);

/// Fitting seam for evaluate_run_with: tests substitute a throwing fitter
/// to exercise the failure path, which real learners never take by design.
using FitFunction = std::function<FittedModel(
    const LearnerSpec&, const Matrix&, const Vector&, int)>;

/// Runs one learner through e-fold cross-validation on one dataset. The
/// fold assignment is fully determined by (dataset, e_max, seed). A learner
/// exception on some fold marks the record failed with that fold's index;
/// it is never silently skipped. Throws std::invalid_argument for an
/// incompatible (learner, task) pair, an invalid dataset, or a bad config.
RunRecord evaluate_run(const Dataset& dataset, const LearnerSpec& spec,
                       const EfoldConfig& config, std::uint64_t seed, RunMode mode,
                       bool ci_uses_standard_error = true);

/// evaluate_run with an injected fitting function.
RunRecord evaluate_run_with(const FitFunction& fit_fn, const Dataset& dataset,
                            const LearnerSpec& spec, const EfoldConfig& config,
                            std::uint64_t seed, RunMode mode,
                            bool ci_uses_standard_error = true);

/// One unit of work for the run pool. The dataset pointer must outlive the
/// pool; plans share datasets freely since runs never mutate them.
struct RunPlan {
  const Dataset* dataset = nullptr;
  LearnerSpec learner;
  std::uint64_t seed = 0;
};

/// Executes the plans on a bounded worker pool. Results are positioned by
/// plan index, so the output is deterministic regardless of worker count or
/// completion order. Precondition violations inside evaluate_run surface as
/// exceptions after the pool drains; per-fold learner failures do not, they
/// come back as failed records.
std::vector<RunRecord> run_all(std::span<const RunPlan> plans,
                               const EfoldConfig& config, RunMode mode, int workers,
                               bool ci_uses_standard_error = true);

/// Statistics for one (dataset, learner) combination. pct_diff statistics
/// cover only the runs where it is present (stopped before e_max with a
/// nonzero ground truth); mean_pct_diff is absent when no run qualifies.
struct CombinationStats {
  std::string dataset;
  std::string learner;
  TaskKind task = TaskKind::Binary;
  int runs = 0;
  double mean_stop_fold = 0.0;
  double within_ci_fraction = 0.0;
  int pct_diff_count = 0;
  std::optional<double> mean_pct_diff;
  std::optional<double> median_pct_diff;
};

/// Aggregation of a full Simulate suite. stop_fold_counts is indexed by
/// fold number (entries 0..3 stay zero under default configs) and sums to
/// total_runs. mean_saved_fraction is defined as
/// (e_max - overall_mean_stop_fold) / e_max, which equals the mean per-run
/// saved fraction identically.
struct AggregateReport {
  std::vector<CombinationStats> combinations;  // sorted by (dataset, learner)
  int e_max = 0;
  long total_runs = 0;
  std::vector<long> stop_fold_counts;
  double overall_mean_stop_fold = 0.0;
  double overall_within_ci_fraction = 0.0;
  double mean_saved_fraction = 0.0;
  std::optional<double> mean_pct_diff_binary;
  std::optional<double> mean_pct_diff_multiclass;
  std::optional<double> mean_pct_diff_regression;
};

/// Reduces Simulate records to an AggregateReport. pct_diff aggregation
/// excludes records whose pct_diff is absent; the within-CI fraction counts
/// every record. Throws std::invalid_argument on empty input, EarlyStop or
/// failed records, or records with inconsistent e_max.
AggregateReport aggregate(std::span<const RunRecord> records);

}  // namespace efold
