#pragma once

#include "efold/core.hpp"

#include <optional>
#include <span>
#include <vector>

namespace efold {

enum class StopStatus { Continue, StoppedEarly, ExhaustedFolds };

std::string_view to_string(StopStatus status);

/// Verdict after a fold has been observed. `stop_fold` is the fold count e at
/// the decision and `final_mean` the running mean M_e of all scores so far.
/// StoppedEarly can only occur for stop_fold >= 2 + count_threshold (4 with
/// defaults) and strictly before e_max; reaching e_max is always reported as
/// ExhaustedFolds since no folds are saved at that point.
struct StopDecision {
  StopStatus status = StopStatus::Continue;
  int stop_fold = 0;
  double final_mean = 0.0;

  bool terminal() const { return status != StopStatus::Continue; }
};

/// Observable internals of the controller: the score list S, the current and
/// previous sample standard deviations (present once e >= 2 resp. e >= 3),
/// and the stability counter.
struct StoppingState {
  std::vector<double> scores;
  std::optional<double> sigma_curr;
  std::optional<double> sigma_prev;
  int count = 0;
  EfoldConfig config;

  int e() const { return static_cast<int>(scores.size()); }
};

/// Incremental early-stopping rule over one cross-validation run. Feed fold
/// scores in fold order; folds must not be evaluated ahead of the decision.
///
/// After each fold e the sample standard deviation sigma_e of all scores so
/// far is compared with sigma_{e-1} (starting at e = 3):
///   - sigma_e < sigma_{e-1}: the stability counter is incremented;
///   - |sigma_e - sigma_{e-1}| > tolerance * sigma_{e-1}: the counter resets;
///   - otherwise (change within tolerance): the counter is incremented.
/// The comparisons are strict, so a change of exactly tolerance or two equal
/// sigmas (including the all-constant 0 == 0 case) increment the counter.
/// Once the counter reaches count_threshold the run stops with mean M_e.
class EfoldController {
 public:
  explicit EfoldController(EfoldConfig config);

  /// Consumes the next fold score and returns the decision. Throws
  /// std::invalid_argument on a non-finite score and std::logic_error if
  /// called again after a terminal decision.
  StopDecision observe(double score);

  const StoppingState& state() const { return state_; }
  const StopDecision& decision() const { return decision_; }
  bool stopped() const { return decision_.terminal(); }

 private:
  StoppingState state_;
  StopDecision decision_;
};

/// Batch convenience: folds observe() over a full pre-computed trace of
/// exactly e_max scores and returns the decision; scores past the stop point
/// are ignored. Throws std::invalid_argument on a wrong-length trace.
StopDecision run_sequence(const EfoldConfig& config, std::span<const double> scores);

}  // namespace efold
