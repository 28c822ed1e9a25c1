#include "efold/controller.hpp"

#include "efold/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace efold {

std::string_view to_string(StopStatus status) {
  switch (status) {
    case StopStatus::Continue: return "continue";
    case StopStatus::StoppedEarly: return "stopped_early";
    case StopStatus::ExhaustedFolds: return "exhausted_folds";
  }
  return "unknown";
}

EfoldController::EfoldController(EfoldConfig config) {
  validate_config(config);
  state_.config = config;
}

StopDecision EfoldController::observe(double score) {
  if (decision_.terminal()) {
    throw std::logic_error("controller already stopped");
  }
  if (!std::isfinite(score)) {
    throw std::invalid_argument("fold score must be finite");
  }

  state_.scores.push_back(score);
  const int e = state_.e();

  state_.sigma_prev = state_.sigma_curr;
  if (e >= 2) {
    state_.sigma_curr = sample_std(state_.scores);
  }
  if (e > 2) {
    const double curr = *state_.sigma_curr;
    const double prev = *state_.sigma_prev;
    if (curr < prev) {
      ++state_.count;
    } else if (std::abs(curr - prev) > state_.config.stability_tolerance * prev) {
      state_.count = 0;
    } else {
      ++state_.count;
    }
  }

  const double mean = running_mean(state_.scores);
  if (state_.count == state_.config.count_threshold && e < state_.config.e_max) {
    decision_ = {StopStatus::StoppedEarly, e, mean};
  } else if (e == state_.config.e_max) {
    decision_ = {StopStatus::ExhaustedFolds, e, mean};
  } else {
    decision_ = {StopStatus::Continue, e, mean};
  }
  return decision_;
}

StopDecision run_sequence(const EfoldConfig& config, std::span<const double> scores) {
  validate_config(config);
  if (static_cast<int>(scores.size()) != config.e_max) {
    throw std::invalid_argument("run_sequence expects exactly e_max scores, got " +
                                std::to_string(scores.size()));
  }
  EfoldController controller(config);
  for (double score : scores) {
    const StopDecision decision = controller.observe(score);
    if (decision.terminal()) {
      return decision;
    }
  }
  return controller.decision();
}

}  // namespace efold
