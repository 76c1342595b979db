#include "graspkit/supervisor.hpp"

#include <cmath>
#include <stdexcept>

namespace graspkit {

const char* to_string(GraspOutcome outcome) {
  switch (outcome) {
    case GraspOutcome::success:
      return "success";
    case GraspOutcome::empty_close:
      return "empty_close";
    case GraspOutcome::slip:
      return "slip";
    case GraspOutcome::pending:
      return "pending";
  }
  return "unknown";
}

const char* to_string(SupervisorAction action) {
  switch (action) {
    case SupervisorAction::proceed:
      return "proceed";
    case SupervisorAction::retry_grasp:
      return "retry_grasp";
    case SupervisorAction::handover:
      return "handover";
  }
  return "unknown";
}

void SupervisorPolicy::validate() const {
  if (!(min_grasp_width > 0.0) || !(min_grasp_width < max_opening))
    throw std::invalid_argument(
        "SupervisorPolicy: need 0 < min_grasp_width < max_opening");
  if (!(width_tolerance >= 0.0))
    throw std::invalid_argument("SupervisorPolicy: negative width tolerance");
  if (max_retries < 0)
    throw std::invalid_argument("SupervisorPolicy: negative retry budget");
}

GraspOutcome classify_outcome(double encoder_width, double expected_width,
                              const SupervisorPolicy& policy) {
  policy.validate();
  if (!std::isfinite(encoder_width) || encoder_width < 0.0 ||
      encoder_width > policy.max_opening)
    throw OutOfRangeError("classify_outcome: encoder width outside [0, " +
                          std::to_string(policy.max_opening) + "]");
  if (!std::isfinite(expected_width) || expected_width <= 0.0 ||
      expected_width > policy.max_opening)
    throw OutOfRangeError(
        "classify_outcome: expected width outside the gripper range");

  if (encoder_width < policy.min_grasp_width) return GraspOutcome::empty_close;
  if (std::abs(encoder_width - expected_width) <=
      policy.width_tolerance * expected_width)
    return GraspOutcome::success;
  return GraspOutcome::slip;
}

SupervisorAction next_action(const std::vector<GraspAttemptRecord>& history,
                             const SupervisorPolicy& policy) {
  policy.validate();
  if (history.empty())
    throw EmptyHistoryError("next_action: no attempts recorded");
  if (history.back().outcome == GraspOutcome::pending)
    throw std::invalid_argument("next_action: last attempt not classified");
  if (history.back().outcome == GraspOutcome::success)
    return SupervisorAction::proceed;

  int failures = 0;
  for (const auto& record : history)
    if (record.outcome == GraspOutcome::empty_close ||
        record.outcome == GraspOutcome::slip)
      ++failures;
  return failures <= policy.max_retries ? SupervisorAction::retry_grasp
                                        : SupervisorAction::handover;
}

EpisodeResult run_supervised_episode(const SceneModel& scene,
                                     const PlannerConfig& config,
                                     const PlanInputs& inputs,
                                     std::span<const double> encoder_readings,
                                     const SupervisorPolicy& policy) {
  policy.validate();
  EpisodeResult episode;
  episode.first_plan = plan(scene, config, inputs);

  PlannerConfig retry_config = config;
  std::vector<GraspAttemptRecord> history;
  const PlanResult* current = &episode.first_plan;
  PlanResult replanned;

  std::size_t reading = 0;
  int attempt = 1;
  while (current->has_selection()) {
    if (reading >= encoder_readings.size()) {
      episode.readings_exhausted = true;
      episode.final_action = SupervisorAction::retry_grasp;
      return episode;
    }
    GraspAttemptRecord record;
    record.attempt_index = attempt;
    record.encoder_width = encoder_readings[reading++];
    record.expected_width = current->expected_width();
    record.outcome =
        classify_outcome(record.encoder_width, record.expected_width, policy);
    history.push_back(record);

    const SupervisorAction action = next_action(history, policy);
    episode.attempts.push_back({attempt, current->selected_index,
                                record.encoder_width, record.expected_width,
                                record.outcome, action});
    episode.final_action = action;
    if (action != SupervisorAction::retry_grasp) return episode;

    retry_config.excluded_samples.push_back(current->selected_index);
    replanned = plan(scene, retry_config, inputs);
    current = &replanned;
    ++attempt;
  }

  // No grasp left to retry with.
  episode.final_action = SupervisorAction::handover;
  return episode;
}

}  // namespace graspkit
