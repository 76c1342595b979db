#pragma once

#include <span>
#include <string>
#include <vector>

#include "graspkit/errors.hpp"
#include "graspkit/planner.hpp"

namespace graspkit {

enum class GraspOutcome { success, empty_close, slip, pending };
enum class SupervisorAction { proceed, retry_grasp, handover };

const char* to_string(GraspOutcome outcome);
const char* to_string(SupervisorAction action);

struct GraspAttemptRecord {
  int attempt_index = 1;
  /// Gripper opening reported by the encoders after the close command.
  double encoder_width = 0.0;
  /// Object extent along the closing axis of the executed grasp.
  double expected_width = 0.0;
  GraspOutcome outcome = GraspOutcome::pending;
};

struct SupervisorPolicy {
  /// Below this the fingers closed on nothing.
  double min_grasp_width = 0.005;
  /// Acceptance band around the expected width, as a fraction of it.
  double width_tolerance = 0.5;
  int max_retries = 2;
  /// Gripper range used to validate encoder readings.
  double max_opening = 0.08;

  void validate() const;
};

/// Classifies a close-command result from the encoder reading:
/// empty_close below min_grasp_width, success within the tolerance band
/// around the expected width, slip otherwise.
GraspOutcome classify_outcome(double encoder_width, double expected_width,
                              const SupervisorPolicy& policy);

/// proceed after a success; retry while the failure count stays within
/// max_retries; handover once it exceeds it.
SupervisorAction next_action(const std::vector<GraspAttemptRecord>& history,
                             const SupervisorPolicy& policy);

struct AttemptReport {
  int attempt_index = 1;
  int selected_sample = -1;
  double encoder_width = 0.0;
  double expected_width = 0.0;
  GraspOutcome outcome = GraspOutcome::pending;
  SupervisorAction action = SupervisorAction::retry_grasp;
};

struct EpisodeResult {
  /// The initial plan (its report carries the full candidate table).
  PlanResult first_plan;
  std::vector<AttemptReport> attempts;
  SupervisorAction final_action = SupervisorAction::handover;
  /// True when scripted readings ran out before the episode settled.
  bool readings_exhausted = false;
};

/// Drives plan -> close -> classify -> act over a scripted sequence of encoder
/// readings. Each retry replans with all previously selected sample indices
/// excluded, so retries explore different grasps; a retry with no feasible
/// grasp left escalates to handover.
EpisodeResult run_supervised_episode(const SceneModel& scene,
                                     const PlannerConfig& config,
                                     const PlanInputs& inputs,
                                     std::span<const double> encoder_readings,
                                     const SupervisorPolicy& policy);

}  // namespace graspkit
