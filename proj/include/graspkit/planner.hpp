#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "graspkit/errors.hpp"
#include "graspkit/geometry.hpp"
#include "graspkit/gripper.hpp"
#include "graspkit/kdtree.hpp"
#include "graspkit/reachability.hpp"
#include "graspkit/registration.hpp"
#include "graspkit/scene.hpp"

namespace graspkit {

enum class CandidateStatus {
  pending,
  rejected_collision,
  rejected_approach,
  rejected_width,
  rejected_unreachable,
  feasible,
};

const char* to_string(CandidateStatus status);

struct CostTerms {
  /// Fraction of neighboring pre-grasp poses that are reachable and
  /// collision-free (1 when the candidate has no grid neighbors).
  double pregrasp_availability = 0.0;
  /// Distance from the grasp position to the nearest environment point.
  double obstacle_clearance = 0.0;
  /// Minimum distance from the grasp position to a workspace boundary face.
  double workspace_margin = 0.0;
};

/// One sampled grasp. Grasp frame: X approach (pointing at the object CoM),
/// Y closing axis, Z finger axis, kept as vertical as the approach permits.
struct GraspCandidate {
  Pose3d grasp_pose;
  Pose3d pre_grasp_pose;
  /// Straight pre-grasp-to-grasp segment, discretized; includes both ends.
  std::vector<Pose3d> approach_path;
  double twist_angle = 0.0;

  int polar_index = 0;
  int azimuth_index = 0;
  int twist_index = 0;
  int sample_index = 0;
  double polar_angle = 0.0;     // elevation from horizontal, radians
  double azimuth_offset = 0.0;  // offset from the object->robot bearing

  CandidateStatus status = CandidateStatus::pending;
  CostTerms cost_terms;
  /// NaN until scored; rejected candidates are never scored.
  double total_cost = std::numeric_limits<double>::quiet_NaN();
  /// Skipped by selection (retry exclusions). Checks still run.
  bool excluded = false;
};

struct SamplingParams {
  int n_polar = 4;
  int n_azimuth = 9;
  std::vector<double> twist_angles = {-M_PI / 2, -M_PI / 4, 0.0, M_PI / 4,
                                      M_PI / 2};
  /// Grasp-sphere radius about the CoM. <= 0 selects the derived default
  /// (largest OBB half extent + palm depth + 2 cm).
  double standoff = 0.0;
  double pregrasp_offset = 0.10;
  double approach_step = 0.01;
};

struct ScoreWeights {
  double w_pregrasp = 1.0;
  double w_clearance = 1.0;
  double w_margin = 0.5;
  double sigma_clearance = 0.05;
  double sigma_margin = 0.10;
};

/// Candidate set together with its sampling-grid shape; the grid neighborhood
/// drives the pre-grasp availability term.
struct CandidateGrid {
  std::vector<GraspCandidate> items;
  int n_polar = 0;
  int n_azimuth = 0;
  int n_twist = 0;
  Eigen::Vector3d com = Eigen::Vector3d::Zero();
  double standoff = 0.0;

  int flat_index(int polar, int azimuth, int twist) const {
    return (polar * n_azimuth + azimuth) * n_twist + twist;
  }

  /// In-bounds cells offset by +-1 along exactly one grid axis.
  std::vector<int> neighbor_indices(int index) const;
};

/// Samples grasp candidates on the quadrant sphere about the CoM: azimuth
/// within +-90 degrees of the object->robot bearing, elevation from horizontal
/// up to straight top-down. Each sphere sample points its approach axis at the
/// CoM and is replicated once per twist angle about that axis.
CandidateGrid sample_candidates(const OrientedBox3d& obb,
                                const Eigen::Vector3d& com,
                                const Pose3d& base_pose,
                                const GripperSpec& gripper,
                                const SamplingParams& params);

/// True iff any gripper probe placed by pose has an environment point within
/// its radius. env == nullptr means an empty environment (never collides).
bool check_pose_collision(const Pose3d& pose, const GripperSpec& gripper,
                          const KdTree3d* env);

/// True iff any approach-path waypoint collides.
bool check_approach_collision(const GraspCandidate& candidate,
                              const GripperSpec& gripper, const KdTree3d* env);

/// Extent of the box along the grasp frame's closing axis (max minus min over
/// the 8 transformed corners).
double obb_extent_along_closing_axis(const Pose3d& grasp_pose,
                                     const OrientedBox3d& obb);

/// True (reject) iff the box's extent along the closing axis exceeds the
/// gripper opening minus the closing clearance.
bool check_width(const GraspCandidate& candidate, const OrientedBox3d& obb,
                 const GripperSpec& gripper, double closing_clearance = 0.01);

struct ScoreContext {
  const ReachabilityMap* map = nullptr;  // null: reachability not considered
  Pose3d base_pose;                      // map and workspace frame
  const KdTree3d* env = nullptr;         // null: empty environment
  GripperSpec gripper;                   // probes materialized
  WorkspaceBounds workspace;
  ScoreWeights weights;
};

/// Whether the candidate's pre-grasp pose is collision-free and (when a map is
/// present) reachable. This feeds the availability term of its neighbors.
bool pregrasp_available(const GraspCandidate& candidate,
                        const ScoreContext& ctx);

/// Cost of a feasible candidate:
///   w_pregrasp*(1 - availability) + w_clearance*exp(-clearance/sigma_c)
///     + w_margin*exp(-margin/sigma_m)
/// Lower is better. Stores the terms and total on the candidate and returns
/// the total. Throws NotFeasibleError for non-feasible candidates.
double score_candidate(CandidateGrid& grid, int index, const ScoreContext& ctx);

struct PlannerConfig {
  SamplingParams sampling;
  double closing_clearance = 0.01;
  ScoreWeights weights;
  bool gravity_aligned_obb = true;
  bool registration_enabled = true;
  IcpParamsD registration;
  int jobs = 1;
  /// Sample indices excluded from selection (previously failed grasps).
  std::vector<int> excluded_samples;
};

struct PlanInputs {
  const ReachabilityMap* reachmap = nullptr;
  /// Model cloud for the scene's object label, when the library has one.
  const PointCloud3d* object_model = nullptr;
};

struct StageTimings {
  double registration = 0.0;
  double obb = 0.0;
  double sampling = 0.0;
  double filtering = 0.0;
  double scoring = 0.0;
  double ranking = 0.0;
  double total = 0.0;
};

struct PlanResult {
  /// Object cloud the pipeline ran on (completed when registration converged).
  PointCloud3d working_object_cloud;
  bool registration_attempted = false;
  std::optional<RegistrationResultD> registration;
  OrientedBox3d obb;
  Eigen::Vector3d com = Eigen::Vector3d::Zero();
  double standoff = 0.0;
  double commanded_opening = 0.0;
  GripperSpec effective_gripper;
  CandidateGrid grid;
  /// Sample indices of feasible, non-excluded candidates, ascending cost
  /// (ties: lower sample index).
  std::vector<int> ranking;
  int selected_index = -1;
  StageTimings timings;

  bool has_selection() const { return selected_index >= 0; }
  const GraspCandidate& selected() const;
  /// Object extent along the selected grasp's closing axis; what the gripper
  /// is expected to close onto.
  double expected_width() const;
};

/// Full pipeline: (optional registration/completion) -> box fit -> sampling ->
/// pose collision -> approach collision -> width -> reachability -> scoring ->
/// deterministic ranking. Identical inputs give identical results regardless
/// of config.jobs.
PlanResult plan(const SceneModel& scene, const PlannerConfig& config,
                const PlanInputs& inputs = {});

}  // namespace graspkit
