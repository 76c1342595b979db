#include "graspkit/planner.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <numeric>
#include <thread>

namespace graspkit {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Runs fn(i) for i in [0, n) across `jobs` threads in contiguous chunks.
/// fn must only write to per-index state.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(jobs));
  const int chunk = (n + jobs - 1) / jobs;
  for (int w = 0; w < jobs; ++w) {
    const int begin = w * chunk;
    const int end = std::min(n, begin + chunk);
    if (begin >= end) break;
    workers.emplace_back([begin, end, &fn]() {
      for (int i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& t : workers) t.join();
}

Eigen::Vector3d direction_for(double bearing, double azimuth_offset,
                              double elevation) {
  const double yaw = bearing + azimuth_offset;
  return Eigen::Vector3d(std::cos(elevation) * std::cos(yaw),
                         std::cos(elevation) * std::sin(yaw),
                         std::sin(elevation));
}

/// Frame with X = approach and Z (finger axis) as vertical as X permits.
Eigen::Quaterniond frame_for_approach(const Eigen::Vector3d& approach) {
  const Eigen::Vector3d x = approach.normalized();
  Eigen::Vector3d z = Eigen::Vector3d::UnitZ() -
                      Eigen::Vector3d::UnitZ().dot(x) * x;
  if (z.norm() < 1e-6) {
    z = Eigen::Vector3d::UnitX() - Eigen::Vector3d::UnitX().dot(x) * x;
    if (z.norm() < 1e-6)
      z = Eigen::Vector3d::UnitY() - Eigen::Vector3d::UnitY().dot(x) * x;
  }
  z.normalize();
  const Eigen::Vector3d y = z.cross(x);
  Eigen::Matrix3d rot;
  rot.col(0) = x;
  rot.col(1) = y;
  rot.col(2) = z;
  return Eigen::Quaterniond(rot).normalized();
}

double resolve_standoff(const SamplingParams& params,
                        const OrientedBox3d& obb,
                        const GripperSpec& gripper) {
  if (params.standoff > 0.0) return params.standoff;
  return obb.half_extents.maxCoeff() + gripper.palm_depth + 0.02;
}

}  // namespace

const char* to_string(CandidateStatus status) {
  switch (status) {
    case CandidateStatus::pending:
      return "pending";
    case CandidateStatus::rejected_collision:
      return "rejected_collision";
    case CandidateStatus::rejected_approach:
      return "rejected_approach";
    case CandidateStatus::rejected_width:
      return "rejected_width";
    case CandidateStatus::rejected_unreachable:
      return "rejected_unreachable";
    case CandidateStatus::feasible:
      return "feasible";
  }
  return "unknown";
}

std::vector<int> CandidateGrid::neighbor_indices(int index) const {
  const GraspCandidate& c = items[static_cast<std::size_t>(index)];
  std::vector<int> out;
  const int deltas[] = {-1, 1};
  for (int d : deltas) {
    const int p = c.polar_index + d;
    if (p >= 0 && p < n_polar)
      out.push_back(flat_index(p, c.azimuth_index, c.twist_index));
  }
  for (int d : deltas) {
    const int a = c.azimuth_index + d;
    if (a >= 0 && a < n_azimuth)
      out.push_back(flat_index(c.polar_index, a, c.twist_index));
  }
  for (int d : deltas) {
    const int t = c.twist_index + d;
    if (t >= 0 && t < n_twist)
      out.push_back(flat_index(c.polar_index, c.azimuth_index, t));
  }
  return out;
}

CandidateGrid sample_candidates(const OrientedBox3d& obb,
                                const Eigen::Vector3d& com,
                                const Pose3d& base_pose,
                                const GripperSpec& gripper,
                                const SamplingParams& params) {
  if (params.n_polar < 1 || params.n_azimuth < 1)
    throw std::invalid_argument("sample_candidates: grid counts must be >= 1");
  if (params.twist_angles.empty())
    throw std::invalid_argument("sample_candidates: no twist angles");
  const double standoff = resolve_standoff(params, obb, gripper);
  if (!(standoff > obb.half_extents.maxCoeff()))
    throw DegenerateStandoffError(
        "sample_candidates: standoff does not clear the object box");

  Eigen::Vector3d to_robot = base_pose.position() - com;
  to_robot.z() = 0.0;
  if (to_robot.norm() < 1e-9) {
    to_robot = base_pose.x_axis();
    to_robot.z() = 0.0;
  }
  if (to_robot.norm() < 1e-9) to_robot = Eigen::Vector3d::UnitX();
  const double bearing = std::atan2(to_robot.y(), to_robot.x());

  CandidateGrid grid;
  grid.n_polar = params.n_polar;
  grid.n_azimuth = params.n_azimuth;
  grid.n_twist = static_cast<int>(params.twist_angles.size());
  grid.com = com;
  grid.standoff = standoff;
  grid.items.reserve(static_cast<std::size_t>(grid.n_polar) * grid.n_azimuth *
                     grid.n_twist);

  const int steps = std::max(
      1, static_cast<int>(std::ceil(params.pregrasp_offset /
                                    std::max(params.approach_step, 1e-6))));

  int sample = 0;
  for (int i = 0; i < params.n_polar; ++i) {
    const double elevation =
        params.n_polar == 1 ? M_PI / 4
                            : (M_PI / 2) * i / (params.n_polar - 1);
    for (int j = 0; j < params.n_azimuth; ++j) {
      const double offset =
          params.n_azimuth == 1 ? 0.0
                                : -M_PI / 2 + M_PI * j / (params.n_azimuth - 1);
      const Eigen::Vector3d dir = direction_for(bearing, offset, elevation);
      const Eigen::Vector3d position = com + standoff * dir;
      const Eigen::Vector3d approach = -dir;
      const Eigen::Quaterniond base_frame = frame_for_approach(approach);
      for (int k = 0; k < grid.n_twist; ++k) {
        const double twist = params.twist_angles[static_cast<std::size_t>(k)];
        GraspCandidate c;
        c.grasp_pose = Pose3d(
            position, base_frame * Eigen::Quaterniond(Eigen::AngleAxisd(
                                       twist, Eigen::Vector3d::UnitX())));
        c.pre_grasp_pose =
            Pose3d(position - approach * params.pregrasp_offset,
                   c.grasp_pose.orientation());
        if (params.pregrasp_offset <= 0.0) {
          c.approach_path = {c.grasp_pose};
        } else {
          c.approach_path.reserve(static_cast<std::size_t>(steps) + 1);
          for (int s = 0; s <= steps; ++s) {
            const double t = static_cast<double>(s) / steps;
            c.approach_path.emplace_back(
                c.pre_grasp_pose.position() * (1.0 - t) + position * t,
                c.grasp_pose.orientation());
          }
        }
        c.twist_angle = twist;
        c.polar_index = i;
        c.azimuth_index = j;
        c.twist_index = k;
        c.sample_index = sample++;
        c.polar_angle = elevation;
        c.azimuth_offset = offset;
        grid.items.push_back(std::move(c));
      }
    }
  }
  return grid;
}

bool check_pose_collision(const Pose3d& pose, const GripperSpec& gripper,
                          const KdTree3d* env) {
  if (env == nullptr) return false;
  const Eigen::Matrix3d rot = pose.rotation_matrix();
  for (const auto& probe : gripper.collision_probes) {
    const Eigen::Vector3d center = rot * probe.offset + pose.position();
    if (!env->radius_query(center, probe.radius).empty()) return true;
  }
  return false;
}

bool check_approach_collision(const GraspCandidate& candidate,
                              const GripperSpec& gripper, const KdTree3d* env) {
  for (const auto& waypoint : candidate.approach_path)
    if (check_pose_collision(waypoint, gripper, env)) return true;
  return false;
}

double obb_extent_along_closing_axis(const Pose3d& grasp_pose,
                                     const OrientedBox3d& obb) {
  const Pose3d world_to_grasp = grasp_pose.inverse();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& corner : obb.corners()) {
    const double y = (world_to_grasp * corner).y();
    lo = std::min(lo, y);
    hi = std::max(hi, y);
  }
  return hi - lo;
}

bool check_width(const GraspCandidate& candidate, const OrientedBox3d& obb,
                 const GripperSpec& gripper, double closing_clearance) {
  const double extent =
      obb_extent_along_closing_axis(candidate.grasp_pose, obb);
  return extent > gripper.max_opening - closing_clearance;
}

bool pregrasp_available(const GraspCandidate& candidate,
                        const ScoreContext& ctx) {
  if (check_pose_collision(candidate.pre_grasp_pose, ctx.gripper, ctx.env))
    return false;
  if (ctx.map != nullptr) {
    const Pose3d local = ctx.base_pose.inverse() * candidate.pre_grasp_pose;
    if (!is_reachable(*ctx.map, local)) return false;
  }
  return true;
}

double score_candidate(CandidateGrid& grid, int index,
                       const ScoreContext& ctx) {
  GraspCandidate& c = grid.items[static_cast<std::size_t>(index)];
  if (c.status != CandidateStatus::feasible)
    throw NotFeasibleError("score_candidate: candidate " +
                           std::to_string(index) + " is " +
                           to_string(c.status));

  const std::vector<int> neighbors = grid.neighbor_indices(index);
  double availability = 1.0;
  if (!neighbors.empty()) {
    int ok = 0;
    for (int n : neighbors)
      if (pregrasp_available(grid.items[static_cast<std::size_t>(n)], ctx))
        ++ok;
    availability = static_cast<double>(ok) / neighbors.size();
  }

  double clearance_term = 0.0;
  double clearance = std::numeric_limits<double>::infinity();
  if (ctx.env != nullptr) {
    clearance = ctx.env->nearest(c.grasp_pose.position()).second;
    clearance_term = std::exp(-clearance / ctx.weights.sigma_clearance);
  }

  const Eigen::Vector3d local =
      ctx.base_pose.inverse() * c.grasp_pose.position();
  const double margin = ctx.workspace.margin(local);

  c.cost_terms.pregrasp_availability = availability;
  c.cost_terms.obstacle_clearance = clearance;
  c.cost_terms.workspace_margin = margin;
  c.total_cost = ctx.weights.w_pregrasp * (1.0 - availability) +
                 ctx.weights.w_clearance * clearance_term +
                 ctx.weights.w_margin *
                     std::exp(-margin / ctx.weights.sigma_margin);
  return c.total_cost;
}

const GraspCandidate& PlanResult::selected() const {
  if (!has_selection())
    throw NoFeasibleGraspError("plan: every candidate was rejected");
  return grid.items[static_cast<std::size_t>(selected_index)];
}

double PlanResult::expected_width() const {
  return obb_extent_along_closing_axis(selected().grasp_pose, obb);
}

PlanResult plan(const SceneModel& scene, const PlannerConfig& config,
                const PlanInputs& inputs) {
  const auto t_total = Clock::now();
  scene.validate();

  PlanResult result;
  result.working_object_cloud = scene.object_cloud;

  // Stage 1: complete the partial cloud against the model, when one exists.
  {
    const auto t = Clock::now();
    if (config.registration_enabled && inputs.object_model != nullptr &&
        inputs.object_model->size() >= 3 && scene.object_cloud.size() >= 3) {
      result.registration_attempted = true;
      try {
        RegistrationResultD reg = icp_register_yaw_sweep(
            *inputs.object_model, scene.object_cloud, config.registration);
        if (reg.converged)
          result.working_object_cloud =
              complete_cloud(scene.object_cloud, *inputs.object_model, reg);
        result.registration = std::move(reg);
      } catch (const NoCorrespondencesError&) {
        // Model too far from the observation; plan on the partial cloud.
      }
    }
    result.timings.registration = seconds_since(t);
  }

  // Stage 2: object box and CoM.
  {
    const auto t = Clock::now();
    result.obb = fit_obb(result.working_object_cloud,
                         ObbFitOptions{config.gravity_aligned_obb});
    result.com = result.working_object_cloud.centroid();
    result.timings.obb = seconds_since(t);
  }

  // Commanded opening: pre-shape the fingers to the object's second-largest
  // extent plus clearance on both sides.
  {
    Eigen::Vector3d full = 2.0 * result.obb.half_extents;
    std::sort(full.data(), full.data() + 3);
    result.commanded_opening = std::min(
        scene.gripper.max_opening, full[1] + 2.0 * config.closing_clearance);
    result.effective_gripper =
        with_probes(scene.gripper, result.commanded_opening);
  }

  // Stage 3: sampling.
  {
    const auto t = Clock::now();
    result.grid = sample_candidates(result.obb, result.com, scene.base_pose,
                                    result.effective_gripper, config.sampling);
    result.standoff = result.grid.standoff;
    result.timings.sampling = seconds_since(t);
  }

  std::optional<KdTree3d> env_tree;
  if (!scene.environment_cloud.empty())
    env_tree.emplace(scene.environment_cloud);
  const KdTree3d* env = env_tree ? &*env_tree : nullptr;

  for (int idx : config.excluded_samples)
    if (idx >= 0 && idx < static_cast<int>(result.grid.items.size()))
      result.grid.items[static_cast<std::size_t>(idx)].excluded = true;

  ScoreContext ctx;
  ctx.map = inputs.reachmap;
  ctx.base_pose = scene.base_pose;
  ctx.env = env;
  ctx.gripper = result.effective_gripper;
  ctx.workspace = scene.workspace;
  ctx.weights = config.weights;

  const int n = static_cast<int>(result.grid.items.size());

  // Stage 4: the filter chain, evaluated independently per candidate.
  {
    const auto t = Clock::now();
    parallel_for(n, config.jobs, [&](int i) {
      GraspCandidate& c = result.grid.items[static_cast<std::size_t>(i)];
      if (check_pose_collision(c.grasp_pose, ctx.gripper, env)) {
        c.status = CandidateStatus::rejected_collision;
      } else if (check_approach_collision(c, ctx.gripper, env)) {
        c.status = CandidateStatus::rejected_approach;
      } else if (check_width(c, result.obb, ctx.gripper,
                             config.closing_clearance)) {
        c.status = CandidateStatus::rejected_width;
      } else if (ctx.map != nullptr &&
                 !is_reachable(*ctx.map,
                               ctx.base_pose.inverse() * c.grasp_pose)) {
        c.status = CandidateStatus::rejected_unreachable;
      } else {
        c.status = CandidateStatus::feasible;
      }
    });
    result.timings.filtering = seconds_since(t);
  }

  // Stage 5: score the feasible survivors.
  {
    const auto t = Clock::now();
    parallel_for(n, config.jobs, [&](int i) {
      GraspCandidate& c = result.grid.items[static_cast<std::size_t>(i)];
      if (c.status == CandidateStatus::feasible && !c.excluded)
        score_candidate(result.grid, i, ctx);
    });
    result.timings.scoring = seconds_since(t);
  }

  // Stage 6: deterministic ranking; stable ascending cost, then sample index.
  {
    const auto t = Clock::now();
    for (const auto& c : result.grid.items)
      if (c.status == CandidateStatus::feasible && !c.excluded)
        result.ranking.push_back(c.sample_index);
    std::stable_sort(result.ranking.begin(), result.ranking.end(),
                     [&](int a, int b) {
                       const double ca =
                           result.grid.items[static_cast<std::size_t>(a)]
                               .total_cost;
                       const double cb =
                           result.grid.items[static_cast<std::size_t>(b)]
                               .total_cost;
                       return ca < cb || (ca == cb && a < b);
                     });
    if (!result.ranking.empty()) result.selected_index = result.ranking.front();
    result.timings.ranking = seconds_since(t);
  }

  result.timings.total = seconds_since(t_total);
  return result;
}

}  // namespace graspkit
