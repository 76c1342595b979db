#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "graspkit/geometry.hpp"
#include "graspkit/kdtree.hpp"

namespace graspkit {

struct JointLimits {
  double min = 0.0;
  double max = 0.0;
};

/// Simplified serial-chain arm used to precompute the reachability map. Each
/// link contributes a yaw joint (about local Z) and a pitch joint (about local
/// Y) followed by a translation along local X; a prismatic torso lift raises
/// the whole chain. The defaults give a frontally biased arm with roughly
/// household-table reach; swap in tighter limits for a closer match to a
/// specific robot.
struct ArmModel {
  Pose3d base_offset =
      Pose3d(Eigen::Vector3d(0.05, 0.0, 0.70), Eigen::Quaterniond::Identity());
  std::vector<double> link_lengths = {0.35, 0.35, 0.25};
  /// Two entries per link: yaw then pitch.
  std::vector<JointLimits> joint_limits = {
      {-1.5708, 1.5708}, {-0.4, 1.35}, {-2.0, 2.0},
      {-2.0, 2.0},       {-2.0, 2.0},  {-2.0, 2.0}};
  double vertical_lift_range = 0.35;

  void validate() const;
  double link_reach() const;
  double max_reach() const { return link_reach() + vertical_lift_range; }

  /// End-effector pose for one joint configuration (robot base frame). The
  /// configuration layout is [lift, yaw0, pitch0, yaw1, pitch1, ...].
  Pose3d forward_kinematics(const std::vector<double>& config) const;
};

/// Axis-aligned box of valid end-effector positions, robot base frame.
struct WorkspaceBounds {
  Eigen::Vector3d min = Eigen::Vector3d(0.15, -0.9, 0.0);
  Eigen::Vector3d max = Eigen::Vector3d(1.40, 0.9, 1.9);

  /// Minimum distance from p to any boundary face; negative outside.
  double margin(const Eigen::Vector3d& p) const {
    const Eigen::Vector3d lo = p - min;
    const Eigen::Vector3d hi = max - p;
    return std::min(lo.minCoeff(), hi.minCoeff());
  }
};

/// Voxel grid over the arm workspace (robot base frame). Each cell holds a
/// bitmask over K approach-direction bins: bit set means the sampler reached
/// that cell with that approach direction. K is 26 (face, edge and corner
/// neighbors of a cube) or 6 (faces only).
class ReachabilityMap {
 public:
  ReachabilityMap() = default;
  ReachabilityMap(double voxel_size, const Eigen::Vector3d& bounds_min,
                  const Eigen::Vector3d& bounds_max, int num_bins);

  double voxel_size() const { return voxel_size_; }
  const Eigen::Vector3d& bounds_min() const { return bounds_min_; }
  const Eigen::Vector3d& bounds_max() const { return bounds_max_; }
  int num_bins() const { return num_bins_; }
  const Eigen::Vector3i& dims() const { return dims_; }
  const std::vector<std::uint32_t>& cells() const { return cells_; }
  std::vector<std::uint32_t>& cells() { return cells_; }

  std::optional<std::size_t> voxel_index(const Eigen::Vector3d& p) const;

  /// Bitmask at the voxel containing p; 0 outside the bounds.
  std::uint32_t cell_mask(const Eigen::Vector3d& p) const;

  /// Fraction of voxels with at least one reachable bin.
  double reachable_fraction() const;

  /// Bin whose direction is closest to dir (ties to the lowest bin index).
  int bin_of(const Eigen::Vector3d& dir) const;

  /// Unit directions of the K bins, fixed enumeration order.
  const std::vector<Eigen::Vector3d>& bin_directions() const {
    return bin_directions_;
  }

 private:
  double voxel_size_ = 0.0;
  Eigen::Vector3d bounds_min_ = Eigen::Vector3d::Zero();
  Eigen::Vector3d bounds_max_ = Eigen::Vector3d::Zero();
  Eigen::Vector3i dims_ = Eigen::Vector3i::Zero();
  int num_bins_ = 0;
  std::vector<Eigen::Vector3d> bin_directions_;
  std::vector<std::uint32_t> cells_;
};

/// Monte-Carlo forward-kinematics sampling. Deterministic for a fixed
/// (arm, resolution, direction_bins, samples, seed): sampling is split into a
/// fixed number of seed-derived shards whose masks merge by bitwise OR, so the
/// result is independent of worker scheduling.
ReachabilityMap build_reachability_map(const ArmModel& arm, double resolution,
                                       int direction_bins, std::int64_t samples,
                                       std::uint64_t seed, int jobs = 1);

/// True iff the voxel holding pose's position has the bin of the pose's
/// approach direction (local X) marked reachable. Pose must be expressed in
/// the map's (robot base) frame. Outside the bounds: false.
bool is_reachable(const ReachabilityMap& map, const Pose3d& pose);

struct AlignBaseParams {
  std::vector<double> circle_radii = {0.55, 0.65, 0.75};
  double footprint_radius = 0.30;
  double footprint_height = 0.40;
  /// Keep the current base if it scores at least this fraction of the best.
  double keep_current_ratio = 0.90;
};

/// Picks a base pose for manipulation: candidates sit on circles around the
/// object with headings facing its center, the first heading aligned to the
/// box's principal horizontal axis. Candidates whose footprint overlaps
/// environment points are discarded; the rest are ranked by the number of
/// reachable approach bins at the object center (ties: smaller displacement
/// from the current base, then lower candidate index). Returns the current
/// base unchanged when it already achieves keep_current_ratio of the best
/// score. env may be null (empty environment).
Pose3d align_base(const OrientedBox3d& object_obb, const ReachabilityMap& map,
                  const KdTree3d* env, const Pose3d& current_base,
                  int candidates, const AlignBaseParams& params = {});

/// Versioned binary serialization (little-endian, fixed layout).
void save_reachability_map(std::ostream& out, const ReachabilityMap& map);
ReachabilityMap load_reachability_map(std::istream& in);
void save_reachability_map_file(const std::string& path,
                                const ReachabilityMap& map);
ReachabilityMap load_reachability_map_file(const std::string& path);

}  // namespace graspkit
