#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "graspkit/geometry.hpp"
#include "graspkit/gripper.hpp"
#include "graspkit/scene.hpp"

namespace graspkit {

enum class ShapeKind { box, cylinder };

/// One rigid shape resting on the table. Box dimensions are full extents
/// (x, y, z); cylinder dimensions are (radius, height) with the height along
/// the local Z axis.
struct ShapeSpec {
  ShapeKind kind = ShapeKind::box;
  Eigen::Vector3d dimensions = Eigen::Vector3d(0.06, 0.06, 0.06);
  Pose3d pose;
  std::string label;
};

/// Deterministic desk-scale scene: a square table in front of the robot with
/// the first object as the grasp target and any further objects as obstacles.
/// The seed fully determines the generated clouds.
struct SceneRecipe {
  std::uint64_t seed = 0;
  struct Table {
    double height = 0.75;
    /// Table top area in square meters (the top is square).
    double extent = 0.36;
  } table;
  std::vector<ShapeSpec> objects;
  /// Loose debris points per square meter of table top.
  double clutter_density = 0.0;
  double sensor_noise_sigma = 0.0;
};

/// Table top center in the world frame (the robot base sits at the origin).
Eigen::Vector3d table_center(const SceneRecipe& recipe);

/// Surface-samples the recipe into a SceneModel. The target object is sampled
/// on its camera-facing hemisphere only (a partial view, as a depth camera
/// would see); obstacles and the table are sampled on all faces. Gaussian
/// noise of sensor_noise_sigma is added to every coordinate.
SceneModel generate_scene(const SceneRecipe& recipe);

/// Brute-force twin of check_pose_collision: every probe against every point,
/// closed-ball semantics. Reference implementation for the property suite.
bool oracle_collision(const Pose3d& pose, const GripperSpec& gripper,
                      const PointCloud3d& env_cloud);

}  // namespace graspkit
