#pragma once

#include <Eigen/Dense>
#include <vector>

#include "graspkit/geometry.hpp"

namespace graspkit {

/// Sphere swept against the environment during collision checks, expressed in
/// the end-effector frame.
struct CollisionProbe {
  Eigen::Vector3d offset = Eigen::Vector3d::Zero();
  double radius = 0.0;
};

/// Parallel-jaw gripper. End-effector frame convention: origin at the palm
/// face center, X is the approach axis (fingers extend along +X), Y is the
/// closing axis (fingers separate along Y), Z runs along the finger plates.
///
/// collision_probes may be left empty, in which case the planner builds the
/// default probe layout for the opening it commands (fingers pre-shaped to the
/// object width plus clearance). Explicit probes are used as-is.
struct GripperSpec {
  double max_opening = 0.08;
  double finger_length = 0.10;
  double finger_thickness = 0.008;
  double palm_width = 0.10;
  double palm_depth = 0.06;
  std::vector<CollisionProbe> collision_probes;

  void validate() const;
};

/// Probe layout for a given commanded opening: six probes along each finger
/// (spacing <= 2 cm) plus four palm probes. 16 probes total.
std::vector<CollisionProbe> make_default_probes(const GripperSpec& gripper,
                                                double commanded_opening);

/// The gripper with probes materialized for commanded_opening when the spec
/// carries none.
GripperSpec with_probes(const GripperSpec& gripper, double commanded_opening);

}  // namespace graspkit
