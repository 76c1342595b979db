#include "graspkit/gripper.hpp"

#include <algorithm>
#include <stdexcept>

namespace graspkit {

void GripperSpec::validate() const {
  const double dims[] = {max_opening, finger_length, finger_thickness,
                         palm_width, palm_depth};
  for (double d : dims)
    if (!(d > 0.0))
      throw std::invalid_argument("GripperSpec: all dimensions must be > 0");
  if (!collision_probes.empty() && collision_probes.size() < 8)
    throw std::invalid_argument(
        "GripperSpec: explicit probe sets need at least 8 probes to cover "
        "fingers and palm");
  for (const auto& p : collision_probes)
    if (!(p.radius > 0.0))
      throw std::invalid_argument("GripperSpec: probe radius must be > 0");
}

std::vector<CollisionProbe> make_default_probes(const GripperSpec& gripper,
                                                double commanded_opening) {
  const double opening =
      std::clamp(commanded_opening, 0.0, gripper.max_opening);
  const double half = opening / 2.0 + gripper.finger_thickness / 2.0;
  const double finger_radius = gripper.finger_thickness / 2.0 + 5e-4;

  std::vector<CollisionProbe> probes;
  // Spacing <= 2r: consecutive spheres overlap, so the finger sweep has no
  // gaps an obstacle surface could slip through.
  const int per_finger = std::max(
      4, static_cast<int>(std::ceil(gripper.finger_length /
                                    (2.0 * finger_radius))));
  for (int side : {-1, 1}) {
    for (int i = 0; i < per_finger; ++i) {
      const double x = gripper.finger_length * (i + 0.5) / per_finger;
      probes.push_back({Eigen::Vector3d(x, side * half, 0.0), finger_radius});
    }
  }
  const double palm_radius =
      std::max(gripper.palm_width / 4.0, gripper.palm_depth / 2.0);
  const double q = gripper.palm_width / 4.0;
  for (int sy : {-1, 1})
    for (int sz : {-1, 1})
      probes.push_back(
          {Eigen::Vector3d(-gripper.palm_depth / 2.0, sy * q, sz * q),
           palm_radius});
  return probes;
}

GripperSpec with_probes(const GripperSpec& gripper, double commanded_opening) {
  GripperSpec out = gripper;
  if (out.collision_probes.empty())
    out.collision_probes = make_default_probes(gripper, commanded_opening);
  return out;
}

}  // namespace graspkit
