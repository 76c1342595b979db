#pragma once

#include <optional>
#include <string>

#include "graspkit/geometry.hpp"
#include "graspkit/gripper.hpp"
#include "graspkit/reachability.hpp"

namespace graspkit {

/// Complete planner input. The object cloud is the segmented target (world
/// frame); the environment cloud is the composite obstacle cloud with the
/// object's own points excluded — separating the two is the segmentation
/// pipeline's job at ingestion, not enforced here. An empty environment cloud
/// is a valid scene (no obstacles).
struct SceneModel {
  PointCloud3d object_cloud;
  PointCloud3d environment_cloud;
  std::optional<std::string> object_label;
  GripperSpec gripper;
  Pose3d base_pose;
  WorkspaceBounds workspace;

  void validate() const {
    if (object_cloud.empty())
      throw EmptyCloudError("SceneModel: object cloud is empty");
    if (!object_cloud.all_finite() || !environment_cloud.all_finite())
      throw Error("SceneModel: cloud contains non-finite coordinates");
    gripper.validate();
  }
};

}  // namespace graspkit
