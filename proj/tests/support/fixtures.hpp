#pragma once

#include <vector>

#include "graspkit/planner.hpp"
#include "graspkit/scene.hpp"
#include "graspkit/synthetic.hpp"
#include "test_helpers.hpp"

namespace graspkit::testing {

/// 6 cm cube on an open table, recipe-generated (partial camera view).
inline SceneRecipe cube_on_table_recipe(std::uint64_t seed = 7) {
  SceneRecipe recipe;
  recipe.seed = seed;
  recipe.table.height = 0.75;
  recipe.table.extent = 0.36;
  ShapeSpec cube;
  cube.kind = ShapeKind::box;
  cube.dimensions = Eigen::Vector3d(0.06, 0.06, 0.06);
  cube.pose = Pose3d::translation(0.80, 0.0, 0.78);
  cube.label = "cube";
  recipe.objects.push_back(cube);
  return recipe;
}

/// Gripper for the open-table cube fixture. A cube's horizontal yaw is
/// ambiguous to PCA (fourfold symmetry), so the fitted box can carry up to
/// sqrt(2) x 6 cm along the closing axis; the fixture gripper opens wide
/// enough to accept that worst case.
inline GripperSpec wide_gripper() {
  GripperSpec g;
  g.max_opening = 0.10;
  return g;
}

inline SceneModel cube_on_table_scene(std::uint64_t seed = 7) {
  SceneModel scene = generate_scene(cube_on_table_recipe(seed));
  scene.gripper = wide_gripper();
  return scene;
}

/// Object too wide for the gripper along every horizontal axis and taller
/// than the fingers.
inline SceneRecipe oversized_object_recipe(std::uint64_t seed = 7) {
  SceneRecipe recipe;
  recipe.seed = seed;
  recipe.table.height = 0.75;
  recipe.table.extent = 0.36;
  ShapeSpec box;
  box.kind = ShapeKind::box;
  box.dimensions = Eigen::Vector3d(0.12, 0.12, 0.25);
  box.pose = Pose3d::translation(0.80, 0.0, 0.875);
  box.label = "crate";
  recipe.objects.push_back(box);
  return recipe;
}

/// Thin-fingered gripper used by the tight-box fixture.
inline GripperSpec slim_gripper() {
  GripperSpec g;
  g.max_opening = 0.08;
  g.finger_length = 0.10;
  g.finger_thickness = 0.005;
  g.palm_width = 0.08;
  g.palm_depth = 0.06;
  return g;
}

inline PlannerConfig tight_box_config() {
  PlannerConfig config;
  config.closing_clearance = 0.003;
  config.registration_enabled = false;
  return config;
}

/// 4 cm cube centered in an open-top box whose walls sit 1 cm off the cube
/// faces. The object cloud is the full cube surface (as after completion);
/// walls and table are densely sampled so probe sweeps cannot slip between
/// surface samples. Deterministic per seed.
inline SceneModel cube_in_tight_box_scene(std::uint64_t seed = 7) {
  Rng rng(seed);
  const Eigen::Vector3d cube_center(0.80, 0.0, 0.77);
  constexpr double kCubeSide = 0.04;
  constexpr double kGap = 0.01;          // cube face to wall inner face
  constexpr double kWallThickness = 0.012;
  constexpr double kWallHeight = 0.08;
  constexpr double kWallLength = 0.096;
  constexpr double kTableZ = 0.75;
  constexpr double kWallDensity = 1.0e6;  // points per m^2
  constexpr double kTableDensity = 2.0e4;

  SceneModel scene;

  // Full cube surface: the planner input after cloud completion.
  {
    PointCloud3d cube = box_surface_cloud(
        rng, Eigen::Vector3d(kCubeSide, kCubeSide, kCubeSide), 2500);
    cube.points().colwise() += cube_center;
    scene.object_cloud = cube;
  }

  PointCloud3d env;
  const double wall_offset = kCubeSide / 2 + kGap + kWallThickness / 2;
  const double wall_z = kTableZ + kWallHeight / 2;
  struct Wall {
    Eigen::Vector3d center;
    Eigen::Vector3d dims;
  };
  const Wall walls[4] = {
      {{cube_center.x() + wall_offset, cube_center.y(), wall_z},
       {kWallThickness, kWallLength, kWallHeight}},
      {{cube_center.x() - wall_offset, cube_center.y(), wall_z},
       {kWallThickness, kWallLength, kWallHeight}},
      {{cube_center.x(), cube_center.y() + wall_offset, wall_z},
       {kWallLength, kWallThickness, kWallHeight}},
      {{cube_center.x(), cube_center.y() - wall_offset, wall_z},
       {kWallLength, kWallThickness, kWallHeight}},
  };
  for (const Wall& wall : walls) {
    const double area =
        2.0 * (wall.dims.x() * wall.dims.y() + wall.dims.y() * wall.dims.z() +
               wall.dims.x() * wall.dims.z());
    PointCloud3d part = box_surface_cloud(
        rng, wall.dims, static_cast<Eigen::Index>(area * kWallDensity));
    part.points().colwise() += wall.center;
    env.append(part);
  }

  // Table patch around the box.
  {
    const double half = 0.3;
    const auto n = static_cast<Eigen::Index>(4 * half * half * kTableDensity);
    Eigen::Matrix3Xd pts(3, n);
    for (Eigen::Index i = 0; i < n; ++i)
      pts.col(i) = Eigen::Vector3d(cube_center.x() + rng.uniform(-half, half),
                                   cube_center.y() + rng.uniform(-half, half),
                                   kTableZ);
    env.append(PointCloud3d(std::move(pts)));
  }

  scene.environment_cloud = std::move(env);
  scene.object_label = "boxed_cube";
  scene.gripper = slim_gripper();
  return scene;
}

}  // namespace graspkit::testing
