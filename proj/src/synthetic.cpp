#include "graspkit/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "graspkit/errors.hpp"
#include "graspkit/random.hpp"

namespace graspkit {

namespace {

// Sampling densities (points per square meter). Objects are dense enough that
// box fits land within a couple of millimeters; the table stays coarser to
// keep scenes small.
constexpr double kObjectDensity = 1.0e5;
constexpr double kTableDensity = 1.0e4;

// Virtual depth camera: head height above the robot base at the origin.
const Eigen::Vector3d kCameraPosition(0.0, 0.0, 1.30);

struct SurfacePoint {
  Eigen::Vector3d position;
  Eigen::Vector3d normal;
};

long count_for_area(double area, double density) {
  return std::lround(area * density);
}

void sample_box(const ShapeSpec& shape, Rng& rng,
                std::vector<SurfacePoint>& out) {
  const Eigen::Vector3d half = shape.dimensions / 2.0;
  // Faces enumerated axis by axis, negative side first.
  for (int axis = 0; axis < 3; ++axis) {
    const int u = (axis + 1) % 3;
    const int v = (axis + 2) % 3;
    const double area = shape.dimensions[u] * shape.dimensions[v];
    for (int sign : {-1, 1}) {
      const long n = count_for_area(area, kObjectDensity);
      for (long i = 0; i < n; ++i) {
        Eigen::Vector3d local;
        local[axis] = sign * half[axis];
        local[u] = rng.uniform(-half[u], half[u]);
        local[v] = rng.uniform(-half[v], half[v]);
        Eigen::Vector3d normal = Eigen::Vector3d::Zero();
        normal[axis] = sign;
        out.push_back({shape.pose * local,
                       shape.pose.orientation() * normal});
      }
    }
  }
}

void sample_cylinder(const ShapeSpec& shape, Rng& rng,
                     std::vector<SurfacePoint>& out) {
  const double radius = shape.dimensions[0];
  const double height = shape.dimensions[1];
  const double half_h = height / 2.0;

  const long n_side = count_for_area(2.0 * M_PI * radius * height,
                                     kObjectDensity);
  for (long i = 0; i < n_side; ++i) {
    const double angle = rng.uniform(0.0, 2.0 * M_PI);
    const double z = rng.uniform(-half_h, half_h);
    const Eigen::Vector3d local(radius * std::cos(angle),
                                radius * std::sin(angle), z);
    const Eigen::Vector3d normal(std::cos(angle), std::sin(angle), 0.0);
    out.push_back({shape.pose * local, shape.pose.orientation() * normal});
  }
  const long n_cap = count_for_area(M_PI * radius * radius, kObjectDensity);
  for (int sign : {-1, 1}) {
    for (long i = 0; i < n_cap; ++i) {
      // Uniform over the disc.
      const double r = radius * std::sqrt(rng.uniform());
      const double angle = rng.uniform(0.0, 2.0 * M_PI);
      const Eigen::Vector3d local(r * std::cos(angle), r * std::sin(angle),
                                  sign * half_h);
      Eigen::Vector3d normal(0.0, 0.0, sign);
      out.push_back({shape.pose * local, shape.pose.orientation() * normal});
    }
  }
}

void sample_shape(const ShapeSpec& shape, Rng& rng,
                  std::vector<SurfacePoint>& out) {
  if (shape.kind == ShapeKind::box)
    sample_box(shape, rng, out);
  else
    sample_cylinder(shape, rng, out);
}

/// Lowest surface point of the shape in the world frame.
double shape_bottom(const ShapeSpec& shape) {
  if (shape.kind == ShapeKind::box) {
    const Eigen::Vector3d half = shape.dimensions / 2.0;
    double z_min = std::numeric_limits<double>::infinity();
    for (int sx : {-1, 1})
      for (int sy : {-1, 1})
        for (int sz : {-1, 1})
          z_min = std::min(
              z_min, (shape.pose * Eigen::Vector3d(sx * half.x(), sy * half.y(),
                                                   sz * half.z()))
                         .z());
    return z_min;
  }
  // Cylinder: support of the swept disc along -Z.
  const double radius = shape.dimensions[0];
  const double half_h = shape.dimensions[1] / 2.0;
  const Eigen::Vector3d axis = shape.pose.z_axis();
  const double axial = half_h * std::abs(axis.z());
  const double radial = radius * std::sqrt(std::max(0.0, 1.0 - axis.z() * axis.z()));
  return shape.pose.position().z() - axial - radial;
}

void validate_recipe(const SceneRecipe& recipe) {
  if (recipe.objects.empty())
    throw InvalidRecipeError("scene recipe: no objects (need a grasp target)");
  if (!(recipe.table.height > 0.0) || !(recipe.table.extent > 0.0))
    throw InvalidRecipeError("scene recipe: table height and extent must be > 0");
  if (recipe.clutter_density < 0.0 || recipe.sensor_noise_sigma < 0.0)
    throw InvalidRecipeError(
        "scene recipe: clutter density and noise sigma must be >= 0");
  for (const auto& shape : recipe.objects) {
    if (shape.kind == ShapeKind::box) {
      if (!(shape.dimensions.minCoeff() > 0.0))
        throw InvalidRecipeError("scene recipe: box dimensions must be > 0");
    } else {
      if (!(shape.dimensions[0] > 0.0) || !(shape.dimensions[1] > 0.0))
        throw InvalidRecipeError(
            "scene recipe: cylinder radius and height must be > 0");
    }
    // Objects rest on the table surface.
    if (std::abs(shape_bottom(shape) - recipe.table.height) > 1e-3)
      throw InvalidRecipeError(
          "scene recipe: object '" + shape.label +
          "' does not rest on the table surface (bottom at " +
          std::to_string(shape_bottom(shape)) + ", table at " +
          std::to_string(recipe.table.height) + ")");
  }
}

}  // namespace

Eigen::Vector3d table_center(const SceneRecipe& recipe) {
  return Eigen::Vector3d(0.80, 0.0, recipe.table.height);
}

SceneModel generate_scene(const SceneRecipe& recipe) {
  validate_recipe(recipe);
  Rng rng(recipe.seed);

  // Target object: keep only camera-facing surface points.
  std::vector<SurfacePoint> target_surface;
  sample_shape(recipe.objects.front(), rng, target_surface);
  std::vector<Eigen::Vector3d> object_points;
  for (const auto& sp : target_surface)
    if (sp.normal.dot(kCameraPosition - sp.position) > 0.0)
      object_points.push_back(sp.position);
  if (object_points.size() < 4)
    throw InvalidRecipeError(
        "scene recipe: target object produced too few visible points");

  // Environment: obstacles (all faces), table top, clutter.
  std::vector<Eigen::Vector3d> env_points;
  for (std::size_t i = 1; i < recipe.objects.size(); ++i) {
    std::vector<SurfacePoint> surface;
    sample_shape(recipe.objects[i], rng, surface);
    for (const auto& sp : surface) env_points.push_back(sp.position);
  }

  const double side = std::sqrt(recipe.table.extent);
  const Eigen::Vector3d center = table_center(recipe);
  const long n_table = count_for_area(recipe.table.extent, kTableDensity);
  for (long i = 0; i < n_table; ++i)
    env_points.emplace_back(center.x() + rng.uniform(-side / 2, side / 2),
                            center.y() + rng.uniform(-side / 2, side / 2),
                            recipe.table.height);

  const long n_clutter =
      count_for_area(recipe.table.extent, recipe.clutter_density);
  for (long i = 0; i < n_clutter; ++i)
    env_points.emplace_back(center.x() + rng.uniform(-side / 2, side / 2),
                            center.y() + rng.uniform(-side / 2, side / 2),
                            recipe.table.height);

  SceneModel scene;
  scene.object_cloud = PointCloud3d::from_vectors(object_points);
  scene.object_cloud.sources().assign(object_points.size(),
                                      PointSource::camera);
  scene.environment_cloud = PointCloud3d::from_vectors(env_points);
  scene.environment_cloud.sources().assign(env_points.size(),
                                           PointSource::lidar);

  if (recipe.sensor_noise_sigma > 0.0) {
    auto& op = scene.object_cloud.points();
    for (Eigen::Index c = 0; c < op.cols(); ++c)
      for (int r = 0; r < 3; ++r)
        op(r, c) += rng.normal(0.0, recipe.sensor_noise_sigma);
    auto& ep = scene.environment_cloud.points();
    for (Eigen::Index c = 0; c < ep.cols(); ++c)
      for (int r = 0; r < 3; ++r)
        ep(r, c) += rng.normal(0.0, recipe.sensor_noise_sigma);
  }

  if (!recipe.objects.front().label.empty())
    scene.object_label = recipe.objects.front().label;
  return scene;
}

bool oracle_collision(const Pose3d& pose, const GripperSpec& gripper,
                      const PointCloud3d& env_cloud) {
  const Eigen::Matrix3d rot = pose.rotation_matrix();
  for (const auto& probe : gripper.collision_probes) {
    const Eigen::Vector3d center = rot * probe.offset + pose.position();
    const double r2 = probe.radius * probe.radius;
    for (Eigen::Index i = 0; i < env_cloud.size(); ++i)
      if ((env_cloud.point(i) - center).squaredNorm() <= r2) return true;
  }
  return false;
}

}  // namespace graspkit
