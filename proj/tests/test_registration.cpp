#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "graspkit/registration.hpp"
#include "support/test_helpers.hpp"

using namespace graspkit;
using graspkit::testing::box_surface_cloud;
using graspkit::testing::random_perturbation;
using graspkit::testing::random_unit_vector;

namespace {

/// Keeps the points visible from a viewpoint (outward normal check is not
/// available here, so cull by a half-space through the centroid), leaving at
/// least min_fraction of the cloud.
PointCloud3d visible_subset(const PointCloud3d& cloud,
                            const Eigen::Vector3d& view_dir,
                            double min_fraction) {
  const Eigen::Vector3d c = cloud.centroid();
  std::vector<std::pair<double, Eigen::Index>> scored;
  for (Eigen::Index i = 0; i < cloud.size(); ++i)
    scored.emplace_back(view_dir.dot(cloud.point(i) - c), i);
  std::sort(scored.begin(), scored.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  const auto keep = static_cast<std::size_t>(
      std::ceil(min_fraction * static_cast<double>(cloud.size())));
  std::vector<Eigen::Vector3d> pts;
  for (std::size_t k = 0; k < keep; ++k)
    pts.push_back(cloud.point(scored[k].second));
  return PointCloud3d::from_vectors(pts);
}

double rotation_error_deg(const Pose3d& a, const Pose3d& b) {
  return quaternion_angle(a.orientation(), b.orientation()) * 180.0 / M_PI;
}

}  // namespace

TEST_CASE("icp: self-registration converges immediately") {
  Rng rng(61);
  const PointCloud3d model = box_surface_cloud(rng, {0.1, 0.08, 0.05}, 300);
  const auto result = icp_register(model, model, Pose3d::identity());
  CHECK(result.converged);
  CHECK(result.iterations <= 2);
  CHECK(result.rmse < 1e-9);
  CHECK(result.model_to_scene.position().norm() < 1e-9);
  CHECK(rotation_error_deg(result.model_to_scene, Pose3d::identity()) < 1e-7);
}

TEST_CASE("icp: too few points") {
  const PointCloud3d two = PointCloud3d::from_vectors({{0, 0, 0}, {1, 0, 0}});
  CHECK_THROWS_AS(icp_register(two, two, Pose3d::identity()),
                  TooFewPointsError);
}

TEST_CASE("icp: no correspondences within the gate") {
  Rng rng(67);
  const PointCloud3d model = box_surface_cloud(rng, {0.1, 0.1, 0.1}, 100);
  const PointCloud3d far =
      transform_cloud(Pose3d::translation(5, 0, 0), model);
  IcpParamsD params;
  params.max_correspondence_dist = 0.05;
  CHECK_THROWS_AS(icp_register(model, far, Pose3d::identity(), params),
                  NoCorrespondencesError);
}

TEST_CASE("icp: recovers a known small transform") {
  // Oracle: apply a known transform, compare the recovered one against it.
  Rng rng(71);
  const PointCloud3d model = box_surface_cloud(rng, {0.15, 0.10, 0.06}, 500);
  const Pose3d truth(Eigen::Vector3d(0.05, 0.0, 0.0),
                     Eigen::Quaterniond(Eigen::AngleAxisd(
                         10.0 * M_PI / 180.0, Eigen::Vector3d::UnitZ())));
  const PointCloud3d scene = transform_cloud(truth, model);

  IcpParamsD params;
  params.max_correspondence_dist = 0.10;
  const auto result = icp_register(model, scene, Pose3d::identity(), params);
  CHECK(result.converged);
  CHECK((result.model_to_scene.position() - truth.position()).norm() < 1e-3);
  CHECK(rotation_error_deg(result.model_to_scene, truth) < 0.5);
}

TEST_CASE("icp: rmse history is non-increasing") {
  Rng rng(73);
  for (int trial = 0; trial < 20; ++trial) {
    const PointCloud3d model = box_surface_cloud(rng, {0.12, 0.09, 0.05}, 400);
    const Pose3d truth = random_perturbation(rng, 20.0 * M_PI / 180.0, 0.08);
    const PointCloud3d scene = transform_cloud(truth, model);
    IcpParamsD params;
    params.max_correspondence_dist = 0.15;
    const auto result = icp_register(model, scene, Pose3d::identity(), params);
    for (std::size_t i = 1; i < result.rmse_history.size(); ++i)
      CHECK(result.rmse_history[i] <= result.rmse_history[i - 1]);
  }
}

TEST_CASE("icp: yaw-sweep recovery on partial views") {
  Rng rng(79);
  int good = 0;
  const int trials = 25;
  for (int trial = 0; trial < trials; ++trial) {
    const PointCloud3d model =
        graspkit::testing::asymmetric_model_cloud(rng, 500);
    const Pose3d truth = random_perturbation(rng, 20.0 * M_PI / 180.0, 0.10);
    const PointCloud3d scene =
        visible_subset(transform_cloud(truth, model),
                       graspkit::testing::random_camera_direction(rng), 0.60);

    IcpParamsD params;
    params.max_correspondence_dist = 0.06;
    const auto result = icp_register_yaw_sweep(model, scene, params);

    if ((result.model_to_scene.position() - truth.position()).norm() < 5e-3 &&
        rotation_error_deg(result.model_to_scene, truth) < 2.0)
      ++good;
  }
  // The full-budget acceptance run demands 95%; this small sample allows a
  // couple of hard draws.
  CHECK(good >= trials - 2);
}

TEST_CASE("icp: conjugate invariance under a common transform") {
  Rng rng(83);
  const PointCloud3d model = box_surface_cloud(rng, {0.14, 0.09, 0.06}, 400);
  const Pose3d truth = random_perturbation(rng, 15.0 * M_PI / 180.0, 0.05);
  const PointCloud3d scene = transform_cloud(truth, model);

  IcpParamsD params;
  params.max_correspondence_dist = 0.12;
  const auto base = icp_register(model, scene, Pose3d::identity(), params);

  const Pose3d common = random_perturbation(rng, 30.0 * M_PI / 180.0, 0.2);
  const auto conjugated =
      icp_register(transform_cloud(common, model),
                   transform_cloud(common, scene),
                   common * Pose3d::identity() * common.inverse(), params);

  // T * base * T^-1 should match the conjugated run.
  const Pose3d expected = common * base.model_to_scene * common.inverse();
  CHECK((conjugated.model_to_scene.position() - expected.position()).norm() <
        1e-6);
  CHECK(rotation_error_deg(conjugated.model_to_scene, expected) < 1e-4);
}

TEST_CASE("complete_cloud: union counts and guard") {
  Rng rng(89);
  const PointCloud3d model = box_surface_cloud(rng, {0.1, 0.08, 0.06}, 400);
  const PointCloud3d partial =
      visible_subset(model, Eigen::Vector3d(1, 0, 0), 0.5);

  const auto result = icp_register(model, partial, Pose3d::identity());
  REQUIRE(result.converged);
  const PointCloud3d completed = complete_cloud(partial, model, result);
  CHECK(completed.size() == partial.size() + model.size());

  RegistrationResultD failed;
  failed.converged = false;
  CHECK_THROWS_AS(complete_cloud(partial, model, failed), NotConvergedError);
}

TEST_CASE("complete_cloud: box fit close to the full model's") {
  // Oracle: the box fitted to the ground-truth full model.
  Rng rng(97);
  const PointCloud3d model =
      graspkit::testing::asymmetric_model_cloud(rng, 600);
  const Pose3d truth(Eigen::Vector3d(0.7, 0.1, 0.8),
                     Eigen::Quaterniond(Eigen::AngleAxisd(
                         0.4, Eigen::Vector3d::UnitZ())));
  const PointCloud3d full_scene = transform_cloud(truth, model);
  const PointCloud3d partial =
      visible_subset(full_scene, Eigen::Vector3d(-1, 0, 0.3).normalized(),
                     0.62);

  IcpParamsD params;
  params.max_correspondence_dist = 0.08;
  const auto reg = icp_register_yaw_sweep(model, partial, params);
  REQUIRE(reg.converged);
  const PointCloud3d completed = complete_cloud(partial, model, reg);

  const OrientedBox3d truth_box =
      fit_obb(full_scene, {.gravity_aligned = false});
  const OrientedBox3d box = fit_obb(completed, {.gravity_aligned = false});
  Eigen::Vector3d te = truth_box.half_extents;
  Eigen::Vector3d ce = box.half_extents;
  std::sort(te.data(), te.data() + 3);
  std::sort(ce.data(), ce.data() + 3);
  for (int k = 0; k < 3; ++k)
    CHECK(std::abs(ce[k] - te[k]) < 0.1 * te[k] + 1e-9);

  // Tags: synthetic markers only when the partial cloud carries tags.
  PointCloud3d tagged = partial;
  tagged.sources().assign(static_cast<std::size_t>(partial.size()),
                          PointSource::camera);
  const PointCloud3d tagged_completed = complete_cloud(tagged, model, reg);
  REQUIRE(tagged_completed.has_sources());
  CHECK(tagged_completed.sources().back() == PointSource::synthetic);
}
