#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "graspkit/geometry.hpp"
#include "graspkit/random.hpp"
#include "support/test_helpers.hpp"

using namespace graspkit;
using graspkit::testing::box_surface_cloud;
using graspkit::testing::random_cloud;
using graspkit::testing::random_pose;
using graspkit::testing::random_rotation;

namespace {

Eigen::Vector3d sorted_extents(const OrientedBox3d& box) {
  Eigen::Vector3d e = box.half_extents;
  std::sort(e.data(), e.data() + 3);
  return e;
}

}  // namespace

TEST_CASE("compose: identity and inverse") {
  Rng rng(11);
  const Pose3d p = random_pose(rng);

  const Pose3d left = compose(Pose3d::identity(), p);
  CHECK((left.position() - p.position()).norm() < 1e-12);
  CHECK(quaternion_angle(left.orientation(), p.orientation()) < 1e-12);

  const Pose3d round = compose(p, p.inverse());
  CHECK(round.position().norm() < 1e-9);
  CHECK(quaternion_angle(round.orientation(),
                         Eigen::Quaterniond::Identity()) < 1e-9);
}

TEST_CASE("compose: translations add") {
  const Pose3d a = Pose3d::translation(1, 0, 0);
  const Pose3d b = Pose3d::translation(0, 2, 0);
  const Pose3d c = compose(a, b);
  CHECK((c.position() - Eigen::Vector3d(1, 2, 0)).norm() < 1e-15);
}

TEST_CASE("compose: no quaternion drift over long chains") {
  Rng rng(13);
  Pose3d pose;
  for (int i = 0; i < 10000; ++i) pose = pose * random_pose(rng, 0.01);
  CHECK(std::abs(pose.orientation().norm() - 1.0) < 1e-9);
}

TEST_CASE("transform_cloud: identity, known rotation, empty") {
  Rng rng(17);
  const PointCloud3d cloud = random_cloud(rng, 32);

  const PointCloud3d same = transform_cloud(Pose3d::identity(), cloud);
  CHECK((same.points() - cloud.points()).cwiseAbs().maxCoeff() == 0.0);

  const Pose3d yaw180 = Pose3d::rotation(
      Eigen::AngleAxisd(M_PI, Eigen::Vector3d::UnitZ()));
  PointCloud3d single = PointCloud3d::from_vectors({{1, 0, 0}});
  const PointCloud3d flipped = transform_cloud(yaw180, single);
  CHECK((flipped.point(0) - Eigen::Vector3d(-1, 0, 0)).norm() < 1e-9);

  CHECK_THROWS_AS(transform_cloud(Pose3d::identity(), PointCloud3d{}),
                  EmptyCloudError);
}

TEST_CASE("transform_cloud: isometry over random clouds") {
  // Oracle: direct pairwise-distance comparison.
  Rng rng(19);
  const PointCloud3d cloud = random_cloud(rng, 100);
  const Pose3d pose = random_pose(rng);
  const PointCloud3d moved = transform_cloud(pose, cloud);
  REQUIRE(moved.size() == cloud.size());
  double max_drift = 0.0;
  for (Eigen::Index i = 0; i < cloud.size(); ++i)
    for (Eigen::Index j = i + 1; j < cloud.size(); ++j) {
      const double before = (cloud.point(i) - cloud.point(j)).norm();
      const double after = (moved.point(i) - moved.point(j)).norm();
      max_drift = std::max(max_drift, std::abs(before - after));
    }
  CHECK(max_drift < 1e-9);
}

TEST_CASE("transform_cloud: preserves source tags") {
  PointCloud3d cloud = PointCloud3d::from_vectors({{0, 0, 0}, {1, 1, 1}});
  cloud.sources() = {PointSource::camera, PointSource::lidar};
  const PointCloud3d moved =
      transform_cloud(Pose3d::translation(1, 2, 3), cloud);
  REQUIRE(moved.has_sources());
  CHECK(moved.sources()[1] == PointSource::lidar);
}

TEST_CASE("fit_obb: axis-aligned box corners") {
  std::vector<Eigen::Vector3d> corners;
  for (int sx : {-1, 1})
    for (int sy : {-1, 1})
      for (int sz : {-1, 1})
        corners.emplace_back(sx * 0.1, sy * 0.05, sz * 0.025);
  const PointCloud3d cloud = PointCloud3d::from_vectors(corners);

  for (bool gravity : {false, true}) {
    const OrientedBox3d box = fit_obb(cloud, {gravity});
    CHECK(box.center.norm() < 1e-9);
    const Eigen::Vector3d e = sorted_extents(box);
    CHECK(std::abs(e[0] - 0.025) < 1e-9);
    CHECK(std::abs(e[1] - 0.05) < 1e-9);
    CHECK(std::abs(e[2] - 0.1) < 1e-9);
    // Canonical ordering: axis 0 carries the largest extent.
    CHECK(box.half_extents[0] >= box.half_extents[1]);
    CHECK(box.half_extents[1] >= box.half_extents[2]);
    // Right-handed frame, positive-hemisphere quaternion.
    CHECK(box.axes().determinant() > 0.0);
    CHECK(box.rotation.w() >= 0.0);
    for (const auto& c : corners) CHECK(box.contains(c));
  }
}

TEST_CASE("fit_obb: degenerate inputs") {
  CHECK_THROWS_AS(fit_obb(PointCloud3d::from_vectors({{1, 2, 3}}),
                          ObbFitOptions{.gravity_aligned = true}),
                  TooFewPointsError);
  CHECK_THROWS_AS(
      fit_obb(PointCloud3d::from_vectors({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}),
              ObbFitOptions{.gravity_aligned = false}),
      TooFewPointsError);
  // Coplanar points: rank-deficient covariance in the full 3D fit.
  std::vector<Eigen::Vector3d> plane;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) plane.emplace_back(i * 0.1, j * 0.1, 0.3);
  CHECK_THROWS_AS(fit_obb(PointCloud3d::from_vectors(plane),
                          ObbFitOptions{.gravity_aligned = false}),
                  DegenerateCloudError);
  // The gravity-aligned 2D fit handles the same plane.
  const OrientedBox3d flat = fit_obb(PointCloud3d::from_vectors(plane),
                                     ObbFitOptions{.gravity_aligned = true});
  CHECK(flat.half_extents.minCoeff() > 0.0);
}

TEST_CASE("fit_obb: points sampled on a known rotated box") {
  // Oracle: generate from a known box, then check containment and volume.
  Rng rng(23);
  const Eigen::Vector3d extents(0.2, 0.12, 0.05);
  const PointCloud3d local = box_surface_cloud(rng, extents, 2000);
  const Pose3d pose(Eigen::Vector3d(0.4, -0.2, 0.9), random_rotation(rng));
  const PointCloud3d world = transform_cloud(pose, local);

  const OrientedBox3d box = fit_obb(world, {.gravity_aligned = false});
  const double true_volume = extents.prod();
  CHECK(box.volume() == doctest::Approx(true_volume).epsilon(0.05));
  for (Eigen::Index i = 0; i < world.size(); ++i)
    CHECK(box.contains(world.point(i)));
}

TEST_CASE("fit_obb: extents invariant under rigid transforms") {
  Rng rng(29);
  for (int trial = 0; trial < 10; ++trial) {
    const PointCloud3d cloud = random_cloud(rng, 200, 0.3);
    const Pose3d pose = random_pose(rng);
    const OrientedBox3d before = fit_obb(cloud, {.gravity_aligned = false});
    const OrientedBox3d after =
        fit_obb(transform_cloud(pose, cloud), {.gravity_aligned = false});
    const Eigen::Vector3d eb = sorted_extents(before);
    const Eigen::Vector3d ea = sorted_extents(after);
    CHECK((eb - ea).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("fit_obb: gravity-aligned keeps a vertical axis") {
  Rng rng(31);
  const PointCloud3d cloud = random_cloud(rng, 500, 0.2);
  const OrientedBox3d box = fit_obb(cloud, {.gravity_aligned = true});
  const Eigen::Matrix3d axes = box.axes();
  double best = 0.0;
  for (int k = 0; k < 3; ++k)
    best = std::max(best, std::abs(axes.col(k).z()));
  CHECK(best == doctest::Approx(1.0).epsilon(1e-9));
}
