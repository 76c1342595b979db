#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "graspkit/errors.hpp"

namespace graspkit {

/// World frame convention used throughout: right-handed, Z up, X forward from
/// the robot base at identity. All quantities are meters and radians.

enum class PointSource : std::uint8_t { camera = 0, lidar = 1, synthetic = 2 };

/// Rigid transform: rotation stored as a unit quaternion, translation in
/// meters. The orientation is renormalized by every constructor and
/// composition, so norm drift stays below 1e-9 over long chains.
template <typename Scalar>
class Pose3 {
 public:
  using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
  using Quaternion = Eigen::Quaternion<Scalar>;
  using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;

  Pose3() : position_(Vector3::Zero()), orientation_(Quaternion::Identity()) {}

  Pose3(const Vector3& position, const Quaternion& orientation)
      : position_(position), orientation_(orientation.normalized()) {}

  Pose3(const Vector3& position, const Matrix3& rotation)
      : position_(position), orientation_(Quaternion(rotation).normalized()) {}

  static Pose3 identity() { return Pose3(); }

  static Pose3 translation(Scalar x, Scalar y, Scalar z) {
    return Pose3(Vector3(x, y, z), Quaternion::Identity());
  }

  static Pose3 rotation(const Eigen::AngleAxis<Scalar>& aa) {
    return Pose3(Vector3::Zero(), Quaternion(aa));
  }

  const Vector3& position() const { return position_; }
  const Quaternion& orientation() const { return orientation_; }
  Matrix3 rotation_matrix() const { return orientation_.toRotationMatrix(); }

  /// Applies the transform to a point.
  Vector3 operator*(const Vector3& p) const {
    return orientation_ * p + position_;
  }

  /// Composition: (a * b) applies b first, then a.
  Pose3 operator*(const Pose3& other) const {
    return Pose3(position_ + orientation_ * other.position_,
                 orientation_ * other.orientation_);
  }

  Pose3 inverse() const {
    Quaternion inv = orientation_.conjugate();
    return Pose3(-(inv * position_), inv);
  }

  /// X axis of the local frame expressed in the parent frame.
  Vector3 x_axis() const { return orientation_ * Vector3::UnitX(); }
  Vector3 y_axis() const { return orientation_ * Vector3::UnitY(); }
  Vector3 z_axis() const { return orientation_ * Vector3::UnitZ(); }

 private:
  Vector3 position_;
  Quaternion orientation_;
};

template <typename Scalar>
Pose3<Scalar> compose(const Pose3<Scalar>& a, const Pose3<Scalar>& b) {
  return a * b;
}

/// Angular distance between two rotations in radians, sign-insensitive.
template <typename Scalar>
Scalar quaternion_angle(const Eigen::Quaternion<Scalar>& a,
                        const Eigen::Quaternion<Scalar>& b) {
  Scalar d = std::min<Scalar>(Scalar(1), std::abs(a.dot(b)));
  return Scalar(2) * std::acos(d);
}

/// Ordered set of 3D points (meters), stored as a 3xN matrix, with an optional
/// per-point source tag. Tags are either absent or one per point.
template <typename Scalar>
class PointCloud {
 public:
  using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
  using Matrix3X = Eigen::Matrix<Scalar, 3, Eigen::Dynamic>;

  PointCloud() = default;

  explicit PointCloud(Matrix3X points) : points_(std::move(points)) {}

  PointCloud(Matrix3X points, std::vector<PointSource> sources)
      : points_(std::move(points)), sources_(std::move(sources)) {}

  static PointCloud from_vectors(const std::vector<Vector3>& pts) {
    Matrix3X m(3, static_cast<Eigen::Index>(pts.size()));
    for (Eigen::Index i = 0; i < m.cols(); ++i) m.col(i) = pts[i];
    return PointCloud(std::move(m));
  }

  Eigen::Index size() const { return points_.cols(); }
  bool empty() const { return points_.cols() == 0; }

  Vector3 point(Eigen::Index i) const { return points_.col(i); }
  const Matrix3X& points() const { return points_; }
  Matrix3X& points() { return points_; }

  bool has_sources() const { return !sources_.empty(); }
  const std::vector<PointSource>& sources() const { return sources_; }
  std::vector<PointSource>& sources() { return sources_; }

  bool all_finite() const { return points_.allFinite(); }

  Vector3 centroid() const {
    if (empty()) throw EmptyCloudError("centroid of empty cloud");
    return points_.rowwise().mean();
  }

  void append(const PointCloud& other) {
    const Eigen::Index n = size();
    const Eigen::Index m = other.size();
    if (has_sources() || other.has_sources()) {
      sources_.resize(static_cast<std::size_t>(n), PointSource::camera);
      const auto& os = other.sources();
      for (Eigen::Index i = 0; i < m; ++i)
        sources_.push_back(os.empty() ? PointSource::camera
                                      : os[static_cast<std::size_t>(i)]);
    }
    points_.conservativeResize(3, n + m);
    points_.rightCols(m) = other.points();
  }

 private:
  Matrix3X points_;
  std::vector<PointSource> sources_;
};

/// Rigidly transforms every point; the count and all pairwise distances are
/// preserved.
template <typename Scalar>
PointCloud<Scalar> transform_cloud(const Pose3<Scalar>& pose,
                                   const PointCloud<Scalar>& cloud) {
  if (cloud.empty()) throw EmptyCloudError("transform_cloud: empty cloud");
  typename PointCloud<Scalar>::Matrix3X out =
      (pose.rotation_matrix() * cloud.points()).colwise() + pose.position();
  PointCloud<Scalar> result(std::move(out));
  if (cloud.has_sources()) result.sources() = cloud.sources();
  return result;
}

template <typename Scalar>
PointCloud<Scalar> concatenate(const PointCloud<Scalar>& a,
                               const PointCloud<Scalar>& b) {
  PointCloud<Scalar> out = a;
  out.append(b);
  return out;
}

/// Box with arbitrary orientation: center, unit-quaternion rotation and
/// strictly positive half extents. Boxes produced by fit_obb are canonical:
/// axis 0 carries the largest extent, the frame is right-handed, and the
/// quaternion lies in the positive hemisphere.
template <typename Scalar>
struct OrientedBox {
  using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
  using Quaternion = Eigen::Quaternion<Scalar>;
  using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;

  Vector3 center = Vector3::Zero();
  Quaternion rotation = Quaternion::Identity();
  Vector3 half_extents = Vector3::Zero();

  Matrix3 axes() const { return rotation.toRotationMatrix(); }

  Scalar volume() const {
    return Scalar(8) * half_extents.x() * half_extents.y() * half_extents.z();
  }

  std::array<Vector3, 8> corners() const {
    const Matrix3 r = axes();
    std::array<Vector3, 8> out;
    int k = 0;
    for (int sx : {-1, 1})
      for (int sy : {-1, 1})
        for (int sz : {-1, 1})
          out[k++] = center + r * Vector3(Scalar(sx) * half_extents.x(),
                                          Scalar(sy) * half_extents.y(),
                                          Scalar(sz) * half_extents.z());
    return out;
  }

  bool contains(const Vector3& p, Scalar tol = Scalar(1e-6)) const {
    const Vector3 local = rotation.conjugate() * (p - center);
    return (local.array().abs() <= half_extents.array() + tol).all();
  }
};

struct ObbFitOptions {
  /// Restricts one box axis to world up. Stabilizes fits on shallow tabletop
  /// depth crops and matches how household objects rest on surfaces.
  bool gravity_aligned = true;
};

namespace detail {

/// Deterministic direction: flip so the largest-magnitude component is
/// positive (first such component on ties).
template <typename Scalar>
inline void canonicalize_axis_sign(Eigen::Matrix<Scalar, 3, 1>& axis) {
  int arg = 0;
  axis.cwiseAbs().maxCoeff(&arg);
  if (axis[arg] < Scalar(0)) axis = -axis;
}

template <typename Scalar>
inline void canonicalize_quaternion_sign(Eigen::Quaternion<Scalar>& q) {
  const Scalar eps = Scalar(1e-12);
  Scalar lead = q.w();
  if (std::abs(lead) < eps) lead = q.x();
  if (std::abs(lead) < eps) lead = q.y();
  if (std::abs(lead) < eps) lead = q.z();
  if (lead < Scalar(0)) q.coeffs() = -q.coeffs();
}

}  // namespace detail

/// Fits an oriented bounding box by PCA of the point covariance. This is not
/// the minimum-volume box; it is O(n) and adequate for grasp planning on
/// segmented object clouds.
///
/// Requires >= 4 non-coplanar points, or >= 3 points when gravity_aligned
/// (the fit is then 2D in the horizontal plane plus the vertical extent).
template <typename Scalar>
OrientedBox<Scalar> fit_obb(const PointCloud<Scalar>& cloud,
                            const ObbFitOptions& options = {}) {
  using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
  using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;

  const Eigen::Index n = cloud.size();
  const Eigen::Index min_points = options.gravity_aligned ? 3 : 4;
  if (n < min_points)
    throw TooFewPointsError("fit_obb: need at least " +
                            std::to_string(min_points) + " points, got " +
                            std::to_string(n));

  const Vector3 mean = cloud.points().rowwise().mean();
  const auto centered = cloud.points().colwise() - mean;

  Matrix3 axes;
  if (options.gravity_aligned) {
    // 2D PCA of the horizontal coordinates; world up is the third axis.
    Eigen::Matrix<Scalar, 2, 2> cov2 =
        centered.template topRows<2>() *
        centered.template topRows<2>().transpose() / Scalar(n);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Scalar, 2, 2>> es(cov2);
    // Columns ordered ascending by eigenvalue; take the dominant one.
    Eigen::Matrix<Scalar, 2, 1> dir = es.eigenvectors().col(1);
    if (!dir.allFinite() || dir.norm() < Scalar(0.5))
      dir = Eigen::Matrix<Scalar, 2, 1>::UnitX();
    dir.normalize();
    axes.col(0) = Vector3(dir.x(), dir.y(), Scalar(0));
    axes.col(1) = Vector3(-dir.y(), dir.x(), Scalar(0));
    axes.col(2) = Vector3::UnitZ();
  } else {
    Matrix3 cov = centered * centered.transpose() / Scalar(n);
    Eigen::SelfAdjointEigenSolver<Matrix3> es(cov);
    const Vector3 evals = es.eigenvalues().cwiseMax(Scalar(0));
    const Scalar scale = std::max(evals.maxCoeff(), Scalar(1e-30));
    if (evals.minCoeff() <= scale * Scalar(1e-12))
      throw DegenerateCloudError(
          "fit_obb: rank-deficient covariance (coplanar or collinear points)");
    // Descending eigenvalue order.
    axes.col(0) = es.eigenvectors().col(2);
    axes.col(1) = es.eigenvectors().col(1);
    axes.col(2) = es.eigenvectors().col(0);
  }

  // Extents from min/max projections onto the axes.
  Vector3 half, mid;
  for (int k = 0; k < 3; ++k) {
    const auto proj = axes.col(k).transpose() * centered;
    const Scalar lo = proj.minCoeff();
    const Scalar hi = proj.maxCoeff();
    half[k] = (hi - lo) / Scalar(2);
    mid[k] = (hi + lo) / Scalar(2);
  }

  // Canonical order: descending extents, stable under ties.
  std::array<int, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return half[a] > half[b]; });

  OrientedBox<Scalar> box;
  Matrix3 sorted;
  for (int k = 0; k < 3; ++k) {
    sorted.col(k) = axes.col(order[k]);
    box.half_extents[k] = std::max(half[order[k]], Scalar(1e-9));
  }
  // Sign-fix axes 0 and 1, rebuild axis 2 right-handed.
  Vector3 a0 = sorted.col(0);
  Vector3 a1 = sorted.col(1);
  detail::canonicalize_axis_sign(a0);
  detail::canonicalize_axis_sign(a1);
  const Vector3 a2 = a0.cross(a1);
  Matrix3 rh;
  rh.col(0) = a0;
  rh.col(1) = a1;
  rh.col(2) = a2;
  box.rotation = typename OrientedBox<Scalar>::Quaternion(rh);
  box.rotation.normalize();
  detail::canonicalize_quaternion_sign(box.rotation);
  box.center = mean + axes.col(order[0]) * mid[order[0]] +
               axes.col(order[1]) * mid[order[1]] +
               axes.col(order[2]) * mid[order[2]];
  return box;
}

using Pose3d = Pose3<double>;
using PointCloud3d = PointCloud<double>;
using OrientedBox3d = OrientedBox<double>;

}  // namespace graspkit
