#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "graspkit/errors.hpp"
#include "graspkit/geometry.hpp"
#include "graspkit/kdtree.hpp"

namespace graspkit {

template <typename Scalar>
struct IcpParams {
  int max_iterations = 50;
  /// Stop when the rmse improvement falls below this (meters).
  Scalar convergence_eps = Scalar(1e-6);
  /// Correspondences farther apart than this are ignored (meters).
  Scalar max_correspondence_dist = Scalar(0.05);
};

template <typename Scalar>
struct RegistrationResult {
  Pose3<Scalar> model_to_scene;
  Scalar rmse = Scalar(0);
  int iterations = 0;
  bool converged = false;
  /// rmse after each accepted update, in iteration order. Non-increasing.
  std::vector<Scalar> rmse_history;
};

namespace detail {

/// Least-squares rigid alignment of paired points (Kabsch, SVD of the
/// cross-covariance). Returns the pose mapping src onto dst.
template <typename Scalar>
Pose3<Scalar> rigid_align(const Eigen::Matrix<Scalar, 3, Eigen::Dynamic>& src,
                          const Eigen::Matrix<Scalar, 3, Eigen::Dynamic>& dst) {
  using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
  using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
  const Vector3 src_mean = src.rowwise().mean();
  const Vector3 dst_mean = dst.rowwise().mean();
  const Matrix3 cross = (dst.colwise() - dst_mean) *
                        (src.colwise() - src_mean).transpose();
  Eigen::JacobiSVD<Matrix3> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix3 d = Matrix3::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < Scalar(0))
    d(2, 2) = Scalar(-1);
  const Matrix3 rot = svd.matrixU() * d * svd.matrixV().transpose();
  return Pose3<Scalar>(dst_mean - rot * src_mean, rot);
}

}  // namespace detail

/// Point-to-point ICP. Per iteration: nearest-neighbor correspondences gated
/// by max_correspondence_dist, then a closed-form rigid update. An update that
/// would raise the rmse (possible when the gate admits new pairs) is rejected
/// and treated as converged, so the recorded rmse sequence never increases.
template <typename Scalar>
RegistrationResult<Scalar> icp_register(const PointCloud<Scalar>& model,
                                        const PointCloud<Scalar>& scene,
                                        const Pose3<Scalar>& init,
                                        const IcpParams<Scalar>& params = {}) {
  using Matrix3X = Eigen::Matrix<Scalar, 3, Eigen::Dynamic>;

  if (model.size() < 3 || scene.size() < 3)
    throw TooFewPointsError("icp_register: both clouds need at least 3 points");

  const KdTree<Scalar> scene_tree(scene);
  const Scalar gate2 =
      params.max_correspondence_dist * params.max_correspondence_dist;

  RegistrationResult<Scalar> result;
  result.model_to_scene = init;
  Scalar prev_rmse = std::numeric_limits<Scalar>::infinity();

  std::vector<Eigen::Index> model_idx, scene_idx;
  model_idx.reserve(static_cast<std::size_t>(model.size()));
  scene_idx.reserve(static_cast<std::size_t>(model.size()));

  for (int iter = 1; iter <= params.max_iterations; ++iter) {
    const Matrix3X moved =
        (result.model_to_scene.rotation_matrix() * model.points()).colwise() +
        result.model_to_scene.position();

    model_idx.clear();
    scene_idx.clear();
    for (Eigen::Index i = 0; i < moved.cols(); ++i) {
      const auto [j, dist] = scene_tree.nearest(moved.col(i));
      if (dist * dist <= gate2) {
        model_idx.push_back(i);
        scene_idx.push_back(j);
      }
    }
    if (model_idx.size() < 3) {
      if (iter == 1)
        throw NoCorrespondencesError(
            "icp_register: fewer than 3 correspondences within "
            "max_correspondence_dist at the initial pose");
      break;
    }

    Matrix3X src(3, static_cast<Eigen::Index>(model_idx.size()));
    Matrix3X dst(3, static_cast<Eigen::Index>(model_idx.size()));
    for (std::size_t k = 0; k < model_idx.size(); ++k) {
      src.col(static_cast<Eigen::Index>(k)) = moved.col(model_idx[k]);
      dst.col(static_cast<Eigen::Index>(k)) = scene.point(scene_idx[k]);
    }

    const Pose3<Scalar> update = detail::rigid_align<Scalar>(src, dst);
    const Matrix3X aligned =
        (update.rotation_matrix() * src).colwise() + update.position();
    const Scalar rmse =
        std::sqrt((aligned - dst).colwise().squaredNorm().mean());

    if (rmse > prev_rmse) {
      // Correspondence churn made things worse; keep the previous pose.
      result.converged = true;
      break;
    }

    result.model_to_scene = update * result.model_to_scene;
    result.rmse = rmse;
    result.iterations = iter;
    result.rmse_history.push_back(rmse);

    if (prev_rmse - rmse < params.convergence_eps) {
      result.converged = true;
      break;
    }
    prev_rmse = rmse;
  }
  return result;
}

/// ICP with the initialization used by the planning pipeline: the model
/// centroid is moved to the center of the scene cloud's box, and a yaw sweep
/// about world up ({0, 90, 180, 270} degrees about the model centroid) seeds
/// four branches. Each branch runs a coarse-to-fine correspondence-gate
/// schedule (gate, gate/3, gate/9) — the tighter gates shed the far-field
/// pairs that bias partial-view alignments. The branch with the lowest final
/// rmse wins; ties go to the earliest yaw.
template <typename Scalar>
RegistrationResult<Scalar> icp_register_yaw_sweep(
    const PointCloud<Scalar>& model, const PointCloud<Scalar>& scene,
    const IcpParams<Scalar>& params = {}) {
  using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

  if (model.size() < 3 || scene.size() < 3)
    throw TooFewPointsError("icp_register: both clouds need at least 3 points");

  Vector3 target;
  try {
    target = fit_obb(scene, ObbFitOptions{.gravity_aligned = true}).center;
  } catch (const Error&) {
    target = scene.centroid();
  }
  const Vector3 model_mean = model.centroid();

  // Every icp_register call stops at the first rmse increase (correspondence
  // churn); restarting from the stopped pose absorbs the churn step and keeps
  // going, so each stage is run until restarts stop paying off.
  const auto run_stage = [&](RegistrationResult<Scalar> current,
                             const IcpParams<Scalar>& stage_params)
      -> RegistrationResult<Scalar> {
    for (int repeat = 0; repeat < 8; ++repeat) {
      RegistrationResult<Scalar> next = icp_register(
          model, scene, current.model_to_scene, stage_params);
      const bool improved = next.rmse < current.rmse - stage_params.convergence_eps;
      current = next;
      if (!improved && repeat > 0) break;
    }
    return current;
  };

  const auto run_schedule = [&](const Pose3<Scalar>& init)
      -> RegistrationResult<Scalar> {
    RegistrationResult<Scalar> result = icp_register(model, scene, init, params);
    result = run_stage(result, params);
    for (const Scalar divisor : {Scalar(2), Scalar(4), Scalar(8)}) {
      IcpParams<Scalar> finer = params;
      finer.max_correspondence_dist = params.max_correspondence_dist / divisor;
      try {
        result = run_stage(result, finer);
      } catch (const NoCorrespondencesError&) {
        break;
      }
    }
    return result;
  };

  // Two translation starts per yaw: the box center of the partial cloud and
  // its centroid. Their errors point in different directions on one-sided
  // views, so at least one tends to start inside the right basin.
  const std::array<Vector3, 2> targets = {target, scene.centroid()};

  RegistrationResult<Scalar> best;
  bool have_best = false;
  for (int k = 0; k < 4; ++k) {
    const Scalar yaw = Scalar(k) * Scalar(M_PI / 2.0);
    const Pose3<Scalar> spin(Vector3::Zero(),
                             Eigen::Quaternion<Scalar>(Eigen::AngleAxis<Scalar>(
                                 yaw, Vector3::UnitZ())));
    for (const Vector3& t : targets) {
      // Rotate about the model centroid, then move the centroid onto t.
      const Pose3<Scalar> init =
          Pose3<Scalar>(t, Eigen::Quaternion<Scalar>::Identity()) * spin *
          Pose3<Scalar>(-model_mean, Eigen::Quaternion<Scalar>::Identity());
      RegistrationResult<Scalar> attempt;
      try {
        attempt = run_schedule(init);
      } catch (const NoCorrespondencesError&) {
        continue;
      }
      if (!have_best || attempt.rmse < best.rmse) {
        best = attempt;
        have_best = true;
      }
    }
  }
  if (!have_best)
    throw NoCorrespondencesError(
        "icp_register: no yaw-sweep initialization produced correspondences");
  return best;
}

/// Union of the partial cloud and the registered model cloud. The registered
/// model's points are tagged synthetic when the partial cloud carries tags.
template <typename Scalar>
PointCloud<Scalar> complete_cloud(const PointCloud<Scalar>& partial,
                                  const PointCloud<Scalar>& model,
                                  const RegistrationResult<Scalar>& result) {
  if (!result.converged)
    throw NotConvergedError("complete_cloud: registration did not converge");
  PointCloud<Scalar> moved = transform_cloud(result.model_to_scene, model);
  if (partial.has_sources()) {
    moved.sources().assign(static_cast<std::size_t>(moved.size()),
                           PointSource::synthetic);
  } else {
    moved.sources().clear();
  }
  return concatenate(partial, moved);
}

using IcpParamsD = IcpParams<double>;
using RegistrationResultD = RegistrationResult<double>;

}  // namespace graspkit
