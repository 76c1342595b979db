#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "graspkit/errors.hpp"
#include "graspkit/geometry.hpp"

namespace graspkit {

/// Immutable balanced 3D tree over the points of a source cloud. Construction
/// splits at the median along the widest-spread axis of each node's bounding
/// box; the comparator breaks coordinate ties by point index, so the tree is a
/// pure function of the input order. Queries use closed-ball semantics
/// (distance <= radius). Queries are read-only and safe to run concurrently.
template <typename Scalar>
class KdTree {
 public:
  using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
  using Matrix3X = Eigen::Matrix<Scalar, 3, Eigen::Dynamic>;

  explicit KdTree(const PointCloud<Scalar>& cloud, Eigen::Index leaf_capacity = 8)
      : points_(cloud.points()), leaf_capacity_(std::max<Eigen::Index>(1, leaf_capacity)) {
    if (cloud.empty()) throw EmptyCloudError("KdTree: empty cloud");
    if (!points_.allFinite())
      throw Error("KdTree: cloud contains non-finite coordinates");
    order_.resize(static_cast<std::size_t>(points_.cols()));
    for (std::size_t i = 0; i < order_.size(); ++i)
      order_[i] = static_cast<Eigen::Index>(i);
    nodes_.reserve(2 * order_.size() / static_cast<std::size_t>(leaf_capacity_) + 4);
    build(0, points_.cols(), 1);
  }

  Eigen::Index size() const { return points_.cols(); }

  /// The indexed source point (the tree keeps its own copy of the cloud).
  Vector3 point(Eigen::Index i) const { return points_.col(i); }

  /// Maximum number of nodes on a root-to-leaf path.
  int depth() const { return depth_; }

  /// Indices of all points with Euclidean distance <= radius from center.
  /// Order follows the deterministic tree traversal.
  std::vector<Eigen::Index> radius_query(const Vector3& center, Scalar radius) const {
    std::vector<Eigen::Index> out;
    if (radius < Scalar(0)) return out;
    const Scalar r2 = radius * radius;
    radius_walk(0, center, r2, out);
    return out;
  }

  /// Globally nearest point; ties resolved toward the lowest index.
  std::pair<Eigen::Index, Scalar> nearest(const Vector3& query) const {
    Eigen::Index best_index = -1;
    Scalar best_d2 = std::numeric_limits<Scalar>::infinity();
    nearest_walk(0, query, best_index, best_d2);
    return {best_index, std::sqrt(best_d2)};
  }

 private:
  struct Node {
    Vector3 box_min, box_max;
    Eigen::Index begin = 0, end = 0;  // range into order_ (leaf only)
    int left = -1, right = -1;
  };

  int build(Eigen::Index begin, Eigen::Index end, int level) {
    const int index = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    depth_ = std::max(depth_, level);

    Vector3 lo = points_.col(order_[static_cast<std::size_t>(begin)]);
    Vector3 hi = lo;
    for (Eigen::Index i = begin + 1; i < end; ++i) {
      const auto p = points_.col(order_[static_cast<std::size_t>(i)]);
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    nodes_[index].box_min = lo;
    nodes_[index].box_max = hi;

    if (end - begin <= leaf_capacity_) {
      nodes_[index].begin = begin;
      nodes_[index].end = end;
      return index;
    }

    int axis = 0;
    (hi - lo).maxCoeff(&axis);
    const Eigen::Index mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid,
                     order_.begin() + end,
                     [&](Eigen::Index a, Eigen::Index b) {
                       const Scalar ca = points_(axis, a);
                       const Scalar cb = points_(axis, b);
                       return ca < cb || (ca == cb && a < b);
                     });

    const int left = build(begin, mid, level + 1);
    const int right = build(mid, end, level + 1);
    nodes_[index].left = left;
    nodes_[index].right = right;
    return index;
  }

  Scalar box_distance2(const Node& node, const Vector3& q) const {
    Scalar d2 = Scalar(0);
    for (int k = 0; k < 3; ++k) {
      Scalar d = Scalar(0);
      if (q[k] < node.box_min[k])
        d = node.box_min[k] - q[k];
      else if (q[k] > node.box_max[k])
        d = q[k] - node.box_max[k];
      d2 += d * d;
    }
    return d2;
  }

  void radius_walk(int node_index, const Vector3& center, Scalar r2,
                   std::vector<Eigen::Index>& out) const {
    const Node& node = nodes_[static_cast<std::size_t>(node_index)];
    if (box_distance2(node, center) > r2) return;
    if (node.left < 0) {
      for (Eigen::Index i = node.begin; i < node.end; ++i) {
        const Eigen::Index p = order_[static_cast<std::size_t>(i)];
        if ((points_.col(p) - center).squaredNorm() <= r2) out.push_back(p);
      }
      return;
    }
    radius_walk(node.left, center, r2, out);
    radius_walk(node.right, center, r2, out);
  }

  void nearest_walk(int node_index, const Vector3& q, Eigen::Index& best_index,
                    Scalar& best_d2) const {
    const Node& node = nodes_[static_cast<std::size_t>(node_index)];
    // Strict comparison: an equally distant point in this subtree may carry a
    // lower index, so equality must not prune.
    if (box_distance2(node, q) > best_d2) return;
    if (node.left < 0) {
      for (Eigen::Index i = node.begin; i < node.end; ++i) {
        const Eigen::Index p = order_[static_cast<std::size_t>(i)];
        const Scalar d2 = (points_.col(p) - q).squaredNorm();
        if (d2 < best_d2 || (d2 == best_d2 && p < best_index)) {
          best_d2 = d2;
          best_index = p;
        }
      }
      return;
    }
    const Scalar dl = box_distance2(nodes_[static_cast<std::size_t>(node.left)], q);
    const Scalar dr = box_distance2(nodes_[static_cast<std::size_t>(node.right)], q);
    // Visit the closer child first; on ties the left child keeps lower-index
    // priority.
    if (dl <= dr) {
      nearest_walk(node.left, q, best_index, best_d2);
      nearest_walk(node.right, q, best_index, best_d2);
    } else {
      nearest_walk(node.right, q, best_index, best_d2);
      nearest_walk(node.left, q, best_index, best_d2);
    }
  }

  Matrix3X points_;
  Eigen::Index leaf_capacity_;
  std::vector<Eigen::Index> order_;
  std::vector<Node> nodes_;
  int depth_ = 0;
};

using KdTree3d = KdTree<double>;

}  // namespace graspkit
