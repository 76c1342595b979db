#include "graspkit/reachability.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "graspkit/errors.hpp"
#include "graspkit/random.hpp"

namespace graspkit {

void ArmModel::validate() const {
  if (link_lengths.empty())
    throw std::invalid_argument("ArmModel: no links");
  for (double l : link_lengths)
    if (!(l > 0.0)) throw std::invalid_argument("ArmModel: link length <= 0");
  if (joint_limits.size() != 2 * link_lengths.size())
    throw std::invalid_argument("ArmModel: need two joint limits per link");
  for (const auto& jl : joint_limits)
    if (!(jl.min < jl.max))
      throw std::invalid_argument("ArmModel: joint limit min must be < max");
  if (vertical_lift_range < 0.0)
    throw std::invalid_argument("ArmModel: negative lift range");
}

double ArmModel::link_reach() const {
  double sum = 0.0;
  for (double l : link_lengths) sum += l;
  return sum;
}

Pose3d ArmModel::forward_kinematics(const std::vector<double>& config) const {
  if (config.size() != 1 + 2 * link_lengths.size())
    throw std::invalid_argument("forward_kinematics: bad configuration size");
  Pose3d pose = base_offset * Pose3d(Eigen::Vector3d(0, 0, config[0]),
                                     Eigen::Quaterniond::Identity());
  for (std::size_t i = 0; i < link_lengths.size(); ++i) {
    const Eigen::Quaterniond rot =
        Eigen::Quaterniond(Eigen::AngleAxisd(config[1 + 2 * i],
                                             Eigen::Vector3d::UnitZ())) *
        Eigen::Quaterniond(Eigen::AngleAxisd(config[2 + 2 * i],
                                             Eigen::Vector3d::UnitY()));
    pose = pose * Pose3d(Eigen::Vector3d::Zero(), rot) *
           Pose3d(Eigen::Vector3d(link_lengths[i], 0, 0),
                  Eigen::Quaterniond::Identity());
  }
  return pose;
}

namespace {

std::vector<Eigen::Vector3d> make_bin_directions(int num_bins) {
  std::vector<Eigen::Vector3d> dirs;
  if (num_bins == 6) {
    for (int axis = 0; axis < 3; ++axis)
      for (int sign : {-1, 1}) {
        Eigen::Vector3d d = Eigen::Vector3d::Zero();
        d[axis] = sign;
        dirs.push_back(d);
      }
    return dirs;
  }
  if (num_bins == 26) {
    for (int i = -1; i <= 1; ++i)
      for (int j = -1; j <= 1; ++j)
        for (int k = -1; k <= 1; ++k) {
          if (i == 0 && j == 0 && k == 0) continue;
          dirs.push_back(Eigen::Vector3d(i, j, k).normalized());
        }
    return dirs;
  }
  throw std::invalid_argument(
      "ReachabilityMap: direction_bins must be 6 or 26");
}

}  // namespace

ReachabilityMap::ReachabilityMap(double voxel_size,
                                 const Eigen::Vector3d& bounds_min,
                                 const Eigen::Vector3d& bounds_max,
                                 int num_bins)
    : voxel_size_(voxel_size),
      bounds_min_(bounds_min),
      bounds_max_(bounds_max),
      num_bins_(num_bins),
      bin_directions_(make_bin_directions(num_bins)) {
  if (!(voxel_size > 0.0))
    throw InvalidResolutionError("ReachabilityMap: voxel size must be > 0");
  for (int k = 0; k < 3; ++k) {
    if (!(bounds_min[k] < bounds_max[k]))
      throw std::invalid_argument("ReachabilityMap: empty bounds");
    dims_[k] = static_cast<int>(
        std::ceil((bounds_max[k] - bounds_min[k]) / voxel_size - 1e-12));
    dims_[k] = std::max(dims_[k], 1);
  }
  cells_.assign(static_cast<std::size_t>(dims_.x()) * dims_.y() * dims_.z(), 0);
}

std::optional<std::size_t> ReachabilityMap::voxel_index(
    const Eigen::Vector3d& p) const {
  Eigen::Vector3i cell;
  for (int k = 0; k < 3; ++k) {
    const double rel = (p[k] - bounds_min_[k]) / voxel_size_;
    const int c = static_cast<int>(std::floor(rel));
    if (c < 0 || c >= dims_[k]) return std::nullopt;
    cell[k] = c;
  }
  return static_cast<std::size_t>(cell.x()) +
         static_cast<std::size_t>(dims_.x()) *
             (static_cast<std::size_t>(cell.y()) +
              static_cast<std::size_t>(dims_.y()) *
                  static_cast<std::size_t>(cell.z()));
}

std::uint32_t ReachabilityMap::cell_mask(const Eigen::Vector3d& p) const {
  const auto idx = voxel_index(p);
  return idx ? cells_[*idx] : 0u;
}

double ReachabilityMap::reachable_fraction() const {
  if (cells_.empty()) return 0.0;
  std::size_t n = 0;
  for (std::uint32_t c : cells_)
    if (c != 0) ++n;
  return static_cast<double>(n) / static_cast<double>(cells_.size());
}

int ReachabilityMap::bin_of(const Eigen::Vector3d& dir) const {
  const Eigen::Vector3d d = dir.normalized();
  int best = 0;
  double best_dot = -2.0;
  for (std::size_t i = 0; i < bin_directions_.size(); ++i) {
    const double dot = d.dot(bin_directions_[i]);
    if (dot > best_dot) {
      best_dot = dot;
      best = static_cast<int>(i);
    }
  }
  return best;
}

namespace {

void sample_shard(const ArmModel& arm, const ReachabilityMap& map,
                  std::int64_t count, std::uint64_t shard_seed,
                  std::vector<std::uint32_t>& cells) {
  Rng rng(shard_seed);
  const std::size_t num_joints = arm.joint_limits.size();
  std::vector<double> config(1 + num_joints);
  const double max_reach = arm.max_reach() + 1e-9;
  const Eigen::Vector3d arm_base = arm.base_offset.position();
  for (std::int64_t s = 0; s < count; ++s) {
    config[0] = rng.uniform(0.0, arm.vertical_lift_range);
    for (std::size_t j = 0; j < num_joints; ++j)
      config[1 + j] = rng.uniform(arm.joint_limits[j].min, arm.joint_limits[j].max);
    const Pose3d ee = arm.forward_kinematics(config);
    // Reach bound must hold for every sample the kinematics produces.
    if ((ee.position() - arm_base).norm() > max_reach)
      throw std::logic_error(
          "build_reachability_map: sample beyond the kinematic reach bound");
    const auto idx = map.voxel_index(ee.position());
    if (!idx) continue;
    const int bin = map.bin_of(ee.x_axis());
    cells[*idx] |= (1u << bin);
  }
}

}  // namespace

ReachabilityMap build_reachability_map(const ArmModel& arm, double resolution,
                                       int direction_bins, std::int64_t samples,
                                       std::uint64_t seed, int jobs) {
  arm.validate();
  if (!(resolution > 0.0))
    throw InvalidResolutionError(
        "build_reachability_map: resolution must be > 0");
  if (samples < 10000)
    throw std::invalid_argument(
        "build_reachability_map: need at least 1e4 samples");

  const Eigen::Vector3d base = arm.base_offset.position();
  const double r = arm.link_reach();
  const Eigen::Vector3d lo = base - Eigen::Vector3d(r, r, r);
  const Eigen::Vector3d hi =
      base + Eigen::Vector3d(r, r, r + arm.vertical_lift_range);
  ReachabilityMap map(resolution, lo, hi, direction_bins);

  // Fixed shard layout: the merge is a bitwise OR, so any worker schedule
  // produces the same map.
  constexpr int kShards = 64;
  std::array<std::int64_t, kShards> counts{};
  for (int s = 0; s < kShards; ++s) counts[s] = samples / kShards;
  counts[kShards - 1] += samples % kShards;

  jobs = std::max(1, jobs);
  if (jobs == 1) {
    for (int s = 0; s < kShards; ++s)
      sample_shard(arm, map, counts[s], derive_seed(seed, s), map.cells());
  } else {
    std::vector<std::vector<std::uint32_t>> partial(
        static_cast<std::size_t>(jobs),
        std::vector<std::uint32_t>(map.cells().size(), 0));
    std::vector<std::thread> workers;
    for (int w = 0; w < jobs; ++w) {
      workers.emplace_back([&, w]() {
        for (int s = w; s < kShards; s += jobs)
          sample_shard(arm, map, counts[s], derive_seed(seed, s),
                       partial[static_cast<std::size_t>(w)]);
      });
    }
    for (auto& t : workers) t.join();
    for (const auto& p : partial)
      for (std::size_t i = 0; i < p.size(); ++i) map.cells()[i] |= p[i];
  }
  return map;
}

bool is_reachable(const ReachabilityMap& map, const Pose3d& pose) {
  const std::uint32_t mask = map.cell_mask(pose.position());
  if (mask == 0) return false;
  const int bin = map.bin_of(pose.x_axis());
  return (mask >> bin) & 1u;
}

Pose3d align_base(const OrientedBox3d& object_obb, const ReachabilityMap& map,
                  const KdTree3d* env, const Pose3d& current_base,
                  int candidates, const AlignBaseParams& params) {
  if (candidates < 1)
    throw std::invalid_argument("align_base: need at least one candidate");

  const Eigen::Vector3d target = object_obb.center;

  const auto score_of = [&](const Pose3d& base) {
    const Eigen::Vector3d local = base.inverse() * target;
    return std::popcount(map.cell_mask(local));
  };

  const auto footprint_free = [&](const Eigen::Vector3d& pos) {
    if (env == nullptr) return true;
    const double half_h = params.footprint_height / 2.0;
    const Eigen::Vector3d center(pos.x(), pos.y(), half_h);
    const double reach =
        std::sqrt(params.footprint_radius * params.footprint_radius +
                  half_h * half_h);
    for (Eigen::Index idx : env->radius_query(center, reach)) {
      // radius_query over-approximates the footprint cylinder; re-check.
      const Eigen::Vector3d p = env->point(idx);
      const double dx = p.x() - pos.x();
      const double dy = p.y() - pos.y();
      if (dx * dx + dy * dy <= params.footprint_radius * params.footprint_radius &&
          p.z() >= 0.0 && p.z() <= params.footprint_height)
        return false;
    }
    return true;
  };

  // First heading along the box's principal horizontal axis.
  Eigen::Matrix3d axes = object_obb.axes();
  Eigen::Vector3d principal = axes.col(0);
  if (std::abs(principal.z()) > 0.7) principal = axes.col(1);
  double start = std::atan2(principal.y(), principal.x());
  if (!std::isfinite(start)) start = 0.0;

  struct Candidate {
    Pose3d pose;
    int score;
    double displacement;
    int index;
  };
  std::vector<Candidate> valid;
  int index = 0;
  for (double radius : params.circle_radii) {
    for (int j = 0; j < candidates; ++j, ++index) {
      const double angle = start + 2.0 * M_PI * j / candidates;
      const Eigen::Vector3d pos(target.x() + radius * std::cos(angle),
                                target.y() + radius * std::sin(angle), 0.0);
      const double heading =
          std::atan2(target.y() - pos.y(), target.x() - pos.x());
      const Pose3d pose(pos, Eigen::Quaterniond(Eigen::AngleAxisd(
                                 heading, Eigen::Vector3d::UnitZ())));
      if (!footprint_free(pos)) continue;
      const int score = score_of(pose);
      if (score <= 0) continue;
      valid.push_back({pose, score,
                       (pos - current_base.position()).norm(), index});
    }
  }
  if (valid.empty())
    throw NoValidBasePoseError(
        "align_base: every candidate collides or has zero reachability");

  const Candidate* best = &valid.front();
  for (const auto& c : valid) {
    if (c.score > best->score ||
        (c.score == best->score && c.displacement < best->displacement) ||
        (c.score == best->score && c.displacement == best->displacement &&
         c.index < best->index))
      best = &c;
  }

  if (score_of(current_base) >=
      params.keep_current_ratio * static_cast<double>(best->score))
    return current_base;
  return best->pose;
}

namespace {

template <typename T>
void write_raw(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw MalformedFileError("reachability map: truncated file");
  return value;
}

constexpr std::uint32_t kMapMagic = 0x4D4B5247;  // "GRKM" little-endian
constexpr std::uint32_t kMapVersion = 1;

}  // namespace

void save_reachability_map(std::ostream& out, const ReachabilityMap& map) {
  write_raw(out, kMapMagic);
  write_raw(out, kMapVersion);
  write_raw(out, map.voxel_size());
  for (int k = 0; k < 3; ++k) write_raw(out, map.bounds_min()[k]);
  for (int k = 0; k < 3; ++k) write_raw(out, map.bounds_max()[k]);
  write_raw(out, static_cast<std::uint32_t>(map.num_bins()));
  for (int k = 0; k < 3; ++k)
    write_raw(out, static_cast<std::uint32_t>(map.dims()[k]));
  out.write(reinterpret_cast<const char*>(map.cells().data()),
            static_cast<std::streamsize>(map.cells().size() *
                                         sizeof(std::uint32_t)));
}

ReachabilityMap load_reachability_map(std::istream& in) {
  if (read_raw<std::uint32_t>(in) != kMapMagic)
    throw MalformedFileError("reachability map: bad magic");
  if (read_raw<std::uint32_t>(in) != kMapVersion)
    throw MalformedFileError("reachability map: unsupported version");
  const double voxel = read_raw<double>(in);
  Eigen::Vector3d lo, hi;
  for (int k = 0; k < 3; ++k) lo[k] = read_raw<double>(in);
  for (int k = 0; k < 3; ++k) hi[k] = read_raw<double>(in);
  const auto bins = read_raw<std::uint32_t>(in);
  ReachabilityMap map(voxel, lo, hi, static_cast<int>(bins));
  Eigen::Vector3i dims;
  for (int k = 0; k < 3; ++k)
    dims[k] = static_cast<int>(read_raw<std::uint32_t>(in));
  if (dims != map.dims())
    throw MalformedFileError("reachability map: inconsistent grid dimensions");
  in.read(reinterpret_cast<char*>(map.cells().data()),
          static_cast<std::streamsize>(map.cells().size() *
                                       sizeof(std::uint32_t)));
  if (!in) throw MalformedFileError("reachability map: truncated cell data");
  return map;
}

void save_reachability_map_file(const std::string& path,
                                const ReachabilityMap& map) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileNotFoundError("cannot open for writing: " + path);
  save_reachability_map(out, map);
}

ReachabilityMap load_reachability_map_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFoundError("cannot open: " + path);
  return load_reachability_map(in);
}

}  // namespace graspkit
