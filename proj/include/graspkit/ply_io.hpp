#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "graspkit/geometry.hpp"

namespace graspkit {

struct LoadDiagnostics {
  /// Points dropped because a coordinate was NaN or infinite.
  std::size_t dropped_nonfinite = 0;
};

/// Loads a point cloud from PLY (ASCII or binary little-endian, vertex x/y/z
/// as float or double) or from plain whitespace-separated x y z text ('#'
/// comments allowed). Files starting with the "ply" magic are parsed as PLY
/// regardless of extension. Non-finite points are dropped and counted.
PointCloud3d load_point_cloud(const std::string& path,
                              LoadDiagnostics* diagnostics = nullptr);

/// Writes vertex x/y/z as 32-bit floats. Binary is little-endian; ASCII uses
/// shortest-roundtrip formatting. Both are deterministic.
void save_point_cloud_ply(const std::string& path, const PointCloud3d& cloud,
                          bool binary = true);

struct ColoredPoint {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  std::uint8_t r = 255, g = 255, b = 255;
};

/// Binary little-endian PLY with per-vertex uchar red/green/blue.
void save_colored_ply(const std::string& path,
                      const std::vector<ColoredPoint>& points);

}  // namespace graspkit
