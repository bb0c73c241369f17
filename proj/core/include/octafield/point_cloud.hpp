#pragma once

#include <string>

#include "octafield/types.hpp"

namespace octa::geom {

struct NormalizeTransform {
  Vec3 center = Vec3::Zero();
  double scale = 1.0;  // normalized = (p - center) * scale

  Vec3 to_normalized(const Vec3& p) const { return (p - center) * scale; }
  Vec3 to_original(const Vec3& p) const { return p / scale + center; }
};

struct PointCloud {
  Eigen::Matrix3Xd points;  // normalized coordinates
  NormalizeTransform transform;
};

// Center at the bounding-box center and scale the longest edge to
// 2*(1-margin) so all points land inside [-1,1]^3.
PointCloud normalize(const Eigen::Matrix3Xd& raw, double margin = 0.05);

// Readers: whitespace-separated XYZ (extra columns ignored) and PLY
// vertices (ascii or binary little endian).
Eigen::Matrix3Xd read_xyz(const std::string& path);
Eigen::Matrix3Xd read_point_cloud(const std::string& path);  // by extension
void write_xyz(const std::string& path, const Eigen::Matrix3Xd& points);

}  // namespace octa::geom
