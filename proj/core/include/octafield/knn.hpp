#pragma once

#include <vector>

#include "octafield/types.hpp"

namespace octa::geom {

// Uniform-grid index over a point set for exact nearest-neighbor queries.
class GridIndex {
 public:
  explicit GridIndex(const Eigen::Matrix3Xd& points);

  // Exact k nearest points to q (the query site itself is included when it
  // is one of the indexed points). Results sorted by distance.
  void knn(const Vec3& q, int k, std::vector<int>& idx,
           std::vector<double>& dist) const;
  double nearest_distance(const Vec3& q) const;
  int size() const { return static_cast<int>(points_.cols()); }

 private:
  int cell_of(const Vec3& p) const;
  Eigen::Matrix3Xd points_;
  Vec3 origin_;
  double cell_ = 1.0;
  int nx_ = 1, ny_ = 1, nz_ = 1;
  std::vector<std::vector<int>> cells_;
};

// Point-to-point distance used across metrics; kept explicit so the test
// oracles can reproduce it bit for bit.
inline double point_distance(const Vec3& a, const Vec3& b) {
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  const double dz = a.z() - b.z();
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

}  // namespace octa::geom
