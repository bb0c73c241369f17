#include "octafield/knn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace octa::geom {

GridIndex::GridIndex(const Eigen::Matrix3Xd& points) : points_(points) {
  if (points.cols() == 0) {
    throw std::invalid_argument("GridIndex: empty point set");
  }
  const Vec3 lo = points.rowwise().minCoeff();
  const Vec3 hi = points.rowwise().maxCoeff();
  const Vec3 extent = (hi - lo).cwiseMax(1e-12);
  const double n = static_cast<double>(points.cols());
  // aim for ~2 points per cell
  const double vol = extent.prod();
  cell_ = std::cbrt(vol / std::max(1.0, n / 2.0));
  cell_ = std::max(cell_, 1e-9);
  origin_ = lo;
  nx_ = std::max(1, static_cast<int>(std::floor(extent.x() / cell_)) + 1);
  ny_ = std::max(1, static_cast<int>(std::floor(extent.y() / cell_)) + 1);
  nz_ = std::max(1, static_cast<int>(std::floor(extent.z() / cell_)) + 1);
  cells_.resize(static_cast<size_t>(nx_) * ny_ * nz_);
  for (int i = 0; i < points.cols(); ++i) {
    cells_[cell_of(points.col(i))].push_back(i);
  }
}

int GridIndex::cell_of(const Vec3& p) const {
  auto clampi = [](int v, int n) { return std::min(std::max(v, 0), n - 1); };
  const int ix = clampi(static_cast<int>(std::floor((p.x() - origin_.x()) / cell_)), nx_);
  const int iy = clampi(static_cast<int>(std::floor((p.y() - origin_.y()) / cell_)), ny_);
  const int iz = clampi(static_cast<int>(std::floor((p.z() - origin_.z()) / cell_)), nz_);
  return (iz * ny_ + iy) * nx_ + ix;
}

void GridIndex::knn(const Vec3& q, int k, std::vector<int>& idx,
                    std::vector<double>& dist) const {
  k = std::min<int>(k, size());
  idx.clear();
  dist.clear();
  // Walk shells around the cell of the query projected into the grid box;
  // projection onto a convex box only shrinks distances, so the shell lower
  // bound below stays valid for the true query point.
  auto clampc = [](double v, double lo, double hi) {
    return std::min(std::max(v, lo), hi);
  };
  const Vec3 qp(clampc(q.x(), origin_.x(), origin_.x() + nx_ * cell_),
                clampc(q.y(), origin_.y(), origin_.y() + ny_ * cell_),
                clampc(q.z(), origin_.z(), origin_.z() + nz_ * cell_));
  const int cx = static_cast<int>(std::floor((qp.x() - origin_.x()) / cell_));
  const int cy = static_cast<int>(std::floor((qp.y() - origin_.y()) / cell_));
  const int cz = static_cast<int>(std::floor((qp.z() - origin_.z()) / cell_));

  using Cand = std::pair<double, int>;
  std::priority_queue<Cand> heap;  // max-heap on distance, keeps best k

  for (int ring = 0;; ++ring) {
    // All candidates within `ring` cells of the query cell are examined;
    // points outside are at least (ring-1)*cell away.
    const double safe =
        ring == 0 ? 0.0 : (static_cast<double>(ring) - 1.0) * cell_;
    if (static_cast<int>(heap.size()) == k && heap.top().first <= safe) break;
    bool any_cell = false;
    for (int dz = -ring; dz <= ring; ++dz) {
      for (int dy = -ring; dy <= ring; ++dy) {
        for (int dx = -ring; dx <= ring; ++dx) {
          if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != ring) {
            continue;  // shell only
          }
          const int ix = cx + dx, iy = cy + dy, iz = cz + dz;
          if (ix < 0 || iy < 0 || iz < 0 || ix >= nx_ || iy >= ny_ ||
              iz >= nz_) {
            continue;
          }
          any_cell = true;
          for (int pid : cells_[(static_cast<size_t>(iz) * ny_ + iy) * nx_ + ix]) {
            const double d = point_distance(q, points_.col(pid));
            if (static_cast<int>(heap.size()) < k) {
              heap.emplace(d, pid);
            } else if (d < heap.top().first) {
              heap.pop();
              heap.emplace(d, pid);
            }
          }
        }
      }
    }
    // ring fully outside grid and heap already complete -> done
    if (!any_cell && ring > std::max({nx_, ny_, nz_})) break;
  }

  idx.resize(heap.size());
  dist.resize(heap.size());
  for (int i = static_cast<int>(heap.size()) - 1; i >= 0; --i) {
    idx[i] = heap.top().second;
    dist[i] = heap.top().first;
    heap.pop();
  }
}

double GridIndex::nearest_distance(const Vec3& q) const {
  std::vector<int> idx;
  std::vector<double> dist;
  knn(q, 1, idx, dist);
  return dist.empty() ? std::numeric_limits<double>::infinity() : dist[0];
}

}  // namespace octa::geom
