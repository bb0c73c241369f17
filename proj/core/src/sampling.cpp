#include "octafield/sampling.hpp"

#include <stdexcept>

#include "octafield/knn.hpp"

namespace octa::train {

Eigen::VectorXd knn_sigma(const Eigen::Matrix3Xd& points, int k) {
  const int n = static_cast<int>(points.cols());
  if (n < k) {
    throw std::invalid_argument("knn_sigma: cloud smaller than k");
  }
  geom::GridIndex index(points);
  Eigen::VectorXd sigma(n);
  std::vector<int> idx;
  std::vector<double> dist;
  for (int i = 0; i < n; ++i) {
    index.knn(points.col(i), k, idx, dist);
    sigma(i) = std::max(dist.back(), 1e-12);
  }
  return sigma;
}

Eigen::Matrix3Xd sample_close(const Eigen::Matrix3Xd& points,
                              const Eigen::VectorXd& sigma, int n, Rng& rng) {
  std::uniform_int_distribution<int> pick(0, static_cast<int>(points.cols()) - 1);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::Matrix3Xd out(3, n);
  for (int i = 0; i < n; ++i) {
    const int j = pick(rng);
    const Vec3 offset(gauss(rng), gauss(rng), gauss(rng));
    out.col(i) = points.col(j) + sigma(j) * offset;
  }
  return out;
}

Eigen::Matrix3Xd sample_off(int n, Rng& rng) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Eigen::Matrix3Xd out(3, n);
  for (int i = 0; i < n; ++i) {
    out.col(i) = Vec3(uni(rng), uni(rng), uni(rng));
  }
  return out;
}

Eigen::Matrix3Xd sample_subset(const Eigen::Matrix3Xd& points, int n,
                               Rng& rng) {
  const int total = static_cast<int>(points.cols());
  if (n >= total) return points;
  // partial Fisher-Yates over an index vector
  std::vector<int> order(total);
  for (int i = 0; i < total; ++i) order[i] = i;
  Eigen::Matrix3Xd out(3, n);
  for (int i = 0; i < n; ++i) {
    std::uniform_int_distribution<int> pick(i, total - 1);
    std::swap(order[i], order[pick(rng)]);
    out.col(i) = points.col(order[i]);
  }
  return out;
}

}  // namespace octa::train
