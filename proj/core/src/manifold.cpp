#include "octafield/manifold.hpp"

#include <cmath>

#include "octafield/knn.hpp"
#include "octafield/sh_octahedral.hpp"

namespace octa::losses {

double manifold_loss_value(ManifoldLoss kind, const Vec3& direction) {
  const OctaCoeffs q0 = sh::canonical_coeffs();
  const OctaCoeffs proj = sh::project_normal(q0, direction);
  switch (kind) {
    case ManifoldLoss::kL1:
      return (q0 - proj).cwiseAbs().sum();
    case ManifoldLoss::kL2:
      return (q0 - proj).norm();
    case ManifoldLoss::kCosine:
      return 1.0 - q0.dot(proj);
  }
  return 0.0;
}

std::vector<ManifoldSample> loss_manifold(ManifoldLoss kind,
                                          int n_directions) {
  std::vector<ManifoldSample> sweep(n_directions);
  const double golden = 2.39996322972865332;  // 2*pi*(1 - 1/phi)
  for (int i = 0; i < n_directions; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / n_directions;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    sweep[i].direction = Vec3(rho * std::cos(phi), rho * std::sin(phi), z);
    sweep[i].loss = manifold_loss_value(kind, sweep[i].direction);
  }
  return sweep;
}

ManifoldSample refine_manifold_minimum(ManifoldLoss kind, const Vec3& start) {
  Vec3 d = start.normalized();
  double value = manifold_loss_value(kind, d);
  double step = 0.02;
  while (step > 1e-9) {
    // orthonormal tangent frame at d
    const Vec3 any = std::abs(d.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
    const Vec3 t1 = d.cross(any).normalized();
    const Vec3 t2 = d.cross(t1);
    bool moved = false;
    for (int i = 0; i < 8; ++i) {
      const double a = 2.0 * 3.14159265358979323846 * i / 8.0;
      const Vec3 cand =
          (d + step * (std::cos(a) * t1 + std::sin(a) * t2)).normalized();
      const double v = manifold_loss_value(kind, cand);
      if (v < value) {
        value = v;
        d = cand;
        moved = true;
        break;
      }
    }
    if (!moved) step *= 0.5;
  }
  return {d, value};
}

std::vector<ManifoldSample> distinct_manifold_minima(ManifoldLoss kind,
                                                     int n_directions,
                                                     double merge_angle) {
  const auto sweep = loss_manifold(kind, n_directions);
  const auto flagged = manifold_local_minima(sweep, 16);
  std::vector<ManifoldSample> out;
  for (int idx : flagged) {
    const ManifoldSample refined =
        refine_manifold_minimum(kind, sweep[idx].direction);
    bool known = false;
    for (const auto& m : out) {
      if ((m.direction - refined.direction).norm() < merge_angle) {
        known = true;
        break;
      }
    }
    if (!known) out.push_back(refined);
  }
  return out;
}

std::vector<int> manifold_local_minima(const std::vector<ManifoldSample>& sweep,
                                       int k_neighbors) {
  Eigen::Matrix3Xd dirs(3, sweep.size());
  for (size_t i = 0; i < sweep.size(); ++i) dirs.col(i) = sweep[i].direction;
  geom::GridIndex index(dirs);
  std::vector<int> minima;
  std::vector<int> idx;
  std::vector<double> dist;
  for (size_t i = 0; i < sweep.size(); ++i) {
    index.knn(sweep[i].direction, k_neighbors + 1, idx, dist);
    bool is_min = true;
    for (int j : idx) {
      if (j == static_cast<int>(i)) continue;
      if (sweep[j].loss <= sweep[i].loss) {
        is_min = false;
        break;
      }
    }
    if (is_min) minima.push_back(static_cast<int>(i));
  }
  return minima;
}

}  // namespace octa::losses
