#include "octafield/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "octafield/knn.hpp"

namespace octa::geom {

namespace {

void check_nonempty(const Eigen::Matrix3Xd& a, const Eigen::Matrix3Xd& b) {
  if (a.cols() == 0 || b.cols() == 0) {
    throw std::invalid_argument("metrics: empty point set");
  }
}

Eigen::VectorXd nn_distances(const Eigen::Matrix3Xd& from,
                             const GridIndex& to_index) {
  Eigen::VectorXd d(from.cols());
  for (int i = 0; i < from.cols(); ++i) {
    d(i) = to_index.nearest_distance(from.col(i));
  }
  return d;
}

}  // namespace

double chamfer(const Eigen::Matrix3Xd& a, const Eigen::Matrix3Xd& b,
               bool squared) {
  check_nonempty(a, b);
  GridIndex ia(a), ib(b);
  Eigen::VectorXd dab = nn_distances(a, ib);
  Eigen::VectorXd dba = nn_distances(b, ia);
  if (squared) {
    dab = dab.cwiseProduct(dab);
    dba = dba.cwiseProduct(dba);
  }
  return 0.5 * (dab.mean() + dba.mean());
}

double hausdorff(const Eigen::Matrix3Xd& a, const Eigen::Matrix3Xd& b) {
  check_nonempty(a, b);
  GridIndex ia(a), ib(b);
  return std::max(nn_distances(a, ib).maxCoeff(),
                  nn_distances(b, ia).maxCoeff());
}

double fscore_pct(const Eigen::Matrix3Xd& a, const Eigen::Matrix3Xd& b,
                  double tau) {
  check_nonempty(a, b);
  GridIndex ia(a), ib(b);
  const Eigen::VectorXd dab = nn_distances(a, ib);
  const Eigen::VectorXd dba = nn_distances(b, ia);
  const double precision =
      static_cast<double>((dab.array() <= tau).count()) / dab.size();
  const double recall =
      static_cast<double>((dba.array() <= tau).count()) / dba.size();
  if (precision + recall == 0.0) return 0.0;
  return 200.0 * precision * recall / (precision + recall);
}

double joint_bbox_diagonal(const Eigen::Matrix3Xd& a,
                           const Eigen::Matrix3Xd& b) {
  const Vec3 lo = a.rowwise().minCoeff().cwiseMin(b.rowwise().minCoeff());
  const Vec3 hi = a.rowwise().maxCoeff().cwiseMax(b.rowwise().maxCoeff());
  return (hi - lo).norm();
}

std::string MetricReport::to_json() const {
  std::ostringstream os;
  os.precision(17);
  os << "{\n"
     << "  \"chamfer_x1e3\": " << chamfer_x1e3 << ",\n"
     << "  \"hausdorff_x1e2\": " << hausdorff_x1e2 << ",\n"
     << "  \"fscore_pct\": " << fscore_pct << ",\n"
     << "  \"tau\": " << tau << ",\n"
     << "  \"n_samples\": " << n_samples << "\n"
     << "}\n";
  return os.str();
}

MetricReport evaluate_metrics(const Eigen::Matrix3Xd& a,
                              const Eigen::Matrix3Xd& b,
                              double tau_fraction) {
  MetricReport r;
  r.tau = tau_fraction * joint_bbox_diagonal(a, b);
  r.chamfer_x1e3 = 1e3 * chamfer(a, b);
  r.hausdorff_x1e2 = 1e2 * hausdorff(a, b);
  r.fscore_pct = fscore_pct(a, b, r.tau);
  r.n_samples = a.cols();
  return r;
}

Eigen::Matrix3Xd sample_mesh(const TriangleMesh& mesh, int n,
                             std::mt19937_64& rng) {
  if (mesh.faces.empty()) {
    throw std::invalid_argument("sample_mesh: empty mesh");
  }
  std::vector<double> cumulative(mesh.faces.size());
  double total = 0.0;
  for (size_t i = 0; i < mesh.faces.size(); ++i) {
    const auto& f = mesh.faces[i];
    const Vec3& v0 = mesh.vertices[f[0]];
    const Vec3& v1 = mesh.vertices[f[1]];
    const Vec3& v2 = mesh.vertices[f[2]];
    total += 0.5 * (v1 - v0).cross(v2 - v0).norm();
    cumulative[i] = total;
  }
  if (total <= 0.0) {
    throw std::invalid_argument("sample_mesh: zero total area");
  }
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Eigen::Matrix3Xd out(3, n);
  for (int i = 0; i < n; ++i) {
    const double pick = uni(rng) * total;
    const auto it =
        std::lower_bound(cumulative.begin(), cumulative.end(), pick);
    const size_t fi = std::min<size_t>(it - cumulative.begin(),
                                       mesh.faces.size() - 1);
    const auto& f = mesh.faces[fi];
    double r1 = std::sqrt(uni(rng));
    double r2 = uni(rng);
    const Vec3& v0 = mesh.vertices[f[0]];
    const Vec3& v1 = mesh.vertices[f[1]];
    const Vec3& v2 = mesh.vertices[f[2]];
    out.col(i) = (1.0 - r1) * v0 + r1 * (1.0 - r2) * v1 + r1 * r2 * v2;
  }
  return out;
}

double dirichlet_knn(const nets::LipNet& u, const Eigen::Matrix3Xd& cloud,
                     int k) {
  const int n = static_cast<int>(cloud.cols());
  if (n < k + 1) {
    throw std::invalid_argument("dirichlet_knn: cloud smaller than k+1");
  }
  nets::LipBatch fwd;
  lip_forward(u, cloud, fwd);
  GridIndex index(cloud);
  std::vector<int> idx;
  std::vector<double> dist;
  double energy = 0.0;
  for (int i = 0; i < n; ++i) {
    index.knn(cloud.col(i), k + 1, idx, dist);  // +1 to cover the point itself
    int used = 0;
    for (size_t j = 0; j < idx.size() && used < k; ++j) {
      if (idx[j] == i) continue;
      energy += (fwd.output.col(i) - fwd.output.col(idx[j])).squaredNorm();
      ++used;
    }
  }
  return energy;
}

}  // namespace octa::geom
