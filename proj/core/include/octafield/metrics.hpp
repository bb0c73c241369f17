#pragma once

#include <random>
#include <string>

#include "octafield/lip_net.hpp"
#include "octafield/marching_cubes.hpp"
#include "octafield/types.hpp"

namespace octa::geom {

// Symmetric Chamfer distance: mean of both directional means of unsquared
// nearest-neighbor distances (squared variant behind the flag).
double chamfer(const Eigen::Matrix3Xd& a, const Eigen::Matrix3Xd& b,
               bool squared = false);
// Symmetric Hausdorff: max of directional maxima.
double hausdorff(const Eigen::Matrix3Xd& a, const Eigen::Matrix3Xd& b);
// F-score in percent at absolute threshold tau (precision/recall harmonic
// mean on point-to-point nearest distances).
double fscore_pct(const Eigen::Matrix3Xd& a, const Eigen::Matrix3Xd& b,
                  double tau);
// Diagonal of the joint bounding box of both sets.
double joint_bbox_diagonal(const Eigen::Matrix3Xd& a,
                           const Eigen::Matrix3Xd& b);

struct MetricReport {
  double chamfer_x1e3 = 0.0;
  double hausdorff_x1e2 = 0.0;
  double fscore_pct = 0.0;
  double tau = 0.0;
  long n_samples = 0;
  std::string to_json() const;
};

// tau = tau_fraction of the joint bounding-box diagonal (paper default 0.5%).
MetricReport evaluate_metrics(const Eigen::Matrix3Xd& a,
                              const Eigen::Matrix3Xd& b,
                              double tau_fraction = 0.005);

// Area-weighted uniform surface samples, deterministic under the rng state.
Eigen::Matrix3Xd sample_mesh(const TriangleMesh& mesh, int n,
                             std::mt19937_64& rng);

// Unweighted KNN-graph Dirichlet energy of the field: for every point the
// sum of ||u(p_i) - u(p_j)||^2 over its k nearest true neighbors.
double dirichlet_knn(const nets::LipNet& u, const Eigen::Matrix3Xd& cloud,
                     int k);

}  // namespace octa::geom
