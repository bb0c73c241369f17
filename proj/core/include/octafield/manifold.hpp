#pragma once

#include <vector>

#include "octafield/types.hpp"

// Loss landscape over unit directions against the canonical frame: for a
// direction d the loss compares q0 with its closest d-aligned projection.
// The minima sit at the six representation vectors.

namespace octa::losses {

enum class ManifoldLoss { kL1, kL2, kCosine };

double manifold_loss_value(ManifoldLoss kind, const Vec3& direction);

struct ManifoldSample {
  Vec3 direction;
  double loss;
};

// Fibonacci-sphere sweep of n directions.
std::vector<ManifoldSample> loss_manifold(ManifoldLoss kind, int n_directions);

// Indices of samples strictly below all of their k nearest neighbors.
std::vector<int> manifold_local_minima(const std::vector<ManifoldSample>& sweep,
                                       int k_neighbors = 8);

// Derivative-free descent on the sphere from a starting direction; lands on
// the basin minimum of the continuous loss.
ManifoldSample refine_manifold_minimum(ManifoldLoss kind, const Vec3& start);

// Sweep, flag discrete minima, refine each and deduplicate: the distinct
// local minimizers of the continuous manifold.
std::vector<ManifoldSample> distinct_manifold_minima(ManifoldLoss kind,
                                                     int n_directions,
                                                     double merge_angle = 0.05);

}  // namespace octa::losses
