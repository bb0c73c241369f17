#pragma once

#include <random>

#include "octafield/types.hpp"

namespace octa::train {

using Rng = std::mt19937_64;

// Per-point close-sample radius: distance to the k-th nearest neighbor with
// the point itself counted (k=51 is the point plus 50 true neighbors).
// Clamped below by 1e-12 so duplicate points keep a positive sigma.
Eigen::VectorXd knn_sigma(const Eigen::Matrix3Xd& points, int k = 51);

// n points, each a uniformly chosen cloud point plus an isotropic Gaussian
// offset with that point's sigma.
Eigen::Matrix3Xd sample_close(const Eigen::Matrix3Xd& points,
                              const Eigen::VectorXd& sigma, int n, Rng& rng);

// n points uniform in the normalized bounding cube [-1,1]^3.
Eigen::Matrix3Xd sample_off(int n, Rng& rng);

// Uniform random subset of n columns (whole cloud when n >= size).
Eigen::Matrix3Xd sample_subset(const Eigen::Matrix3Xd& points, int n,
                               Rng& rng);

}  // namespace octa::train
