#pragma once

#include <functional>
#include <vector>

#include "octafield/types.hpp"

// Product Gauss-Legendre x uniform-azimuth quadrature on the unit sphere,
// exact for spherical polynomials up to the stated degree. Used as the
// independent oracle for the Wigner construction and descriptor identities.

namespace octa::sh {

struct SphereQuadrature {
  std::vector<Vec3> points;
  std::vector<double> weights;

  // Exact for polynomial degree <= min(2*n_theta - 1, n_phi - 1).
  static SphereQuadrature product_rule(int n_theta, int n_phi);
  // Rule sufficient for the band-4 identities (degree >= 9 products).
  static const SphereQuadrature& band4_rule();

  double integrate(const std::function<double(const Vec3&)>& f) const;
};

// Band-4 projection of an arbitrary sphere function.
Vec9 project_band4(const SphereQuadrature& quad,
                   const std::function<double(const Vec3&)>& f);

// Wigner matrix through quadrature alone: D_ij = Int Y_i(s) Y_j(R^T s) ds.
Mat9 wigner_by_quadrature(const SphereQuadrature& quad, const Mat3& rotation);

}  // namespace octa::sh
