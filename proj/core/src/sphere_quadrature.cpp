#include "octafield/sphere_quadrature.hpp"

#include <cmath>

#include "octafield/sh_octahedral.hpp"

namespace octa::sh {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration.
void gauss_legendre(int n, std::vector<double>& nodes,
                    std::vector<double>& weights) {
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

}  // namespace

SphereQuadrature SphereQuadrature::product_rule(int n_theta, int n_phi) {
  std::vector<double> ct, wt;
  gauss_legendre(n_theta, ct, wt);
  SphereQuadrature q;
  q.points.reserve(static_cast<size_t>(n_theta) * n_phi);
  q.weights.reserve(static_cast<size_t>(n_theta) * n_phi);
  const double wphi = 2.0 * kPi / n_phi;
  for (int i = 0; i < n_theta; ++i) {
    const double z = ct[i];
    const double st = std::sqrt(std::max(0.0, 1.0 - z * z));
    for (int j = 0; j < n_phi; ++j) {
      const double phi = wphi * j;
      q.points.emplace_back(st * std::cos(phi), st * std::sin(phi), z);
      q.weights.push_back(wt[i] * wphi);
    }
  }
  return q;
}

const SphereQuadrature& SphereQuadrature::band4_rule() {
  static const SphereQuadrature q = product_rule(8, 20);  // degree 15 exact
  return q;
}

double SphereQuadrature::integrate(
    const std::function<double(const Vec3&)>& f) const {
  double acc = 0.0;
  for (size_t i = 0; i < points.size(); ++i) {
    acc += weights[i] * f(points[i]);
  }
  return acc;
}

Vec9 project_band4(const SphereQuadrature& quad,
                   const std::function<double(const Vec3&)>& f) {
  Vec9 acc = Vec9::Zero();
  for (size_t i = 0; i < quad.points.size(); ++i) {
    acc += quad.weights[i] * f(quad.points[i]) * sh_band4(quad.points[i]);
  }
  return acc;
}

Mat9 wigner_by_quadrature(const SphereQuadrature& quad, const Mat3& rotation) {
  Mat9 d = Mat9::Zero();
  for (size_t i = 0; i < quad.points.size(); ++i) {
    const Vec9 yi = sh_band4(quad.points[i]);
    const Vec9 yj = sh_band4(rotation.transpose() * quad.points[i]);
    d += quad.weights[i] * yi * yj.transpose();
  }
  return d;
}

}  // namespace octa::sh
