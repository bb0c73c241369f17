#include "octafield/sh_octahedral.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

namespace octa::sh {

namespace {

constexpr double kPi = 3.14159265358979323846;
// Zonal rescale so coeffs_from_axes(e_x,e_y,e_z) lands exactly on q0,
// 4*sqrt(21*pi)/63.
constexpr double kZonalScale = 0.51570818651368254;

Mat3 cross_matrix(const Vec3& v) {
  Mat3 k;
  k << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return k;
}

}  // namespace

OctaCoeffs canonical_coeffs() {
  OctaCoeffs q = OctaCoeffs::Zero();
  q[4] = kSqrt712;
  q[8] = kSqrt512;
  return q;
}

Vec9 sh_band4(const Vec3& v) {
  const double x = v.x(), y = v.y(), z = v.z();
  const double x2 = x * x, y2 = y * y, z2 = z * z;
  const double r2 = x2 + y2 + z2;
  static const double c44 = 0.75 * std::sqrt(35.0 / kPi);        // m=-4
  static const double c43 = 0.75 * std::sqrt(17.5 / kPi);        // m=+-3
  static const double c42 = 0.75 * std::sqrt(5.0 / kPi);         // m=-2
  static const double c41 = 0.75 * std::sqrt(2.5 / kPi);         // m=+-1
  static const double c40 = 0.1875 * std::sqrt(1.0 / kPi);       // m=0
  static const double c4p2 = 0.375 * std::sqrt(5.0 / kPi);       // m=+2
  static const double c4p4 = 0.1875 * std::sqrt(35.0 / kPi);     // m=+4
  Vec9 out;
  out[0] = c44 * x * y * (x2 - y2);
  out[1] = c43 * y * z * (3.0 * x2 - y2);
  out[2] = c42 * x * y * (7.0 * z2 - r2);
  out[3] = c41 * y * z * (7.0 * z2 - 3.0 * r2);
  out[4] = c40 * (35.0 * z2 * z2 - 30.0 * z2 * r2 + 3.0 * r2 * r2);
  out[5] = c41 * x * z * (7.0 * z2 - 3.0 * r2);
  out[6] = c4p2 * (x2 - y2) * (7.0 * z2 - r2);
  out[7] = c43 * x * z * (x2 - 3.0 * y2);
  out[8] = c4p4 * (x2 * x2 - 6.0 * x2 * y2 + y2 * y2);
  return out;
}

Vec5 sh_band2(const Vec3& v) {
  const double x = v.x(), y = v.y(), z = v.z();
  const double r2 = x * x + y * y + z * z;
  static const double c22 = 0.5 * std::sqrt(15.0 / kPi);
  static const double c20 = 0.25 * std::sqrt(5.0 / kPi);
  static const double c2p2 = 0.25 * std::sqrt(15.0 / kPi);
  Vec5 out;
  out[0] = c22 * x * y;
  out[1] = c22 * y * z;
  out[2] = c20 * (3.0 * z * z - r2);
  out[3] = c22 * x * z;
  out[4] = c2p2 * (x * x - y * y);
  return out;
}

Eigen::Matrix<double, 9, 3> sh_band4_gradient(const Vec3& v) {
  const double x = v.x(), y = v.y(), z = v.z();
  const double x2 = x * x, y2 = y * y, z2 = z * z;
  const double r2 = x2 + y2 + z2;
  static const double c44 = 0.75 * std::sqrt(35.0 / kPi);
  static const double c43 = 0.75 * std::sqrt(17.5 / kPi);
  static const double c42 = 0.75 * std::sqrt(5.0 / kPi);
  static const double c41 = 0.75 * std::sqrt(2.5 / kPi);
  static const double c40 = 0.1875 * std::sqrt(1.0 / kPi);
  static const double c4p2 = 0.375 * std::sqrt(5.0 / kPi);
  static const double c4p4 = 0.1875 * std::sqrt(35.0 / kPi);
  Eigen::Matrix<double, 9, 3> g;
  // xy(x^2-y^2) = x^3 y - x y^3
  g.row(0) << c44 * (3.0 * x2 * y - y2 * y), c44 * (x2 * x - 3.0 * x * y2), 0.0;
  // yz(3x^2-y^2)
  g.row(1) << c43 * (6.0 * x * y * z), c43 * (3.0 * x2 * z - 3.0 * y2 * z),
      c43 * (3.0 * x2 * y - y2 * y);
  // xy(7z^2-r^2) = xy(6z^2-x^2-y^2)
  g.row(2) << c42 * (y * (6.0 * z2 - 3.0 * x2 - y2)),
      c42 * (x * (6.0 * z2 - x2 - 3.0 * y2)), c42 * (12.0 * x * y * z);
  // yz(7z^2-3r^2) = yz(4z^2-3x^2-3y^2)
  g.row(3) << c41 * (-6.0 * x * y * z),
      c41 * (z * (4.0 * z2 - 3.0 * x2 - 9.0 * y2)),
      c41 * (y * (12.0 * z2 - 3.0 * x2 - 3.0 * y2));
  // 35z^4 - 30z^2 r^2 + 3r^4 = 8z^4 - 24z^2(x^2+y^2) + 3(x^2+y^2)^2
  {
    const double rho2 = x2 + y2;
    g.row(4) << c40 * (12.0 * x * rho2 - 48.0 * x * z2),
        c40 * (12.0 * y * rho2 - 48.0 * y * z2),
        c40 * (32.0 * z * z2 - 48.0 * z * rho2);
  }
  // xz(7z^2-3r^2) = xz(4z^2-3x^2-3y^2)
  g.row(5) << c41 * (z * (4.0 * z2 - 9.0 * x2 - 3.0 * y2)),
      c41 * (-6.0 * x * y * z),
      c41 * (x * (12.0 * z2 - 3.0 * x2 - 3.0 * y2));
  // (x^2-y^2)(7z^2-r^2) = (x^2-y^2)(6z^2-x^2-y^2)
  g.row(6) << c4p2 * (12.0 * x * z2 - 4.0 * x2 * x),
      c4p2 * (-12.0 * y * z2 + 4.0 * y2 * y),
      c4p2 * (12.0 * z * (x2 - y2));
  // xz(x^2-3y^2)
  g.row(7) << c43 * (3.0 * x2 * z - 3.0 * y2 * z), c43 * (-6.0 * x * y * z),
      c43 * (x2 * x - 3.0 * x * y2);
  // x^4 - 6x^2y^2 + y^4
  g.row(8) << c4p4 * (4.0 * x2 * x - 12.0 * x * y2),
      c4p4 * (4.0 * y2 * y - 12.0 * x2 * y), 0.0;
  return g;
}

WignerD4 wigner_z(double theta) {
  WignerD4 d = WignerD4::Identity();
  for (int m = 1; m <= 4; ++m) {
    const double c = std::cos(m * theta);
    const double s = std::sin(m * theta);
    const int i = 4 - m, j = 4 + m;
    d(i, i) = c;
    d(i, j) = s;
    d(j, i) = -s;
    d(j, j) = c;
  }
  return d;
}

const WignerD4& wigner_x90() {
  static const WignerD4 d = [] {
    const double s14 = std::sqrt(14.0) / 4.0;
    const double s2 = std::sqrt(2.0) / 4.0;
    const double s7 = std::sqrt(7.0) / 4.0;
    const double s5 = std::sqrt(5.0) / 4.0;
    const double s35 = std::sqrt(35.0) / 8.0;
    WignerD4 m = WignerD4::Zero();
    m(0, 5) = s14;
    m(0, 7) = -s2;
    m(1, 1) = -0.75;
    m(1, 3) = s7;
    m(2, 5) = s2;
    m(2, 7) = s14;
    m(3, 1) = s7;
    m(3, 3) = 0.75;
    m(4, 4) = 0.375;
    m(4, 6) = s5;
    m(4, 8) = s35;
    m(5, 0) = -s14;
    m(5, 2) = -s2;
    m(6, 4) = s5;
    m(6, 6) = 0.5;
    m(6, 8) = -s7;
    m(7, 0) = s2;
    m(7, 2) = -s14;
    m(8, 4) = s35;
    m(8, 6) = -s7;
    m(8, 8) = 0.125;
    return m;
  }();
  return d;
}

WignerD4 wigner_y(double beta) {
  const WignerD4& x90 = wigner_x90();
  return x90.transpose() * wigner_z(beta) * x90;
}

WignerD4 wigner_from_rotation(const Mat3& rotation) {
  const double orth = (rotation.transpose() * rotation - Mat3::Identity())
                          .cwiseAbs()
                          .maxCoeff();
  if (orth > 1e-6 || rotation.determinant() < 0.0) {
    throw std::invalid_argument("wigner_from_rotation: input is not a rotation");
  }
  // ZYZ Euler angles: R = Rz(alpha) Ry(beta) Rz(gamma).
  const double sy = std::hypot(rotation(0, 2), rotation(1, 2));
  double alpha, beta, gamma;
  if (sy < 1e-14) {
    beta = rotation(2, 2) > 0.0 ? 0.0 : kPi;
    gamma = 0.0;
    // At beta=0 only alpha+gamma matters; at beta=pi only alpha-gamma.
    alpha = rotation(2, 2) > 0.0 ? std::atan2(rotation(1, 0), rotation(0, 0))
                                 : std::atan2(rotation(1, 0), -rotation(0, 0));
  } else {
    beta = std::atan2(sy, rotation(2, 2));
    alpha = std::atan2(rotation(1, 2), rotation(0, 2));
    gamma = std::atan2(rotation(2, 1), -rotation(2, 0));
  }
  return wigner_z(alpha) * wigner_y(beta) * wigner_z(gamma);
}

const Mat9& so9_generator(int axis) {
  static const std::array<Mat9, 3> gens = [] {
    Mat9 lz = Mat9::Zero();
    for (int m = 1; m <= 4; ++m) {
      lz(4 - m, 4 + m) = m;
      lz(4 + m, 4 - m) = -m;
    }
    const WignerD4 y90 = wigner_y(kPi / 2.0);
    const Mat9 lx = y90 * lz * y90.transpose();
    const WignerD4 z90 = wigner_z(kPi / 2.0);
    const Mat9 ly = z90 * lx * z90.transpose();
    return std::array<Mat9, 3>{lx, ly, lz};
  }();
  return gens[axis];
}

Mat9 so9_element(const Vec3& v) {
  return v.x() * so9_generator(0) + v.y() * so9_generator(1) +
         v.z() * so9_generator(2);
}

WignerD4 exp_so9(const RotationVec& v) { return so9_element(v).exp(); }

Mat3 exp_so3(const RotationVec& v) {
  const double theta = v.norm();
  if (theta < 1e-12) {
    return Mat3::Identity() + cross_matrix(v);
  }
  const Mat3 k = cross_matrix(v / theta);
  return Mat3::Identity() + std::sin(theta) * k +
         (1.0 - std::cos(theta)) * k * k;
}

RotationVec log_so3(const Mat3& rotation) {
  const double tr = rotation.trace();
  const double c = std::min(1.0, std::max(-1.0, (tr - 1.0) / 2.0));
  const double theta = std::acos(c);
  Vec3 w(rotation(2, 1) - rotation(1, 2), rotation(0, 2) - rotation(2, 0),
         rotation(1, 0) - rotation(0, 1));
  if (theta < 1e-7) {
    return 0.5 * w;
  }
  if (kPi - theta < 1e-7) {
    // Near pi the antisymmetric part vanishes; recover the axis from R + I.
    Mat3 a = 0.5 * (rotation + Mat3::Identity());
    int i;
    a.diagonal().maxCoeff(&i);
    Vec3 axis = a.col(i) / std::sqrt(a(i, i));
    if (w.dot(axis) < 0.0) axis = -axis;
    return theta * axis.normalized();
  }
  return (theta / (2.0 * std::sin(theta))) * w;
}

double functional_difference(const OctaCoeffs& qa, const OctaCoeffs& qb) {
  return (qa - qb).squaredNorm();
}

OctaCoeffs project_z(const OctaCoeffs& q, bool* degenerate) {
  const double r = std::hypot(q[0], q[8]);
  OctaCoeffs out = OctaCoeffs::Zero();
  out[4] = kSqrt712;
  if (r < 1e-12) {
    if (degenerate != nullptr) *degenerate = true;
    out[0] = kSqrt512;  // zero-twist convention
    return out;
  }
  if (degenerate != nullptr) *degenerate = false;
  out[0] = kSqrt512 * q[0] / r;
  out[8] = kSqrt512 * q[8] / r;
  return out;
}

Mat3 rotation_z_to_n(const Vec3& n) {
  if (n.z() < -1.0 + 1e-9) {
    Mat3 flip;
    flip << 1, 0, 0, 0, -1, 0, 0, 0, -1;  // pi about e_x
    return flip;
  }
  const double w = 1.0 / (1.0 + n.z());
  Mat3 r;
  r << 1.0 - n.x() * n.x() * w, -n.x() * n.y() * w, n.x(),
      -n.x() * n.y() * w, 1.0 - n.y() * n.y() * w, n.y(),
      -n.x(), -n.y(), n.z();
  return r;
}

OctaCoeffs project_normal(const OctaCoeffs& q, const Vec3& n,
                          bool* degenerate) {
  if (std::abs(n.norm() - 1.0) > 1e-6) {
    throw std::invalid_argument("project_normal: n must be unit length");
  }
  // The projection does not depend on the choice of section z->n. Near the
  // antipode, compute in x-flipped coordinates where the section is smooth.
  if (n.z() < -0.5) {
    Mat3 flip;
    flip << 1, 0, 0, 0, -1, 0, 0, 0, -1;
    const WignerD4 dflip = wigner_from_rotation(flip);
    return dflip * project_normal(dflip.transpose() * q, flip.transpose() * n,
                                  degenerate);
  }
  const WignerD4 d = wigner_from_rotation(rotation_z_to_n(n));
  return d * project_z(d.transpose() * q, degenerate);
}

double evaluate_descriptor(const OctaCoeffs& q, const Vec3& s) {
  return 0.6 + kDescriptorBand4Scale * q.dot(sh_band4(s));
}

double descriptor_value(const OctaCoeffs& q, const Vec3& v) {
  const double r2 = v.squaredNorm();
  return 0.6 * r2 * r2 + kDescriptorBand4Scale * q.dot(sh_band4(v));
}

Vec3 descriptor_gradient(const OctaCoeffs& q, const Vec3& v) {
  return 2.4 * v.squaredNorm() * v +
         kDescriptorBand4Scale * (sh_band4_gradient(v).transpose() * q);
}

AxesResult recover_axes(const OctaCoeffs& q, const AxesOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto random_unit = [&] {
    Vec3 v;
    do {
      v = Vec3(gauss(rng), gauss(rng), gauss(rng));
    } while (v.norm() < 1e-6);
    return Vec3(v.normalized());
  };

  auto power_iterate = [&](Vec3 v, const Vec3* deflate, int& iters) {
    for (iters = 0; iters < opts.max_iterations; ++iters) {
      Vec3 g = descriptor_gradient(q, v);
      if (deflate != nullptr) g -= g.dot(*deflate) * (*deflate);
      const double gn = g.norm();
      if (gn < 1e-14) {
        v = random_unit();
        if (deflate != nullptr) {
          v -= v.dot(*deflate) * (*deflate);
          v.normalize();
        }
        continue;
      }
      g /= gn;
      if ((g - v).norm() < opts.tolerance) {
        v = g;
        ++iters;
        return std::make_pair(v, true);
      }
      v = g;
    }
    return std::make_pair(v, false);
  };

  AxesResult best;
  double best_value = -1e300;
  for (int s = 0; s < opts.starts; ++s) {
    int it1 = 0, it2 = 0;
    auto [v1, ok1] = power_iterate(random_unit(), nullptr, it1);
    Vec3 v2s = random_unit();
    v2s -= v2s.dot(v1) * v1;
    v2s.normalize();
    auto [v2, ok2] = power_iterate(v2s, &v1, it2);
    const Vec3 v3 = v1.cross(v2);
    const double value = descriptor_value(q, v1) + descriptor_value(q, v2) +
                         descriptor_value(q, v3);
    if (value > best_value) {
      best_value = value;
      best.axes.col(0) = v1;
      best.axes.col(1) = v2;
      best.axes.col(2) = v3;
      best.converged = ok1 && ok2;
      best.iterations = std::max(it1, it2);
    }
  }
  return best;
}

OctaCoeffs coeffs_from_axes(const Vec3& v1, const Vec3& v2, const Vec3& v3) {
  const Vec3* vs[3] = {&v1, &v2, &v3};
  for (int i = 0; i < 3; ++i) {
    if (std::abs(vs[i]->norm() - 1.0) > 1e-6) {
      throw std::invalid_argument("coeffs_from_axes: axes must be unit length");
    }
    for (int j = i + 1; j < 3; ++j) {
      if (std::abs(vs[i]->dot(*vs[j])) > 1e-6) {
        throw std::invalid_argument("coeffs_from_axes: axes must be orthogonal");
      }
    }
  }
  const OctaCoeffs q =
      kZonalScale * (sh_band4(v1) + sh_band4(v2) + sh_band4(v3));
  return q;
}

double band2_residual(const Vec3& v1, const Vec3& v2, const Vec3& v3) {
  return (sh_band2(v1) + sh_band2(v2) + sh_band2(v3)).norm();
}

VarietyProjection project_to_variety(const OctaCoeffs& q,
                                     const VarietyOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const OctaCoeffs q0 = canonical_coeffs();

  // Jacobian columns span the variety tangent at D(R) q0.
  Eigen::Matrix<double, 9, 3> j0;
  for (int a = 0; a < 3; ++a) j0.col(a) = so9_generator(a) * q0;

  auto refine = [&](Mat3 r) {
    double lambda = 1e-4;
    WignerD4 d = wigner_from_rotation(r);
    double err = (d * q0 - q).norm();
    for (int it = 0; it < opts.max_iterations; ++it) {
      const Eigen::Matrix<double, 9, 3> jac = d * j0;
      const Vec9 resid = q - d * q0;
      const Mat3 h = jac.transpose() * jac + lambda * Mat3::Identity();
      const Vec3 step = h.ldlt().solve(jac.transpose() * resid);
      const Mat3 r_new = r * exp_so3(step);
      const WignerD4 d_new = wigner_from_rotation(r_new);
      const double err_new = (d_new * q0 - q).norm();
      if (err_new < err) {
        const double gain = err - err_new;
        r = r_new;
        d = d_new;
        err = err_new;
        lambda = std::max(1e-12, lambda * 0.3);
        if (gain < opts.tolerance) break;
      } else {
        lambda *= 10.0;
        if (lambda > 1e8) break;
      }
    }
    return std::make_tuple(r, d, err);
  };

  VarietyProjection best;
  best.residual = 1e300;
  // Power-method initialization plus random restarts.
  std::vector<Mat3> seeds;
  {
    AxesOptions ao;
    ao.seed = opts.seed ^ 0x9e3779b97f4a7c15ull;
    const AxesResult ar = recover_axes(q, ao);
    seeds.push_back(ar.axes);
  }
  for (int s = 1; s < opts.starts; ++s) {
    const Vec3 v(gauss(rng), gauss(rng), gauss(rng));
    seeds.push_back(exp_so3(v));
  }
  for (const Mat3& seed : seeds) {
    auto [r, d, err] = refine(seed);
    if (err < best.residual) {
      best.residual = err;
      best.rotation = r;
      best.q = d * q0;
    }
  }
  return best;
}

double variety_residual(const OctaCoeffs& q) {
  return project_to_variety(q).residual;
}

Mat3 rotation_z_to_n_differential(const Vec3& n, const Vec3& dn) {
  const double w = 1.0 / (1.0 + n.z());
  const double dw = -dn.z() * w * w;
  const double x = n.x(), y = n.y();
  const double dx = dn.x(), dy = dn.y();
  Mat3 dr;
  dr << -(2.0 * x * dx * w + x * x * dw), -(dx * y + x * dy) * w - x * y * dw,
      dx,
      -(dx * y + x * dy) * w - x * y * dw, -(2.0 * y * dy * w + y * y * dw),
      dy,
      -dx, -dy, dn.z();
  return dr;
}

Vec9 project_normal_differential(const OctaCoeffs& q, const Vec3& n,
                                 const Vec3& dn) {
  if (n.z() < -0.5) {
    Mat3 flip;
    flip << 1, 0, 0, 0, -1, 0, 0, 0, -1;
    const WignerD4 dflip = wigner_from_rotation(flip);
    return dflip * project_normal_differential(dflip.transpose() * q,
                                               flip.transpose() * n,
                                               flip.transpose() * dn);
  }
  const Mat3 r = rotation_z_to_n(n);
  const WignerD4 d = wigner_from_rotation(r);
  const Mat3 dr = rotation_z_to_n_differential(n, dn);
  // Body angular velocity of the section; dD = D (omega . L~).
  const Mat3 omega_hat = r.transpose() * dr;
  const Vec3 omega(omega_hat(2, 1), omega_hat(0, 2), omega_hat(1, 0));
  const Mat9 gen = so9_element(omega);

  const Vec9 w = d.transpose() * q;
  const Vec9 dw = -gen * w;  // d(D^T) q = (D gen)^T q = -gen w
  const Vec9 pz = project_z(w);

  const double r08 = std::hypot(w[0], w[8]);
  Vec9 dpz = Vec9::Zero();
  if (r08 > 1e-12) {
    const double inv3 = 1.0 / (r08 * r08 * r08);
    dpz[0] = kSqrt512 * (w[8] * w[8] * dw[0] - w[0] * w[8] * dw[8]) * inv3;
    dpz[8] = kSqrt512 * (w[0] * w[0] * dw[8] - w[0] * w[8] * dw[0]) * inv3;
  }
  return d * (gen * pz) + d * dpz;
}

ProjectionJacobian project_normal_jacobian(const OctaCoeffs& q,
                                           const Vec3& n) {
  if (n.z() < -0.5) {
    Mat3 flip;
    flip << 1, 0, 0, 0, -1, 0, 0, 0, -1;
    const WignerD4 dflip = wigner_from_rotation(flip);
    ProjectionJacobian inner =
        project_normal_jacobian(dflip.transpose() * q, flip.transpose() * n);
    ProjectionJacobian out;
    out.degenerate = inner.degenerate;
    out.value = dflip * inner.value;
    out.jacobian = dflip * inner.jacobian * flip.transpose();
    return out;
  }
  const Mat3 r = rotation_z_to_n(n);
  const WignerD4 d = wigner_from_rotation(r);
  const Vec9 w = d.transpose() * q;
  ProjectionJacobian out;
  const Vec9 pz = project_z(w, &out.degenerate);
  out.value = d * pz;
  const double r08 = std::hypot(w[0], w[8]);
  for (int c = 0; c < 3; ++c) {
    const Vec3 dn = Vec3::Unit(c);
    const Mat3 dr = rotation_z_to_n_differential(n, dn);
    const Mat3 omega_hat = r.transpose() * dr;
    const Vec3 omega(omega_hat(2, 1), omega_hat(0, 2), omega_hat(1, 0));
    const Mat9 gen = so9_element(omega);
    const Vec9 dw = -gen * w;
    Vec9 dpz = Vec9::Zero();
    if (r08 > 1e-12) {
      const double inv3 = 1.0 / (r08 * r08 * r08);
      dpz[0] = kSqrt512 * (w[8] * w[8] * dw[0] - w[0] * w[8] * dw[8]) * inv3;
      dpz[8] = kSqrt512 * (w[0] * w[0] * dw[8] - w[0] * w[8] * dw[0]) * inv3;
    }
    out.jacobian.col(c) = d * (gen * pz) + d * dpz;
  }
  return out;
}

AlignmentInner alignment_inner(const OctaCoeffs& q, const Vec3& n) {
  if (n.z() < -0.5) {
    Mat3 flip;
    flip << 1, 0, 0, 0, -1, 0, 0, 0, -1;
    const WignerD4 dflip = wigner_from_rotation(flip);
    AlignmentInner inner = alignment_inner(dflip.transpose() * q,
                                           flip.transpose() * n);
    inner.gradient = dflip * inner.gradient;
    return inner;
  }
  AlignmentInner out;
  const double qn = q.norm();
  if (qn < 1e-12) {
    out.degenerate = true;
    return out;
  }
  const WignerD4 d = wigner_from_rotation(rotation_z_to_n(n));
  const Vec9 w = d.transpose() * q;
  const double r08 = std::hypot(w[0], w[8]);
  // <q/||q||, Pi_n(q)> = (s7 w4 + s5 |(w0,w8)|) / ||w||
  const double raw = kSqrt712 * w[4] + kSqrt512 * r08;
  out.value = raw / qn;
  Vec9 draw = Vec9::Zero();
  draw[4] = kSqrt712;
  if (r08 > 1e-12) {
    draw[0] = kSqrt512 * w[0] / r08;
    draw[8] = kSqrt512 * w[8] / r08;
  } else {
    out.degenerate = true;
  }
  const Vec9 dinner_dw = draw / qn - (raw / (qn * qn * qn)) * w;
  out.gradient = d * dinner_dw;
  return out;
}

}  // namespace octa::sh
