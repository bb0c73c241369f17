#include "octafield/selftest.hpp"

#include <cmath>
#include <random>

#include "octafield/knn.hpp"
#include "octafield/lip_net.hpp"
#include "octafield/losses.hpp"
#include "octafield/metrics.hpp"
#include "octafield/sh_octahedral.hpp"
#include "octafield/sine_net.hpp"
#include "octafield/sphere_quadrature.hpp"

namespace octa {

namespace {

Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Vec3 v(gauss(rng), gauss(rng), gauss(rng));
  return sh::exp_so3(v);
}

}  // namespace

bool SelfTestResult::all_passed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

std::vector<Mat3> octahedral_group() {
  std::vector<Mat3> out;
  int perm[3] = {0, 1, 2};
  std::vector<std::array<int, 3>> perms = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                           {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  (void)perm;
  for (const auto& p : perms) {
    for (int signs = 0; signs < 8; ++signs) {
      Mat3 m = Mat3::Zero();
      for (int i = 0; i < 3; ++i) {
        m(i, p[i]) = (signs >> i) & 1 ? -1.0 : 1.0;
      }
      if (m.determinant() > 0.5) out.push_back(m);
    }
  }
  return out;
}

SelfTestResult run_selftest(bool corrupt_x90) {
  SelfTestResult res;
  std::mt19937_64 rng(2024);
  const auto& quad = sh::SphereQuadrature::band4_rule();
  auto add = [&](const std::string& name, double err, double tol) {
    res.checks.push_back({name, err < tol, err, tol});
  };

  // canonical coefficients straight from the quadrature projection
  {
    const Vec9 proj = sh::project_band4(quad, [](const Vec3& s) {
      return std::pow(s.x(), 4) + std::pow(s.y(), 4) + std::pow(s.z(), 4);
    });
    const double err =
        (proj / sh::kDescriptorBand4Scale - sh::canonical_coeffs())
            .cwiseAbs()
            .maxCoeff();
    add("canonical-coeffs-quadrature", err, 1e-12);
  }

  // Wigner construction against the quadrature route
  {
    double err = 0.0;
    for (int i = 0; i < 10; ++i) {
      const Mat3 r = random_rotation(rng);
      err = std::max(err, (sh::wigner_from_rotation(r) -
                           sh::wigner_by_quadrature(quad, r))
                              .cwiseAbs()
                              .maxCoeff());
    }
    add("wigner-vs-quadrature", err, 1e-10);
  }

  // homomorphism, optionally with a corrupted x-rotation constant
  {
    Mat9 x90 = sh::wigner_x90();
    if (corrupt_x90) x90(4, 4) += 1e-3;
    auto wigner_manual = [&](const Mat3& r) -> Mat9 {
      const double sy = std::hypot(r(0, 2), r(1, 2));
      double alpha, beta, gamma;
      if (sy < 1e-14) {
        beta = r(2, 2) > 0 ? 0.0 : 3.14159265358979323846;
        gamma = 0.0;
        alpha = r(2, 2) > 0 ? std::atan2(r(1, 0), r(0, 0))
                            : std::atan2(r(1, 0), -r(0, 0));
      } else {
        beta = std::atan2(sy, r(2, 2));
        alpha = std::atan2(r(1, 2), r(0, 2));
        gamma = std::atan2(r(2, 1), -r(2, 0));
      }
      return sh::wigner_z(alpha) * x90.transpose() * sh::wigner_z(beta) * x90 *
             sh::wigner_z(gamma);
    };
    double err = 0.0;
    for (int i = 0; i < 10; ++i) {
      const Mat3 r1 = random_rotation(rng);
      const Mat3 r2 = random_rotation(rng);
      err = std::max(err, (wigner_manual(r1 * r2) -
                           wigner_manual(r1) * wigner_manual(r2))
                              .cwiseAbs()
                              .maxCoeff());
    }
    add("wigner-homomorphism", err, 1e-9);
  }

  // 24-element symmetry group fixes the canonical frame
  {
    double err = 0.0;
    const OctaCoeffs q0 = sh::canonical_coeffs();
    for (const Mat3& g : octahedral_group()) {
      err = std::max(err, (sh::wigner_from_rotation(g) * q0 - q0)
                              .cwiseAbs()
                              .maxCoeff());
    }
    add("cubic-symmetry-fixpoints", err, 1e-9);
  }

  // exponential-map route matches the ZYZ route
  {
    double err = 0.0;
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = 0; i < 10; ++i) {
      Vec3 v(gauss(rng), gauss(rng), gauss(rng));
      if (v.norm() > 3.1) v *= 3.1 / v.norm();
      err = std::max(err, (sh::exp_so9(v) -
                           sh::wigner_from_rotation(sh::exp_so3(v)))
                              .cwiseAbs()
                              .maxCoeff());
    }
    add("exp-so9-vs-zyz", err, 1e-8);
  }

  // zonal-harmonic construction matches the Wigner route
  {
    double err = 0.0;
    const OctaCoeffs q0 = sh::canonical_coeffs();
    for (int i = 0; i < 10; ++i) {
      const Mat3 r = random_rotation(rng);
      const OctaCoeffs a = sh::coeffs_from_axes(r.col(0), r.col(1), r.col(2));
      const OctaCoeffs b = sh::wigner_from_rotation(r) * q0;
      err = std::max(err, (a - b).cwiseAbs().maxCoeff());
    }
    add("zonal-vs-wigner", err, 1e-8);
  }

  // projection beats a brute-force twist grid
  {
    std::normal_distribution<double> gauss(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
      Vec9 q;
      for (int j = 0; j < 9; ++j) q[j] = gauss(rng);
      q.normalize();
      Vec3 n(gauss(rng), gauss(rng), gauss(rng));
      n.normalize();
      const Vec9 proj = sh::project_normal(q, n);
      const double dproj = (q - proj).norm();
      const Mat9 d = sh::wigner_from_rotation(sh::rotation_z_to_n(n));
      for (int t = 0; t < 2000; ++t) {
        const double theta = 2.0 * 3.14159265358979323846 * t / 2000.0;
        Vec9 qz = Vec9::Zero();
        qz[0] = sh::kSqrt512 * std::sin(4.0 * theta);
        qz[4] = sh::kSqrt712;
        qz[8] = sh::kSqrt512 * std::cos(4.0 * theta);
        worst = std::max(worst, dproj - (q - d * qz).norm());
      }
    }
    add("projection-optimality", worst, 1e-9);
  }

  // analytic derivatives of a small sine net vs finite differences
  {
    const nets::SineNet f = nets::siren_init(2, 16, 5, 30.0, 1.0);
    std::uniform_real_distribution<double> uni(-0.5, 0.5);
    double gerr = 0.0, herr = 0.0;
    for (int i = 0; i < 5; ++i) {
      const Vec3 x(uni(rng), uni(rng), uni(rng));
      const nets::SineEval e = eval_f(f, x);
      const double h = 1e-5;
      for (int c = 0; c < 3; ++c) {
        Vec3 xp = x, xm = x;
        xp[c] += h;
        xm[c] -= h;
        const nets::SineEval ep = eval_f(f, xp);
        const nets::SineEval em = eval_f(f, xm);
        gerr = std::max(gerr, std::abs((ep.value - em.value) / (2 * h) -
                                       e.gradient[c]) /
                                  std::max(1.0, std::abs(e.gradient[c])));
        for (int r = 0; r < 3; ++r) {
          herr = std::max(
              herr, std::abs((ep.gradient[r] - em.gradient[r]) / (2 * h) -
                             e.hessian(r, c)) /
                        std::max(1.0, std::abs(e.hessian(r, c))));
        }
      }
    }
    add("sine-gradient-vs-fd", gerr, 1e-4);
    add("sine-hessian-vs-fd", herr, 1e-3);
  }

  // metric functions equal a direct n^2 scan
  {
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Eigen::Matrix3Xd a(3, 60), b(3, 50);
    for (int i = 0; i < a.cols(); ++i) {
      a.col(i) = Vec3(uni(rng), uni(rng), uni(rng));
    }
    for (int i = 0; i < b.cols(); ++i) {
      b.col(i) = Vec3(uni(rng), uni(rng), uni(rng));
    }
    auto nn = [](const Eigen::Matrix3Xd& from, const Eigen::Matrix3Xd& to) {
      Eigen::VectorXd d(from.cols());
      for (int i = 0; i < from.cols(); ++i) {
        double best = 1e300;
        for (int j = 0; j < to.cols(); ++j) {
          best = std::min(best, geom::point_distance(from.col(i), to.col(j)));
        }
        d(i) = best;
      }
      return d;
    };
    const Eigen::VectorXd dab = nn(a, b), dba = nn(b, a);
    const double ch = 0.5 * (dab.mean() + dba.mean());
    const double hd = std::max(dab.maxCoeff(), dba.maxCoeff());
    const double err = std::max(std::abs(ch - geom::chamfer(a, b)),
                                std::abs(hd - geom::hausdorff(a, b)));
    add("metrics-vs-bruteforce", err, 1e-15);
  }

  // Lipschitz bound holds empirically
  {
    const nets::LipNet u = nets::lipnet_init(3, 24, 9, 1.0);
    const double bound = u.lipschitz_bound();
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 2000; ++i) {
      const Vec3 x0(uni(rng), uni(rng), uni(rng));
      const Vec3 x1(uni(rng), uni(rng), uni(rng));
      const double dx = (x0 - x1).cwiseAbs().maxCoeff();
      if (dx < 1e-9) continue;
      const double du =
          (eval_u(u, x0) - eval_u(u, x1)).cwiseAbs().maxCoeff();
      worst = std::max(worst, du / dx - bound);
    }
    add("lipschitz-bound", worst, 0.0 + 1e-12);
  }

  return res;
}

}  // namespace octa
