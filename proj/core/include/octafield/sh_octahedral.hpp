#pragma once

#include <optional>

#include "octafield/types.hpp"

// Octahedral frames as real SH band-4 coefficient vectors.
//
// Basis convention: real spherical harmonics without Condon-Shortley phase,
// orders m = -4..4 in ascending index. Under this layout the axis-aligned
// canonical frame is q0 = [0,0,0,0,sqrt(7/12),0,0,0,sqrt(5/12)] and the
// z-aligned frames form the circle q[0]^2 + q[8]^2 = 5/12, q[4] = sqrt(7/12).

namespace octa::sh {

inline constexpr double kSqrt712 = 0.76376261582597338;  // sqrt(7/12)
inline constexpr double kSqrt512 = 0.64549722436790281;  // sqrt(5/12)

// Scale of the band-4 part of the frame polynomial sum_i (v_i . s)^4,
// 8*sqrt(pi)/(5*sqrt(21)); the band-0 remainder contributes the constant 3/5.
inline constexpr double kDescriptorBand4Scale = 0.61884982381641904;

OctaCoeffs canonical_coeffs();

// Real SH basis evaluation as homogeneous polynomials (degree l in v, equal
// to r^l * Y_lm(v/r)). On unit vectors these are the basis values.
Vec9 sh_band4(const Vec3& v);
Vec5 sh_band2(const Vec3& v);
// d/dv of each band-4 homogeneous polynomial, rows follow sh_band4.
Eigen::Matrix<double, 9, 3> sh_band4_gradient(const Vec3& v);

// Band-4 Wigner rotations.
WignerD4 wigner_z(double theta);
const WignerD4& wigner_x90();  // exact constant R~_x(pi/2)
WignerD4 wigner_y(double beta);
WignerD4 wigner_from_rotation(const Mat3& rotation);  // throws on non-rotation

// so(9) generators induced by SO(3) and their exponential.
const Mat9& so9_generator(int axis);  // 0:x 1:y 2:z
Mat9 so9_element(const Vec3& v);      // v . L~
WignerD4 exp_so9(const RotationVec& v);

// Rodrigues map and its inverse helpers on SO(3).
Mat3 exp_so3(const RotationVec& v);
RotationVec log_so3(const Mat3& rotation);

// || qa - qb ||^2, the spherical integral of the squared frame difference.
double functional_difference(const OctaCoeffs& qa, const OctaCoeffs& qb);

// Closest z-aligned frame. If q[0]^2+q[8]^2 degenerates the twist is
// ambiguous; the zero-twist frame is returned and *degenerate is set.
OctaCoeffs project_z(const OctaCoeffs& q, bool* degenerate = nullptr);

// Closest frame with one axis along unit normal n.
OctaCoeffs project_normal(const OctaCoeffs& q, const Vec3& n,
                          bool* degenerate = nullptr);

// A rotation mapping e_z to unit n, continuous away from n = -e_z;
// at the antipode it is the rotation by pi about e_x.
Mat3 rotation_z_to_n(const Vec3& n);

// Value of the frame polynomial at unit direction s, band-0 constant included.
double evaluate_descriptor(const OctaCoeffs& q, const Vec3& s);
// Homogeneous extension F_q(v) and its gradient (used by the power method).
double descriptor_value(const OctaCoeffs& q, const Vec3& v);
Vec3 descriptor_gradient(const OctaCoeffs& q, const Vec3& v);

struct AxesResult {
  Mat3 axes;  // columns are the representation vectors, det +1
  bool converged = false;
  int iterations = 0;
};

struct AxesOptions {
  int starts = 8;
  int max_iterations = 50;
  double tolerance = 1e-12;
  uint64_t seed = 7;
};

// Representation vectors of a (near-)variety coefficient vector via tensor
// power iteration on the descriptor.
AxesResult recover_axes(const OctaCoeffs& q, const AxesOptions& opts = {});

// Zonal-harmonic construction from three pairwise orthogonal unit axes.
// Throws on non-orthogonal input. Normalized so (e_x,e_y,e_z) -> q0 exactly.
OctaCoeffs coeffs_from_axes(const Vec3& v1, const Vec3& v2, const Vec3& v3);
// Norm of the band-2 coefficient sum; zero for orthogonal axes.
double band2_residual(const Vec3& v1, const Vec3& v2, const Vec3& v3);

struct VarietyProjection {
  OctaCoeffs q;       // nearest point found on the octahedral variety
  Mat3 rotation;      // rotation realizing it
  double residual;    // || q_input - q ||
  bool converged = true;
};

struct VarietyOptions {
  int starts = 12;
  int max_iterations = 60;
  double tolerance = 1e-12;
  uint64_t seed = 11;
};

// Distance to the octahedral variety via damped Gauss-Newton over local
// rotation updates with multi-start.
VarietyProjection project_to_variety(const OctaCoeffs& q,
                                     const VarietyOptions& opts = {});
double variety_residual(const OctaCoeffs& q);

// Differentials used by the regularization loss path.
// d rotation_z_to_n(n) applied to tangent dn.
Mat3 rotation_z_to_n_differential(const Vec3& n, const Vec3& dn);
// Directional derivative of project_normal(q, n) in n for fixed q.
Vec9 project_normal_differential(const OctaCoeffs& q, const Vec3& n,
                                 const Vec3& dn);

struct ProjectionJacobian {
  Vec9 value;                            // project_normal(q, n)
  Eigen::Matrix<double, 9, 3> jacobian;  // d value / d n, q fixed
  bool degenerate = false;
};
ProjectionJacobian project_normal_jacobian(const OctaCoeffs& q, const Vec3& n);

// <q/||q||, project_normal(q, n)> and its gradient in q (n fixed), the
// quantity behind the alignment loss.
struct AlignmentInner {
  double value = 0.0;
  Vec9 gradient = Vec9::Zero();
  bool degenerate = false;
};
AlignmentInner alignment_inner(const OctaCoeffs& q, const Vec3& n);

}  // namespace octa::sh
