#pragma once

#include <Eigen/Dense>

namespace octa {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec9 = Eigen::Matrix<double, 9, 1>;
using Mat9 = Eigen::Matrix<double, 9, 9>;
using Vec5 = Eigen::Matrix<double, 5, 1>;

// SH band-4 coefficient vector of an octahedral frame.
using OctaCoeffs = Vec9;
// Axis-angle product v = theta * e, radians.
using RotationVec = Vec3;
// Band-4 Wigner rotation, 9x9 orthogonal.
using WignerD4 = Mat9;

}  // namespace octa
