#pragma once

// SO(3) helpers: skew operator, exponential/logarithm maps, quaternion
// conversion and the geodesic rotation distance.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "smid/error.hpp"

namespace smid {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

/// Axis-angle rotation vector (radians). Not canonical by construction.
using TangentRotation = Vec3;

inline constexpr double kPi = 3.14159265358979323846;

/// Below this angle exp() switches to its second order series.
inline constexpr double kExpSeriesAngle = 1e-8;
/// Below this angle log() switches to its series expansion.
inline constexpr double kLogSeriesAngle = 1e-7;

Mat3 skew(const Vec3& v);

Mat3 exp_so3(const TangentRotation& omega);

/// Inverse of exp_so3. Returns the canonical vector with norm in [0, pi].
/// At exactly pi the axis is taken from the largest diagonal entry of
/// (R + I) / 2 with a positive leading nonzero component.
/// Throws InvalidRotation if R is not orthonormal within 1e-6.
TangentRotation log_so3(const Mat3& R);

/// Same as log_so3 but skips the orthonormality check (hot loops on
/// matrices that are rotations by construction).
TangentRotation log_so3_unchecked(const Mat3& R);

/// Wraps a tangent vector onto the equivalent one with norm <= pi.
TangentRotation canonicalize(const TangentRotation& omega);

/// Hamilton convention, scalar first. Renormalizes if |q| is within 1e-3
/// of one, otherwise throws NonUnitQuaternion.
Mat3 quat_to_matrix(const Quat& q);

Quat matrix_to_quat(const Mat3& R);

/// ||log(exp(a) exp(b)^T)|| in [0, pi].
double geodesic_error(const TangentRotation& a, const TangentRotation& b);

bool is_rotation(const Mat3& R, double tol = 1e-9);

}  // namespace smid
