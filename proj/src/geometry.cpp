#include "smid/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace smid {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidRotation: return "InvalidRotation";
    case ErrorCode::NonUnitQuaternion: return "NonUnitQuaternion";
    case ErrorCode::EnvelopeViolation: return "EnvelopeViolation";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::EmptyIntersection: return "EmptyIntersection";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::SolverDiverged: return "SolverDiverged";
    case ErrorCode::WrongChannel: return "WrongChannel";
    case ErrorCode::ModelHasNoReference: return "ModelHasNoReference";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Mat3 exp_so3(const TangentRotation& omega) {
  const double theta = omega.norm();
  const Mat3 W = skew(omega);
  if (theta < kExpSeriesAngle) {
    return Mat3::Identity() + W + 0.5 * W * W;
  }
  const double a = std::sin(theta) / theta;
  const double b = (1.0 - std::cos(theta)) / (theta * theta);
  return Mat3::Identity() + a * W + b * W * W;
}

namespace {

Vec3 vee_antisymmetric(const Mat3& R) {
  return Vec3(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
}

// Axis from the symmetric part, valid when the angle is close to pi.
Vec3 axis_near_pi(const Mat3& R, double cos_theta, const Vec3& antisym) {
  const Mat3 B = 0.5 * (R + R.transpose()) - cos_theta * Mat3::Identity();
  int k = 0;
  B.diagonal().maxCoeff(&k);
  Vec3 axis = B.col(k);
  axis.normalize();
  const double s = axis.dot(antisym);
  if (std::abs(s) > 1e-10) {
    if (s < 0.0) axis = -axis;
    return axis;
  }
  // Exactly pi: the sign is free, pick a positive leading nonzero entry.
  for (int i = 0; i < 3; ++i) {
    if (std::abs(axis[i]) > 1e-12) {
      if (axis[i] < 0.0) axis = -axis;
      break;
    }
  }
  return axis;
}

}  // namespace

bool is_rotation(const Mat3& R, double tol) {
  if (!R.allFinite()) return false;
  const Mat3 E = R.transpose() * R - Mat3::Identity();
  return E.cwiseAbs().maxCoeff() <= tol && std::abs(R.determinant() - 1.0) <= tol;
}

TangentRotation log_so3_unchecked(const Mat3& R) {
  const double cos_theta = std::clamp(0.5 * (R.trace() - 1.0), -1.0, 1.0);
  const Vec3 antisym = vee_antisymmetric(R);  // 2 sin(theta) * axis
  const double sin_theta = 0.5 * antisym.norm();
  const double theta = std::atan2(sin_theta, cos_theta);
  if (theta < kLogSeriesAngle) {
    return (0.5 + theta * theta / 12.0) * antisym;
  }
  if (theta > kPi - 1e-3) {
    return theta * axis_near_pi(R, cos_theta, antisym);
  }
  return theta / (2.0 * sin_theta) * antisym;
}

TangentRotation log_so3(const Mat3& R) {
  if (!is_rotation(R, 1e-6)) {
    throw Error(ErrorCode::InvalidRotation, "matrix is not in SO(3)");
  }
  return log_so3_unchecked(R);
}

TangentRotation canonicalize(const TangentRotation& omega) {
  const double theta = omega.norm();
  if (theta <= kPi) return omega;
  const Vec3 axis = omega / theta;
  double wrapped = std::fmod(theta, 2.0 * kPi);
  if (wrapped > kPi) wrapped -= 2.0 * kPi;
  return wrapped * axis;
}

Mat3 quat_to_matrix(const Quat& q) {
  const double n = q.norm();
  if (!std::isfinite(n) || std::abs(n - 1.0) > 1e-3) {
    throw Error(ErrorCode::NonUnitQuaternion, "quaternion norm " + std::to_string(n));
  }
  const double w = q.w() / n, x = q.x() / n, y = q.y() / n, z = q.z() / n;
  Mat3 R;
  R << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
       2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
       2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return R;
}

Quat matrix_to_quat(const Mat3& R) {
  Quat q(R);
  q.normalize();
  if (q.w() < 0.0) q.coeffs() *= -1.0;
  return q;
}

double geodesic_error(const TangentRotation& a, const TangentRotation& b) {
  return log_so3_unchecked(exp_so3(a) * exp_so3(b).transpose()).norm();
}

}  // namespace smid
