#include "smid/selector_losses.hpp"

#include <cmath>

#include "smid/error.hpp"

namespace smid {

double loss_rot(const TangentRotation& omega) {
  const double a = omega.norm();
  return a > kPi ? a - kPi : 0.0;
}

double loss_norm(std::span<const double> b) {
  double l1 = 0.0;
  for (double v : b) l1 += std::abs(v);
  return (l1 - 1.0) * (l1 - 1.0);
}

double loss_pos(std::span<const double> b) {
  double ss = 0.0;
  for (double v : b) {
    if (v < 0.0) ss += v * v;
  }
  return std::sqrt(ss);
}

double loss_vec(const Vec3& m_w) { return std::abs(m_w.norm() - 1.0); }

double sample_std(std::span<const double> b) {
  if (b.size() < 2) throw Error(ErrorCode::InvalidArgument, "std needs at least two entries");
  const double n = static_cast<double>(b.size());
  double mean = 0.0;
  for (double v : b) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : b) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (n - 1.0));
}

double loss_std(std::span<const double> b) {
  return std::abs(sample_std(b) - 1.0 / std::sqrt(static_cast<double>(b.size())));
}

}  // namespace smid
