// Serial reference versions of the kernels in kernels.cpp.

#include <algorithm>

#include "smid/kernels.hpp"

namespace smid {

void numeric_jacobian_ref(LeastSquaresProblem& problem, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& r0, Eigen::MatrixXd& J, DifferenceStep step) {
  const int n = problem.num_params();
  J.resize(problem.num_residuals(), n);
  Eigen::VectorXd xp = x;
  Eigen::VectorXd rp(problem.num_residuals());
  for (int j = 0; j < n; ++j) {
    const double h = (x[j] + step(x[j])) - x[j];
    xp[j] = x[j] + h;
    problem.residual(xp, rp);
    xp[j] = x[j];
    J.col(j) = (rp - r0) / h;
  }
}

void predict_series_ref(const PreparedModel& model, std::span<const PreparedCore> core,
                        std::span<Vec3> out) {
  for (std::size_t i = 0; i < core.size(); ++i) out[i] = predict(model, core[i]);
}

NormalizationInfo normalize_in_place_ref(std::span<Vec3> series) {
  const NormalizationInfo info = min_max_info(series);
  for (auto& v : series) v = info.apply(v);
  return info;
}

void mix_residual_ref(std::span<const double> weight, std::span<const Vec3* const> terms,
                      std::span<const Vec3> target, double scale, Eigen::Ref<Eigen::VectorXd> r) {
  for (std::size_t i = 0; i < target.size(); ++i) {
    Vec3 acc = Vec3::Zero();
    for (std::size_t m = 0; m < weight.size(); ++m) acc += weight[m] * terms[m][i];
    r.segment<3>(3 * i) = (acc - target[i]) * scale;
  }
}

}  // namespace smid
