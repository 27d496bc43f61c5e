#include "smid/kernels.hpp"

#include <algorithm>
#include <cmath>

#ifdef SMID_HAVE_OPENMP
#include <omp.h>
#endif

namespace smid {

namespace {

thread_local Execution tls_execution = Execution::Parallel;

bool run_parallel() {
#ifdef SMID_HAVE_OPENMP
  return tls_execution == Execution::Parallel && !omp_in_parallel();
#else
  return false;
#endif
}

}  // namespace

Execution current_execution() { return tls_execution; }

ScopedExecution::ScopedExecution(Execution e) : previous_(tls_execution) { tls_execution = e; }
ScopedExecution::~ScopedExecution() { tls_execution = previous_; }

int kernel_threads() {
#ifdef SMID_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_kernel_threads(int n) {
#ifdef SMID_HAVE_OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

double DifferenceStep::operator()(double x) const {
  return std::max(relative * std::abs(x), absolute);
}

void numeric_jacobian(LeastSquaresProblem& problem, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& r0, Eigen::MatrixXd& J, DifferenceStep step) {
  const int n = problem.num_params();
  const int m = problem.num_residuals();
  J.resize(m, n);
  problem.prepare_linearization(x);
  const bool par = run_parallel();
#pragma omp parallel if (par)
  {
    Eigen::VectorXd rp(m);
#pragma omp for schedule(dynamic)
    for (int j = 0; j < n; ++j) {
      // The step actually taken, so x + h - x is exact in floating point.
      const double h = (x[j] + step(x[j])) - x[j];
      problem.residual_perturbed(x, j, h, rp);
      J.col(j) = (rp - r0) / h;
    }
  }
}

void predict_series(const PreparedModel& model, std::span<const PreparedCore> core,
                    std::span<Vec3> out) {
  const auto n = static_cast<std::ptrdiff_t>(core.size());
#pragma omp parallel for schedule(static) if (run_parallel() && n > 256)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = predict(model, core[i]);
}

NormalizationInfo normalize_in_place(std::span<Vec3> series) {
  if (series.empty()) return {};
  const auto n = static_cast<std::ptrdiff_t>(series.size());
  double lo[3] = {series[0].x(), series[0].y(), series[0].z()};
  double hi[3] = {lo[0], lo[1], lo[2]};
  const bool par = run_parallel() && n > 1024;
  // min/max are exact under any reduction order.
#pragma omp parallel for schedule(static) reduction(min : lo[:3]) reduction(max : hi[:3]) if (par)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    for (int k = 0; k < 3; ++k) {
      lo[k] = std::min(lo[k], series[i][k]);
      hi[k] = std::max(hi[k], series[i][k]);
    }
  }
  NormalizationInfo info;
  for (int k = 0; k < 3; ++k) {
    const double range = hi[k] - lo[k];
    const double mag = std::max({1e-300, std::abs(lo[k]), std::abs(hi[k])});
    if (range <= kConstantRangeTolerance * mag) {
      info.offset[k] = lo[k] - 0.5;
      info.scale[k] = 1.0;
    } else {
      info.offset[k] = lo[k];
      info.scale[k] = range;
    }
  }
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t i = 0; i < n; ++i) series[i] = info.apply(series[i]);
  return info;
}

void mix_residual(std::span<const double> weight, std::span<const Vec3* const> terms,
                  std::span<const Vec3> target, double scale, Eigen::Ref<Eigen::VectorXd> r) {
  const auto n = static_cast<std::ptrdiff_t>(target.size());
  const std::size_t nm = weight.size();
#pragma omp parallel for schedule(static) if (run_parallel() && n > 1024)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    Vec3 acc = Vec3::Zero();
    for (std::size_t m = 0; m < nm; ++m) acc += weight[m] * terms[m][i];
    r.segment<3>(3 * i) = (acc - target[i]) * scale;
  }
}

}  // namespace smid
