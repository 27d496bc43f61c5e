#pragma once

// Data-parallel inner loops. Each kernel has a serial *_ref twin in
// kernels_ref.cpp that the tests compare against; both produce identical
// results because no kernel reorders a floating point sum.

#include <limits>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "smid/sensor_models.hpp"

namespace smid {

enum class Execution { Serial, Parallel };

/// Nonlinear least-squares problem: minimize 0.5 * ||r(x)||^2.
class LeastSquaresProblem {
 public:
  virtual ~LeastSquaresProblem() = default;

  virtual int num_params() const = 0;
  virtual int num_residuals() const = 0;
  virtual void residual(const Eigen::VectorXd& x, Eigen::Ref<Eigen::VectorXd> r) const = 0;

  /// Lower bound of parameter j; -infinity when unbounded.
  virtual double lower_bound(int /*j*/) const { return -std::numeric_limits<double>::infinity(); }

  /// Called once before a batch of residual_perturbed calls at `x`.
  virtual void prepare_linearization(const Eigen::VectorXd& /*x*/) {}

  /// r(x + h e_j). Must be safe to call concurrently for different j
  /// after prepare_linearization(x).
  virtual void residual_perturbed(const Eigen::VectorXd& x, int j, double h,
                                  Eigen::Ref<Eigen::VectorXd> r) const {
    Eigen::VectorXd xp = x;
    xp[j] += h;
    residual(xp, r);
  }
};

struct DifferenceStep {
  double relative = 1e-6;
  double absolute = 1e-8;

  double operator()(double x) const;
};

/// Forward-difference Jacobian, one column per parameter.
void numeric_jacobian(LeastSquaresProblem& problem, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& r0, Eigen::MatrixXd& J, DifferenceStep step = {});
void numeric_jacobian_ref(LeastSquaresProblem& problem, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& r0, Eigen::MatrixXd& J, DifferenceStep step = {});

void predict_series(const PreparedModel& model, std::span<const PreparedCore> core,
                    std::span<Vec3> out);
void predict_series_ref(const PreparedModel& model, std::span<const PreparedCore> core,
                        std::span<Vec3> out);

/// Min-max normalization of a series in place.
NormalizationInfo normalize_in_place(std::span<Vec3> series);
NormalizationInfo normalize_in_place_ref(std::span<Vec3> series);

/// r[3i + k] = (sum_m weight[m] * terms[m][i][k] - target[i][k]) * scale.
void mix_residual(std::span<const double> weight, std::span<const Vec3* const> terms,
                  std::span<const Vec3> target, double scale, Eigen::Ref<Eigen::VectorXd> r);
void mix_residual_ref(std::span<const double> weight, std::span<const Vec3* const> terms,
                      std::span<const Vec3> target, double scale, Eigen::Ref<Eigen::VectorXd> r);

/// Threads used by the Parallel kernels (1 without OpenMP).
int kernel_threads();
void set_kernel_threads(int n);

/// RAII switch between the parallel kernels and their serial twins for the
/// current thread. Sweeps use Serial inside each worker.
class ScopedExecution {
 public:
  explicit ScopedExecution(Execution e);
  ~ScopedExecution();
  ScopedExecution(const ScopedExecution&) = delete;
  ScopedExecution& operator=(const ScopedExecution&) = delete;

 private:
  Execution previous_;
};

Execution current_execution();

}  // namespace smid
