#pragma once

// Calibration refinement of the selected model on raw data and the
// L1-penalized reference-frame test.

#include <span>
#include <vector>

#include "smid/levenberg_marquardt.hpp"
#include "smid/stage1.hpp"

namespace smid {

struct Stage2Options {
  LmOptions lm;
  double lambda_ref = 0.06;
  double ref_threshold = 1e-3;  // on ||p_rw||_1 + ||omega_rw||_1
};

struct CalibrationResult {
  ModelKind kind = ModelKind::Position;
  ModelStateVector states;        // only the model's slots are non-zero
  bool reference_required = false;
  double reference_residual_norm = 0.0;
  bool reference_penalized = false;
  Vec3 rmse_per_axis = Vec3::Zero();  // channel units; radians on the rotation channel
  double rotation_series_error = 0.0; // rotation channel only
  int iterations = 0;
  bool converged = false;

  bool operator==(const CalibrationResult&) const = default;
};

/// ||p_rw||_1 + ||omega_rw||_1.
double loss_ref(const Vec3& p_rw, const TangentRotation& omega_rw);

/// Mean geodesic distance between two tangent-vector series.
double rotation_series_error(std::span<const Vec3> a, std::span<const Vec3> b);

/// Raw-data least squares over the slots of one model.
///
/// Data entries are (h(x_c, x_m) - S) / sqrt(n) on the vector channel and
/// log(exp(h) R_S^T) / sqrt(n) on the rotation channel. With the penalty
/// enabled one more entry sqrt(lambda_ref * L_ref) follows, and each
/// reference slot is carried as two non-negative parts v = v+ - v- so that
/// L_ref is linear on the feasible set.
class Stage2Problem final : public LeastSquaresProblem {
 public:
  Stage2Problem(ModelKind kind, const SyncedData& data, bool penalize_reference,
                double lambda_ref);

  int num_params() const override { return num_params_; }
  int num_residuals() const override { return num_residuals_; }
  void residual(const Eigen::VectorXd& x, Eigen::Ref<Eigen::VectorXd> r) const override;
  double lower_bound(int j) const override;

  /// Optimized slots. Rotation and InverseRotation never include omega_rw.
  const std::vector<StateSlot>& slots() const { return slots_; }

  Eigen::VectorXd pack(const ModelStateVector& states) const;
  /// Unpacked onto `base`, which supplies the fixed slots.
  ModelStateVector unpack(const Eigen::VectorXd& x, ModelStateVector base = {}) const;

 private:
  ModelKind kind_;
  Channel channel_;
  bool penalize_;
  double lambda_ref_;
  std::vector<PreparedCore> core_;
  std::vector<Vec3> vectors_;
  std::vector<Mat3> rotations_;
  std::vector<StateSlot> slots_;
  std::vector<int> offset_;  // first parameter of each slot
  std::vector<bool> split_;  // slot carried as (v+, v-)
  int num_params_ = 0;
  int num_residuals_ = 0;
};

/// Refinement without the reference penalty, initialized from Stage 1.
/// Throws WrongChannel when the data channel does not fit `kind`.
CalibrationResult refine_calibration(ModelKind kind, const SyncedData& data,
                                     const Stage1Result& init, const Stage2Options& options = {});

/// Same refinement with L_ref added. Throws ModelHasNoReference for the
/// velocity and magnetometer models.
CalibrationResult determine_reference_frame(ModelKind kind, const SyncedData& data,
                                            const Stage1Result& init,
                                            const Stage2Options& options = {});

/// Measurements predicted by `states`, as tangent vectors on the rotation
/// channel.
std::vector<Vec3> reproject(ModelKind kind, std::span<const CoreStateSample> core,
                            const ModelStateVector& states);

}  // namespace smid
