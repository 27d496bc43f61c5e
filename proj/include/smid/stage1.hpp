#pragma once

// Joint soft-Boolean model selection and calibration-state estimation.

#include <span>
#include <vector>

#include "smid/kernels.hpp"
#include "smid/levenberg_marquardt.hpp"
#include "smid/sensor_models.hpp"
#include "smid/trajectory.hpp"

namespace smid {

struct ObjectiveWeights {
  double lambda_p = 200.0;   // L_pos
  double lambda_n = 50.0;    // L_norm
  double lambda_v = 100.0;   // L_vec (enters squared)
  double lambda_s = 20.0;    // L_std
  double lambda_rot = 50.0;  // L_rot, per rotational state
  double data = 1.0;         // multiplies the mean squared data residual
};

enum class DataScaling {
  Fixed,     // use weights.data as given
  Balanced,  // pick weights.data from the problem, see balanced_data_weight
};

struct Stage1Options {
  ObjectiveWeights weights;
  LmOptions lm;
  DataScaling data_scaling = DataScaling::Balanced;
  /// Initial size of the data term relative to L_std(uniform b) when
  /// balancing. The default is the default lambda_s, so both terms start
  /// equal under the default weights.
  double data_balance = 20.0;
  /// Keep selectors >= 0 during the solve. L_pos is an exact penalty for
  /// this bound, so the minimizer is the same; without the bound the
  /// kink of sqrt(L_pos) at zero stalls the solver.
  bool nonnegative_selectors = true;
};

/// Unweighted loss values at the solution. `rot` sums over all
/// rotational states of the channel.
struct RemainingLosses {
  double norm = 0.0;
  double pos = 0.0;
  double std = 0.0;
  double vec = 0.0;
  double rot = 0.0;

  bool operator==(const RemainingLosses&) const = default;
};

struct Stage1Result {
  Channel channel = Channel::Vector3;
  std::vector<double> b;          // channel_models(channel) order
  ModelKind selected = ModelKind::Position;
  double delta_b = 0.0;
  ModelStateVector x_m;
  double residual_rmse = 0.0;     // sqrt(sum_i ||f_sys_i - S_i||^2 / n)
  RemainingLosses losses;
  double data_weight = 1.0;       // weights.data the solve used
  int iterations = 0;
  bool converged = false;

  bool operator==(const Stage1Result&) const = default;
};

/// argmax with ties resolved by catalog order, and the gap between the
/// two largest selectors.
std::pair<ModelKind, double> select_model(std::span<const double> b, Channel channel);

/// Residual of the stacked objective over [active states..., b...].
///
/// Layout: 3n data entries (f_sys - S) / sqrt(n), then
/// sqrt(l_n) (|b|_1 - 1), sqrt(l_p L_pos), sqrt(l_s L_std),
/// [sqrt(l_v) (|m_w| - 1) on the vector channel], and
/// sqrt(l_rot L_rot) for every rotational state. The squared norm is
/// twice the scalar objective.
class Stage1Problem final : public LeastSquaresProblem {
 public:
  Stage1Problem(const SyncedData& data, const ObjectiveWeights& weights,
                bool nonnegative_selectors = true);

  int num_params() const override { return num_params_; }
  int num_residuals() const override { return num_residuals_; }
  void residual(const Eigen::VectorXd& x, Eigen::Ref<Eigen::VectorXd> r) const override;
  double lower_bound(int j) const override;
  void prepare_linearization(const Eigen::VectorXd& x) override;
  void residual_perturbed(const Eigen::VectorXd& x, int j, double h,
                          Eigen::Ref<Eigen::VectorXd> r) const override;

  Channel channel() const { return channel_; }
  const std::vector<ModelKind>& models() const { return models_; }
  const std::vector<StateSlot>& slots() const { return slots_; }
  std::size_t samples() const { return core_.size(); }

  Eigen::VectorXd pack(const ModelStateVector& states, std::span<const double> b) const;
  ModelStateVector unpack_states(const Eigen::VectorXd& x) const;
  std::vector<double> unpack_selectors(const Eigen::VectorXd& x) const;

  /// Channel target: normalized vectors or raw tangent vectors.
  const std::vector<Vec3>& target() const { return target_; }
  const NormalizationInfo& measurement_normalization() const { return meas_norm_; }

  /// f_sys per sample at x.
  std::vector<Vec3> system_output(const Eigen::VectorXd& x) const;
  RemainingLosses losses(const Eigen::VectorXd& x) const;

 private:
  void model_output(std::size_t model, const ModelStateVector& states,
                    std::span<Vec3> out) const;
  void loss_residuals(const ModelStateVector& states, std::span<const double> b,
                      Eigen::Ref<Eigen::VectorXd> r) const;

  Channel channel_;
  ObjectiveWeights weights_;
  bool nonnegative_selectors_;
  std::vector<PreparedCore> core_;
  std::vector<Vec3> target_;
  NormalizationInfo meas_norm_;
  std::vector<ModelKind> models_;
  std::vector<StateSlot> slots_;
  std::vector<std::vector<std::size_t>> slot_models_;  // models reading slot s
  int num_params_ = 0;
  int num_residuals_ = 0;

  ModelStateVector cached_states_;
  std::vector<std::vector<Vec3>> cache_;
};

/// Selectors 1/N, states zero, m_w the unit mean measurement direction.
ModelStateVector stage1_initial_states(const SyncedData& data);

/// data_balance * L_std(uniform) / mse0, where mse0 is the mean squared
/// data residual at the default start. Independent of the measurement
/// scale because the target is normalized.
double balanced_data_weight(const SyncedData& data, double data_balance);

Stage1Result optimize_stage1(const SyncedData& data, const Stage1Options& options = {});

/// Runs from explicit starting values instead of the default init.
Stage1Result optimize_stage1(const SyncedData& data, const ModelStateVector& states0,
                             std::span<const double> b0, const Stage1Options& options);

}  // namespace smid
