#pragma once

// Catalog of the seven forward sensor models, their calibration-state
// layout and measurement synthesis.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "smid/trajectory.hpp"
#include "smid/types.hpp"

namespace smid {

/// 3-vector slots of the stacked model state. Ref* slots are shared by
/// all models that need a sensor reference frame.
enum class StateSlot : int {
  RefPosition = 0,    // p_rw
  RefRotation,        // omega_rw
  PositionLever,      // p_is (Position)
  InvPositionLever,   // p_is (InversePosition)
  InvPositionRotation,// omega_is (InversePosition)
  RotationRotation,   // omega_is (Rotation)
  InvRotationRotation,// omega_is (InverseRotation)
  VelocityLever,      // p_is (WorldVelocity)
  BodyVelocityLever,  // p_is (BodyVelocity)
  BodyVelocityRotation,// omega_is (BodyVelocity)
  MagnetometerRotation,// omega_is (Magnetometer)
  MagneticField,      // m_w
};

inline constexpr int kStateSlots = 12;
inline constexpr int kModelStateDim = 3 * kStateSlots;

constexpr int slot_offset(StateSlot s) { return 3 * static_cast<int>(s); }

constexpr bool slot_is_rotation(StateSlot s) {
  switch (s) {
    case StateSlot::RefRotation:
    case StateSlot::InvPositionRotation:
    case StateSlot::RotationRotation:
    case StateSlot::InvRotationRotation:
    case StateSlot::BodyVelocityRotation:
    case StateSlot::MagnetometerRotation: return true;
    default: return false;
  }
}

std::string_view to_string(StateSlot s);

/// State slots a model reads, in the order of its state association.
std::vector<StateSlot> model_slots(ModelKind kind);

/// Whether the model carries the shared reference-frame slots.
bool has_reference_frame(ModelKind kind);

struct ModelStateVector {
  Eigen::Matrix<double, kModelStateDim, 1> values =
      Eigen::Matrix<double, kModelStateDim, 1>::Zero();

  Vec3 get(StateSlot s) const { return values.segment<3>(slot_offset(s)); }
  void set(StateSlot s, const Vec3& v) { values.segment<3>(slot_offset(s)) = v; }

  /// Wraps every rotational slot onto norm <= pi.
  void canonicalize();

  bool operator==(const ModelStateVector&) const = default;
};

/// Core sample with its attitude already expanded to a matrix.
struct PreparedCore {
  Mat3 R_wi;
  Vec3 p_wi;
  Vec3 v_wi;
  Vec3 omega_i;
};

PreparedCore prepare_core(const CoreStateSample& s);
std::vector<PreparedCore> prepare_core(std::span<const CoreStateSample> samples);

/// Exponentials of the slots one model reads. Unused members stay identity
/// or zero.
struct PreparedModel {
  ModelKind kind = ModelKind::Position;
  Vec3 p_rw = Vec3::Zero();
  Mat3 R_rw = Mat3::Identity();
  Vec3 p_is = Vec3::Zero();
  Mat3 R_is = Mat3::Identity();
  Vec3 m_w = Vec3::Zero();
};

PreparedModel prepare_model(ModelKind kind, const ModelStateVector& x);

/// Forward model on one sample. Rotation models return a tangent vector.
Vec3 predict(const PreparedModel& m, const PreparedCore& c);
Vec3 predict(ModelKind kind, const CoreStateSample& core, const ModelStateVector& x);

/// Per-component min-max map into [0, 1]: normalized = (raw - offset) / scale.
struct NormalizationInfo {
  Vec3 offset = Vec3::Zero();
  Vec3 scale = Vec3::Ones();

  Vec3 apply(const Vec3& raw) const { return (raw - offset).cwiseQuotient(scale); }
  Vec3 invert(const Vec3& normed) const { return normed.cwiseProduct(scale) + offset; }
};

/// Components whose range is below this fraction of their magnitude are
/// treated as constant and mapped to 0.5.
inline constexpr double kConstantRangeTolerance = 1e-12;

NormalizationInfo min_max_info(std::span<const Vec3> series);

std::pair<std::vector<Vec3>, NormalizationInfo> normalize_series(std::span<const Vec3> series);
std::vector<Vec3> denormalize_series(std::span<const Vec3> normed, const NormalizationInfo& info);

/// Forward model on ground truth plus noise. Vector models get additive
/// Gaussian noise, except the magnetometer whose sigma is an axis-angle
/// magnitude rotating the predicted vector. Rotation models are perturbed
/// on the right by exp(n) with per-axis std sigma/sqrt(3).
/// `stride` keeps every stride-th truth sample.
MeasurementSeries synthesize(ModelKind kind, const CoreStateSeries& truth,
                             const ModelStateVector& calib, double sigma, std::uint64_t seed,
                             std::size_t stride = 1);

/// Additive models only: independent sigma per axis.
MeasurementSeries synthesize_per_axis(ModelKind kind, const CoreStateSeries& truth,
                                      const ModelStateVector& calib, const Vec3& sigma,
                                      std::uint64_t seed, std::size_t stride = 1);

/// Quaternion measurements to tangent vectors. Quaternions are homogeneous,
/// so each one is normalized first.
std::vector<Vec3> rotation_measurements_to_tangent(std::span<const Quat> q);

}  // namespace smid
