#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "smid/geometry.hpp"

namespace smid {

/// One vehicle state from the navigation filter (IMU frame w.r.t. world).
struct CoreStateSample {
  double t = 0.0;
  Vec3 p_wi = Vec3::Zero();
  Vec3 v_wi = Vec3::Zero();
  Quat q_wi = Quat::Identity();
  Vec3 omega_i = Vec3::Zero();  // body angular rate, rad/s
};

struct CoreStateSeries {
  std::vector<CoreStateSample> samples;
  double rate_hz = 0.0;
};

enum class Channel { Vector3, Rotation };

/// The unknown sensor stream. Exactly one of `vectors` / `rotations` is
/// populated, matching `channel`.
struct MeasurementSeries {
  Channel channel = Channel::Vector3;
  std::vector<double> t;
  std::vector<Vec3> vectors;
  std::vector<Quat> rotations;

  std::size_t size() const { return t.size(); }
  bool empty() const { return t.empty(); }
};

enum class ModelKind {
  Position,
  InversePosition,
  Rotation,
  InverseRotation,
  WorldVelocity,
  BodyVelocity,
  Magnetometer,
};

inline constexpr std::array<ModelKind, 7> kAllModels = {
    ModelKind::Position,      ModelKind::InversePosition, ModelKind::Rotation,
    ModelKind::InverseRotation, ModelKind::WorldVelocity, ModelKind::BodyVelocity,
    ModelKind::Magnetometer,
};

/// Candidate order inside each channel; also the argmax tie-break order.
inline constexpr std::array<ModelKind, 5> kVectorModels = {
    ModelKind::Position, ModelKind::InversePosition, ModelKind::WorldVelocity,
    ModelKind::BodyVelocity, ModelKind::Magnetometer,
};
inline constexpr std::array<ModelKind, 2> kRotationModels = {
    ModelKind::Rotation, ModelKind::InverseRotation,
};

constexpr Channel channel_of(ModelKind kind) {
  return (kind == ModelKind::Rotation || kind == ModelKind::InverseRotation) ? Channel::Rotation
                                                                            : Channel::Vector3;
}

std::string_view to_string(ModelKind kind);
std::optional<ModelKind> parse_model_kind(std::string_view name);
std::string_view to_string(Channel channel);
std::optional<Channel> parse_channel(std::string_view name);

/// Candidate models of a channel, in catalog order.
std::vector<ModelKind> channel_models(Channel channel);

}  // namespace smid
