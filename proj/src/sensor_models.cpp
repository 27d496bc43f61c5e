#include "smid/sensor_models.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace smid {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Position: return "Position";
    case ModelKind::InversePosition: return "InversePosition";
    case ModelKind::Rotation: return "Rotation";
    case ModelKind::InverseRotation: return "InverseRotation";
    case ModelKind::WorldVelocity: return "WorldVelocity";
    case ModelKind::BodyVelocity: return "BodyVelocity";
    case ModelKind::Magnetometer: return "Magnetometer";
  }
  return "Unknown";
}

std::optional<ModelKind> parse_model_kind(std::string_view name) {
  for (ModelKind k : kAllModels) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::string_view to_string(Channel channel) {
  return channel == Channel::Vector3 ? "Vector3" : "Rotation";
}

std::optional<Channel> parse_channel(std::string_view name) {
  if (name == "Vector3") return Channel::Vector3;
  if (name == "Rotation") return Channel::Rotation;
  return std::nullopt;
}

std::vector<ModelKind> channel_models(Channel channel) {
  if (channel == Channel::Vector3) return {kVectorModels.begin(), kVectorModels.end()};
  return {kRotationModels.begin(), kRotationModels.end()};
}

std::string_view to_string(StateSlot s) {
  switch (s) {
    case StateSlot::RefPosition: return "p_rw";
    case StateSlot::RefRotation: return "omega_rw";
    case StateSlot::PositionLever: return "position.p_is";
    case StateSlot::InvPositionLever: return "inverse_position.p_is";
    case StateSlot::InvPositionRotation: return "inverse_position.omega_is";
    case StateSlot::RotationRotation: return "rotation.omega_is";
    case StateSlot::InvRotationRotation: return "inverse_rotation.omega_is";
    case StateSlot::VelocityLever: return "world_velocity.p_is";
    case StateSlot::BodyVelocityLever: return "body_velocity.p_is";
    case StateSlot::BodyVelocityRotation: return "body_velocity.omega_is";
    case StateSlot::MagnetometerRotation: return "magnetometer.omega_is";
    case StateSlot::MagneticField: return "magnetometer.m_w";
  }
  return "unknown";
}

std::vector<StateSlot> model_slots(ModelKind kind) {
  using S = StateSlot;
  switch (kind) {
    case ModelKind::Position: return {S::PositionLever, S::RefPosition, S::RefRotation};
    case ModelKind::InversePosition:
      return {S::InvPositionLever, S::InvPositionRotation, S::RefPosition, S::RefRotation};
    case ModelKind::Rotation: return {S::RotationRotation, S::RefRotation};
    case ModelKind::InverseRotation: return {S::InvRotationRotation, S::RefRotation};
    case ModelKind::WorldVelocity: return {S::VelocityLever};
    case ModelKind::BodyVelocity: return {S::BodyVelocityLever, S::BodyVelocityRotation};
    case ModelKind::Magnetometer: return {S::MagnetometerRotation, S::MagneticField};
  }
  return {};
}

bool has_reference_frame(ModelKind kind) {
  return kind == ModelKind::Position || kind == ModelKind::InversePosition ||
         kind == ModelKind::Rotation || kind == ModelKind::InverseRotation;
}

void ModelStateVector::canonicalize() {
  for (int i = 0; i < kStateSlots; ++i) {
    const auto s = static_cast<StateSlot>(i);
    if (slot_is_rotation(s)) set(s, smid::canonicalize(get(s)));
  }
}

PreparedCore prepare_core(const CoreStateSample& s) {
  return PreparedCore{quat_to_matrix(s.q_wi), s.p_wi, s.v_wi, s.omega_i};
}

std::vector<PreparedCore> prepare_core(std::span<const CoreStateSample> samples) {
  std::vector<PreparedCore> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(prepare_core(s));
  return out;
}

PreparedModel prepare_model(ModelKind kind, const ModelStateVector& x) {
  using S = StateSlot;
  PreparedModel m;
  m.kind = kind;
  switch (kind) {
    case ModelKind::Position:
      m.p_rw = x.get(S::RefPosition);
      m.R_rw = exp_so3(x.get(S::RefRotation));
      m.p_is = x.get(S::PositionLever);
      break;
    case ModelKind::InversePosition:
      m.p_rw = x.get(S::RefPosition);
      m.R_rw = exp_so3(x.get(S::RefRotation));
      m.p_is = x.get(S::InvPositionLever);
      m.R_is = exp_so3(x.get(S::InvPositionRotation));
      break;
    case ModelKind::Rotation:
      m.R_rw = exp_so3(x.get(S::RefRotation));
      m.R_is = exp_so3(x.get(S::RotationRotation));
      break;
    case ModelKind::InverseRotation:
      m.R_rw = exp_so3(x.get(S::RefRotation));
      m.R_is = exp_so3(x.get(S::InvRotationRotation));
      break;
    case ModelKind::WorldVelocity:
      m.p_is = x.get(S::VelocityLever);
      break;
    case ModelKind::BodyVelocity:
      m.p_is = x.get(S::BodyVelocityLever);
      m.R_is = exp_so3(x.get(S::BodyVelocityRotation));
      break;
    case ModelKind::Magnetometer:
      m.R_is = exp_so3(x.get(S::MagnetometerRotation));
      m.m_w = x.get(S::MagneticField);
      break;
  }
  return m;
}

Vec3 predict(const PreparedModel& m, const PreparedCore& c) {
  switch (m.kind) {
    case ModelKind::Position:
      return m.p_rw + m.R_rw * (c.p_wi + c.R_wi * m.p_is);
    case ModelKind::InversePosition:
      return -m.R_is.transpose() *
             (c.R_wi.transpose() * (m.R_rw.transpose() * m.p_rw + c.p_wi) + m.p_is);
    case ModelKind::Rotation:
      return log_so3_unchecked(m.R_rw * c.R_wi * m.R_is);
    case ModelKind::InverseRotation:
      return log_so3_unchecked(m.R_is.transpose() * c.R_wi.transpose() * m.R_rw.transpose());
    case ModelKind::WorldVelocity:
      return c.v_wi + c.R_wi * c.omega_i.cross(m.p_is);
    case ModelKind::BodyVelocity:
      return m.R_is.transpose() * (c.R_wi.transpose() * c.v_wi) +
             m.R_is.transpose() * c.omega_i.cross(m.p_is);
    case ModelKind::Magnetometer:
      return m.R_is.transpose() * (c.R_wi.transpose() * m.m_w);
  }
  return Vec3::Zero();
}

Vec3 predict(ModelKind kind, const CoreStateSample& core, const ModelStateVector& x) {
  return predict(prepare_model(kind, x), prepare_core(core));
}

NormalizationInfo min_max_info(std::span<const Vec3> series) {
  NormalizationInfo info;
  if (series.empty()) return info;
  Vec3 lo = series.front(), hi = lo;
  for (const auto& v : series) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
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
  return info;
}

std::pair<std::vector<Vec3>, NormalizationInfo> normalize_series(std::span<const Vec3> series) {
  const NormalizationInfo info = min_max_info(series);
  std::vector<Vec3> out;
  out.reserve(series.size());
  for (const auto& v : series) out.push_back(info.apply(v));
  return {std::move(out), info};
}

std::vector<Vec3> denormalize_series(std::span<const Vec3> normed, const NormalizationInfo& info) {
  std::vector<Vec3> out;
  out.reserve(normed.size());
  for (const auto& v : normed) out.push_back(info.invert(v));
  return out;
}

namespace {

MeasurementSeries synthesize_impl(ModelKind kind, const CoreStateSeries& truth,
                                  const ModelStateVector& calib, double angle_sigma,
                                  const Vec3& additive_sigma, std::uint64_t seed,
                                  std::size_t stride) {
  if (stride == 0) stride = 1;
  const PreparedModel model = prepare_model(kind, calib);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  const double axis_sigma = axis_sigma_from_angle(angle_sigma);
  auto draw = [&](const Vec3& s) {
    const double a = unit(rng), b = unit(rng), c = unit(rng);
    return Vec3(s.x() * a, s.y() * b, s.z() * c);
  };
  const bool additive = additive_sigma.maxCoeff() > 0.0;

  MeasurementSeries out;
  out.channel = channel_of(kind);
  for (std::size_t i = 0; i < truth.samples.size(); i += stride) {
    const CoreStateSample& s = truth.samples[i];
    const Vec3 y = predict(model, prepare_core(s));
    out.t.push_back(s.t);
    if (out.channel == Channel::Rotation) {
      Mat3 R = exp_so3(y);
      if (angle_sigma > 0.0) R = R * exp_so3(draw(Vec3::Constant(axis_sigma)));
      out.rotations.push_back(matrix_to_quat(R));
    } else if (kind == ModelKind::Magnetometer) {
      out.vectors.push_back(angle_sigma > 0.0 ? Vec3(exp_so3(draw(Vec3::Constant(axis_sigma))) * y)
                                              : y);
    } else {
      out.vectors.push_back(additive ? Vec3(y + draw(additive_sigma)) : y);
    }
  }
  return out;
}

bool angular_noise(ModelKind kind) {
  return channel_of(kind) == Channel::Rotation || kind == ModelKind::Magnetometer;
}

}  // namespace

MeasurementSeries synthesize(ModelKind kind, const CoreStateSeries& truth,
                             const ModelStateVector& calib, double sigma, std::uint64_t seed,
                             std::size_t stride) {
  if (sigma < 0.0) throw Error(ErrorCode::InvalidArgument, "negative sigma");
  if (angular_noise(kind)) {
    return synthesize_impl(kind, truth, calib, sigma, Vec3::Zero(), seed, stride);
  }
  return synthesize_impl(kind, truth, calib, 0.0, Vec3::Constant(sigma), seed, stride);
}

MeasurementSeries synthesize_per_axis(ModelKind kind, const CoreStateSeries& truth,
                                      const ModelStateVector& calib, const Vec3& sigma,
                                      std::uint64_t seed, std::size_t stride) {
  if (angular_noise(kind)) {
    throw Error(ErrorCode::InvalidArgument, "per-axis noise is for additive models only");
  }
  if (sigma.minCoeff() < 0.0) throw Error(ErrorCode::InvalidArgument, "negative sigma");
  return synthesize_impl(kind, truth, calib, 0.0, sigma, seed, stride);
}

std::vector<Vec3> rotation_measurements_to_tangent(std::span<const Quat> q) {
  std::vector<Vec3> out;
  out.reserve(q.size());
  for (const auto& qi : q) {
    const double n = qi.norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
      throw Error(ErrorCode::NonUnitQuaternion, "zero or non-finite quaternion");
    }
    out.push_back(log_so3_unchecked(quat_to_matrix(Quat(qi.coeffs() / n))));
  }
  return out;
}

}  // namespace smid
