#include "smid/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <json.hpp>

namespace smid {

double MeasurementSigmas::for_model(ModelKind kind) const {
  switch (kind) {
    case ModelKind::Position:
    case ModelKind::InversePosition: return position;
    case ModelKind::Rotation:
    case ModelKind::InverseRotation: return rotation;
    case ModelKind::WorldVelocity:
    case ModelKind::BodyVelocity: return velocity;
    case ModelKind::Magnetometer: return magnetometer;
  }
  return 0.0;
}

void MeasurementSigmas::set_for_model(ModelKind kind, double sigma) {
  switch (kind) {
    case ModelKind::Position:
    case ModelKind::InversePosition: position = sigma; break;
    case ModelKind::Rotation:
    case ModelKind::InverseRotation: rotation = sigma; break;
    case ModelKind::WorldVelocity:
    case ModelKind::BodyVelocity: velocity = sigma; break;
    case ModelKind::Magnetometer: magnetometer = sigma; break;
  }
}

double gyro_sigma_per_sample(double density_deg_per_s_sqrt_hz, double rate_hz) {
  return density_deg_per_s_sqrt_hz * std::sqrt(rate_hz) * kPi / 180.0;
}

NoiseProfile NoiseProfile::realistic(double core_rate_hz, std::uint64_t seed) {
  NoiseProfile n;
  n.sigma_p = Vec3::Constant(0.1);
  n.sigma_v = Vec3::Constant(0.05);
  n.sigma_rot = 2.0 * kPi / 180.0;
  n.sigma_omega = Vec3::Constant(gyro_sigma_per_sample(0.014, core_rate_hz));
  n.seed = seed;
  return n;
}

namespace {

Mat3 euler_zyx(double roll, double pitch, double yaw) {
  return (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
          Eigen::AngleAxisd(roll, Vec3::UnitX()))
      .toRotationMatrix();
}

}  // namespace

CoreStateSeries generate_lissajous(const LissajousParams& p, const TrajectoryEnvelope& envelope) {
  if (!(p.duration > 0.0) || !(p.rate_hz > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "duration and rate must be positive");
  }
  const auto n = static_cast<std::size_t>(std::floor(p.duration * p.rate_hz + 1e-9)) + 1;
  CoreStateSeries series;
  series.rate_hz = p.rate_hz;
  series.samples.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / p.rate_hz;
    CoreStateSample& s = series.samples[i];
    s.t = t;
    for (int k = 0; k < 3; ++k) {
      const double arg = p.frequency[k] * t + p.phase[k];
      s.p_wi[k] = p.amplitude[k] * std::sin(arg);
      s.v_wi[k] = p.amplitude[k] * p.frequency[k] * std::cos(arg);
    }
    Vec3 angle, rate;
    for (int k = 0; k < 3; ++k) {
      const double arg = p.attitude_frequency[k] * t + p.attitude_phase[k];
      angle[k] = p.attitude_amplitude[k] * std::sin(arg);
      rate[k] = p.attitude_amplitude[k] * p.attitude_frequency[k] * std::cos(arg);
    }
    const double roll = angle[0], pitch = angle[1];
    s.q_wi = matrix_to_quat(euler_zyx(roll, pitch, angle[2]));
    // ZYX Euler rates mapped to the body frame.
    const double sr = std::sin(roll), cr = std::cos(roll);
    const double sp = std::sin(pitch), cp = std::cos(pitch);
    s.omega_i = Vec3(rate[0] - rate[2] * sp,
                     rate[1] * cr + rate[2] * cp * sr,
                     -rate[1] * sr + rate[2] * cp * cr);
  }
  check_envelope(series, envelope);
  return series;
}

void check_envelope(const CoreStateSeries& series, const TrajectoryEnvelope& env) {
  if (series.samples.empty()) return;
  constexpr double tol = 1e-9;
  Vec3 lo = series.samples.front().p_wi, hi = lo;
  for (const auto& s : series.samples) {
    lo = lo.cwiseMin(s.p_wi);
    hi = hi.cwiseMax(s.p_wi);
    if (s.v_wi.norm() > env.max_speed + tol) {
      throw Error(ErrorCode::EnvelopeViolation, "speed " + std::to_string(s.v_wi.norm()));
    }
    if (s.omega_i.norm() > env.max_angular_rate + tol) {
      throw Error(ErrorCode::EnvelopeViolation,
                  "angular rate " + std::to_string(s.omega_i.norm()));
    }
    const Mat3 R = quat_to_matrix(s.q_wi);
    const double pitch = std::asin(std::clamp(-R(2, 0), -1.0, 1.0));
    const double roll = std::atan2(R(2, 1), R(2, 2));
    const double yaw = std::atan2(R(1, 0), R(0, 0));
    for (double a : {roll, pitch, yaw}) {
      if (std::abs(a) > env.max_attitude + tol) {
        throw Error(ErrorCode::EnvelopeViolation, "attitude angle " + std::to_string(a));
      }
    }
  }
  const Vec3 extent = hi - lo;
  if (extent.maxCoeff() > env.max_position_extent + tol) {
    throw Error(ErrorCode::EnvelopeViolation,
                "position extent " + std::to_string(extent.maxCoeff()));
  }
}

CoreStateSeries perturb_core_states(const CoreStateSeries& truth, const NoiseProfile& noise) {
  CoreStateSeries out = truth;
  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  auto draw = [&](const Vec3& sigma) {
    const double a = unit(rng), b = unit(rng), c = unit(rng);
    return Vec3(sigma.x() * a, sigma.y() * b, sigma.z() * c);
  };
  const Vec3 rot_axis_sigma = Vec3::Constant(axis_sigma_from_angle(noise.sigma_rot));
  for (auto& s : out.samples) {
    // Draw all four blocks unconditionally so the stream layout does not
    // depend on which sigmas are zero.
    const Vec3 dp = draw(noise.sigma_p);
    const Vec3 dv = draw(noise.sigma_v);
    const Vec3 dr = draw(rot_axis_sigma);
    const Vec3 dw = draw(noise.sigma_omega);
    s.p_wi += dp;
    s.v_wi += dv;
    if (noise.sigma_rot > 0.0) {
      s.q_wi = matrix_to_quat(quat_to_matrix(s.q_wi) * exp_so3(dr));
    }
    s.omega_i += dw;
  }
  return out;
}

double population_std(std::span<const double> x) {
  if (x.empty()) return 0.0;
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / n);
}

double sigma_from_snr(std::span<const double> component, double snr) {
  if (!(snr > 0.0)) throw Error(ErrorCode::InvalidArgument, "snr must be positive");
  if (component.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 samples");
  const double lambda = population_std(component);
  if (!(lambda > 0.0)) throw Error(ErrorCode::ZeroVariance, "constant series");
  return lambda / snr;
}

double axis_sigma_from_angle(double alpha) {
  if (alpha < 0.0) throw Error(ErrorCode::InvalidArgument, "negative angle");
  return alpha / std::sqrt(3.0);
}

SyncedData synchronize(const CoreStateSeries& core, const MeasurementSeries& meas,
                       double tolerance) {
  if (!(tolerance > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");

  std::vector<std::size_t> core_order(core.samples.size());
  std::iota(core_order.begin(), core_order.end(), 0);
  std::stable_sort(core_order.begin(), core_order.end(), [&](std::size_t a, std::size_t b) {
    return core.samples[a].t < core.samples[b].t;
  });
  std::vector<double> core_t(core_order.size());
  for (std::size_t i = 0; i < core_order.size(); ++i) core_t[i] = core.samples[core_order[i]].t;

  std::vector<std::size_t> meas_order(meas.size());
  std::iota(meas_order.begin(), meas_order.end(), 0);
  std::stable_sort(meas_order.begin(), meas_order.end(),
                   [&](std::size_t a, std::size_t b) { return meas.t[a] < meas.t[b]; });

  std::vector<char> used(core_t.size(), 0);
  SyncedData out;
  out.meas.channel = meas.channel;

  for (std::size_t mi : meas_order) {
    const double tm = meas.t[mi];
    const auto lb = static_cast<std::ptrdiff_t>(
        std::lower_bound(core_t.begin(), core_t.end(), tm) - core_t.begin());
    // Nearest unused neighbour on each side; ties keep the earlier one.
    std::ptrdiff_t left = lb - 1;
    while (left >= 0 && tm - core_t[left] <= tolerance && used[left]) --left;
    if (left >= 0 && tm - core_t[left] > tolerance) left = -1;
    auto right = lb;
    const auto nc = static_cast<std::ptrdiff_t>(core_t.size());
    while (right < nc && core_t[right] - tm <= tolerance && used[right]) ++right;
    if (right >= nc || core_t[right] - tm > tolerance) right = -1;

    std::ptrdiff_t best = left;
    if (right >= 0 && (left < 0 || core_t[right] - tm < tm - core_t[left])) best = right;
    if (best < 0) continue;
    used[best] = 1;
    out.core.push_back(core.samples[core_order[best]]);
    out.meas.t.push_back(tm);
    if (meas.channel == Channel::Vector3) {
      out.meas.vectors.push_back(meas.vectors[mi]);
    } else {
      out.meas.rotations.push_back(meas.rotations[mi]);
    }
  }
  if (out.core.empty()) {
    throw Error(ErrorCode::EmptyIntersection, "no measurement matched a core state");
  }
  return out;
}

namespace {

Vec3 vec3_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(ErrorCode::ParseError, "expected a 3-element array");
  }
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace

std::vector<LissajousParams> load_trajectory_set(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  nlohmann::json root;
  try {
    in >> root;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  const double deg = kPi / 180.0;
  const double base = root.at("base_frequency").get<double>();
  const double duration = root.value("duration", 30.0);
  const double rate = root.value("rate_hz", 200.0);

  std::vector<LissajousParams> out;
  try {
    for (const auto& t : root.at("trajectories")) {
      LissajousParams p;
      p.name = t.at("name").get<std::string>();
      p.amplitude = vec3_from_json(t.at("amplitude"));
      p.frequency = base * vec3_from_json(t.at("frequency_multiple"));
      p.phase = vec3_from_json(t.at("phase"));
      p.attitude_amplitude = deg * vec3_from_json(t.at("attitude_amplitude_deg"));
      p.attitude_frequency = base * vec3_from_json(t.at("attitude_frequency_multiple"));
      p.attitude_phase = vec3_from_json(t.at("attitude_phase"));
      p.duration = duration;
      p.rate_hz = rate;
      p.seed = t.at("seed").get<std::uint64_t>();
      out.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return out;
}

}  // namespace smid
