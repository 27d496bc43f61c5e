#pragma once

// Synthetic Lissajous core-state trajectories, core-state noise and
// stream synchronization.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "smid/types.hpp"

namespace smid {

/// Position k: A_k sin(f_k t + phi_k). Attitude (roll, pitch, yaw) uses
/// the same form and is composed as Rz(yaw) Ry(pitch) Rx(roll).
struct LissajousParams {
  std::string name;
  Vec3 amplitude = Vec3::Zero();           // m
  Vec3 frequency = Vec3::Zero();           // rad/s
  Vec3 phase = Vec3::Zero();               // rad
  Vec3 attitude_amplitude = Vec3::Zero();  // rad
  Vec3 attitude_frequency = Vec3::Zero();  // rad/s
  Vec3 attitude_phase = Vec3::Zero();      // rad
  double duration = 30.0;                  // s
  double rate_hz = 200.0;
  std::uint64_t seed = 0;
};

/// Published statistics every simulated trajectory has to respect.
struct TrajectoryEnvelope {
  double max_position_extent = 3.5;  // m, per axis
  double max_speed = 3.5;            // m/s
  double max_attitude = 30.0 * kPi / 180.0;
  double max_angular_rate = 3.2;     // rad/s
};

/// Measurement noise, one entry per sensor family. Rotation and
/// magnetometer values are axis-angle magnitudes in radians.
struct MeasurementSigmas {
  double position = 0.3;
  double rotation = 3.0 * kPi / 180.0;
  double velocity = 0.05;
  double magnetometer = 6.0 * kPi / 180.0;

  double for_model(ModelKind kind) const;
  void set_for_model(ModelKind kind, double sigma);
};

/// Core-state noise. Translational and rate sigmas are per axis so that
/// SNR-derived noise can follow each component's spread.
struct NoiseProfile {
  Vec3 sigma_p = Vec3::Zero();      // m
  Vec3 sigma_v = Vec3::Zero();      // m/s
  double sigma_rot = 0.0;           // rad, axis-angle magnitude
  Vec3 sigma_omega = Vec3::Zero();  // rad/s per sample
  MeasurementSigmas measurement;
  std::uint64_t seed = 0;

  /// The realistic 1-sigma setup: 0.1 m, 0.05 m/s, 2 deg and a gyro
  /// density of 0.014 deg/s/sqrt(Hz) discretized at `core_rate_hz`.
  static NoiseProfile realistic(double core_rate_hz, std::uint64_t seed = 0);
};

/// Gyro density 0.014 deg/s/sqrt(Hz) times sqrt(rate).
double gyro_sigma_per_sample(double density_deg_per_s_sqrt_hz, double rate_hz);

CoreStateSeries generate_lissajous(const LissajousParams& params,
                                   const TrajectoryEnvelope& envelope = {});

/// Throws EnvelopeViolation naming the first violated statistic.
void check_envelope(const CoreStateSeries& series, const TrajectoryEnvelope& envelope);

CoreStateSeries perturb_core_states(const CoreStateSeries& truth, const NoiseProfile& noise);

/// Population standard deviation sqrt(1/N sum (x - mu)^2).
double population_std(std::span<const double> x);

/// lambda(x) / snr. Throws ZeroVariance for a constant series.
double sigma_from_snr(std::span<const double> component, double snr);

/// Per-axis sigma giving an axis-angle noise of magnitude alpha.
double axis_sigma_from_angle(double alpha);

/// Core samples and measurements paired one to one.
struct SyncedData {
  std::vector<CoreStateSample> core;
  MeasurementSeries meas;

  std::size_t size() const { return core.size(); }
};

/// Greedy nearest-in-time association. Each core sample is used at most
/// once; measurements without a partner inside `tolerance` are dropped.
SyncedData synchronize(const CoreStateSeries& core, const MeasurementSeries& meas,
                       double tolerance);

/// Reads the versioned parameter sets under configs/trajectories/.
std::vector<LissajousParams> load_trajectory_set(const std::filesystem::path& path);

}  // namespace smid
