#pragma once

// Simulated trials and the three noise-sensitivity sweeps.

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "smid/health.hpp"
#include "smid/stage1.hpp"
#include "smid/stage2.hpp"
#include "smid/trajectory.hpp"

namespace smid {

inline constexpr double kMeasurementRateHz = 50.0;

/// Ground-truth calibration used when simulating `kind`. With
/// `with_reference` the position and inverse-position models get
/// p_rw = [10, 0, 0] and omega_rw = [0, 0.8727, 0].
ModelStateVector default_true_calibration(ModelKind kind, bool with_reference = false);

/// System input perturbed by an SNR-derived sigma.
enum class NoiseInput { Position, Velocity, Rotation, AngularRate, Measurement };

std::string_view to_string(NoiseInput input);
inline constexpr std::array<NoiseInput, 5> kNoiseInputs = {
    NoiseInput::Position, NoiseInput::Velocity, NoiseInput::Rotation, NoiseInput::AngularRate,
    NoiseInput::Measurement};

struct TrialSpec {
  LissajousParams trajectory;
  ModelKind kind = ModelKind::Position;
  ModelStateVector calibration;
  NoiseProfile noise;  // core sigmas plus noise.measurement
  /// Per-axis additive measurement sigma overriding noise.measurement
  /// (SNR sweeps on additive models).
  std::optional<Vec3> measurement_axis_sigma;
  double measurement_rate_hz = kMeasurementRateHz;
  std::uint64_t measurement_seed = 0;
};

struct TrialData {
  CoreStateSeries truth;
  CoreStateSeries core;  // perturbed
  MeasurementSeries meas;
  SyncedData synced;
};

/// Truth, noisy core, measurements at the measurement rate and the
/// synchronized pairs (tolerance: half a measurement period).
TrialData simulate_trial(const TrialSpec& spec);

/// Per-axis population std of a component series, divided by snr.
Vec3 axis_sigma_from_snr(std::span<const Vec3> series, double snr);

/// Replaces the sigma of `input` by its SNR-derived value. Rotational
/// inputs use alpha = ||lambda(attitude tangent)|| / snr.
void apply_snr(TrialSpec& spec, NoiseInput input, double snr);

/// Tangent vectors of the true attitude, sensor frame included.
std::vector<Vec3> attitude_tangents(const CoreStateSeries& truth, const Mat3& R_is = Mat3::Identity());

enum class SweepKind { MeasurementNoise, SnrCollective, SnrIndividual };

std::string_view to_string(SweepKind kind);
std::optional<SweepKind> parse_sweep_kind(std::string_view s);

struct SweepCell {
  int id = 0;
  ModelKind kind = ModelKind::Position;
  int level = 0;       // column index within the sweep
  double value = 0.0;  // sigma (channel units) or SNR
  std::optional<NoiseInput> input;  // SnrIndividual only
  int trajectory = 0;
};

struct SweepRecord {
  SweepCell cell;
  bool failed = false;  // the pipeline threw
  std::string error;
  Stage1Result result;
  bool correct = false;
};

struct SweepConfig {
  SweepKind kind = SweepKind::MeasurementNoise;
  std::vector<ModelKind> models{kAllModels.begin(), kAllModels.end()};
  std::vector<LissajousParams> trajectories;
  std::uint64_t seed = 0;
  Stage1Options stage1;
  /// Optional column override. Measurement-noise sweeps use channel units
  /// (m, rad, m/s, rad); SNR sweeps use the ratio.
  std::vector<double> levels;
  int threads = 0;  // 0: all available
};

/// Default columns of a sweep for one model.
std::vector<double> default_levels(SweepKind kind, ModelKind model);

std::vector<SweepCell> sweep_cells(const SweepConfig& config);
TrialSpec cell_spec(const SweepConfig& config, const SweepCell& cell);

/// Runs every cell. Failed cells are recorded and the sweep continues.
/// Records come back ordered by cell id whatever the completion order.
std::vector<SweepRecord> run_sweep(const SweepConfig& config,
                                   const std::function<void(const SweepRecord&)>& progress = {});

/// False-selection counts laid out as rows of models and columns of levels
/// (or input x SNR for SnrIndividual). Failed cells count as false.
void write_sweep_table(std::ostream& os, const SweepConfig& config,
                       std::span<const SweepRecord> records);

/// One row per result with delta_b, the losses and the residual.
void write_sweep_records(std::ostream& os, std::span<const SweepRecord> records,
                         const ObjectiveWeights& weights);

std::vector<LabeledResult> labeled_results(std::span<const SweepRecord> records,
                                           const ObjectiveWeights& weights);

/// Trial-averaged estimate of one 3-vector state: mean absolute value and
/// mean absolute error per axis, mean norms. For rotations the error norm
/// is the geodesic angle.
struct CalibrationColumn {
  std::string label;
  Vec3 value = Vec3::Zero();
  Vec3 error = Vec3::Zero();
  double value_norm = 0.0;
  double error_norm = 0.0;
};

CalibrationColumn summarize_estimates(const std::string& label, std::span<const Vec3> estimates,
                                      const Vec3& truth, bool rotation);

/// Rows x, y, z, norm; two columns (value, error) per state.
void write_calibration_table(std::ostream& os, std::span<const CalibrationColumn> columns);

}  // namespace smid
