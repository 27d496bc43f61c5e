#pragma once

// Simulated trials shared by the tests and the acceptance binary.

#include "smid/experiment.hpp"

namespace fixture {

inline std::vector<smid::LissajousParams> canonical() {
  return smid::load_trajectory_set(SMID_SOURCE_DIR "/configs/trajectories/canonical_v1.json");
}

/// Trial with every noise source switched off.
inline smid::TrialSpec noiseless(smid::ModelKind kind, int trajectory = 0,
                                 bool with_reference = false) {
  smid::TrialSpec spec;
  spec.trajectory = canonical().at(static_cast<std::size_t>(trajectory));
  spec.kind = kind;
  spec.calibration = smid::default_true_calibration(kind, with_reference);
  spec.noise = smid::NoiseProfile{};
  for (smid::ModelKind k : smid::kAllModels) spec.noise.measurement.set_for_model(k, 0.0);
  return spec;
}

/// Realistic core noise plus the given measurement sigma.
inline smid::TrialSpec realistic(smid::ModelKind kind, int trajectory, double measurement_sigma,
                                 std::uint64_t seed, bool with_reference = false) {
  smid::TrialSpec spec;
  spec.trajectory = canonical().at(static_cast<std::size_t>(trajectory));
  spec.kind = kind;
  spec.calibration = smid::default_true_calibration(kind, with_reference);
  spec.noise = smid::NoiseProfile::realistic(spec.trajectory.rate_hz, seed);
  spec.noise.measurement.set_for_model(kind, measurement_sigma);
  spec.measurement_seed = seed + 4000;
  return spec;
}

}  // namespace fixture
