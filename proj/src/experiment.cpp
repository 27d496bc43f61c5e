#include "smid/experiment.hpp"

#include <cmath>
#include <ostream>

#include "smid/csv_io.hpp"

#ifdef SMID_HAVE_OPENMP
#include <omp.h>
#endif

namespace smid {

ModelStateVector default_true_calibration(ModelKind kind, bool with_reference) {
  using S = StateSlot;
  ModelStateVector x;
  switch (kind) {
    case ModelKind::Position:
      x.set(S::PositionLever, Vec3(0.3, 0.5, 1.0));
      break;
    case ModelKind::InversePosition:
      x.set(S::InvPositionLever, Vec3(0.2, -0.4, 0.6));
      x.set(S::InvPositionRotation, Vec3(0.3, -0.2, 0.5));
      break;
    case ModelKind::Rotation:
      x.set(S::RotationRotation, Vec3(0.2, 0.4, -0.3));
      break;
    case ModelKind::InverseRotation:
      x.set(S::InvRotationRotation, Vec3(-0.3, 0.2, 0.4));
      break;
    case ModelKind::WorldVelocity:
      x.set(S::VelocityLever, Vec3(0.3, 0.5, 1.0));
      break;
    case ModelKind::BodyVelocity:
      x.set(S::BodyVelocityLever, Vec3(0.3, -0.5, 0.8));
      x.set(S::BodyVelocityRotation, Vec3(0.2, -0.3, 0.4));
      break;
    case ModelKind::Magnetometer:
      x.set(S::MagnetometerRotation, Vec3(0.3, -0.2, 0.4));
      x.set(S::MagneticField, Vec3(0.4, 0.1, -0.9).normalized());
      break;
  }
  if (with_reference &&
      (kind == ModelKind::Position || kind == ModelKind::InversePosition)) {
    x.set(S::RefPosition, Vec3(10.0, 0.0, 0.0));
    x.set(S::RefRotation, Vec3(0.0, 0.8727, 0.0));
  }
  return x;
}

std::string_view to_string(NoiseInput input) {
  switch (input) {
    case NoiseInput::Position: return "p";
    case NoiseInput::Velocity: return "v";
    case NoiseInput::Rotation: return "r";
    case NoiseInput::AngularRate: return "w";
    case NoiseInput::Measurement: return "m";
  }
  return "?";
}

namespace {

std::size_t measurement_stride(double core_rate, double meas_rate) {
  if (!(meas_rate > 0.0) || !(core_rate > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "rates must be positive");
  }
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(core_rate / meas_rate)));
}

std::uint64_t mix_seed(std::uint64_t h, std::uint64_t v) {
  // splitmix64 finalizer over the running hash
  std::uint64_t z = h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

bool additive_measurement(ModelKind kind) {
  return kind == ModelKind::Position || kind == ModelKind::InversePosition ||
         kind == ModelKind::WorldVelocity || kind == ModelKind::BodyVelocity;
}

double norm_of_axis_std(std::span<const Vec3> series) {
  Vec3 l = Vec3::Zero();
  std::vector<double> comp(series.size());
  for (int k = 0; k < 3; ++k) {
    for (std::size_t i = 0; i < series.size(); ++i) comp[i] = series[i][k];
    l[k] = population_std(comp);
  }
  return l.norm();
}

}  // namespace

TrialData simulate_trial(const TrialSpec& spec) {
  TrialData d;
  d.truth = generate_lissajous(spec.trajectory);
  d.core = perturb_core_states(d.truth, spec.noise);
  const std::size_t stride = measurement_stride(d.truth.rate_hz, spec.measurement_rate_hz);
  if (spec.measurement_axis_sigma) {
    d.meas = synthesize_per_axis(spec.kind, d.truth, spec.calibration,
                                 *spec.measurement_axis_sigma, spec.measurement_seed, stride);
  } else {
    d.meas = synthesize(spec.kind, d.truth, spec.calibration,
                        spec.noise.measurement.for_model(spec.kind), spec.measurement_seed,
                        stride);
  }
  d.synced = synchronize(d.core, d.meas, 0.5 / spec.measurement_rate_hz);
  return d;
}

Vec3 axis_sigma_from_snr(std::span<const Vec3> series, double snr) {
  Vec3 out;
  std::vector<double> comp(series.size());
  for (int k = 0; k < 3; ++k) {
    for (std::size_t i = 0; i < series.size(); ++i) comp[i] = series[i][k];
    out[k] = sigma_from_snr(comp, snr);
  }
  return out;
}

std::vector<Vec3> attitude_tangents(const CoreStateSeries& truth, const Mat3& R_is) {
  std::vector<Vec3> out;
  out.reserve(truth.samples.size());
  for (const auto& s : truth.samples) out.push_back(log_so3_unchecked(quat_to_matrix(s.q_wi) * R_is));
  return out;
}

void apply_snr(TrialSpec& spec, NoiseInput input, double snr) {
  if (!(snr > 0.0)) throw Error(ErrorCode::InvalidArgument, "snr must be positive");
  const CoreStateSeries truth = generate_lissajous(spec.trajectory);
  auto collect = [&](auto member) {
    std::vector<Vec3> v;
    v.reserve(truth.samples.size());
    for (const auto& s : truth.samples) v.push_back(member(s));
    return v;
  };
  auto angle_sigma = [&](std::span<const Vec3> tangents) {
    const double l = norm_of_axis_std(tangents);
    if (!(l > 0.0)) throw Error(ErrorCode::ZeroVariance, "constant attitude");
    return l / snr;
  };
  switch (input) {
    case NoiseInput::Position:
      spec.noise.sigma_p =
          axis_sigma_from_snr(collect([](const CoreStateSample& s) { return s.p_wi; }), snr);
      break;
    case NoiseInput::Velocity:
      spec.noise.sigma_v =
          axis_sigma_from_snr(collect([](const CoreStateSample& s) { return s.v_wi; }), snr);
      break;
    case NoiseInput::Rotation:
      spec.noise.sigma_rot = angle_sigma(attitude_tangents(truth));
      break;
    case NoiseInput::AngularRate:
      spec.noise.sigma_omega =
          axis_sigma_from_snr(collect([](const CoreStateSample& s) { return s.omega_i; }), snr);
      break;
    case NoiseInput::Measurement: {
      const std::size_t stride = measurement_stride(truth.rate_hz, spec.measurement_rate_hz);
      const MeasurementSeries clean = synthesize(spec.kind, truth, spec.calibration, 0.0, 0, stride);
      if (additive_measurement(spec.kind)) {
        spec.measurement_axis_sigma = axis_sigma_from_snr(clean.vectors, snr);
      } else if (spec.kind == ModelKind::Magnetometer) {
        const Mat3 R_is = exp_so3(spec.calibration.get(StateSlot::MagnetometerRotation));
        spec.noise.measurement.magnetometer = angle_sigma(attitude_tangents(truth, R_is));
      } else {
        spec.noise.measurement.rotation =
            angle_sigma(rotation_measurements_to_tangent(clean.rotations));
      }
      break;
    }
  }
}

std::string_view to_string(SweepKind kind) {
  switch (kind) {
    case SweepKind::MeasurementNoise: return "measurement-noise";
    case SweepKind::SnrCollective: return "snr-collective";
    case SweepKind::SnrIndividual: return "snr-individual";
  }
  return "unknown";
}

std::optional<SweepKind> parse_sweep_kind(std::string_view s) {
  for (auto k : {SweepKind::MeasurementNoise, SweepKind::SnrCollective, SweepKind::SnrIndividual}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::vector<double> default_levels(SweepKind kind, ModelKind model) {
  const double deg = kPi / 180.0;
  switch (kind) {
    case SweepKind::MeasurementNoise:
      switch (model) {
        case ModelKind::Position:
        case ModelKind::InversePosition: return {3.0, 6.0, 8.0, 10.0};
        case ModelKind::WorldVelocity:
        case ModelKind::BodyVelocity: return {0.5, 1.5, 2.0, 3.0};
        default: return {10 * deg, 45 * deg, 90 * deg, 135 * deg};
      }
    case SweepKind::SnrCollective: return {2.0, 1.5, 1.0, 0.5, 0.4};
    case SweepKind::SnrIndividual: return {1.0, 0.5, 0.4};
  }
  return {};
}

std::vector<SweepCell> sweep_cells(const SweepConfig& config) {
  std::vector<SweepCell> cells;
  int id = 0;
  for (ModelKind model : config.models) {
    const auto levels = config.levels.empty() ? default_levels(config.kind, model) : config.levels;
    for (std::size_t l = 0; l < levels.size(); ++l) {
      const std::size_t inputs = config.kind == SweepKind::SnrIndividual ? kNoiseInputs.size() : 1;
      for (std::size_t in = 0; in < inputs; ++in) {
        for (std::size_t t = 0; t < config.trajectories.size(); ++t) {
          SweepCell c;
          c.id = id++;
          c.kind = model;
          c.level = static_cast<int>(l);
          c.value = levels[l];
          if (config.kind == SweepKind::SnrIndividual) c.input = kNoiseInputs[in];
          c.trajectory = static_cast<int>(t);
          cells.push_back(c);
        }
      }
    }
  }
  return cells;
}

TrialSpec cell_spec(const SweepConfig& config, const SweepCell& cell) {
  TrialSpec spec;
  spec.trajectory = config.trajectories.at(static_cast<std::size_t>(cell.trajectory));
  spec.kind = cell.kind;
  spec.calibration = default_true_calibration(cell.kind);
  std::uint64_t h = mix_seed(config.seed, spec.trajectory.seed);
  h = mix_seed(h, static_cast<std::uint64_t>(config.kind));
  h = mix_seed(h, static_cast<std::uint64_t>(cell.level));
  h = mix_seed(h, cell.input ? static_cast<std::uint64_t>(*cell.input) + 1 : 0);
  spec.noise = NoiseProfile::realistic(spec.trajectory.rate_hz, h);
  spec.measurement_seed = mix_seed(h, static_cast<std::uint64_t>(cell.kind) + 101);

  switch (config.kind) {
    case SweepKind::MeasurementNoise:
      spec.noise.measurement.set_for_model(cell.kind, cell.value);
      break;
    case SweepKind::SnrCollective:
      for (NoiseInput in : kNoiseInputs) apply_snr(spec, in, cell.value);
      break;
    case SweepKind::SnrIndividual:
      apply_snr(spec, *cell.input, cell.value);
      break;
  }
  return spec;
}

std::vector<SweepRecord> run_sweep(const SweepConfig& config,
                                   const std::function<void(const SweepRecord&)>& progress) {
  const std::vector<SweepCell> cells = sweep_cells(config);
  std::vector<SweepRecord> records(cells.size());
  const auto n = static_cast<std::ptrdiff_t>(cells.size());
#ifdef SMID_HAVE_OPENMP
  const int threads = config.threads > 0 ? config.threads : omp_get_max_threads();
#endif
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    ScopedExecution serial(Execution::Serial);
    SweepRecord& rec = records[static_cast<std::size_t>(i)];
    rec.cell = cells[static_cast<std::size_t>(i)];
    try {
      const TrialData data = simulate_trial(cell_spec(config, rec.cell));
      rec.result = optimize_stage1(data.synced, config.stage1);
      rec.correct = rec.result.selected == rec.cell.kind;
    } catch (const std::exception& e) {
      rec.failed = true;
      rec.error = e.what();
    }
    if (progress) {
#pragma omp critical(smid_sweep_progress)
      progress(rec);
    }
  }
  return records;
}

namespace {

bool angular_model(ModelKind k) {
  return k == ModelKind::Rotation || k == ModelKind::InverseRotation ||
         k == ModelKind::Magnetometer;
}

std::string level_label(SweepKind kind, ModelKind model, double v) {
  if (kind == SweepKind::MeasurementNoise && angular_model(model)) {
    return format_double(std::round(v * 180.0 / kPi * 1e9) / 1e9);
  }
  return format_double(v);
}

std::string unit_label(ModelKind model) {
  switch (model) {
    case ModelKind::Position:
    case ModelKind::InversePosition: return "noise [m]";
    case ModelKind::WorldVelocity:
    case ModelKind::BodyVelocity: return "noise [m/s]";
    default: return "noise axis angle [deg]";
  }
}

}  // namespace

void write_sweep_table(std::ostream& os, const SweepConfig& config,
                       std::span<const SweepRecord> records) {
  const std::size_t inputs = config.kind == SweepKind::SnrIndividual ? kNoiseInputs.size() : 1;
  auto count = [&](ModelKind model, int level, std::optional<NoiseInput> input) {
    int failures = 0;
    for (const auto& r : records) {
      if (r.cell.kind == model && r.cell.level == level && r.cell.input == input &&
          (r.failed || !r.correct)) {
        ++failures;
      }
    }
    return failures;
  };
  std::string last_header;
  for (ModelKind model : config.models) {
    const auto levels = config.levels.empty() ? default_levels(config.kind, model) : config.levels;
    std::string header;
    if (config.kind == SweepKind::MeasurementNoise) {
      header = unit_label(model);
      for (double v : levels) header += "," + level_label(config.kind, model, v);
    } else {
      header = "SNR";
      for (double v : levels) {
        for (std::size_t in = 0; in < inputs; ++in) header += "," + format_double(v);
      }
      if (config.kind == SweepKind::SnrIndividual) {
        header += "\ninput";
        for (std::size_t l = 0; l < levels.size(); ++l) {
          for (NoiseInput in : kNoiseInputs) header += "," + std::string(to_string(in));
        }
      }
    }
    if (header != last_header) {
      os << header << '\n';
      last_header = header;
    }
    os << to_string(model);
    for (std::size_t l = 0; l < levels.size(); ++l) {
      for (std::size_t in = 0; in < inputs; ++in) {
        std::optional<NoiseInput> input;
        if (config.kind == SweepKind::SnrIndividual) input = kNoiseInputs[in];
        os << ',' << count(model, static_cast<int>(l), input);
      }
    }
    os << '\n';
  }
}

void write_sweep_records(std::ostream& os, std::span<const SweepRecord> records,
                         const ObjectiveWeights& weights) {
  os << "id,model,level,value,input,trajectory,failed,selected,correct,delta_b,"
        "loss_norm,loss_pos,loss_std,loss_vec,loss_rot,weighted_loss_norm,weighted_loss_std,"
        "residual_rmse,iterations,converged\n";
  for (const auto& r : records) {
    const auto& s = r.result;
    os << r.cell.id << ',' << to_string(r.cell.kind) << ',' << r.cell.level << ','
       << format_double(r.cell.value) << ','
       << (r.cell.input ? std::string(to_string(*r.cell.input)) : std::string("all")) << ','
       << r.cell.trajectory << ',' << (r.failed ? 1 : 0) << ',';
    if (r.failed) {
      os << ",0,,,,,,,,,,,0\n";
      continue;
    }
    const HealthInputs h = health_inputs(s, weights);
    os << to_string(s.selected) << ',' << (r.correct ? 1 : 0) << ',' << format_double(s.delta_b)
       << ',' << format_double(s.losses.norm) << ',' << format_double(s.losses.pos) << ','
       << format_double(s.losses.std) << ',' << format_double(s.losses.vec) << ','
       << format_double(s.losses.rot) << ',' << format_double(h.loss_norm) << ','
       << format_double(h.loss_std) << ',' << format_double(s.residual_rmse) << ','
       << s.iterations << ',' << (s.converged ? 1 : 0) << '\n';
  }
}

std::vector<LabeledResult> labeled_results(std::span<const SweepRecord> records,
                                           const ObjectiveWeights& weights) {
  std::vector<LabeledResult> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    if (r.failed) continue;
    out.push_back({health_inputs(r.result, weights), r.correct});
  }
  return out;
}

CalibrationColumn summarize_estimates(const std::string& label, std::span<const Vec3> estimates,
                                      const Vec3& truth, bool rotation) {
  CalibrationColumn c;
  c.label = label;
  if (estimates.empty()) return c;
  for (const Vec3& e : estimates) {
    c.value += e.cwiseAbs();
    c.error += (e - truth).cwiseAbs();
    c.value_norm += e.norm();
    c.error_norm += rotation ? geodesic_error(e, truth) : (e - truth).norm();
  }
  const double n = static_cast<double>(estimates.size());
  c.value /= n;
  c.error /= n;
  c.value_norm /= n;
  c.error_norm /= n;
  return c;
}

void write_calibration_table(std::ostream& os, std::span<const CalibrationColumn> columns) {
  os << "axis";
  for (const auto& c : columns) os << ',' << c.label << ',' << c.label << "_error";
  os << '\n';
  const char* axes[] = {"x", "y", "z"};
  for (int k = 0; k < 3; ++k) {
    os << axes[k];
    for (const auto& c : columns) {
      os << ',' << format_double(c.value[k]) << ',' << format_double(c.error[k]);
    }
    os << '\n';
  }
  os << "norm";
  for (const auto& c : columns) {
    os << ',' << format_double(c.value_norm) << ',' << format_double(c.error_norm);
  }
  os << '\n';
}

}  // namespace smid
