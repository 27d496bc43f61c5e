// smid: simulate sensor streams, identify the sensor model behind a
// measurement stream, calibrate it and run the noise sweeps.
//
// Exit codes: 0 success or accepted, 1 error, 2 rejected by the health check.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "smid/csv_io.hpp"
#include "smid/error.hpp"
#include "smid/experiment.hpp"
#include "smid/health.hpp"
#include "smid/kernels.hpp"
#include "smid/report.hpp"
#include "smid/stage1.hpp"
#include "smid/stage2.hpp"
#include "smid/trajectory.hpp"

namespace fs = std::filesystem;
using namespace smid;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitRejected = 2;

struct SolverFlags {
  ObjectiveWeights weights;
  std::optional<double> data_weight;
  double data_balance = 20.0;
  int max_iterations = 400;

  Stage1Options stage1() const {
    Stage1Options o;
    o.weights = weights;
    o.data_balance = data_balance;
    if (data_weight) {
      o.data_scaling = DataScaling::Fixed;
      o.weights.data = *data_weight;
    }
    o.lm.max_iterations = max_iterations;
    return o;
  }
};

void add_solver_flags(CLI::App* app, SolverFlags& f) {
  app->add_option("--lambda-p", f.weights.lambda_p, "weight of L_pos")->check(CLI::NonNegativeNumber);
  app->add_option("--lambda-n", f.weights.lambda_n, "weight of L_norm")->check(CLI::NonNegativeNumber);
  app->add_option("--lambda-v", f.weights.lambda_v, "weight of L_vec")->check(CLI::NonNegativeNumber);
  app->add_option("--lambda-s", f.weights.lambda_s, "weight of L_std")->check(CLI::NonNegativeNumber);
  app->add_option("--lambda-rot", f.weights.lambda_rot, "weight of L_rot")
      ->check(CLI::NonNegativeNumber);
  auto* bal = app->add_option("--data-balance", f.data_balance,
                              "initial data term relative to L_std(uniform)")
                  ->check(CLI::PositiveNumber);
  app->add_option("--data-weight", f.data_weight, "fixed data-term weight, disables balancing")
      ->check(CLI::PositiveNumber)
      ->excludes(bal);
  app->add_option("--max-iterations", f.max_iterations, "LM iteration cap")
      ->check(CLI::PositiveNumber);
}

void add_threshold_flags(CLI::App* app, HealthThresholds& t) {
  app->add_option("--min-delta-b", t.min_delta_b, "accept when delta_b >= this");
  app->add_option("--max-loss-norm", t.max_loss_norm, "accept when lambda_n L_norm <= this");
  app->add_option("--max-loss-std", t.max_loss_std, "accept when lambda_s L_std <= this");
}

void append_weights(KeyValueReport& rep, const Stage1Options& o) {
  rep.set("weights.lambda_p", o.weights.lambda_p);
  rep.set("weights.lambda_n", o.weights.lambda_n);
  rep.set("weights.lambda_v", o.weights.lambda_v);
  rep.set("weights.lambda_s", o.weights.lambda_s);
  rep.set("weights.lambda_rot", o.weights.lambda_rot);
  rep.set("weights.data_scaling",
          std::string(o.data_scaling == DataScaling::Fixed ? "fixed" : "balanced"));
  rep.set("weights.data_balance", o.data_balance);
  rep.set("solver.max_iterations", o.lm.max_iterations);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
}

fs::path existing_file(const std::string& p) {
  const fs::path path = fs::absolute(p);
  if (!fs::is_regular_file(path)) throw Error(ErrorCode::IoError, "no such file " + p);
  return path;
}

/// Half the median spacing of the measurement timestamps.
double default_tolerance(const MeasurementSeries& meas) {
  if (meas.size() < 2) return 0.0;
  std::vector<double> dt;
  dt.reserve(meas.size() - 1);
  for (std::size_t i = 1; i < meas.size(); ++i) dt.push_back(meas.t[i] - meas.t[i - 1]);
  std::nth_element(dt.begin(), dt.begin() + static_cast<std::ptrdiff_t>(dt.size() / 2), dt.end());
  return 0.5 * dt[dt.size() / 2];
}

SyncedData load_synced(const std::string& core_csv, const std::string& meas_csv,
                       std::optional<double> tolerance) {
  const CoreStateSeries core = load_core_csv(existing_file(core_csv));
  const MeasurementSeries meas = load_measurement_csv(existing_file(meas_csv));
  SyncedData data = synchronize(core, meas, tolerance.value_or(default_tolerance(meas)));
  if (data.size() == 0) {
    throw Error(ErrorCode::EmptyIntersection, "no core sample lies within tolerance of a measurement");
  }
  return data;
}

void set_threads(int threads) {
  if (threads > 0) set_kernel_threads(threads);
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string config;
  std::string model;
  std::string out = ".";
  std::uint64_t seed = 0;
  int trajectories = 0;
  bool noiseless = false;
  bool with_reference = false;
  std::optional<double> measurement_sigma;
  double measurement_rate = kMeasurementRateHz;
};

int cmd_simulate(const SimulateArgs& a) {
  const auto kind = parse_model_kind(a.model);
  if (!kind) throw Error(ErrorCode::InvalidArgument, "unknown model " + a.model);
  std::vector<LissajousParams> set = load_trajectory_set(existing_file(a.config));
  if (a.trajectories > 0 && static_cast<std::size_t>(a.trajectories) < set.size()) {
    set.resize(static_cast<std::size_t>(a.trajectories));
  }
  const fs::path out = fs::absolute(a.out);
  ensure_dir(out);

  for (std::size_t i = 0; i < set.size(); ++i) {
    TrialSpec spec;
    spec.trajectory = set[i];
    spec.kind = *kind;
    spec.calibration = default_true_calibration(*kind, a.with_reference);
    spec.measurement_rate_hz = a.measurement_rate;
    const std::uint64_t noise_seed = a.seed * 1000003ULL + 2 * i;
    spec.measurement_seed = noise_seed + 1;
    if (a.noiseless) {
      spec.noise = NoiseProfile{};
      spec.noise.seed = noise_seed;
      for (ModelKind k : kAllModels) spec.noise.measurement.set_for_model(k, 0.0);
    } else {
      spec.noise = NoiseProfile::realistic(spec.trajectory.rate_hz, noise_seed);
    }
    if (a.measurement_sigma) spec.noise.measurement.set_for_model(*kind, *a.measurement_sigma);

    const TrialData d = simulate_trial(spec);
    const std::string stem = set[i].name.empty() ? "trial" + std::to_string(i) : set[i].name;
    save_core_csv(out / (stem + "_core.csv"), d.core);
    save_measurement_csv(out / (stem + "_meas.csv"), d.meas);

    KeyValueReport m;
    m.set("trajectory", set[i].name);
    m.set("model", std::string(to_string(*kind)));
    m.set("channel", std::string(to_string(channel_of(*kind))));
    m.set("reference_present", loss_ref(spec.calibration.get(StateSlot::RefPosition),
                                        spec.calibration.get(StateSlot::RefRotation)) > 0.0);
    for (StateSlot s : model_slots(*kind)) {
      m.set("truth." + std::string(to_string(s)), spec.calibration.get(s));
    }
    m.set("seed", std::to_string(a.seed));
    m.set("noise_seed", std::to_string(noise_seed));
    m.set("measurement_seed", std::to_string(spec.measurement_seed));
    m.set("noise.sigma_p", spec.noise.sigma_p);
    m.set("noise.sigma_v", spec.noise.sigma_v);
    m.set("noise.sigma_rot", spec.noise.sigma_rot);
    m.set("noise.sigma_omega", spec.noise.sigma_omega);
    m.set("noise.measurement", spec.noise.measurement.for_model(*kind));
    m.set("core_rate_hz", spec.trajectory.rate_hz);
    m.set("measurement_rate_hz", spec.measurement_rate_hz);
    m.save(out / (stem + "_manifest.txt"));
  }
  std::cout << "wrote " << set.size() << " trials to " << out.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- identify

struct IdentifyArgs {
  std::string core;
  std::string meas;
  std::string out = ".";
  std::optional<double> tolerance;
  int threads = 0;
  SolverFlags solver;
  HealthThresholds thresholds;
};

int cmd_identify(const IdentifyArgs& a) {
  a.thresholds.validate();
  set_threads(a.threads);
  const SyncedData data = load_synced(a.core, a.meas, a.tolerance);
  const Stage1Options options = a.solver.stage1();
  const Stage1Result result = optimize_stage1(data, options);
  const HealthVerdict verdict = evaluate(result, a.thresholds, options.weights);

  KeyValueReport rep;
  rep.set("input.core", fs::absolute(a.core).string());
  rep.set("input.meas", fs::absolute(a.meas).string());
  rep.set("input.samples", static_cast<int>(data.size()));
  append_weights(rep, options);
  append(rep, result);
  append(rep, a.thresholds);
  append(rep, verdict);
  const fs::path out = fs::absolute(a.out);
  ensure_dir(out);
  rep.save(out / "stage1_report.txt");

  std::cout << to_string(result.selected) << " delta_b=" << format_double(result.delta_b)
            << (verdict.accepted ? " accepted" : " rejected") << "\n";
  return verdict.accepted ? kExitOk : kExitRejected;
}

// --------------------------------------------------------------- calibrate

struct CalibrateArgs {
  std::string core;
  std::string meas;
  std::string stage1;
  std::string out = ".";
  std::string reference = "auto";
  std::optional<double> tolerance;
  bool force = false;
  int threads = 0;
  Stage2Options options;
};

int cmd_calibrate(const CalibrateArgs& a) {
  set_threads(a.threads);
  const KeyValueReport s1 = KeyValueReport::load(existing_file(a.stage1));
  const Stage1Result init = stage1_from_report(s1);
  const HealthVerdict verdict = verdict_from_report(s1);
  if (!verdict.accepted && !a.force) {
    std::cerr << "smid: stage-1 result was rejected by the health check; rerun identify or pass "
                 "--force\n";
    return kExitRejected;
  }
  const SyncedData data = load_synced(a.core, a.meas, a.tolerance);
  const ModelKind kind = init.selected;

  KeyValueReport rep;
  rep.set("input.stage1", fs::absolute(a.stage1).string());
  rep.set("stage2.lambda_ref", a.options.lambda_ref);
  rep.set("stage2.ref_threshold", a.options.ref_threshold);
  append(rep, refine_calibration(kind, data, init, a.options), "refined");
  const bool want_reference =
      a.reference == "always" || (a.reference == "auto" && has_reference_frame(kind));
  if (want_reference) {
    const CalibrationResult ref = determine_reference_frame(kind, data, init, a.options);
    append(rep, ref, "reference");
    std::cout << to_string(kind) << " reference "
              << (ref.reference_required ? "required" : "not required") << " (L1 "
              << format_double(ref.reference_residual_norm) << ")\n";
  } else {
    std::cout << to_string(kind) << " refined\n";
  }
  const fs::path out = fs::absolute(a.out);
  ensure_dir(out);
  rep.save(out / "calibration_report.txt");
  return kExitOk;
}

// ------------------------------------------------------------------- sweep

struct SweepArgs {
  std::string config;
  std::string kind = "measurement-noise";
  std::string out = ".";
  std::uint64_t seed = 0;
  int threads = 0;
  int trajectories = 0;
  std::vector<std::string> models;
  std::vector<double> levels;
  bool quiet = false;
  SolverFlags solver;
  HealthThresholds thresholds;
};

ThresholdGrid default_grid() {
  ThresholdGrid g;
  for (int i = 0; i <= 20; ++i) g.min_delta_b.push_back(0.05 * i);
  g.min_delta_b.push_back(0.31);
  std::sort(g.min_delta_b.begin(), g.min_delta_b.end());
  g.max_loss_std = {1.0, 2.0, 3.0, 4.1, 5.0, 7.5, 10.0};
  g.max_loss_norm = {0.05, 0.1, 0.2, 0.5, 1.0};
  return g;
}

int cmd_sweep(const SweepArgs& a) {
  a.thresholds.validate();
  SweepConfig cfg;
  const auto kind = parse_sweep_kind(a.kind);
  if (!kind) throw Error(ErrorCode::InvalidArgument, "unknown sweep kind " + a.kind);
  cfg.kind = *kind;
  cfg.trajectories = load_trajectory_set(existing_file(a.config));
  if (a.trajectories > 0 && static_cast<std::size_t>(a.trajectories) < cfg.trajectories.size()) {
    cfg.trajectories.resize(static_cast<std::size_t>(a.trajectories));
  }
  if (!a.models.empty()) {
    cfg.models.clear();
    for (const auto& name : a.models) {
      const auto k = parse_model_kind(name);
      if (!k) throw Error(ErrorCode::InvalidArgument, "unknown model " + name);
      cfg.models.push_back(*k);
    }
  }
  cfg.levels = a.levels;
  cfg.seed = a.seed;
  cfg.threads = a.threads;
  cfg.stage1 = a.solver.stage1();

  const std::size_t total = sweep_cells(cfg).size();
  std::size_t done = 0;
  const auto records = run_sweep(cfg, [&](const SweepRecord&) {
    ++done;
    if (!a.quiet && (done % 50 == 0 || done == total)) {
      std::cerr << "\r" << done << "/" << total << std::flush;
      if (done == total) std::cerr << "\n";
    }
  });

  const fs::path out = fs::absolute(a.out);
  ensure_dir(out);
  {
    std::ofstream f(out / "table.csv");
    write_sweep_table(f, cfg, records);
  }
  {
    std::ofstream f(out / "records.csv");
    write_sweep_records(f, records, cfg.stage1.weights);
  }
  const auto labeled = labeled_results(records, cfg.stage1.weights);
  {
    std::ofstream f(out / "sweep.csv");
    write_sweep_csv(f, precision_recall_sweep(labeled, default_grid()));
  }
  const ConfusionCounts c = confusion(labeled, a.thresholds);
  int failed = 0;
  for (const auto& r : records) failed += r.failed ? 1 : 0;

  KeyValueReport m;
  m.set("sweep.kind", std::string(to_string(cfg.kind)));
  m.set("sweep.config", fs::absolute(a.config).string());
  m.set("sweep.seed", std::to_string(cfg.seed));
  m.set("sweep.cells", static_cast<int>(records.size()));
  m.set("sweep.failed_cells", failed);
  append_weights(m, cfg.stage1);
  append(m, a.thresholds);
  m.set("confusion.tp", c.tp);
  m.set("confusion.fp", c.fp);
  m.set("confusion.fn", c.fn);
  m.set("confusion.tn", c.tn);
  m.set("confusion.precision", c.precision());
  m.set("confusion.recall", c.recall());
  m.save(out / "manifest.txt");

  write_sweep_table(std::cout, cfg, records);
  std::cout << "tp=" << c.tp << " fp=" << c.fp << " fn=" << c.fn << " tn=" << c.tn
            << " precision=" << format_double(c.precision())
            << " recall=" << format_double(c.recall()) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sensor model identification and calibration"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "simulate core-state and measurement CSVs");
  s->add_option("--config", sim.config, "trajectory set (JSON)")->required();
  s->add_option("--model", sim.model, "true sensor model")->required();
  s->add_option("--out", sim.out, "output directory");
  s->add_option("--seed", sim.seed, "noise seed");
  s->add_option("--trajectories", sim.trajectories, "use the first n trajectories (0: all)");
  s->add_flag("--noiseless", sim.noiseless, "no core or measurement noise");
  s->add_flag("--with-reference", sim.with_reference,
              "position models get p_rw = [10,0,0], omega_rw = [0,0.8727,0]");
  s->add_option("--measurement-sigma", sim.measurement_sigma,
                "measurement sigma in channel units (m, m/s or rad)")
      ->check(CLI::NonNegativeNumber);
  s->add_option("--measurement-rate", sim.measurement_rate, "Hz")->check(CLI::PositiveNumber);

  IdentifyArgs id;
  auto* i = app.add_subcommand("identify", "stage 1 and health check on a CSV pair");
  i->add_option("--core", id.core, "core-state CSV")->required();
  i->add_option("--meas", id.meas, "measurement CSV")->required();
  i->add_option("--out", id.out, "output directory");
  i->add_option("--tolerance", id.tolerance, "synchronization tolerance in s")
      ->check(CLI::NonNegativeNumber);
  i->add_option("--threads", id.threads, "kernel threads (0: all)");
  add_solver_flags(i, id.solver);
  add_threshold_flags(i, id.thresholds);

  CalibrateArgs cal;
  auto* c = app.add_subcommand("calibrate", "stage 2 on an identified CSV pair");
  c->add_option("--core", cal.core, "core-state CSV")->required();
  c->add_option("--meas", cal.meas, "measurement CSV")->required();
  c->add_option("--stage1", cal.stage1, "report written by identify")->required();
  c->add_option("--out", cal.out, "output directory");
  c->add_option("--reference", cal.reference, "reference-frame test")
      ->check(CLI::IsMember({"auto", "always", "never"}));
  c->add_option("--tolerance", cal.tolerance, "synchronization tolerance in s")
      ->check(CLI::NonNegativeNumber);
  c->add_option("--lambda-ref", cal.options.lambda_ref, "weight of L_ref")
      ->check(CLI::NonNegativeNumber);
  c->add_option("--ref-threshold", cal.options.ref_threshold, "reference required above this L1")
      ->check(CLI::NonNegativeNumber);
  c->add_flag("--force", cal.force, "calibrate a rejected stage-1 result");
  c->add_option("--threads", cal.threads, "kernel threads (0: all)");

  SweepArgs sw;
  auto* w = app.add_subcommand("sweep", "noise sweep tables");
  w->add_option("--config", sw.config, "trajectory set (JSON)")->required();
  w->add_option("--kind", sw.kind, "sweep kind")
      ->check(CLI::IsMember({"measurement-noise", "snr-collective", "snr-individual"}));
  w->add_option("--out", sw.out, "output directory");
  w->add_option("--seed", sw.seed, "sweep seed");
  w->add_option("--threads", sw.threads, "worker threads (0: all)");
  w->add_option("--trajectories", sw.trajectories, "use the first n trajectories (0: all)");
  w->add_option("--models", sw.models, "models to simulate (default: all)")->delimiter(',');
  w->add_option("--levels", sw.levels, "column override")->delimiter(',');
  w->add_flag("--quiet", sw.quiet, "no progress on stderr");
  add_solver_flags(w, sw.solver);
  add_threshold_flags(w, sw.thresholds);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*s) return cmd_simulate(sim);
    if (*i) return cmd_identify(id);
    if (*c) return cmd_calibrate(cal);
    if (*w) return cmd_sweep(sw);
  } catch (const std::exception& e) {
    std::cerr << "smid: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
