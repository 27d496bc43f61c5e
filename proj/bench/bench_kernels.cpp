// Wall-clock comparison of the OpenMP kernels against their serial twins.
//
//   bench_kernels [trajectory seconds] [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <vector>

#include "smid/experiment.hpp"
#include "smid/kernels.hpp"
#include "smid/stage1.hpp"

using namespace smid;

namespace {

double best_of(int repeats, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (dt < best) best = dt;
  }
  return best;
}

void row(const char* name, double par, double ref, bool same) {
  std::printf("%-18s %12.3f %12.3f %8.2fx  %s\n", name, par * 1e3, ref * 1e3, ref / par,
              same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const double seconds = argc > 1 ? std::atof(argv[1]) : 120.0;
  const int repeats = argc > 2 ? std::atoi(argv[2]) : 5;

  LissajousParams traj;
  traj.name = "bench";
  traj.amplitude = Vec3(1.6, 1.5, 1.4);
  traj.frequency = Vec3(2, 3, 5) * (2.0 * kPi / 30.0);
  traj.phase = Vec3(0.0, 0.5, 1.0);
  traj.attitude_amplitude = Vec3(0.3, 0.3, 0.4);
  traj.attitude_frequency = Vec3(3, 4, 2) * (2.0 * kPi / 30.0);
  traj.duration = seconds;
  traj.rate_hz = 200.0;

  TrialSpec spec;
  spec.trajectory = traj;
  spec.kind = ModelKind::BodyVelocity;
  spec.calibration = default_true_calibration(spec.kind);
  spec.noise = NoiseProfile::realistic(traj.rate_hz, 7);
  spec.measurement_rate_hz = traj.rate_hz;
  const TrialData data = simulate_trial(spec);
  const std::vector<PreparedCore> core = prepare_core(data.synced.core);
  const std::size_t n = core.size();
  const PreparedModel model = prepare_model(spec.kind, spec.calibration);

  std::printf("samples %zu, threads %d, best of %d\n", n, kernel_threads(), repeats);
  std::printf("%-18s %12s %12s %9s\n", "kernel", "parallel ms", "serial ms", "speedup");

  std::vector<Vec3> a(n), b(n);
  const double tp = best_of(repeats, [&] { predict_series(model, core, a); });
  const double ts = best_of(repeats, [&] { predict_series_ref(model, core, b); });
  row("predict_series", tp, ts, a == b);

  std::vector<Vec3> na, nb;
  const double np = best_of(repeats, [&] {
    na = a;
    normalize_in_place(na);
  });
  const double ns = best_of(repeats, [&] {
    nb = a;
    normalize_in_place_ref(nb);
  });
  row("normalize_in_place", np, ns, na == nb);

  std::vector<std::vector<Vec3>> terms(5, a);
  for (std::size_t m = 0; m < terms.size(); ++m) {
    for (auto& v : terms[m]) v *= static_cast<double>(m + 1);
  }
  std::vector<const Vec3*> ptrs;
  for (const auto& t : terms) ptrs.push_back(t.data());
  const std::vector<double> w = {0.2, 0.1, 0.3, 0.25, 0.15};
  Eigen::VectorXd ra(3 * static_cast<Eigen::Index>(n)), rb(3 * static_cast<Eigen::Index>(n));
  const double mp = best_of(repeats, [&] { mix_residual(w, ptrs, b, 0.01, ra); });
  const double ms = best_of(repeats, [&] { mix_residual_ref(w, ptrs, b, 0.01, rb); });
  row("mix_residual", mp, ms, ra == rb);

  Stage1Options opt;
  ObjectiveWeights weights = opt.weights;
  weights.data = balanced_data_weight(data.synced, opt.data_balance);
  Stage1Problem problem(data.synced, weights);
  const std::vector<double> b0(5, 0.2);
  const Eigen::VectorXd x = problem.pack(stage1_initial_states(data.synced), b0);
  Eigen::VectorXd r0(problem.num_residuals());
  problem.residual(x, r0);
  Eigen::MatrixXd Ja, Jb;
  const double jp = best_of(repeats, [&] { numeric_jacobian(problem, x, r0, Ja); });
  const double js = best_of(repeats, [&] { numeric_jacobian_ref(problem, x, r0, Jb); });
  row("numeric_jacobian", jp, js, Ja == Jb);
  return 0;
}
