#include <doctest.h>

#include "fixtures.hpp"
#include "smid/kernels.hpp"
#include "smid/stage1.hpp"

using namespace smid;

TEST_CASE("parallel kernels are bit-identical to their serial twins") {
  const auto d = simulate_trial(fixture::realistic(ModelKind::BodyVelocity, 5, 1.0, 12));
  const auto core = prepare_core(d.synced.core);
  const std::size_t n = core.size();
  const int threads = kernel_threads();
  set_kernel_threads(4);

  for (ModelKind k : kAllModels) {
    const PreparedModel m = prepare_model(k, default_true_calibration(k, true));
    std::vector<Vec3> a(n), b(n);
    predict_series(m, core, a);
    predict_series_ref(m, core, b);
    CHECK(a == b);

    std::vector<Vec3> na = a, nb = a;
    const NormalizationInfo ia = normalize_in_place(na);
    const NormalizationInfo ib = normalize_in_place_ref(nb);
    CHECK(na == nb);
    CHECK(ia.offset == ib.offset);
    CHECK(ia.scale == ib.scale);
  }

  std::vector<std::vector<Vec3>> terms(3, std::vector<Vec3>(n));
  for (std::size_t m = 0; m < 3; ++m) {
    for (std::size_t i = 0; i < n; ++i) terms[m][i] = Vec3(i * 0.1, m + 0.5, 1.0 / (i + 1.0));
  }
  const std::vector<const Vec3*> ptrs = {terms[0].data(), terms[1].data(), terms[2].data()};
  const std::vector<double> w = {0.3, -0.2, 0.9};
  Eigen::VectorXd ra(3 * n), rb(3 * n);
  mix_residual(w, ptrs, terms[2], 0.37, ra);
  mix_residual_ref(w, ptrs, terms[2], 0.37, rb);
  CHECK(ra == rb);
  set_kernel_threads(threads);
}

TEST_CASE("numeric jacobian matches the serial reference") {
  const auto d = simulate_trial(fixture::realistic(ModelKind::Magnetometer, 6, 0.2, 13));
  ObjectiveWeights w;
  w.data = 30.0;
  Stage1Problem p(d.synced, w);
  const std::vector<double> b0(5, 0.2);
  ModelStateVector x = stage1_initial_states(d.synced);
  x.set(StateSlot::BodyVelocityRotation, Vec3(0.1, 0.2, -0.3));
  const Eigen::VectorXd v = p.pack(x, b0);
  Eigen::VectorXd r0(p.num_residuals());
  p.residual(v, r0);
  Eigen::MatrixXd Ja, Jb;
  numeric_jacobian(p, v, r0, Ja);
  numeric_jacobian_ref(p, v, r0, Jb);
  CHECK(Ja == Jb);
  {
    ScopedExecution serial(Execution::Serial);
    CHECK(current_execution() == Execution::Serial);
    Eigen::MatrixXd Jc;
    numeric_jacobian(p, v, r0, Jc);
    CHECK(Jc == Jb);
  }
  CHECK(current_execution() == Execution::Parallel);
}
