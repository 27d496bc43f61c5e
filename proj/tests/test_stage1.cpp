#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "smid/selector_losses.hpp"
#include "smid/stage1.hpp"

using namespace smid;

namespace {

std::vector<double> one_hot(Channel ch, ModelKind kind) {
  const auto models = channel_models(ch);
  std::vector<double> b(models.size(), 0.0);
  for (std::size_t i = 0; i < models.size(); ++i) b[i] = models[i] == kind ? 1.0 : 0.0;
  return b;
}

/// The scalar objective written out directly from its terms.
double scalar_objective(const Stage1Problem& p, const ObjectiveWeights& w,
                        const ModelStateVector& x, const std::vector<double>& b) {
  const std::size_t n = p.samples();
  const auto f = p.system_output(p.pack(x, b));
  double data = 0.0;
  for (std::size_t i = 0; i < n; ++i) data += (f[i] - p.target()[i]).squaredNorm();
  double obj = w.data * data / static_cast<double>(n);
  obj += w.lambda_n * loss_norm(b) + w.lambda_p * loss_pos(b) + w.lambda_s * loss_std(b);
  if (p.channel() == Channel::Vector3) {
    const double lv = loss_vec(x.get(StateSlot::MagneticField));
    obj += w.lambda_v * lv * lv;
  }
  for (StateSlot s : p.slots()) {
    if (slot_is_rotation(s)) obj += w.lambda_rot * loss_rot(x.get(s));
  }
  return 0.5 * obj;
}

double half_squared(const Stage1Problem& p, const ModelStateVector& x,
                    const std::vector<double>& b) {
  Eigen::VectorXd r(p.num_residuals());
  p.residual(p.pack(x, b), r);
  return 0.5 * r.squaredNorm();
}

}  // namespace

TEST_CASE("select_model") {
  const std::vector<double> b = {0.05, 0.9, 0.02, 0.01, 0.02};
  const auto [k, d] = select_model(b, Channel::Vector3);
  CHECK(k == ModelKind::InversePosition);
  CHECK(d == doctest::Approx(0.85));
  const std::vector<double> t = {0.548, 0.466, 0.0, 0.0, 0.0};
  CHECK(select_model(t, Channel::Vector3).second == doctest::Approx(0.082));
  const std::vector<double> tie = {0.0, 0.5, 0.5, 0.0, 0.0};
  CHECK(select_model(tie, Channel::Vector3).first == ModelKind::InversePosition);
  CHECK_THROWS_AS(select_model(tie, Channel::Rotation), Error);
}

TEST_CASE("residual vanishes at the exact model") {
  for (ModelKind k : kAllModels) {
    const auto d = simulate_trial(fixture::noiseless(k));
    ObjectiveWeights w;
    w.data = 3.0;
    Stage1Problem p(d.synced, w);
    ModelStateVector x = stage1_initial_states(d.synced);
    for (StateSlot s : model_slots(k)) x.set(s, default_true_calibration(k).get(s));
    Eigen::VectorXd r(p.num_residuals());
    p.residual(p.pack(x, one_hot(p.channel(), k)), r);
    const auto data = r.head(3 * static_cast<Eigen::Index>(p.samples()));
    CHECK(data.norm() < 1e-12);
    // sqrt(lambda_s L_std) turns rounding of order 1e-17 into 1e-8
    CHECK(r.squaredNorm() < 1e-14);
  }
}

TEST_CASE("residual layout reproduces the scalar objective") {
  const auto d = simulate_trial(fixture::realistic(ModelKind::BodyVelocity, 1, 0.5, 3));
  ObjectiveWeights w;
  w.data = 17.0;
  Stage1Problem p(d.synced, w);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-0.3, 0.8);
  for (int i = 0; i < 10; ++i) {
    ModelStateVector x = stage1_initial_states(d.synced);
    for (StateSlot s : p.slots()) x.set(s, Vec3(u(rng), u(rng), 4 * u(rng)));
    std::vector<double> b(5);
    for (auto& v : b) v = u(rng);
    const double a = half_squared(p, x, b);
    CHECK(a == doctest::Approx(scalar_objective(p, w, x, b)).epsilon(1e-12));
  }
}

TEST_CASE("splitting a selector raises the objective") {
  const auto d = simulate_trial(fixture::noiseless(ModelKind::Position));
  const ObjectiveWeights w;
  Stage1Problem p(d.synced, w);
  ModelStateVector x = stage1_initial_states(d.synced);
  x.set(StateSlot::PositionLever, Vec3(0.3, 0.5, 1.0));
  const double exact = half_squared(p, x, {1, 0, 0, 0, 0});
  const double split = half_squared(p, x, {0.9, 0.1, 0, 0, 0});
  CHECK(split > exact);
}

TEST_CASE("noiseless data selects the true model") {
  for (ModelKind k : {ModelKind::Position, ModelKind::Rotation, ModelKind::Magnetometer}) {
    const auto d = simulate_trial(fixture::noiseless(k));
    const auto r = optimize_stage1(d.synced);
    CHECK(r.selected == k);
    CHECK(r.delta_b > 0.9);
    if (k == ModelKind::Rotation) {
      CHECK(r.b[0] == doctest::Approx(1.0).epsilon(1e-3));
      CHECK(std::abs(r.b[1]) < 1e-3);
    }
  }
}

TEST_CASE("balanced data weight") {
  const auto d = simulate_trial(fixture::realistic(ModelKind::Position, 0, 3.0, 1));
  const double w = balanced_data_weight(d.synced, 20.0);
  CHECK(w > 0.0);
  CHECK(balanced_data_weight(d.synced, 40.0) == doctest::Approx(2 * w));
  SyncedData scaled = d.synced;
  for (auto& v : scaled.meas.vectors) v *= 1e3;
  CHECK(balanced_data_weight(scaled, 20.0) == doctest::Approx(w).epsilon(1e-9));
  CHECK_THROWS_AS(balanced_data_weight(d.synced, 0.0), Error);
  CHECK_THROWS_AS(balanced_data_weight(d.synced, std::nan("")), Error);

  Stage1Options o;
  o.lm.max_iterations = 5;
  CHECK(optimize_stage1(d.synced, o).data_weight == doctest::Approx(w));
  o.data_scaling = DataScaling::Fixed;
  o.weights.data = 7.0;
  CHECK(optimize_stage1(d.synced, o).data_weight == 7.0);
}

TEST_CASE("stage 1 is deterministic") {
  const auto d = simulate_trial(fixture::realistic(ModelKind::WorldVelocity, 2, 1.5, 8));
  Stage1Options o;
  o.lm.max_iterations = 60;
  CHECK(optimize_stage1(d.synced, o) == optimize_stage1(d.synced, o));
}

TEST_CASE("empty input is rejected") {
  SyncedData d;
  CHECK_THROWS_AS(optimize_stage1(d), Error);
}
