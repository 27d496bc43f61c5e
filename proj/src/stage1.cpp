#include "smid/stage1.hpp"

#include <algorithm>
#include <cmath>

#include "smid/selector_losses.hpp"

namespace smid {

std::pair<ModelKind, double> select_model(std::span<const double> b, Channel channel) {
  const auto models = channel_models(channel);
  if (b.size() != models.size()) {
    throw Error(ErrorCode::InvalidArgument, "selector size does not match channel");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < b.size(); ++i) {
    if (b[i] > b[best]) best = i;
  }
  double second = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (i != best) second = std::max(second, b[i]);
  }
  return {models[best], b[best] - second};
}

Stage1Problem::Stage1Problem(const SyncedData& data, const ObjectiveWeights& weights,
                             bool nonnegative_selectors)
    : channel_(data.meas.channel), weights_(weights), nonnegative_selectors_(nonnegative_selectors) {
  if (data.core.empty() || data.meas.size() != data.core.size()) {
    throw Error(ErrorCode::EmptyInput, "synchronized input is empty or misaligned");
  }
  core_ = prepare_core(data.core);
  if (channel_ == Channel::Vector3) {
    auto [normed, info] = normalize_series(data.meas.vectors);
    target_ = std::move(normed);
    meas_norm_ = info;
  } else {
    target_ = rotation_measurements_to_tangent(data.meas.rotations);
  }

  models_ = channel_models(channel_);
  std::vector<bool> used(kStateSlots, false);
  for (ModelKind k : models_) {
    for (StateSlot s : model_slots(k)) used[static_cast<int>(s)] = true;
  }
  for (int i = 0; i < kStateSlots; ++i) {
    if (used[i]) slots_.push_back(static_cast<StateSlot>(i));
  }
  for (StateSlot s : slots_) {
    std::vector<std::size_t> readers;
    for (std::size_t m = 0; m < models_.size(); ++m) {
      const auto ms = model_slots(models_[m]);
      if (std::find(ms.begin(), ms.end(), s) != ms.end()) readers.push_back(m);
    }
    slot_models_.push_back(std::move(readers));
  }

  num_params_ = 3 * static_cast<int>(slots_.size()) + static_cast<int>(models_.size());
  int rot_slots = 0;
  for (StateSlot s : slots_) rot_slots += slot_is_rotation(s) ? 1 : 0;
  num_residuals_ = 3 * static_cast<int>(core_.size()) + 3 +
                   (channel_ == Channel::Vector3 ? 1 : 0) + rot_slots;
}

double Stage1Problem::lower_bound(int j) const {
  if (nonnegative_selectors_ && j >= 3 * static_cast<int>(slots_.size())) return 0.0;
  return LeastSquaresProblem::lower_bound(j);
}

Eigen::VectorXd Stage1Problem::pack(const ModelStateVector& states,
                                    std::span<const double> b) const {
  Eigen::VectorXd x(num_params_);
  for (std::size_t i = 0; i < slots_.size(); ++i) x.segment<3>(3 * i) = states.get(slots_[i]);
  const int off = 3 * static_cast<int>(slots_.size());
  for (std::size_t m = 0; m < models_.size(); ++m) x[off + static_cast<int>(m)] = b[m];
  return x;
}

ModelStateVector Stage1Problem::unpack_states(const Eigen::VectorXd& x) const {
  ModelStateVector s;
  for (std::size_t i = 0; i < slots_.size(); ++i) s.set(slots_[i], x.segment<3>(3 * i));
  return s;
}

std::vector<double> Stage1Problem::unpack_selectors(const Eigen::VectorXd& x) const {
  const int off = 3 * static_cast<int>(slots_.size());
  std::vector<double> b(models_.size());
  for (std::size_t m = 0; m < models_.size(); ++m) b[m] = x[off + static_cast<int>(m)];
  return b;
}

void Stage1Problem::model_output(std::size_t model, const ModelStateVector& states,
                                 std::span<Vec3> out) const {
  predict_series(prepare_model(models_[model], states), core_, out);
  if (channel_ == Channel::Vector3) normalize_in_place(out);
}

void Stage1Problem::loss_residuals(const ModelStateVector& states, std::span<const double> b,
                                   Eigen::Ref<Eigen::VectorXd> r) const {
  double l1 = 0.0;
  for (double v : b) l1 += std::abs(v);
  int i = 0;
  r[i++] = std::sqrt(weights_.lambda_n) * (l1 - 1.0);
  r[i++] = std::sqrt(weights_.lambda_p * loss_pos(b));
  r[i++] = std::sqrt(weights_.lambda_s * loss_std(b));
  if (channel_ == Channel::Vector3) {
    r[i++] = std::sqrt(weights_.lambda_v) * (states.get(StateSlot::MagneticField).norm() - 1.0);
  }
  for (StateSlot s : slots_) {
    if (slot_is_rotation(s)) r[i++] = std::sqrt(weights_.lambda_rot * loss_rot(states.get(s)));
  }
}

void Stage1Problem::residual(const Eigen::VectorXd& x, Eigen::Ref<Eigen::VectorXd> r) const {
  const ModelStateVector states = unpack_states(x);
  const std::vector<double> b = unpack_selectors(x);
  const std::size_t n = core_.size();
  std::vector<std::vector<Vec3>> outputs(models_.size(), std::vector<Vec3>(n));
  std::vector<const Vec3*> terms(models_.size());
  for (std::size_t m = 0; m < models_.size(); ++m) {
    model_output(m, states, outputs[m]);
    terms[m] = outputs[m].data();
  }
  const double scale = std::sqrt(weights_.data / static_cast<double>(n));
  mix_residual(b, terms, target_, scale, r.head(3 * n));
  loss_residuals(states, b, r.tail(num_residuals_ - 3 * static_cast<int>(n)));
}

void Stage1Problem::prepare_linearization(const Eigen::VectorXd& x) {
  cached_states_ = unpack_states(x);
  cache_.assign(models_.size(), std::vector<Vec3>(core_.size()));
  for (std::size_t m = 0; m < models_.size(); ++m) model_output(m, cached_states_, cache_[m]);
}

void Stage1Problem::residual_perturbed(const Eigen::VectorXd& x, int j, double h,
                                       Eigen::Ref<Eigen::VectorXd> r) const {
  Eigen::VectorXd xp = x;
  xp[j] += h;
  const std::size_t n = core_.size();
  const ModelStateVector states = unpack_states(xp);
  const std::vector<double> b = unpack_selectors(xp);

  std::vector<const Vec3*> terms(models_.size());
  for (std::size_t m = 0; m < models_.size(); ++m) terms[m] = cache_[m].data();

  std::vector<std::vector<Vec3>> fresh;
  const int state_params = 3 * static_cast<int>(slots_.size());
  if (j < state_params) {
    const auto& readers = slot_models_[static_cast<std::size_t>(j / 3)];
    fresh.resize(readers.size(), std::vector<Vec3>(n));
    for (std::size_t k = 0; k < readers.size(); ++k) {
      model_output(readers[k], states, fresh[k]);
      terms[readers[k]] = fresh[k].data();
    }
  }
  const double scale = std::sqrt(weights_.data / static_cast<double>(n));
  mix_residual(b, terms, target_, scale, r.head(3 * n));
  loss_residuals(states, b, r.tail(num_residuals_ - 3 * static_cast<int>(n)));
}

std::vector<Vec3> Stage1Problem::system_output(const Eigen::VectorXd& x) const {
  const ModelStateVector states = unpack_states(x);
  const std::vector<double> b = unpack_selectors(x);
  std::vector<Vec3> f(core_.size(), Vec3::Zero());
  std::vector<Vec3> out(core_.size());
  for (std::size_t m = 0; m < models_.size(); ++m) {
    model_output(m, states, out);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] += b[m] * out[i];
  }
  return f;
}

RemainingLosses Stage1Problem::losses(const Eigen::VectorXd& x) const {
  const ModelStateVector states = unpack_states(x);
  const std::vector<double> b = unpack_selectors(x);
  RemainingLosses l;
  l.norm = loss_norm(b);
  l.pos = loss_pos(b);
  l.std = loss_std(b);
  l.vec = channel_ == Channel::Vector3 ? loss_vec(states.get(StateSlot::MagneticField)) : 0.0;
  for (StateSlot s : slots_) {
    if (slot_is_rotation(s)) l.rot += loss_rot(states.get(s));
  }
  return l;
}

ModelStateVector stage1_initial_states(const SyncedData& data) {
  ModelStateVector x;
  if (data.meas.channel == Channel::Vector3 && !data.meas.vectors.empty()) {
    Vec3 mean = Vec3::Zero();
    for (const auto& v : data.meas.vectors) mean += v;
    mean /= static_cast<double>(data.meas.vectors.size());
    x.set(StateSlot::MagneticField, mean.norm() < 1e-9 ? Vec3::UnitZ() : Vec3(mean.normalized()));
  } else {
    x.set(StateSlot::MagneticField, Vec3::UnitZ());
  }
  return x;
}

double balanced_data_weight(const SyncedData& data, double data_balance) {
  if (!(data_balance > 0.0) || !std::isfinite(data_balance)) {
    throw Error(ErrorCode::InvalidArgument, "data_balance must be positive");
  }
  ObjectiveWeights unit;
  unit.data = 1.0;
  const Stage1Problem problem(data, unit, true);
  const std::size_t nm = problem.models().size();
  const std::vector<double> b0(nm, 1.0 / static_cast<double>(nm));
  Eigen::VectorXd r(problem.num_residuals());
  problem.residual(problem.pack(stage1_initial_states(data), b0), r);
  const double mse0 = r.head(3 * static_cast<Eigen::Index>(problem.samples())).squaredNorm();
  const double floor = 1e-12;
  return data_balance * loss_std(b0) / std::max(mse0, floor);
}

Stage1Result optimize_stage1(const SyncedData& data, const Stage1Options& options) {
  if (data.core.empty()) throw Error(ErrorCode::EmptyInput, "no synchronized samples");
  const std::size_t nm = channel_models(data.meas.channel).size();
  const std::vector<double> b0(nm, 1.0 / static_cast<double>(nm));
  return optimize_stage1(data, stage1_initial_states(data), b0, options);
}

Stage1Result optimize_stage1(const SyncedData& data, const ModelStateVector& states0,
                             std::span<const double> b0, const Stage1Options& options) {
  if (data.core.empty()) throw Error(ErrorCode::EmptyInput, "no synchronized samples");
  ObjectiveWeights w = options.weights;
  if (options.data_scaling == DataScaling::Balanced) {
    w.data = balanced_data_weight(data, options.data_balance);
  }
  Stage1Problem problem(data, w, options.nonnegative_selectors);
  const LmSummary lm = levenberg_marquardt(problem, problem.pack(states0, b0), options.lm);

  Stage1Result res;
  res.channel = problem.channel();
  res.b = problem.unpack_selectors(lm.x);
  for (double v : res.b) {
    if (!std::isfinite(v)) throw Error(ErrorCode::SolverDiverged, "non-finite selector");
  }
  std::tie(res.selected, res.delta_b) = select_model(res.b, res.channel);
  res.x_m = problem.unpack_states(lm.x);
  if (res.channel == Channel::Rotation) {
    res.x_m.set(StateSlot::MagneticField, Vec3::Zero());
  }
  const std::vector<Vec3> f = problem.system_output(lm.x);
  double ss = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) ss += (f[i] - problem.target()[i]).squaredNorm();
  res.residual_rmse = std::sqrt(ss / static_cast<double>(f.size()));
  res.losses = problem.losses(lm.x);
  res.data_weight = w.data;
  res.iterations = lm.iterations;
  res.converged = lm.converged();
  return res;
}

}  // namespace smid
