#include "smid/stage2.hpp"

#include <algorithm>
#include <cmath>

namespace smid {

double loss_ref(const Vec3& p_rw, const TangentRotation& omega_rw) {
  return p_rw.lpNorm<1>() + omega_rw.lpNorm<1>();
}

double rotation_series_error(std::span<const Vec3> a, std::span<const Vec3> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::InvalidArgument, "series lengths differ");
  if (a.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += geodesic_error(a[i], b[i]);
  return sum / static_cast<double>(a.size());
}

namespace {

bool reference_fixed(ModelKind kind) {
  return kind == ModelKind::Rotation || kind == ModelKind::InverseRotation;
}

}  // namespace

Stage2Problem::Stage2Problem(ModelKind kind, const SyncedData& data, bool penalize_reference,
                             double lambda_ref)
    : kind_(kind), channel_(channel_of(kind)), penalize_(penalize_reference),
      lambda_ref_(lambda_ref) {
  if (data.core.empty() || data.meas.size() != data.core.size()) {
    throw Error(ErrorCode::EmptyInput, "synchronized input is empty or misaligned");
  }
  if (data.meas.channel != channel_) {
    throw Error(ErrorCode::WrongChannel, std::string(to_string(kind)) + " expects " +
                                             std::string(to_string(channel_)) + " data");
  }
  core_ = prepare_core(data.core);
  if (channel_ == Channel::Vector3) {
    vectors_ = data.meas.vectors;
  } else {
    rotations_.reserve(data.meas.size());
    for (const Quat& q : data.meas.rotations) {
      rotations_.push_back(quat_to_matrix(Quat(q.coeffs() / q.norm())));
    }
  }
  for (StateSlot s : model_slots(kind)) {
    if (s == StateSlot::RefRotation && reference_fixed(kind)) continue;
    const bool split =
        penalize_ && (s == StateSlot::RefPosition || s == StateSlot::RefRotation);
    slots_.push_back(s);
    offset_.push_back(num_params_);
    split_.push_back(split);
    num_params_ += split ? 6 : 3;
  }
  num_residuals_ = 3 * static_cast<int>(core_.size()) + (penalize_ ? 1 : 0);
}

double Stage2Problem::lower_bound(int j) const {
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    if (split_[i] && j >= offset_[i] && j < offset_[i] + 6) return 0.0;
  }
  return LeastSquaresProblem::lower_bound(j);
}

Eigen::VectorXd Stage2Problem::pack(const ModelStateVector& states) const {
  Eigen::VectorXd x(num_params());
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    const Vec3 v = states.get(slots_[i]);
    if (split_[i]) {
      x.segment<3>(offset_[i]) = v.cwiseMax(0.0);
      x.segment<3>(offset_[i] + 3) = (-v).cwiseMax(0.0);
    } else {
      x.segment<3>(offset_[i]) = v;
    }
  }
  return x;
}

ModelStateVector Stage2Problem::unpack(const Eigen::VectorXd& x, ModelStateVector base) const {
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    Vec3 v = x.segment<3>(offset_[i]);
    if (split_[i]) v -= x.segment<3>(offset_[i] + 3);
    base.set(slots_[i], v);
  }
  return base;
}

void Stage2Problem::residual(const Eigen::VectorXd& x, Eigen::Ref<Eigen::VectorXd> r) const {
  const ModelStateVector states = unpack(x);
  const PreparedModel model = prepare_model(kind_, states);
  const std::size_t n = core_.size();
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 h = predict(model, core_[i]);
    Vec3 e;
    if (channel_ == Channel::Vector3) {
      e = h - vectors_[i];
    } else {
      e = log_so3_unchecked(exp_so3(h) * rotations_[i].transpose());
    }
    r.segment<3>(3 * static_cast<Eigen::Index>(i)) = e * scale;
  }
  if (penalize_) {
    double l = 0.0;
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      if (split_[i]) l += x.segment<6>(offset_[i]).sum();
    }
    r[num_residuals_ - 1] = std::sqrt(lambda_ref_ * std::max(l, 0.0));
  }
}

std::vector<Vec3> reproject(ModelKind kind, std::span<const CoreStateSample> core,
                            const ModelStateVector& states) {
  const PreparedModel model = prepare_model(kind, states);
  std::vector<Vec3> out;
  out.reserve(core.size());
  for (const auto& c : core) out.push_back(predict(model, prepare_core(c)));
  return out;
}

namespace {

ModelStateVector model_subset(ModelKind kind, const ModelStateVector& full) {
  ModelStateVector out;
  for (StateSlot s : model_slots(kind)) out.set(s, full.get(s));
  return out;
}

CalibrationResult run_stage2(ModelKind kind, const SyncedData& data, const Stage1Result& init,
                             const Stage2Options& options, bool penalize) {
  if (data.meas.channel != channel_of(kind)) {
    throw Error(ErrorCode::WrongChannel, std::string(to_string(kind)) + " expects " +
                                             std::string(to_string(channel_of(kind))) + " data");
  }
  Stage2Problem problem(kind, data, penalize, options.lambda_ref);
  ModelStateVector start = model_subset(kind, init.x_m);
  if (reference_fixed(kind)) start.set(StateSlot::RefRotation, Vec3::Zero());
  const LmSummary lm = levenberg_marquardt(problem, problem.pack(start), options.lm);

  CalibrationResult res;
  res.kind = kind;
  res.states = problem.unpack(lm.x, start);
  res.states.canonicalize();
  res.reference_penalized = penalize;
  if (has_reference_frame(kind)) {
    res.reference_residual_norm =
        loss_ref(res.states.get(StateSlot::RefPosition), res.states.get(StateSlot::RefRotation));
  }
  res.reference_required = res.reference_residual_norm > options.ref_threshold;
  res.iterations = lm.iterations;
  res.converged = lm.converged();

  const std::vector<Vec3> h = reproject(kind, data.core, res.states);
  Vec3 ss = Vec3::Zero();
  if (channel_of(kind) == Channel::Vector3) {
    for (std::size_t i = 0; i < h.size(); ++i) {
      ss += (h[i] - data.meas.vectors[i]).cwiseAbs2();
    }
  } else {
    const std::vector<Vec3> meas = rotation_measurements_to_tangent(data.meas.rotations);
    for (std::size_t i = 0; i < h.size(); ++i) {
      ss += log_so3_unchecked(exp_so3(h[i]) * exp_so3(meas[i]).transpose()).cwiseAbs2();
    }
    res.rotation_series_error = rotation_series_error(h, meas);
  }
  res.rmse_per_axis = (ss / static_cast<double>(h.size())).cwiseSqrt();
  return res;
}

}  // namespace

CalibrationResult refine_calibration(ModelKind kind, const SyncedData& data,
                                     const Stage1Result& init, const Stage2Options& options) {
  return run_stage2(kind, data, init, options, false);
}

CalibrationResult determine_reference_frame(ModelKind kind, const SyncedData& data,
                                            const Stage1Result& init,
                                            const Stage2Options& options) {
  if (!has_reference_frame(kind)) {
    throw Error(ErrorCode::ModelHasNoReference,
                std::string(to_string(kind)) + " has no sensor reference frame");
  }
  return run_stage2(kind, data, init, options, true);
}

}  // namespace smid
