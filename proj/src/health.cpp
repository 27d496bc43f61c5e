#include "smid/health.hpp"

#include <ostream>

#include "smid/csv_io.hpp"

namespace smid {

void HealthThresholds::validate() const {
  if (!(min_delta_b >= 0.0 && min_delta_b <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "min_delta_b must lie in [0, 1]");
  }
  if (!(max_loss_norm >= 0.0) || !(max_loss_std >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "loss caps must be non-negative");
  }
}

std::string_view to_string(HealthCriterion c) {
  switch (c) {
    case HealthCriterion::DeltaB: return "DeltaB";
    case HealthCriterion::LossNorm: return "LossNorm";
    case HealthCriterion::LossStd: return "LossStd";
  }
  return "Unknown";
}

std::optional<HealthCriterion> parse_health_criterion(std::string_view s) {
  for (auto c : {HealthCriterion::DeltaB, HealthCriterion::LossNorm, HealthCriterion::LossStd}) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

HealthInputs health_inputs(const Stage1Result& result, const ObjectiveWeights& weights) {
  return {result.delta_b, weights.lambda_n * result.losses.norm,
          weights.lambda_s * result.losses.std};
}

HealthVerdict evaluate(const HealthInputs& in, const HealthThresholds& thresholds) {
  HealthVerdict v;
  if (!(in.delta_b >= thresholds.min_delta_b)) v.failed_criteria.push_back(HealthCriterion::DeltaB);
  if (!(in.loss_norm <= thresholds.max_loss_norm)) {
    v.failed_criteria.push_back(HealthCriterion::LossNorm);
  }
  if (!(in.loss_std <= thresholds.max_loss_std)) {
    v.failed_criteria.push_back(HealthCriterion::LossStd);
  }
  v.accepted = v.failed_criteria.empty();
  return v;
}

HealthVerdict evaluate(const Stage1Result& result, const HealthThresholds& thresholds,
                       const ObjectiveWeights& weights) {
  return evaluate(health_inputs(result, weights), thresholds);
}

double ConfusionCounts::precision() const {
  return tp + fp == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double ConfusionCounts::recall() const {
  return tp + fn == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

ConfusionCounts confusion(std::span<const LabeledResult> results,
                          const HealthThresholds& thresholds) {
  ConfusionCounts c;
  for (const auto& r : results) {
    const bool accepted = evaluate(r.inputs, thresholds).accepted;
    if (accepted) {
      (r.correct ? c.tp : c.fp)++;
    } else {
      (r.correct ? c.fn : c.tn)++;
    }
  }
  return c;
}

std::vector<SweepRow> precision_recall_sweep(std::span<const LabeledResult> results,
                                             const ThresholdGrid& grid) {
  if (results.empty()) throw Error(ErrorCode::EmptyInput, "no labeled results");
  std::vector<SweepRow> rows;
  for (double db : grid.min_delta_b) {
    for (double ls : grid.max_loss_std) {
      for (double ln : grid.max_loss_norm) rows.push_back({{db, ln, ls}, {}});
    }
  }
#pragma omp parallel for schedule(static) if (rows.size() > 64)
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].counts = confusion(results, rows[i].thresholds);
  }
  return rows;
}

void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows) {
  os << "min_delta_b,max_loss_std,max_loss_norm,tp,fp,fn,tn,precision,recall\n";
  for (const auto& r : rows) {
    os << format_double(r.thresholds.min_delta_b) << ',' << format_double(r.thresholds.max_loss_std)
       << ',' << format_double(r.thresholds.max_loss_norm) << ',' << r.counts.tp << ','
       << r.counts.fp << ',' << r.counts.fn << ',' << r.counts.tn << ','
       << format_double(r.counts.precision()) << ',' << format_double(r.counts.recall()) << '\n';
  }
}

}  // namespace smid
