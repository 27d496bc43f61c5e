#pragma once

// Accept/reject rule for Stage-1 selections and precision/recall sweeps
// over threshold grids.

#include <iosfwd>
#include <vector>

#include "smid/stage1.hpp"

namespace smid {

/// Accept side is inclusive on every bound.
struct HealthThresholds {
  double min_delta_b = 0.31;
  double max_loss_norm = 0.2;
  double max_loss_std = 4.1;

  void validate() const;
};

enum class HealthCriterion { DeltaB, LossNorm, LossStd };

std::string_view to_string(HealthCriterion c);
std::optional<HealthCriterion> parse_health_criterion(std::string_view s);

struct HealthVerdict {
  bool accepted = true;
  std::vector<HealthCriterion> failed_criteria;

  bool operator==(const HealthVerdict&) const = default;
};

/// The loss values the thresholds are compared against.
struct HealthInputs {
  double delta_b = 0.0;
  double loss_norm = 0.0;
  double loss_std = 0.0;
};

/// L_norm and L_std enter weighted by the Stage-1 weights they were
/// optimized with.
HealthInputs health_inputs(const Stage1Result& result, const ObjectiveWeights& weights = {});

HealthVerdict evaluate(const HealthInputs& in, const HealthThresholds& thresholds = {});
HealthVerdict evaluate(const Stage1Result& result, const HealthThresholds& thresholds = {},
                       const ObjectiveWeights& weights = {});

struct LabeledResult {
  HealthInputs inputs;
  bool correct = false;
};

struct ConfusionCounts {
  int tp = 0;  // accepted, correct
  int fp = 0;  // accepted, wrong
  int fn = 0;  // rejected, correct
  int tn = 0;  // rejected, wrong

  double precision() const;  // 1 when nothing is accepted
  double recall() const;     // 1 when nothing is correct
  bool operator==(const ConfusionCounts&) const = default;
};

ConfusionCounts confusion(std::span<const LabeledResult> results,
                          const HealthThresholds& thresholds);

struct ThresholdGrid {
  std::vector<double> min_delta_b;
  std::vector<double> max_loss_std;
  std::vector<double> max_loss_norm;
};

struct SweepRow {
  HealthThresholds thresholds;
  ConfusionCounts counts;
};

/// One row per grid point, delta_b outermost, loss_norm innermost.
std::vector<SweepRow> precision_recall_sweep(std::span<const LabeledResult> results,
                                             const ThresholdGrid& grid);

/// sweep.csv layout.
void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows);

}  // namespace smid
