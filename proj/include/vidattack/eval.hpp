#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vidattack/detector.hpp"
#include "vidattack/effects.hpp"
#include "vidattack/frame.hpp"

namespace vidattack::eval {

struct RocPoint {
  double threshold = 0.0;  // scores >= threshold are flagged; +inf for the origin
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocResult {
  double auc = 0.5;
  std::vector<RocPoint> points;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
};

enum class Aggregation { Micro, Macro };

/// One video's frame scores with its labels.
struct ScoredVideo {
  std::span<const double> scores;
  const LabelTrack* labels = nullptr;
};

/// Exact trapezoidal AUC: equal scores form one threshold group, which is the
/// Mann-Whitney statistic with half credit for ties.
RocResult roc_auc(std::span<const double> scores, const LabelTrack& labels);

/// Micro concatenates every video. Macro averages the AUCs of videos holding
/// both classes and reports the concatenated curve in `points`.
RocResult roc_auc(std::span<const ScoredVideo> videos, Aggregation aggregation = Aggregation::Micro);

std::string roc_to_csv(const RocResult& roc);

struct FalseAlarms {
  std::size_t frame_count = 0;
  std::size_t event_count = 0;
  bool operator==(const FalseAlarms&) const = default;
};

FalseAlarms false_alarms(std::span<const double> scores, const LabelTrack& labels, double threshold);
inline FalseAlarms false_alarms(const detector::ScoreSeries& series, const LabelTrack& labels, double threshold) {
  return false_alarms(series.score, labels, threshold);
}

/// Linear-interpolation percentile (q in [0, 100]) of `values`.
double percentile(std::vector<double> values, double q);

struct EffectStats {
  effects::EffectTag tag = effects::EffectTag::Clean;
  Span span;              // for the baseline row, the hull of all Clean ticks
  std::size_t ticks = 0;  // number of ticks the row aggregates
  double mean_psnr = 0.0;
  double var_psnr = 0.0;  // population variance
  double min_psnr = 0.0;
  bool baseline = false;
};

/// One row per maximal non-Clean tag run, in trace order, followed by a Clean
/// baseline row over every Clean tick (omitted when there are none).
std::vector<EffectStats> effect_summary(const detector::ScoreSeries& series, const effects::DisplayTrace& trace);

struct MaskingVerdict {
  Span anomaly;
  double max_score = 0.0;
  double threshold = 0.0;
  bool masked = false;
};

/// One verdict per anomaly run of `realtime_labels`.
std::vector<MaskingVerdict> masking_report(const detector::ScoreSeries& series, const LabelTrack& realtime_labels,
                                           double threshold);

struct RunRow {
  std::string name;
  double auc = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  double delta = 0.0;  // auc - baseline auc
};

struct Comparison {
  std::vector<RunRow> rows;
  std::string to_json() const;
  std::string to_text() const;
};

/// AUC table with deltas against the first run; needs at least two runs.
Comparison compare_runs(const std::vector<std::pair<std::string, RocResult>>& runs);

/// Everything a single `eval` invocation reports.
struct RunReport {
  std::string name;
  RocResult roc;
  FalseAlarms alarms;
  std::vector<MaskingVerdict> masking;  // empty when the run has no anomaly
  std::optional<std::vector<EffectStats>> effects;
};

struct EvalReport {
  std::vector<RunReport> runs;
  double threshold = 0.0;
  std::string threshold_source;  // e.g. "p95 of <baseline> scores" or "--tau"
  std::string config_json;       // echo of the resolved configuration
};

std::string report_to_json(const EvalReport& report);

}  // namespace vidattack::eval
