#include "vidattack/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "vidattack/error.hpp"
#include "vidattack/format.hpp"
#include "vidattack/random.hpp"

namespace vidattack::eval {

using json = nlohmann::ordered_json;

namespace {

void check_lengths(std::size_t scores, std::size_t labels) {
  if (scores != labels) {
    throw Error(ErrorKind::LengthMismatch, std::to_string(scores) + " scores for " + std::to_string(labels) + " labels");
  }
}

RocResult sweep(const std::vector<std::pair<double, std::uint8_t>>& scored) {
  RocResult r;
  for (const auto& [s, l] : scored) (l ? r.n_pos : r.n_neg)++;
  if (r.n_pos == 0 || r.n_neg == 0) {
    throw Error(ErrorKind::DegenerateLabels, "AUC needs both classes (" + std::to_string(r.n_pos) + " positive, " +
                                                 std::to_string(r.n_neg) + " negative)");
  }

  std::vector<std::size_t> order(scored.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scored[a].first > scored[b].first; });

  const double P = static_cast<double>(r.n_pos);
  const double N = static_cast<double>(r.n_neg);
  r.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  // Twice the area in units of (1/P)(1/N), accumulated exactly.
  uint128 area2 = 0;
  std::uint64_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scored[order[i]].first;
    const std::uint64_t tp0 = tp, fp0 = fp;
    while (i < order.size() && scored[order[i]].first == threshold) {
      (scored[order[i]].second ? tp : fp)++;
      ++i;
    }
    area2 += static_cast<uint128>(fp - fp0) * (tp + tp0);
    r.points.push_back({threshold, static_cast<double>(fp) / N, static_cast<double>(tp) / P});
  }
  r.auc = static_cast<double>(area2) / (2.0 * P * N);
  return r;
}

json effects_json(const std::vector<EffectStats>& rows) {
  json out = json::array();
  for (const auto& e : rows) {
    out.push_back({{"tag", effects::to_string(e.tag)},
                   {"baseline", e.baseline},
                   {"span", {e.span.begin, e.span.end}},
                   {"ticks", e.ticks},
                   {"mean_psnr", e.mean_psnr},
                   {"var_psnr", e.var_psnr},
                   {"min_psnr", e.min_psnr}});
  }
  return out;
}

}  // namespace

RocResult roc_auc(std::span<const double> scores, const LabelTrack& labels) {
  check_lengths(scores.size(), labels.size());
  std::vector<std::pair<double, std::uint8_t>> scored(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) scored[i] = {scores[i], labels[i]};
  return sweep(scored);
}

RocResult roc_auc(std::span<const ScoredVideo> videos, Aggregation aggregation) {
  std::vector<std::pair<double, std::uint8_t>> scored;
  double auc_sum = 0.0;
  std::size_t usable = 0;
  for (const auto& v : videos) {
    check_lengths(v.scores.size(), v.labels->size());
    for (std::size_t i = 0; i < v.scores.size(); ++i) scored.emplace_back(v.scores[i], (*v.labels)[i]);
    if (aggregation == Aggregation::Macro) {
      const std::size_t pos = v.labels->positives();
      if (pos == 0 || pos == v.labels->size()) continue;
      auc_sum += roc_auc(v.scores, *v.labels).auc;
      ++usable;
    }
  }
  RocResult r = sweep(scored);
  if (aggregation == Aggregation::Macro) {
    if (usable == 0) throw Error(ErrorKind::DegenerateLabels, "no video holds both classes");
    r.auc = auc_sum / static_cast<double>(usable);
  }
  return r;
}

std::string roc_to_csv(const RocResult& roc) {
  std::string out = "threshold,fpr,tpr\n";
  for (const auto& p : roc.points) {
    out += format_double(p.threshold) + "," + format_double(p.fpr) + "," + format_double(p.tpr) + "\n";
  }
  return out;
}

FalseAlarms false_alarms(std::span<const double> scores, const LabelTrack& labels, double threshold) {
  check_lengths(scores.size(), labels.size());
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw Error(ErrorKind::InvalidArgument, "threshold must lie in [0, 1]");
  FalseAlarms fa;
  bool in_run = false;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool alarm = scores[i] >= threshold && labels[i] == 0;
    if (alarm) {
      ++fa.frame_count;
      if (!in_run) ++fa.event_count;
    }
    in_run = alarm;
  }
  return fa;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorKind::InvalidArgument, "percentile of an empty set");
  if (!(q >= 0.0 && q <= 100.0)) throw Error(ErrorKind::InvalidArgument, "percentile q must lie in [0, 100]");
  std::sort(values.begin(), values.end());
  const double rank = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (rank - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<EffectStats> effect_summary(const detector::ScoreSeries& series, const effects::DisplayTrace& trace) {
  check_lengths(series.size(), trace.size());
  auto stats = [&](const std::vector<std::size_t>& ticks) {
    EffectStats e;
    e.ticks = ticks.size();
    double sum = 0.0;
    e.min_psnr = std::numeric_limits<double>::infinity();
    for (auto i : ticks) {
      sum += series.psnr[i];
      e.min_psnr = std::min(e.min_psnr, series.psnr[i]);
    }
    e.mean_psnr = sum / static_cast<double>(ticks.size());
    double ss = 0.0;
    for (auto i : ticks) ss += (series.psnr[i] - e.mean_psnr) * (series.psnr[i] - e.mean_psnr);
    e.var_psnr = ss / static_cast<double>(ticks.size());
    return e;
  };

  std::vector<EffectStats> rows;
  std::vector<std::size_t> clean;
  for (const auto& run : effects::tag_runs(trace)) {
    std::vector<std::size_t> ticks(run.span.length());
    std::iota(ticks.begin(), ticks.end(), run.span.begin);
    if (run.tag == effects::EffectTag::Clean) {
      clean.insert(clean.end(), ticks.begin(), ticks.end());
      continue;
    }
    auto e = stats(ticks);
    e.tag = run.tag;
    e.span = run.span;
    rows.push_back(e);
  }
  if (!clean.empty()) {
    auto e = stats(clean);
    e.tag = effects::EffectTag::Clean;
    e.span = {clean.front(), clean.back() + 1};
    e.baseline = true;
    rows.push_back(e);
  }
  return rows;
}

std::vector<MaskingVerdict> masking_report(const detector::ScoreSeries& series, const LabelTrack& realtime_labels,
                                           double threshold) {
  check_lengths(series.size(), realtime_labels.size());
  auto runs = positive_runs(realtime_labels);
  if (runs.empty()) throw Error(ErrorKind::NoAnomaly, "labels contain no anomaly");
  std::vector<MaskingVerdict> out;
  for (const auto& span : runs) {
    MaskingVerdict v;
    v.anomaly = span;
    v.threshold = threshold;
    v.max_score = *std::max_element(series.score.begin() + static_cast<std::ptrdiff_t>(span.begin),
                                    series.score.begin() + static_cast<std::ptrdiff_t>(span.end));
    v.masked = v.max_score < threshold;
    out.push_back(v);
  }
  return out;
}

Comparison compare_runs(const std::vector<std::pair<std::string, RocResult>>& runs) {
  if (runs.size() < 2) throw Error(ErrorKind::InvalidArgument, "compare_runs needs a baseline and at least one other run");
  Comparison c;
  const double base = runs.front().second.auc;
  for (const auto& [name, roc] : runs) c.rows.push_back({name, roc.auc, roc.n_pos, roc.n_neg, roc.auc - base});
  return c;
}

std::string Comparison::to_json() const {
  json rows_json = json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"name", r.name}, {"auc", r.auc}, {"n_pos", r.n_pos}, {"n_neg", r.n_neg},
                         {"deltas", {{"auc", r.delta}}}});
  }
  return json{{"baseline", rows.empty() ? "" : rows.front().name}, {"runs", rows_json}}.dump(2) + "\n";
}

std::string Comparison::to_text() const {
  std::size_t width = 4;
  for (const auto& r : rows) width = std::max(width, r.name.size());
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s  %8s  %9s\n", static_cast<int>(width), "run", "AUC", "delta");
  out += buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-*s  %8.4f  %+9.4f\n", static_cast<int>(width), r.name.c_str(), r.auc, r.delta);
    out += buf;
  }
  return out;
}

std::string report_to_json(const EvalReport& report) {
  json runs = json::array();
  json effect_summaries = json::object();
  json masking = json::object();
  json alarms = json::object();
  const bool with_deltas = report.runs.size() >= 2;
  const double base = report.runs.empty() ? 0.0 : report.runs.front().roc.auc;

  for (const auto& r : report.runs) {
    json row{{"name", r.name}, {"auc", r.roc.auc}, {"n_pos", r.roc.n_pos}, {"n_neg", r.roc.n_neg}};
    if (with_deltas) row["deltas"] = {{"auc", r.roc.auc - base}};
    runs.push_back(row);

    if (r.effects) effect_summaries[r.name] = effects_json(*r.effects);
    json verdicts = json::array();
    for (const auto& v : r.masking) {
      verdicts.push_back({{"anomaly_span", {v.anomaly.begin, v.anomaly.end}},
                          {"max_score_in_span", v.max_score},
                          {"threshold", v.threshold},
                          {"masked", v.masked}});
    }
    masking[r.name] = verdicts;
    alarms[r.name] = {{"frame_count", r.alarms.frame_count}, {"event_count", r.alarms.event_count}};
  }

  json doc;
  doc["runs"] = runs;
  doc["threshold"] = {{"tau", report.threshold}, {"source", report.threshold_source}};
  doc["effect_summaries"] = effect_summaries;
  doc["masking_verdicts"] = masking;
  doc["false_alarms"] = alarms;
  doc["config"] = report.config_json.empty() ? json::object() : json::parse(report.config_json);
  return doc.dump(2) + "\n";
}

}  // namespace vidattack::eval
