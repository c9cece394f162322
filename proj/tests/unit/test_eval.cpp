#include <doctest.h>

#include <cmath>
#include <random>

#include <json.hpp>

#include "oracles.hpp"
#include "vidattack/detector.hpp"
#include "vidattack/effects.hpp"
#include "vidattack/error.hpp"
#include "vidattack/eval.hpp"
#include "vidattack/synth.hpp"

using namespace vidattack;
using namespace vidattack::eval;

namespace {

LabelTrack labels_of(std::initializer_list<std::uint8_t> v) { return LabelTrack(std::vector<std::uint8_t>(v)); }

struct Instance {
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
};

Instance random_instance(std::mt19937_64& rng, std::size_t max_n, bool ties) {
  Instance in;
  const std::size_t n = 2 + rng() % (max_n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    in.scores.push_back(ties ? static_cast<double>(rng() % 5) / 4.0 : std::ldexp(static_cast<double>(rng() >> 11), -53));
    in.labels.push_back(static_cast<std::uint8_t>(rng() & 1));
  }
  in.labels[0] = 1;
  in.labels[1] = 0;
  return in;
}

}  // namespace

TEST_CASE("auc reference cases") {
  CHECK(roc_auc(std::vector<double>{0.9, 0.8, 0.1, 0.2}, labels_of({1, 1, 0, 0})).auc == 1.0);
  CHECK(roc_auc(std::vector<double>{0.3, 0.3, 0.3, 0.3}, labels_of({1, 0, 1, 0})).auc == 0.5);
  auto r = roc_auc(std::vector<double>{0.9, 0.8, 0.1, 0.2}, labels_of({1, 0, 1, 0}));
  CHECK(r.auc == 0.5);
  CHECK(r.n_pos == 2);
  CHECK(r.n_neg == 2);
  CHECK(std::isinf(r.points.front().threshold));
  CHECK(r.points.back().fpr == 1.0);
  CHECK(r.points.back().tpr == 1.0);

  auto kind = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::InvalidArgument;
  };
  CHECK(kind([] { roc_auc(std::vector<double>{0.1, 0.2}, labels_of({0, 0})); }) == ErrorKind::DegenerateLabels);
  CHECK(kind([] { roc_auc(std::vector<double>{0.1, 0.2}, labels_of({1, 1})); }) == ErrorKind::DegenerateLabels);
  CHECK(kind([] { roc_auc(std::vector<double>{0.1}, labels_of({1, 0})); }) == ErrorKind::LengthMismatch);
}

TEST_CASE("property: trapezoid AUC equals pair counting") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    auto in = random_instance(rng, 50, trial % 2 == 0);
    const double got = roc_auc(in.scores, LabelTrack(in.labels)).auc;
    CHECK(std::abs(got - oracle::mann_whitney_auc(in.scores, in.labels)) <= 1e-12);
  }
  // the 12-frame case
  auto in = random_instance(rng, 12, false);
  while (in.scores.size() != 12) in = random_instance(rng, 12, false);
  CHECK(std::abs(roc_auc(in.scores, LabelTrack(in.labels)).auc - oracle::mann_whitney_auc(in.scores, in.labels)) <= 1e-12);
}

TEST_CASE("property: invariance and complement symmetry") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    auto in = random_instance(rng, 60, trial % 3 == 0);
    LabelTrack labels(in.labels);
    const double base = roc_auc(in.scores, labels).auc;
    std::vector<double> warped, negated;
    for (double s : in.scores) {
      warped.push_back(std::exp(3.0 * s) + 7.0);
      negated.push_back(-s);
    }
    CHECK(roc_auc(warped, labels).auc == doctest::Approx(base).epsilon(1e-15));
    // with ties the complement still holds because tied pairs take half credit both ways
    CHECK(roc_auc(negated, labels).auc == doctest::Approx(1.0 - base).epsilon(1e-12));
  }
}

TEST_CASE("micro and macro aggregation") {
  std::vector<double> a{0.9, 0.1, 0.8, 0.2}, b{0.4, 0.6, 0.3, 0.7}, c{0.5, 0.5};
  auto la = labels_of({1, 0, 1, 0}), lb = labels_of({1, 0, 1, 0}), lc = labels_of({0, 0});
  std::vector<ScoredVideo> videos{{a, &la}, {b, &lb}, {c, &lc}};
  auto macro = roc_auc(videos, Aggregation::Macro);
  CHECK(macro.auc == doctest::Approx(0.5 * (1.0 + 0.0)));
  auto micro = roc_auc(videos, Aggregation::Micro);
  std::vector<double> all{0.9, 0.1, 0.8, 0.2, 0.4, 0.6, 0.3, 0.7, 0.5, 0.5};
  std::vector<std::uint8_t> all_l{1, 0, 1, 0, 1, 0, 1, 0, 0, 0};
  CHECK(micro.auc == doctest::Approx(oracle::mann_whitney_auc(all, all_l)));
  CHECK(macro.points.size() == micro.points.size());
  std::vector<ScoredVideo> only_neg{{c, &lc}};
  CHECK_THROWS_AS(roc_auc(only_neg, Aggregation::Macro), Error);
}

TEST_CASE("false alarms") {
  CHECK(false_alarms(std::vector<double>{1, 1, 0, 1}, LabelTrack(4), 0.5) == FalseAlarms{3, 2});
  CHECK(false_alarms(std::vector<double>{0, 0, 0}, LabelTrack(3), 0.1) == FalseAlarms{0, 0});
  // positives never count and split runs
  CHECK(false_alarms(std::vector<double>{1, 1, 1, 1}, labels_of({0, 1, 0, 0}), 0.5) == FalseAlarms{3, 2});
  CHECK_THROWS_AS(false_alarms(std::vector<double>{0.5}, LabelTrack(1), 1.5), Error);
  // raising the threshold can split one alarm run into two, so only the frame count is monotone
  CHECK(false_alarms(std::vector<double>{1, 0.4, 1}, LabelTrack(3), 0.3) == FalseAlarms{3, 1});
  CHECK(false_alarms(std::vector<double>{1, 0.4, 1}, LabelTrack(3), 0.5) == FalseAlarms{2, 2});

  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    auto in = random_instance(rng, 80, trial % 2 == 0);
    LabelTrack labels(in.labels);
    FalseAlarms prev{in.scores.size() + 1, in.scores.size() + 1};
    for (double tau = 0.0; tau <= 1.0; tau += 0.05) {
      auto fa = false_alarms(in.scores, labels, tau);
      CHECK(fa.event_count <= fa.frame_count);
      CHECK(fa.frame_count <= prev.frame_count);
      prev = fa;
    }
  }
}

TEST_CASE("replication raises false alarms at the clean 99th percentile") {
  synth::SynthConfig c;
  c.seed = 21;
  c.n_frames = 500;
  c.sensor_noise_amp = 2;
  auto clean = synth::generate(c);
  auto rep = effects::apply_trace(clean, effects::build_replicate_trace(clean.size(), 1, 10));
  auto sc = detector::score_video(clean);
  auto sr = detector::score_video(rep);
  const double tau = percentile(sc.score, 99);
  CHECK(false_alarms(sr, rep.labels, tau).frame_count > false_alarms(sc, clean.labels, tau).frame_count);
}

TEST_CASE("percentile interpolates linearly") {
  CHECK(percentile({1, 2, 3, 4}, 50) == 2.5);
  CHECK(percentile({4, 1, 3, 2}, 0) == 1);
  CHECK(percentile({4, 1, 3, 2}, 100) == 4);
  CHECK(percentile({0, 10}, 95) == doctest::Approx(9.5));
  CHECK_THROWS_AS(percentile({}, 50), Error);
}

TEST_CASE("effect summary and masking") {
  synth::SynthConfig c;
  c.seed = 5;
  c.n_frames = 300;
  c.anomaly = synth::Anomaly{150, 30, synth::AnomalyKind::FastMotion, 4};
  auto v = synth::generate(c);
  auto sc = detector::score_video(v);

  auto rows = effect_summary(sc, effects::DisplayTrace::identity(v.size()));
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].baseline);
  CHECK(rows[0].ticks == 300);
  CHECK(rows[0].span == Span{0, 300});

  auto sff = effects::build_sff_trace(v.size(), 20, 90, 2);
  auto ss = detector::score_video(effects::apply_trace(v, sff));
  rows = effect_summary(ss, sff);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].tag == effects::EffectTag::Slow);
  CHECK(rows[1].tag == effects::EffectTag::Freeze);
  CHECK(rows[2].tag == effects::EffectTag::Fast);
  CHECK(rows[3].baseline);
  CHECK(rows[1].var_psnr == 0.0);
  CHECK(rows[2].mean_psnr < rows[3].mean_psnr);
  CHECK(rows[3].ticks == 210);

  const auto [lo, hi] = std::minmax_element(sc.score.begin(), sc.score.end());
  const double mid = 0.5 * (*lo + *hi);
  auto verdicts = masking_report(sc, v.labels, mid);
  REQUIRE(verdicts.size() == 1);
  CHECK(verdicts[0].anomaly == Span{150, 180});
  CHECK_FALSE(verdicts[0].masked);

  auto frozen = effects::apply_trace(v, effects::build_extended_freeze_trace(v.size(), {150, 180}, 10, 2));
  auto sf = detector::score_video(frozen);
  auto masked = masking_report(sf, v.labels, mid);
  CHECK(masked[0].masked);
  for (std::size_t i = 150; i < 180; ++i) CHECK(sf.psnr[i] == 80.0);
  CHECK_THROWS_AS(masking_report(sc, LabelTrack(300), mid), Error);
}

TEST_CASE("run comparison") {
  RocResult clean, sff;
  clean.auc = 0.95;
  sff.auc = 0.80;
  auto cmp = compare_runs({{"clean", clean}, {"sff", sff}});
  CHECK(cmp.rows[1].delta == doctest::Approx(-0.15));
  CHECK(cmp.rows[0].delta == 0.0);
  auto doc = nlohmann::json::parse(cmp.to_json());
  CHECK(doc["runs"][1]["deltas"]["auc"].get<double>() == doctest::Approx(-0.15));
  CHECK(cmp.to_text().find("-0.1500") != std::string::npos);
  CHECK_THROWS_AS(compare_runs({{"clean", clean}}), Error);

  EvalReport one;
  one.runs.push_back({"clean", clean, {}, {}, std::nullopt});
  auto single = nlohmann::json::parse(report_to_json(one));
  CHECK_FALSE(single["runs"][0].contains("deltas"));
}
