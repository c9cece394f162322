#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "vidattack/frame.hpp"

namespace vidattack::detector {

inline constexpr double kDefaultClampDb = 80.0;

enum class Predictor {
  PrevFrame,  // next frame = previous frame
  Linear,     // next frame = clip(2 * prev - prev2)
};

std::string to_string(Predictor p);
Predictor parse_predictor(const std::string& text);
std::size_t warmup(Predictor p) noexcept;

/// min(10 log10(255^2 / MSE), clamp_db); identical frames give clamp_db.
double psnr(const Frame& a, const Frame& b, double clamp_db = kDefaultClampDb);

Frame predict(const VideoSequence& video, std::size_t index, Predictor predictor);

struct ScoreSeries {
  std::vector<double> psnr;
  std::vector<double> score;  // 1 - minmax(psnr) within the video; higher = more anomalous
  Predictor predictor = Predictor::PrevFrame;
  double clamp_db = kDefaultClampDb;

  std::size_t size() const noexcept { return psnr.size(); }
};

ScoreSeries score_video(const VideoSequence& video, Predictor predictor = Predictor::PrevFrame,
                        double clamp_db = kDefaultClampDb);

/// Min-max normalisation used by score_video, exposed for re-scoring psnr
/// series; a constant series maps to 0.5 everywhere.
std::vector<double> normalize_scores(const std::vector<double>& psnr);

// CSV `frame,psnr,score,label`.
std::string series_to_csv(const ScoreSeries& series, const LabelTrack& labels);

struct ScoreTable {
  ScoreSeries series;
  LabelTrack labels;
};
ScoreTable series_from_csv(const std::string& text);

}  // namespace vidattack::detector
