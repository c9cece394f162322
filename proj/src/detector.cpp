#include "vidattack/detector.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vidattack/error.hpp"
#include "vidattack/format.hpp"

namespace vidattack::detector {

std::string to_string(Predictor p) { return p == Predictor::PrevFrame ? "prev" : "linear"; }

Predictor parse_predictor(const std::string& text) {
  if (text == "prev" || text == "PrevFrame") return Predictor::PrevFrame;
  if (text == "linear" || text == "Linear") return Predictor::Linear;
  throw Error(ErrorKind::InvalidArgument, "unknown predictor '" + text + "'");
}

std::size_t warmup(Predictor p) noexcept { return p == Predictor::PrevFrame ? 1 : 2; }

double psnr(const Frame& a, const Frame& b, double clamp_db) {
  if (!a.same_shape(b)) throw Error(ErrorKind::DimensionMismatch, "psnr needs frames of equal size");
  const auto pa = a.pixels();
  const auto pb = b.pixels();
  std::uint64_t sse = 0;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const int d = int{pa[i]} - int{pb[i]};
    sse += static_cast<std::uint64_t>(d * d);
  }
  if (sse == 0) return clamp_db;
  const double mse = static_cast<double>(sse) / static_cast<double>(pa.size());
  return std::min(10.0 * std::log10(255.0 * 255.0 / mse), clamp_db);
}

Frame predict(const VideoSequence& video, std::size_t index, Predictor predictor) {
  if (index < warmup(predictor)) {
    throw Error(ErrorKind::IndexTooSmall, to_string(predictor) + " needs index >= " + std::to_string(warmup(predictor)));
  }
  if (index >= video.size()) throw Error(ErrorKind::IndexTooSmall, "index past the end of the video");
  const Frame& prev = video.frames[index - 1];
  if (predictor == Predictor::PrevFrame) return prev;

  const Frame& prev2 = video.frames[index - 2];
  Frame out = prev;
  auto dst = out.pixels();
  const auto p1 = prev.pixels();
  const auto p2 = prev2.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<std::uint8_t>(std::clamp(2 * int{p1[i]} - int{p2[i]}, 0, 255));
  return out;
}

std::vector<double> normalize_scores(const std::vector<double>& psnr) {
  std::vector<double> score(psnr.size(), 0.5);
  if (psnr.empty()) return score;
  const auto [lo, hi] = std::minmax_element(psnr.begin(), psnr.end());
  const double range = *hi - *lo;
  if (range <= 0.0) return score;
  for (std::size_t i = 0; i < psnr.size(); ++i) score[i] = std::clamp(1.0 - (psnr[i] - *lo) / range, 0.0, 1.0);
  return score;
}

ScoreSeries score_video(const VideoSequence& video, Predictor predictor, double clamp_db) {
  const std::size_t w = warmup(predictor);
  if (video.size() < w + 1) {
    throw Error(ErrorKind::TooShort, to_string(predictor) + " scoring needs at least " + std::to_string(w + 1) +
                                         " frames, got " + std::to_string(video.size()));
  }
  ScoreSeries s;
  s.predictor = predictor;
  s.clamp_db = clamp_db;
  s.psnr.assign(video.size(), 0.0);
  for (std::size_t i = w; i < video.size(); ++i) s.psnr[i] = psnr(predict(video, i, predictor), video.frames[i], clamp_db);
  for (std::size_t i = 0; i < w; ++i) s.psnr[i] = s.psnr[w];
  s.score = normalize_scores(s.psnr);
  return s;
}

std::string series_to_csv(const ScoreSeries& series, const LabelTrack& labels) {
  if (labels.size() != series.size()) {
    throw Error(ErrorKind::LengthMismatch, std::to_string(labels.size()) + " labels for " +
                                               std::to_string(series.size()) + " scores");
  }
  std::string out = "frame,psnr,score,label\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    out += std::to_string(i) + "," + format_double(series.psnr[i]) + "," + format_double(series.score[i]) + "," +
           (labels[i] ? "1" : "0") + "\n";
  }
  return out;
}

ScoreTable series_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "frame,psnr,score,label") throw Error(ErrorKind::InvalidArgument, "score CSV must start with frame,psnr,score,label");
  ScoreTable t;
  std::vector<std::uint8_t> labels;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream row(line);
    for (std::string c; std::getline(row, c, ',');) cols.push_back(c);
    if (cols.size() != 4 || (cols[3] != "0" && cols[3] != "1")) {
      throw Error(ErrorKind::InvalidArgument, "bad score row: " + line);
    }
    try {
      t.series.psnr.push_back(std::stod(cols[1]));
      t.series.score.push_back(std::stod(cols[2]));
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::InvalidArgument, "bad score row: " + line);
    }
    labels.push_back(cols[3] == "1" ? 1 : 0);
  }
  t.labels = LabelTrack(std::move(labels));
  return t;
}

}  // namespace vidattack::detector
