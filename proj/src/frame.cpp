#include "vidattack/frame.hpp"

#include <charconv>

#include "vidattack/error.hpp"

namespace vidattack {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::LabelLengthMismatch: return "LabelLengthMismatch";
    case ErrorKind::MalformedManifest: return "MalformedManifest";
    case ErrorKind::MalformedLabels: return "MalformedLabels";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::BadSignature: return "BadSignature";
    case ErrorKind::UnsupportedColorspace: return "UnsupportedColorspace";
    case ErrorKind::TruncatedFrame: return "TruncatedFrame";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::SpanOutOfRange: return "SpanOutOfRange";
    case ErrorKind::InvalidK: return "InvalidK";
    case ErrorKind::AnomalyTooLong: return "AnomalyTooLong";
    case ErrorKind::TraceMismatch: return "TraceMismatch";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::IndexTooSmall: return "IndexTooSmall";
    case ErrorKind::TooShort: return "TooShort";
    case ErrorKind::DegenerateLabels: return "DegenerateLabels";
    case ErrorKind::NoAnomaly: return "NoAnomaly";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

namespace {

std::uint32_t parse_u32(std::string_view text, ErrorKind kind, const char* what) {
  std::uint32_t value = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || text.empty()) {
    throw Error(kind, std::string("bad ") + what + " '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

std::string to_string(const Rational& r) { return std::to_string(r.num) + "/" + std::to_string(r.den); }

Rational parse_rational(const std::string& text) {
  auto sep = text.find_first_of("/:");
  Rational r;
  if (sep == std::string::npos) {
    r = {parse_u32(text, ErrorKind::InvalidArgument, "rational"), 1};
  } else {
    r = {parse_u32(std::string_view(text).substr(0, sep), ErrorKind::InvalidArgument, "rational"),
         parse_u32(std::string_view(text).substr(sep + 1), ErrorKind::InvalidArgument, "rational")};
  }
  if (r.num == 0 || r.den == 0) throw Error(ErrorKind::InvalidArgument, "fps must be positive: " + text);
  return r;
}

std::string to_string(Resolution r) { return r.is_low() ? "Low" + std::to_string(r.factor) : "Full"; }

Resolution parse_resolution(const std::string& text) {
  if (text == "Full") return Resolution::full();
  if (text.rfind("Low", 0) == 0) {
    return Resolution::low(parse_u32(std::string_view(text).substr(3), ErrorKind::InvalidArgument, "resolution"));
  }
  throw Error(ErrorKind::InvalidArgument, "bad resolution '" + text + "'");
}

Frame::Frame(std::uint32_t width, std::uint32_t height, std::uint8_t fill)
    : Frame(width, height, std::vector<std::uint8_t>(std::size_t{width} * height, fill)) {}

Frame::Frame(std::uint32_t width, std::uint32_t height, std::vector<std::uint8_t> pixels, Resolution resolution)
    : width_(width), height_(height), pixels_(std::move(pixels)), resolution_(resolution) {
  if (width == 0 || height == 0) throw Error(ErrorKind::DimensionMismatch, "frame dimensions must be positive");
  if (pixels_.size() != std::size_t{width} * height) {
    throw Error(ErrorKind::DimensionMismatch, "pixel count " + std::to_string(pixels_.size()) + " != " +
                                                  std::to_string(width) + "x" + std::to_string(height));
  }
}

LabelTrack::LabelTrack(std::size_t n, std::uint8_t value) : values_(n, value ? 1 : 0) {}

LabelTrack::LabelTrack(std::vector<std::uint8_t> values) : values_(std::move(values)) {
  for (auto v : values_) {
    if (v > 1) throw Error(ErrorKind::MalformedLabels, "label values must be 0 or 1");
  }
}

std::size_t LabelTrack::positives() const noexcept {
  std::size_t n = 0;
  for (auto v : values_) n += v;
  return n;
}

void VideoSequence::validate() const {
  for (const auto& f : frames) {
    if (!f.same_shape(frames.front())) throw Error(ErrorKind::DimensionMismatch, "frames differ in size");
  }
  if (labels.size() != frames.size()) {
    throw Error(ErrorKind::LabelLengthMismatch, std::to_string(labels.size()) + " labels for " +
                                                    std::to_string(frames.size()) + " frames");
  }
  if (fps.num == 0 || fps.den == 0) throw Error(ErrorKind::InvalidConfig, "fps must be positive");
}

std::vector<Span> positive_runs(const LabelTrack& labels) {
  std::vector<Span> runs;
  for (std::size_t i = 0; i < labels.size();) {
    if (!labels[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < labels.size() && labels[j]) ++j;
    runs.push_back({i, j});
    i = j;
  }
  return runs;
}

}  // namespace vidattack
