#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace vidattack {

/// Frames-per-second as an exact rational, e.g. 30000/1001.
struct Rational {
  std::uint32_t num = 25;
  std::uint32_t den = 1;

  double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Rational&) const = default;
};

/// "num/den" rendering; parse accepts "num/den", "num:den" or a bare integer.
std::string to_string(const Rational& r);
Rational parse_rational(const std::string& text);

/// Resolution mode of a rendered frame. factor 1 is full resolution; a factor
/// r > 1 means the content was box-averaged over r x r blocks.
struct Resolution {
  std::uint32_t factor = 1;

  static constexpr Resolution full() noexcept { return {1}; }
  static constexpr Resolution low(std::uint32_t r) noexcept { return {r <= 1 ? 1u : r}; }
  constexpr bool is_low() const noexcept { return factor > 1; }
  bool operator==(const Resolution&) const = default;
};

/// "Full" or "Low<r>".
std::string to_string(Resolution r);
Resolution parse_resolution(const std::string& text);

/// 8-bit luma raster, row-major.
class Frame {
 public:
  Frame() = default;
  Frame(std::uint32_t width, std::uint32_t height, std::uint8_t fill = 0);
  Frame(std::uint32_t width, std::uint32_t height, std::vector<std::uint8_t> pixels,
        Resolution resolution = Resolution::full());

  std::uint32_t width() const noexcept { return width_; }
  std::uint32_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return pixels_.size(); }
  Resolution resolution() const noexcept { return resolution_; }
  void set_resolution(Resolution r) noexcept { resolution_ = r; }

  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
  std::span<std::uint8_t> pixels() noexcept { return pixels_; }

  std::uint8_t at(std::uint32_t x, std::uint32_t y) const { return pixels_[std::size_t{y} * width_ + x]; }
  std::uint8_t& at(std::uint32_t x, std::uint32_t y) { return pixels_[std::size_t{y} * width_ + x]; }

  bool same_shape(const Frame& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  // Pixel equality; resolution mode is metadata and not compared.
  bool operator==(const Frame& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ && pixels_ == other.pixels_;
  }

 private:
  std::uint32_t width_ = 0;
  std::uint32_t height_ = 0;
  std::vector<std::uint8_t> pixels_;
  Resolution resolution_{};
};

/// Per-frame binary ground truth (0 normal, 1 anomalous).
class LabelTrack {
 public:
  LabelTrack() = default;
  explicit LabelTrack(std::size_t n, std::uint8_t value = 0);
  explicit LabelTrack(std::vector<std::uint8_t> values);

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  std::uint8_t operator[](std::size_t i) const { return values_[i]; }
  void set(std::size_t i, bool anomalous) { values_.at(i) = anomalous ? 1 : 0; }
  std::span<const std::uint8_t> values() const noexcept { return values_; }
  std::size_t positives() const noexcept;

  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }
  bool operator==(const LabelTrack&) const = default;

 private:
  std::vector<std::uint8_t> values_;
};

struct VideoSequence {
  Rational fps;
  std::vector<Frame> frames;
  LabelTrack labels;

  std::size_t size() const noexcept { return frames.size(); }
  std::uint32_t width() const noexcept { return frames.empty() ? 0 : frames.front().width(); }
  std::uint32_t height() const noexcept { return frames.empty() ? 0 : frames.front().height(); }

  /// Throws DimensionMismatch / LabelLengthMismatch when the invariants fail.
  void validate() const;

  bool operator==(const VideoSequence&) const = default;
};

/// A contiguous half-open frame span [begin, end).
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t length() const noexcept { return end - begin; }
  bool contains(std::size_t i) const noexcept { return i >= begin && i < end; }
  bool operator==(const Span&) const = default;
};

/// Maximal runs of ones in a label track.
std::vector<Span> positive_runs(const LabelTrack& labels);

}  // namespace vidattack
