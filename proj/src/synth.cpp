#include "vidattack/synth.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "vidattack/error.hpp"
#include "vidattack/random.hpp"

namespace vidattack::synth {

namespace {

std::uint32_t main_lane_top(const SynthConfig& c) { return (c.height - c.object_size) / 2; }

// Second lane sits directly above the main one, or below it when there is no
// room above.
std::uint32_t second_lane_top(const SynthConfig& c) {
  std::uint32_t y0 = main_lane_top(c);
  return y0 >= c.object_size ? y0 - c.object_size : y0 + c.object_size;
}

void draw_square(Frame& frame, std::uint32_t x0, std::uint32_t y0, std::uint32_t size, std::uint8_t luma = kObjectLuma) {
  for (std::uint32_t dy = 0; dy < size; ++dy) {
    for (std::uint32_t dx = 0; dx < size; ++dx) frame.at((x0 + dx) % frame.width(), y0 + dy) = luma;
  }
}

std::uint8_t clamp_luma(std::int64_t v) { return static_cast<std::uint8_t>(std::clamp<std::int64_t>(v, 0, 255)); }

}  // namespace

void validate(const SynthConfig& c) {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::InvalidConfig, msg); };
  if (c.n_frames < 2) fail("n_frames must be >= 2");
  if (c.width == 0 || c.height == 0) fail("frame size must be positive");
  if (c.fps.num == 0 || c.fps.den == 0) fail("fps must be positive");
  if (c.object_size == 0 || c.object_size > c.width || c.object_size > c.height) fail("object_size must fit the frame");
  if (c.normal_velocity < 1) fail("normal_velocity must be >= 1");
  if (c.background_noise_amp > 127 || c.sensor_noise_amp > 127) fail("noise amplitudes must be <= 127");
  if (c.anomaly) {
    const auto& a = *c.anomaly;
    if (a.length == 0) fail("anomaly length must be >= 1");
    if (a.start >= c.n_frames || a.length > c.n_frames - a.start) {
      fail("anomaly span [" + std::to_string(a.start) + ", " + std::to_string(a.start + a.length) +
           ") exceeds " + std::to_string(c.n_frames) + " frames");
    }
    if (a.kind == AnomalyKind::FastMotion && a.velocity <= c.normal_velocity) {
      fail("FastMotion velocity must exceed normal_velocity");
    }
    if (a.kind == AnomalyKind::Appearance && c.height < 3 * c.object_size) {
      fail("Appearance anomaly needs height >= 3 * object_size");
    }
    if (a.kind == AnomalyKind::Appearance && a.length < 3) fail("Appearance anomaly needs length >= 3");
  }
}

VideoSequence generate(const SynthConfig& c) {
  validate(c);
  SeededStream rng(c.seed);

  const std::uint32_t lane0 = main_lane_top(c);
  const bool second_object = c.anomaly && c.anomaly->kind == AnomalyKind::Appearance;
  const std::uint32_t lane1 = second_lane_top(c);
  auto in_lane = [&](std::uint32_t y) {
    return (y >= lane0 && y < lane0 + c.object_size) || (second_object && y >= lane1 && y < lane1 + c.object_size);
  };

  Frame background(c.width, c.height, kBackgroundLuma);
  const auto amp = static_cast<std::int64_t>(c.background_noise_amp);
  for (std::uint32_t y = 0; y < c.height; ++y) {
    for (std::uint32_t x = 0; x < c.width; ++x) {
      if (in_lane(y)) continue;
      background.at(x, y) = clamp_luma(kBackgroundLuma + rng.between(-amp, amp));
    }
  }

  const auto x_start = static_cast<std::uint32_t>(rng.below(c.width));
  const auto in_anomaly = [&](std::size_t i) {
    return c.anomaly && i >= c.anomaly->start && i < c.anomaly->start + c.anomaly->length;
  };

  VideoSequence video;
  video.fps = c.fps;
  video.frames.reserve(c.n_frames);
  video.labels = LabelTrack(c.n_frames);

  std::uint32_t x = x_start;
  std::uint32_t x_second = (x_start + c.width / 2) % c.width;
  const std::int64_t sensor = c.sensor_noise_amp;
  // The second object appears abruptly but fades out over its last frames, so
  // the (normal) frame after the span is not as large a change as the entry.
  const std::size_t fade = second_object ? std::min<std::size_t>((c.anomaly->length - 1) / 2, 8) : 0;
  auto second_luma = [&](std::size_t i) {
    const std::size_t end = c.anomaly->start + c.anomaly->length;
    if (i + fade < end) return kObjectLuma;
    const std::size_t k = i + fade + 1 - end;  // 1..fade
    return static_cast<std::uint8_t>(kBackgroundLuma + (kObjectLuma - kBackgroundLuma) * (fade + 1 - k) / (fade + 1));
  };
  for (std::size_t i = 0; i < c.n_frames; ++i) {
    const bool anomalous = in_anomaly(i);
    if (i > 0) {
      std::uint32_t v = c.normal_velocity;
      if (anomalous && c.anomaly->kind == AnomalyKind::FastMotion) v = c.anomaly->velocity;
      x = static_cast<std::uint32_t>((std::uint64_t{x} + v) % c.width);
      if (anomalous && second_object && i > c.anomaly->start) {
        x_second = static_cast<std::uint32_t>((std::uint64_t{x_second} + c.width - c.normal_velocity % c.width) % c.width);
      }
    }

    Frame frame = background;
    draw_square(frame, x, lane0, c.object_size);
    if (anomalous && second_object) draw_square(frame, x_second, lane1, c.object_size, second_luma(i));
    if (sensor > 0) {
      for (auto& p : frame.pixels()) p = clamp_luma(std::int64_t{p} + rng.between(-sensor, sensor));
    }
    video.frames.push_back(std::move(frame));
    if (anomalous) video.labels.set(i, true);
  }
  return video;
}

}  // namespace vidattack::synth
