#pragma once

#include <cstdint>
#include <optional>

#include "vidattack/frame.hpp"

namespace vidattack::synth {

enum class AnomalyKind {
  FastMotion,  // the object speeds up to `velocity` px/frame
  Appearance,  // a second object crosses a second lane in the opposite direction
};

struct Anomaly {
  std::size_t start = 0;
  std::size_t length = 0;
  AnomalyKind kind = AnomalyKind::FastMotion;
  std::uint32_t velocity = 4;  // FastMotion only
};

/// Scene: a static textured background with one horizontal lane of plain
/// road, and a bright square moving along the lane with toroidal wrap.
struct SynthConfig {
  std::uint64_t seed = 0;
  std::size_t n_frames = 400;
  std::uint32_t width = 64;
  std::uint32_t height = 64;
  Rational fps{25, 1};
  std::uint32_t background_noise_amp = 24;  // static texture, +/- luma units
  std::uint32_t sensor_noise_amp = 0;       // fresh per frame, +/- luma units
  std::uint32_t object_size = 8;
  std::uint32_t normal_velocity = 1;
  std::optional<Anomaly> anomaly;
};

inline constexpr std::uint8_t kBackgroundLuma = 96;
inline constexpr std::uint8_t kObjectLuma = 224;

/// Throws InvalidConfig on an inconsistent config.
void validate(const SynthConfig& config);

/// Deterministic in `config`: the same config yields bit-identical frames on
/// every platform. Labels are 1 exactly on the anomaly span.
VideoSequence generate(const SynthConfig& config);

}  // namespace vidattack::synth
