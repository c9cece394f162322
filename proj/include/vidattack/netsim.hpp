#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vidattack/effects.hpp"

namespace vidattack::netsim {

struct BandwidthStep {
  std::size_t from_tick = 0;
  std::uint64_t bytes_per_sec = 0;
};

struct DeauthEvent {
  std::size_t start_tick = 0;
  std::size_t duration_ticks = 0;
};

enum class DropPolicy { DropOldest, DropNewest };

/// Camera -> send buffer -> channel -> receiver. Unset optionals mean
/// "unbounded" (buffer_capacity, adapt_threshold).
struct SimConfig {
  Rational fps{25, 1};
  std::uint64_t frame_bytes_full = 10000;
  std::uint32_t lowres_divisor = 4;
  std::vector<BandwidthStep> bandwidth_schedule;
  std::vector<DeauthEvent> deauth_events;
  std::optional<std::size_t> buffer_capacity;
  DropPolicy drop_policy = DropPolicy::DropOldest;
  std::optional<std::size_t> adapt_threshold;
  std::uint32_t fast_playout_cap = 2;
};

/// Default capacity: ten seconds of frames.
std::size_t default_buffer_capacity(Rational fps);

struct TickRecord {
  std::size_t tick = 0;
  bool link_up = true;
  double bytes_granted = 0.0;
  std::size_t backlog_frames = 0;
  Resolution camera_resolution{};
  std::size_t displayed_src = 0;
  effects::EffectTag display_tag = effects::EffectTag::Clean;
};

struct SimEventLog {
  std::vector<TickRecord> records;
};

/// Throws InvalidConfig. `n_ticks` bounds the deauth events.
void validate(const SimConfig& config, std::size_t n_ticks);

/// Runs the tick loop. Pure in (config, n_ticks).
std::pair<effects::DisplayTrace, SimEventLog> simulate(const SimConfig& config, std::size_t n_ticks);

struct EffectSpan {
  effects::EffectTag tag;
  Span span;
  bool operator==(const EffectSpan&) const = default;
};

/// Maximal runs of identical display tags, Clean runs omitted.
std::vector<EffectSpan> trace_to_effects_summary(const SimEventLog& log);

// JSON with the field names of SimConfig; bandwidth_schedule entries are
// {from_tick, bytes_per_sec}; deauth_events entries {start_tick, duration_ticks};
// buffer_capacity / adapt_threshold accept null for unbounded.
// A missing "fps" falls back to `fallback_fps`, or InvalidConfig without one.
SimConfig parse_config(const std::string& json_text, std::optional<Rational> fallback_fps = std::nullopt);
std::string config_to_json(const SimConfig& config);

// CSV `tick,link_up,bytes_granted,backlog,cam_res,src,tag`.
std::string log_to_csv(const SimEventLog& log);

}  // namespace vidattack::netsim
