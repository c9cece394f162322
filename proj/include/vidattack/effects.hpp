#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vidattack/frame.hpp"

namespace vidattack::effects {

enum class EffectTag { Clean, Slow, Freeze, Fast, LowRes, Replicated };

std::string to_string(EffectTag tag);
EffectTag parse_tag(const std::string& text);

struct TraceEntry {
  std::size_t src_index = 0;
  Resolution resolution{};
  EffectTag tag = EffectTag::Clean;
  bool operator==(const TraceEntry&) const = default;
};

/// Per-output-tick mapping onto source frames. Every attack in this module is
/// a DisplayTrace: the output has the same length as the input, src_index never
/// decreases, and ticks outside the attack are the identity.
class DisplayTrace {
 public:
  DisplayTrace() = default;
  explicit DisplayTrace(std::vector<TraceEntry> entries) : entries_(std::move(entries)) {}

  static DisplayTrace identity(std::size_t n);

  std::size_t size() const noexcept { return entries_.size(); }
  const TraceEntry& operator[](std::size_t i) const { return entries_[i]; }
  TraceEntry& operator[](std::size_t i) { return entries_[i]; }
  const std::vector<TraceEntry>& entries() const noexcept { return entries_; }
  std::vector<std::size_t> sources() const;

  /// Throws TraceMismatch if src_index decreases or runs out of [0, size).
  void validate() const;

  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }
  bool operator==(const DisplayTrace&) const = default;

 private:
  std::vector<TraceEntry> entries_;
};

/// Maximal runs of a single tag.
struct TagRun {
  EffectTag tag;
  Span span;
  bool operator==(const TagRun&) const = default;
};
std::vector<TagRun> tag_runs(const DisplayTrace& trace);

// CSV `tick,src_index,resolution,tag`.
std::string trace_to_csv(const DisplayTrace& trace);
DisplayTrace trace_from_csv(const std::string& text);

/// Output lengths of the slow / freeze / fast segments for an attack of
/// duration D: round(D/3), round(D/6) (half up), and the remainder.
struct SffSegments {
  std::size_t slow = 0;
  std::size_t freeze = 0;
  std::size_t fast = 0;
  bool operator==(const SffSegments&) const = default;
};
SffSegments sff_segments(std::size_t duration);

DisplayTrace build_sff_trace(std::size_t n, std::size_t onset, std::size_t duration, std::uint32_t slow_factor);
DisplayTrace build_lowres_trace(std::size_t n, std::size_t onset, std::size_t duration, std::uint32_t factor);
DisplayTrace build_combined_trace(std::size_t n, std::size_t onset, std::size_t duration, std::uint32_t slow_factor,
                                  std::uint32_t lowres_factor);
DisplayTrace build_replicate_trace(std::size_t n, std::size_t k, std::size_t period);

/// Slow for `slow_len` ticks, freeze for 3*slow_len, fast for 2*slow_len,
/// placed so the freeze starts exactly at the anomaly onset.
DisplayTrace build_extended_freeze_trace(std::size_t n, Span anomaly, std::size_t slow_len, std::uint32_t slow_factor);

enum class LabelMode { Realtime, Displayed };

LabelTrack remap_labels(const LabelTrack& labels, const DisplayTrace& trace, LabelMode mode);

/// Box-averages r x r blocks (edge blocks smaller) in place of every pixel,
/// rounding half away from zero. Dimensions are unchanged.
Frame degrade_resolution(const Frame& frame, std::uint32_t factor);

VideoSequence apply_trace(const VideoSequence& video, const DisplayTrace& trace,
                          LabelMode mode = LabelMode::Realtime);

enum class AttackKind { SlowFreezeFast, LowResolution, Combined, Replicate, ExtendedFreeze };

std::string to_string(AttackKind kind);
AttackKind parse_attack_kind(const std::string& text);

/// Full description of one attack. An unset onset is drawn uniformly from
/// [0, N - D] using `seed`.
struct AttackSpec {
  AttackKind kind = AttackKind::SlowFreezeFast;
  std::optional<std::size_t> onset;
  std::size_t duration = 0;
  std::uint32_t slow_factor = 2;
  std::uint32_t lowres_factor = 4;
  std::size_t k = 1;
  std::size_t period = 10;
  std::size_t slow_len = 0;  // ExtendedFreeze only
  std::uint64_t seed = 0;
};

/// Onset drawn for a video of n frames (the spec's onset, or the seeded draw).
std::size_t resolve_onset(const AttackSpec& spec, std::size_t n);

/// Builds the trace for `spec`. ExtendedFreeze needs the anomaly span, taken
/// from the first positive run of `labels`.
DisplayTrace build_trace(const AttackSpec& spec, std::size_t n, const LabelTrack& labels);

}  // namespace vidattack::effects
