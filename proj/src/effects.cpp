#include "vidattack/effects.hpp"

#include <sstream>

#include "vidattack/error.hpp"
#include "vidattack/random.hpp"

namespace vidattack::effects {

namespace {

constexpr std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

void check_span(std::size_t n, std::size_t onset, std::size_t duration) {
  if (onset > n || duration > n - onset) {
    throw Error(ErrorKind::SpanOutOfRange, "attack [" + std::to_string(onset) + ", " +
                                               std::to_string(onset + duration) + ") does not fit " +
                                               std::to_string(n) + " frames");
  }
}

void check_factor(std::uint32_t f, const char* what) {
  if (f < 1) throw Error(ErrorKind::InvalidArgument, std::string(what) + " must be >= 1");
}

// Writes slow / freeze / fast segments starting at tick `onset`. The fast
// segment drains the backlog left by the slow and freeze segments so that the
// tick after it is live again.
void write_slow_freeze_fast(std::vector<TraceEntry>& out, std::size_t onset, SffSegments seg, std::uint32_t f) {
  const std::size_t consumed = ceil_div(seg.slow, f);
  for (std::size_t j = 0; j < seg.slow; ++j) out[onset + j] = {onset + j / f, Resolution::full(), EffectTag::Slow};

  const std::size_t held = consumed > 0 ? onset + consumed - 1 : (onset > 0 ? onset - 1 : 0);
  for (std::size_t j = 0; j < seg.freeze; ++j) out[onset + seg.slow + j] = {held, Resolution::full(), EffectTag::Freeze};

  const std::size_t total = seg.slow + seg.freeze + seg.fast;
  const std::size_t backlog = total - consumed;
  for (std::size_t j = 0; j < seg.fast; ++j) {
    const std::size_t src = onset + consumed + ceil_div((j + 1) * backlog, seg.fast) - 1;
    out[onset + seg.slow + seg.freeze + j] = {src, Resolution::full(), EffectTag::Fast};
  }
}

}  // namespace

std::string to_string(EffectTag tag) {
  switch (tag) {
    case EffectTag::Clean: return "Clean";
    case EffectTag::Slow: return "Slow";
    case EffectTag::Freeze: return "Freeze";
    case EffectTag::Fast: return "Fast";
    case EffectTag::LowRes: return "LowRes";
    case EffectTag::Replicated: return "Replicated";
  }
  return "Clean";
}

EffectTag parse_tag(const std::string& text) {
  for (auto t : {EffectTag::Clean, EffectTag::Slow, EffectTag::Freeze, EffectTag::Fast, EffectTag::LowRes,
                 EffectTag::Replicated}) {
    if (to_string(t) == text) return t;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown effect tag '" + text + "'");
}

DisplayTrace DisplayTrace::identity(std::size_t n) {
  std::vector<TraceEntry> e(n);
  for (std::size_t i = 0; i < n; ++i) e[i].src_index = i;
  return DisplayTrace(std::move(e));
}

std::vector<std::size_t> DisplayTrace::sources() const {
  std::vector<std::size_t> s;
  s.reserve(entries_.size());
  for (const auto& e : entries_) s.push_back(e.src_index);
  return s;
}

void DisplayTrace::validate() const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].src_index >= entries_.size()) {
      throw Error(ErrorKind::TraceMismatch, "tick " + std::to_string(i) + " references source " +
                                                std::to_string(entries_[i].src_index) + " of " +
                                                std::to_string(entries_.size()));
    }
    if (i > 0 && entries_[i].src_index < entries_[i - 1].src_index) {
      throw Error(ErrorKind::TraceMismatch, "src_index decreases at tick " + std::to_string(i));
    }
  }
}

std::vector<TagRun> tag_runs(const DisplayTrace& trace) {
  std::vector<TagRun> runs;
  for (std::size_t i = 0; i < trace.size();) {
    std::size_t j = i;
    while (j < trace.size() && trace[j].tag == trace[i].tag) ++j;
    runs.push_back({trace[i].tag, {i, j}});
    i = j;
  }
  return runs;
}

std::string trace_to_csv(const DisplayTrace& trace) {
  std::string out = "tick,src_index,resolution,tag\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& e = trace[i];
    out += std::to_string(i) + "," + std::to_string(e.src_index) + "," + vidattack::to_string(e.resolution) + "," +
           to_string(e.tag) + "\n";
  }
  return out;
}

DisplayTrace trace_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || (line != "tick,src_index,resolution,tag" && line != "tick,src_index,resolution,tag\r")) {
    throw Error(ErrorKind::TraceMismatch, "trace CSV must start with header tick,src_index,resolution,tag");
  }
  std::vector<TraceEntry> entries;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream row(line);
    for (std::string c; std::getline(row, c, ',');) cols.push_back(c);
    if (cols.size() != 4) throw Error(ErrorKind::TraceMismatch, "bad trace row: " + line);
    try {
      if (std::stoull(cols[0]) != entries.size()) throw Error(ErrorKind::TraceMismatch, "ticks must be 0..N-1 in order");
      entries.push_back({static_cast<std::size_t>(std::stoull(cols[1])), parse_resolution(cols[2]), parse_tag(cols[3])});
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::TraceMismatch, "bad trace row: " + line);
    }
  }
  DisplayTrace trace(std::move(entries));
  trace.validate();
  return trace;
}

SffSegments sff_segments(std::size_t duration) {
  // round half up: round(D/3) = floor((2D + 3) / 6), round(D/6) = floor((D + 3) / 6)
  SffSegments s;
  s.slow = (2 * duration + 3) / 6;
  s.freeze = (duration + 3) / 6;
  s.fast = duration - s.slow - s.freeze;
  return s;
}

DisplayTrace build_sff_trace(std::size_t n, std::size_t onset, std::size_t duration, std::uint32_t slow_factor) {
  check_span(n, onset, duration);
  check_factor(slow_factor, "slow factor");
  auto trace = DisplayTrace::identity(n);
  std::vector<TraceEntry> e = trace.entries();
  if (duration > 0) write_slow_freeze_fast(e, onset, sff_segments(duration), slow_factor);
  return DisplayTrace(std::move(e));
}

DisplayTrace build_lowres_trace(std::size_t n, std::size_t onset, std::size_t duration, std::uint32_t factor) {
  check_span(n, onset, duration);
  check_factor(factor, "low-resolution factor");
  auto trace = DisplayTrace::identity(n);
  const auto res = Resolution::low(factor);
  for (std::size_t i = onset; i < onset + duration; ++i) {
    trace[i].resolution = res;
    trace[i].tag = res.is_low() ? EffectTag::LowRes : EffectTag::Clean;
  }
  return trace;
}

DisplayTrace build_combined_trace(std::size_t n, std::size_t onset, std::size_t duration, std::uint32_t slow_factor,
                                  std::uint32_t lowres_factor) {
  check_factor(lowres_factor, "low-resolution factor");
  auto trace = build_sff_trace(n, onset, duration, slow_factor);
  for (std::size_t i = onset; i < onset + duration; ++i) trace[i].resolution = Resolution::low(lowres_factor);
  return trace;
}

DisplayTrace build_replicate_trace(std::size_t n, std::size_t k, std::size_t period) {
  if (period < 2) throw Error(ErrorKind::InvalidK, "period must be >= 2");
  if (k >= period) throw Error(ErrorKind::InvalidK, "k must be < period");
  auto trace = DisplayTrace::identity(n);
  if (k == 0) return trace;
  for (std::size_t block = 0; block < n; block += period) {
    const std::size_t kept = period - k;
    if (n - block < kept) break;
    const std::size_t held = block + kept - 1;
    for (std::size_t i = block + kept; i < std::min(n, block + period); ++i) {
      trace[i].src_index = held;
      trace[i].tag = EffectTag::Replicated;
    }
  }
  return trace;
}

DisplayTrace build_extended_freeze_trace(std::size_t n, Span anomaly, std::size_t slow_len, std::uint32_t slow_factor) {
  check_factor(slow_factor, "slow factor");
  if (anomaly.end <= anomaly.begin) throw Error(ErrorKind::SpanOutOfRange, "anomaly span is empty");
  if (3 * slow_len < anomaly.length()) {
    throw Error(ErrorKind::AnomalyTooLong, "freeze of " + std::to_string(3 * slow_len) + " ticks cannot cover an anomaly of " +
                                               std::to_string(anomaly.length()));
  }
  if (anomaly.begin < slow_len) {
    throw Error(ErrorKind::SpanOutOfRange, "no room for a " + std::to_string(slow_len) + "-tick slow segment before " +
                                               std::to_string(anomaly.begin));
  }
  const std::size_t onset = anomaly.begin - slow_len;
  check_span(n, onset, 6 * slow_len);
  auto trace = DisplayTrace::identity(n);
  std::vector<TraceEntry> e = trace.entries();
  write_slow_freeze_fast(e, onset, {slow_len, 3 * slow_len, 2 * slow_len}, slow_factor);
  return DisplayTrace(std::move(e));
}

LabelTrack remap_labels(const LabelTrack& labels, const DisplayTrace& trace, LabelMode mode) {
  if (labels.size() != trace.size()) {
    throw Error(ErrorKind::LengthMismatch, std::to_string(labels.size()) + " labels for a trace of " +
                                               std::to_string(trace.size()));
  }
  if (mode == LabelMode::Realtime) return labels;
  std::vector<std::uint8_t> out(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) out[i] = labels[trace[i].src_index];
  return LabelTrack(std::move(out));
}

Frame degrade_resolution(const Frame& frame, std::uint32_t factor) {
  check_factor(factor, "low-resolution factor");
  Frame out = frame;
  out.set_resolution(Resolution::low(factor));
  if (factor == 1) return out;
  const std::uint32_t w = frame.width(), h = frame.height();
  for (std::uint32_t by = 0; by < h; by += factor) {
    const std::uint32_t ey = std::min(h, by + factor);
    for (std::uint32_t bx = 0; bx < w; bx += factor) {
      const std::uint32_t ex = std::min(w, bx + factor);
      std::uint64_t sum = 0;
      for (std::uint32_t y = by; y < ey; ++y)
        for (std::uint32_t x = bx; x < ex; ++x) sum += frame.at(x, y);
      const std::uint64_t count = std::uint64_t{ey - by} * (ex - bx);
      const auto mean = static_cast<std::uint8_t>((2 * sum + count) / (2 * count));
      for (std::uint32_t y = by; y < ey; ++y)
        for (std::uint32_t x = bx; x < ex; ++x) out.at(x, y) = mean;
    }
  }
  return out;
}

VideoSequence apply_trace(const VideoSequence& video, const DisplayTrace& trace, LabelMode mode) {
  if (trace.size() != video.size()) {
    throw Error(ErrorKind::TraceMismatch, "trace has " + std::to_string(trace.size()) + " ticks, video has " +
                                              std::to_string(video.size()) + " frames");
  }
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace[i].src_index >= video.size()) {
      throw Error(ErrorKind::TraceMismatch, "tick " + std::to_string(i) + " references missing source " +
                                                std::to_string(trace[i].src_index));
    }
  }
  VideoSequence out;
  out.fps = video.fps;
  out.frames.reserve(video.size());
  for (const auto& e : trace) {
    const Frame& src = video.frames[e.src_index];
    out.frames.push_back(e.resolution.is_low() ? degrade_resolution(src, e.resolution.factor) : src);
  }
  out.labels = remap_labels(video.labels, trace, mode);
  return out;
}

std::string to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::SlowFreezeFast: return "sff";
    case AttackKind::LowResolution: return "lowres";
    case AttackKind::Combined: return "combined";
    case AttackKind::Replicate: return "replicate";
    case AttackKind::ExtendedFreeze: return "extfreeze";
  }
  return "sff";
}

AttackKind parse_attack_kind(const std::string& text) {
  for (auto k : {AttackKind::SlowFreezeFast, AttackKind::LowResolution, AttackKind::Combined, AttackKind::Replicate,
                 AttackKind::ExtendedFreeze}) {
    if (to_string(k) == text) return k;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown attack type '" + text + "'");
}

std::size_t resolve_onset(const AttackSpec& spec, std::size_t n) {
  if (spec.onset) return *spec.onset;
  if (spec.duration > n) {
    throw Error(ErrorKind::SpanOutOfRange, "duration " + std::to_string(spec.duration) + " exceeds " +
                                               std::to_string(n) + " frames");
  }
  SeededStream rng(spec.seed);
  return static_cast<std::size_t>(rng.below(n - spec.duration + 1));
}

DisplayTrace build_trace(const AttackSpec& spec, std::size_t n, const LabelTrack& labels) {
  switch (spec.kind) {
    case AttackKind::SlowFreezeFast:
      return build_sff_trace(n, resolve_onset(spec, n), spec.duration, spec.slow_factor);
    case AttackKind::LowResolution:
      return build_lowres_trace(n, resolve_onset(spec, n), spec.duration, spec.lowres_factor);
    case AttackKind::Combined:
      return build_combined_trace(n, resolve_onset(spec, n), spec.duration, spec.slow_factor, spec.lowres_factor);
    case AttackKind::Replicate:
      return build_replicate_trace(n, spec.k, spec.period);
    case AttackKind::ExtendedFreeze: {
      auto runs = positive_runs(labels);
      if (runs.empty()) throw Error(ErrorKind::NoAnomaly, "extended freeze needs an anomaly to cover");
      const std::size_t s = spec.slow_len > 0 ? spec.slow_len : ceil_div(runs.front().length(), 3);
      return build_extended_freeze_trace(n, runs.front(), s, spec.slow_factor);
    }
  }
  throw Error(ErrorKind::InvalidArgument, "unknown attack kind");
}

}  // namespace vidattack::effects
