#include "vidattack/netsim.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include <json.hpp>

#include "vidattack/error.hpp"
#include "vidattack/format.hpp"
#include "vidattack/random.hpp"

namespace vidattack::netsim {

using effects::EffectTag;
using json = nlohmann::ordered_json;
using u128 = vidattack::uint128;

namespace {

// Payload accounting is exact: one byte costs fps.num credits and one tick of
// a bytes_per_sec link grants bytes_per_sec * fps.den credits.
struct QueuedFrame {
  std::size_t src = 0;
  Resolution resolution{};
  u128 cost = 0;
  u128 sent = 0;
};

std::uint64_t bandwidth_at(const SimConfig& c, std::size_t tick) {
  std::uint64_t bw = 0;
  for (const auto& step : c.bandwidth_schedule) {
    if (step.from_tick > tick) break;
    bw = step.bytes_per_sec;
  }
  return bw;
}

bool link_up_at(const SimConfig& c, std::size_t tick) {
  for (const auto& d : c.deauth_events) {
    if (tick >= d.start_tick && tick < d.start_tick + d.duration_ticks) return false;
  }
  return true;
}

std::string to_string(DropPolicy p) { return p == DropPolicy::DropOldest ? "DropOldest" : "DropNewest"; }

}  // namespace

std::size_t default_buffer_capacity(Rational fps) {
  return static_cast<std::size_t>((10ull * fps.num + fps.den - 1) / fps.den);
}

void validate(const SimConfig& c, std::size_t n_ticks) {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::InvalidConfig, msg); };
  if (c.fps.num == 0 || c.fps.den == 0) fail("fps must be positive");
  if (c.frame_bytes_full == 0) fail("frame_bytes_full must be positive");
  if (c.lowres_divisor < 1) fail("lowres_divisor must be >= 1");
  if (c.fast_playout_cap < 1) fail("fast_playout_cap must be >= 1");
  if (c.buffer_capacity && *c.buffer_capacity == 0) fail("buffer_capacity must be >= 1");
  if (c.bandwidth_schedule.empty() || c.bandwidth_schedule.front().from_tick != 0) {
    fail("bandwidth_schedule must start at from_tick 0");
  }
  for (std::size_t i = 1; i < c.bandwidth_schedule.size(); ++i) {
    if (c.bandwidth_schedule[i].from_tick <= c.bandwidth_schedule[i - 1].from_tick) {
      fail("bandwidth_schedule from_tick values must increase");
    }
  }
  for (const auto& d : c.deauth_events) {
    if (d.duration_ticks == 0) fail("deauth event duration must be >= 1");
    if (d.start_tick >= n_ticks || d.duration_ticks > n_ticks - d.start_tick) {
      fail("deauth event [" + std::to_string(d.start_tick) + ", " + std::to_string(d.start_tick + d.duration_ticks) +
           ") exceeds the " + std::to_string(n_ticks) + "-tick horizon");
    }
  }
}

std::pair<effects::DisplayTrace, SimEventLog> simulate(const SimConfig& c, std::size_t n_ticks) {
  validate(c, n_ticks);
  const std::size_t capacity = c.buffer_capacity.value_or(std::numeric_limits<std::size_t>::max());
  const u128 full_cost = u128{c.frame_bytes_full} * c.fps.num;
  const std::uint64_t low_bytes =
      std::max<std::uint64_t>(1, c.frame_bytes_full / (std::uint64_t{c.lowres_divisor} * c.lowres_divisor));
  const u128 low_cost = u128{low_bytes} * c.fps.num;

  std::deque<QueuedFrame> send;
  std::deque<QueuedFrame> arrived;
  bool low_mode = false;
  std::size_t shown = 0;
  Resolution shown_res = Resolution::full();
  EffectTag prev_tag = EffectTag::Clean;

  std::vector<effects::TraceEntry> entries;
  entries.reserve(n_ticks);
  SimEventLog log;
  log.records.reserve(n_ticks);

  for (std::size_t tick = 0; tick < n_ticks; ++tick) {
    // camera: pick resolution from the backlog left by the previous tick
    if (c.adapt_threshold) {
      const std::size_t theta = *c.adapt_threshold;
      if (!low_mode && send.size() > theta) {
        low_mode = true;
      } else if (low_mode && 2 * send.size() <= theta) {
        low_mode = false;
      }
    }
    const Resolution cam_res = low_mode ? Resolution::low(c.lowres_divisor) : Resolution::full();
    QueuedFrame captured{tick, cam_res, low_mode ? low_cost : full_cost, 0};
    if (send.size() >= capacity) {
      if (c.drop_policy == DropPolicy::DropOldest) {
        send.pop_front();
        send.push_back(captured);
      }
    } else {
      send.push_back(captured);
    }

    // channel
    const bool up = link_up_at(c, tick);
    const std::uint64_t bw = up ? bandwidth_at(c, tick) : 0;
    u128 credit = u128{bw} * c.fps.den;
    while (!send.empty() && credit > 0) {
      auto& head = send.front();
      const u128 need = head.cost - head.sent;
      if (credit >= need) {
        credit -= need;
        arrived.push_back(head);
        send.pop_front();
      } else {
        head.sent += credit;
        credit = 0;
      }
    }

    // receiver
    const std::size_t popped = std::min<std::size_t>(arrived.size(), c.fast_playout_cap);
    for (std::size_t i = 0; i < popped; ++i) {
      shown = arrived.front().src;
      shown_res = arrived.front().resolution;
      arrived.pop_front();
    }

    EffectTag tag;
    if (popped > 1) {
      tag = EffectTag::Fast;
    } else if (popped == 1) {
      tag = shown == tick ? EffectTag::Clean : EffectTag::Slow;
    } else if (!up || prev_tag == EffectTag::Freeze || send.empty()) {
      tag = EffectTag::Freeze;
    } else {
      tag = EffectTag::Slow;
    }
    prev_tag = tag;
    if (tag == EffectTag::Clean && shown_res.is_low()) tag = EffectTag::LowRes;

    entries.push_back({shown, shown_res, tag});
    log.records.push_back({tick, up, static_cast<double>(bw) * c.fps.den / c.fps.num, send.size(), cam_res, shown,
                           tag});
  }
  return {effects::DisplayTrace(std::move(entries)), std::move(log)};
}

std::vector<EffectSpan> trace_to_effects_summary(const SimEventLog& log) {
  std::vector<EffectSpan> spans;
  const auto& r = log.records;
  for (std::size_t i = 0; i < r.size();) {
    std::size_t j = i;
    while (j < r.size() && r[j].display_tag == r[i].display_tag) ++j;
    if (r[i].display_tag != EffectTag::Clean) spans.push_back({r[i].display_tag, {i, j}});
    i = j;
  }
  return spans;
}

SimConfig parse_config(const std::string& json_text, std::optional<Rational> fallback_fps) {
  static const std::set<std::string> known = {"fps",           "frame_bytes_full", "lowres_divisor",
                                              "bandwidth_schedule", "deauth_events", "buffer_capacity",
                                              "drop_policy",   "adapt_threshold",  "fast_playout_cap"};
  SimConfig c;
  try {
    const json doc = json::parse(json_text);
    if (!doc.is_object()) throw Error(ErrorKind::InvalidConfig, "SimConfig must be a JSON object");
    for (const auto& [key, _] : doc.items()) {
      if (!known.count(key)) throw Error(ErrorKind::InvalidConfig, "unknown SimConfig field '" + key + "'");
    }
    if (auto it = doc.find("fps"); it != doc.end()) {
      c.fps = it->is_string() ? parse_rational(it->get<std::string>()) : Rational{it->get<std::uint32_t>(), 1};
    } else if (fallback_fps) {
      c.fps = *fallback_fps;
    } else {
      throw Error(ErrorKind::InvalidConfig, "SimConfig lacks fps");
    }
    c.frame_bytes_full = doc.value("frame_bytes_full", c.frame_bytes_full);
    c.lowres_divisor = doc.value("lowres_divisor", c.lowres_divisor);
    c.fast_playout_cap = doc.value("fast_playout_cap", c.fast_playout_cap);
    for (const auto& s : doc.at("bandwidth_schedule")) {
      c.bandwidth_schedule.push_back({s.at("from_tick").get<std::size_t>(), s.at("bytes_per_sec").get<std::uint64_t>()});
    }
    if (auto it = doc.find("deauth_events"); it != doc.end()) {
      for (const auto& d : *it) {
        c.deauth_events.push_back({d.at("start_tick").get<std::size_t>(), d.at("duration_ticks").get<std::size_t>()});
      }
    }
    if (auto it = doc.find("buffer_capacity"); it != doc.end()) {
      if (!it->is_null()) c.buffer_capacity = it->get<std::size_t>();
    } else {
      c.buffer_capacity = default_buffer_capacity(c.fps);
    }
    if (auto it = doc.find("adapt_threshold"); it != doc.end() && !it->is_null()) {
      c.adapt_threshold = it->get<std::size_t>();
    }
    if (auto it = doc.find("drop_policy"); it != doc.end()) {
      const auto p = it->get<std::string>();
      if (p == "DropOldest") {
        c.drop_policy = DropPolicy::DropOldest;
      } else if (p == "DropNewest") {
        c.drop_policy = DropPolicy::DropNewest;
      } else {
        throw Error(ErrorKind::InvalidConfig, "drop_policy must be DropOldest or DropNewest");
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidConfig) throw;
    throw Error(ErrorKind::InvalidConfig, e.what());
  }
  return c;
}

std::string config_to_json(const SimConfig& c) {
  json doc;
  doc["fps"] = vidattack::to_string(c.fps);
  doc["frame_bytes_full"] = c.frame_bytes_full;
  doc["lowres_divisor"] = c.lowres_divisor;
  doc["bandwidth_schedule"] = json::array();
  for (const auto& s : c.bandwidth_schedule) {
    doc["bandwidth_schedule"].push_back({{"from_tick", s.from_tick}, {"bytes_per_sec", s.bytes_per_sec}});
  }
  doc["deauth_events"] = json::array();
  for (const auto& d : c.deauth_events) {
    doc["deauth_events"].push_back({{"start_tick", d.start_tick}, {"duration_ticks", d.duration_ticks}});
  }
  doc["buffer_capacity"] = c.buffer_capacity ? json(*c.buffer_capacity) : json(nullptr);
  doc["drop_policy"] = to_string(c.drop_policy);
  doc["adapt_threshold"] = c.adapt_threshold ? json(*c.adapt_threshold) : json(nullptr);
  doc["fast_playout_cap"] = c.fast_playout_cap;
  return doc.dump(2) + "\n";
}

std::string log_to_csv(const SimEventLog& log) {
  std::string out = "tick,link_up,bytes_granted,backlog,cam_res,src,tag\n";
  for (const auto& r : log.records) {
    out += std::to_string(r.tick) + "," + (r.link_up ? "1" : "0") + "," + format_double(r.bytes_granted) + "," +
           std::to_string(r.backlog_frames) + "," + vidattack::to_string(r.camera_resolution) + "," +
           std::to_string(r.displayed_src) + "," + effects::to_string(r.display_tag) + "\n";
  }
  return out;
}

}  // namespace vidattack::netsim
