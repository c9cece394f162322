#include <doctest.h>

#include <algorithm>
#include <random>

#include "vidattack/effects.hpp"
#include "vidattack/error.hpp"
#include "vidattack/netsim.hpp"

using namespace vidattack;
using namespace vidattack::netsim;
using effects::EffectTag;

namespace {

SimConfig ample(std::uint32_t fps = 10) {
  SimConfig c;
  c.fps = {fps, 1};
  c.frame_bytes_full = 1000;
  c.bandwidth_schedule = {{0, 1000ull * fps * 100}};
  return c;
}

std::size_t count_tag(const effects::DisplayTrace& t, EffectTag tag) {
  std::size_t n = 0;
  for (const auto& e : t) n += e.tag == tag;
  return n;
}

SimConfig random_config(std::mt19937_64& rng, std::size_t n) {
  SimConfig c;
  c.fps = {static_cast<std::uint32_t>(5 + rng() % 26), static_cast<std::uint32_t>(1 + rng() % 2)};
  c.frame_bytes_full = 100 + rng() % 5000;
  c.lowres_divisor = static_cast<std::uint32_t>(1 + rng() % 4);
  const double need = static_cast<double>(c.frame_bytes_full) * c.fps.value();
  std::size_t tick = 0;
  while (tick < n) {
    c.bandwidth_schedule.push_back({tick, static_cast<std::uint64_t>(need * (0.2 + 2.0 * (rng() % 1000) / 1000.0))});
    tick += 1 + rng() % (n / 2);
  }
  for (int k = static_cast<int>(rng() % 3); k > 0; --k) {
    const std::size_t s = rng() % (n - 1);
    c.deauth_events.push_back({s, 1 + rng() % std::min<std::size_t>(30, n - s)});
  }
  if (rng() % 2) c.buffer_capacity = 1 + rng() % 60;
  c.drop_policy = rng() % 2 ? DropPolicy::DropOldest : DropPolicy::DropNewest;
  if (rng() % 2) c.adapt_threshold = 1 + rng() % 20;
  c.fast_playout_cap = static_cast<std::uint32_t>(1 + rng() % 4);
  return c;
}

}  // namespace

TEST_CASE("unconstrained channel gives the identity trace") {
  auto [trace, log] = simulate(ample(25), 200);
  CHECK(trace.sources() == effects::DisplayTrace::identity(200).sources());
  CHECK(count_tag(trace, EffectTag::Clean) == 200);
  CHECK(trace_to_effects_summary(log).empty());

  // exactly R * frame_bytes is still enough
  auto c = ample(25);
  c.bandwidth_schedule = {{0, 25 * 1000}};
  CHECK(count_tag(simulate(c, 100).first, EffectTag::Clean) == 100);
}

TEST_CASE("hand-run: 20-tick deauth with f_max 2") {
  auto c = ample(10);
  c.deauth_events = {{30, 20}};
  auto [trace, log] = simulate(c, 120);
  // ticks 30..49 hold source 29; at 50 the 21 buffered frames arrive at once and
  // drain two per tick while one new frame arrives, which takes 20 ticks
  for (std::size_t t = 30; t < 50; ++t) CHECK(trace[t] == effects::TraceEntry{29, Resolution::full(), EffectTag::Freeze});
  for (std::size_t t = 50; t < 70; ++t) {
    CHECK(trace[t].tag == EffectTag::Fast);
    CHECK(trace[t].src_index == 31 + 2 * (t - 50));
  }
  CHECK(trace[69].src_index == 69);
  for (std::size_t t = 70; t < 120; ++t) CHECK(trace[t].src_index == t);
  CHECK(trace_to_effects_summary(log) ==
        std::vector<EffectSpan>{{EffectTag::Freeze, {30, 50}}, {EffectTag::Fast, {50, 70}}});
  for (const auto& r : log.records) CHECK(r.link_up == !(r.tick >= 30 && r.tick < 50));
  CHECK(log.records[40].bytes_granted == 0.0);
  CHECK(log.records[49].backlog_frames == 20);
}

TEST_CASE("emergence agrees with the recipe for any outage length") {
  for (std::size_t L = 1; L <= 60; ++L) {
    auto c = ample(25);
    c.deauth_events = {{40, L}};
    auto [trace, log] = simulate(c, 300);
    auto spans = trace_to_effects_summary(log);
    REQUIRE(spans.size() == 2);
    CHECK(spans[0].tag == EffectTag::Freeze);
    CHECK(spans[1].tag == EffectTag::Fast);
    const auto freeze = static_cast<long>(spans[0].span.length());
    CHECK(std::abs(freeze - static_cast<long>(L)) <= 1);
    CHECK(spans[1].span.begin == spans[0].span.end);
    CHECK(trace[spans[1].span.end - 1].src_index == spans[1].span.end - 1);

    // the scripted attack passes through the same qualitative phases (after its slow lead-in)
    auto recipe = effects::build_sff_trace(300, 40, 3 * L + 3, 2);
    std::vector<EffectTag> phases;
    for (const auto& r : effects::tag_runs(recipe)) phases.push_back(r.tag);
    CHECK(phases == std::vector<EffectTag>{EffectTag::Clean, EffectTag::Slow, EffectTag::Freeze, EffectTag::Fast,
                                           EffectTag::Clean});
  }
}

TEST_CASE("half bandwidth gives an emergent slow factor of two") {
  auto c = ample(10);
  c.bandwidth_schedule = {{0, 10 * 1000 / 2}};
  c.buffer_capacity.reset();
  auto [trace, log] = simulate(c, 100);
  for (std::size_t t = 0; t < 100; ++t) CHECK(trace[t].src_index == (t == 0 ? 0 : (t - 1) / 2));
  CHECK(trace_to_effects_summary(log) == std::vector<EffectSpan>{{EffectTag::Slow, {0, 100}}});
}

TEST_CASE("hysteresis on camera resolution") {
  auto c = ample(10);
  c.bandwidth_schedule = {{0, 100000}, {20, 1000}, {60, 100000}};
  c.adapt_threshold = 6;
  c.lowres_divisor = 4;
  auto [trace, log] = simulate(c, 120);
  const auto& r = log.records;
  bool low = false;
  for (std::size_t t = 1; t < r.size(); ++t) {
    const std::size_t prev = r[t - 1].backlog_frames;
    if (!low && prev > 6) low = true;
    else if (low && 2 * prev <= 6) low = false;
    CHECK(r[t].camera_resolution.is_low() == low);
  }
  CHECK(std::any_of(r.begin(), r.end(), [](const TickRecord& x) { return x.camera_resolution.is_low(); }));
  CHECK(std::any_of(trace.begin(), trace.end(), [](const effects::TraceEntry& e) { return e.resolution.is_low(); }));
  for (std::size_t t = 0; t < trace.size(); ++t) {
    if (trace[t].tag == EffectTag::LowRes) CHECK((trace[t].resolution.is_low() && trace[t].src_index == t));
  }
  CHECK(trace[119].tag == EffectTag::Clean);
}

TEST_CASE("buffer capacity and drop policies") {
  auto c = ample(10);
  c.deauth_events = {{10, 30}};
  c.buffer_capacity = 5;
  c.drop_policy = DropPolicy::DropOldest;
  auto [oldest, l1] = simulate(c, 80);
  // only the newest five frames survive the outage
  CHECK(oldest[40].src_index == 37);
  c.drop_policy = DropPolicy::DropNewest;
  auto [newest, l2] = simulate(c, 80);
  CHECK(newest[40].src_index == 11);
  for (const auto& r : l2.records) CHECK(r.backlog_frames <= 5);
  CHECK(default_buffer_capacity({30000, 1001}) == 300);
  CHECK(default_buffer_capacity({25, 1}) == 250);
}

TEST_CASE("property: causality, conservation and determinism") {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 20 + rng() % 300;
    auto c = random_config(rng, n);
    auto [trace, log] = simulate(c, n);
    REQUIRE(trace.size() == n);
    CHECK_NOTHROW(trace.validate());
    for (std::size_t t = 0; t < n; ++t) CHECK(trace[t].src_index <= t);
    for (std::size_t t = 1; t < n; ++t) {
      const std::size_t jump = trace[t].src_index - trace[t - 1].src_index;
      if (!c.buffer_capacity) {
        // nothing is lost: skipped frames are only those superseded within one capped multi-pop
        CHECK(jump <= c.fast_playout_cap);
        if (jump > 1) CHECK(trace[t].tag == EffectTag::Fast);
      }
    }
    auto again = simulate(c, n);
    CHECK(again.first == trace);
    CHECK(log_to_csv(again.second) == log_to_csv(log));
  }
}

// Holds for the bare channel. Resolution adaptation and stale-frame dropping both
// trade quality or completeness for latency, and can turn a starved link live again.
TEST_CASE("property: lowering bandwidth never adds Clean ticks") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 20 + rng() % 200;
    auto c = random_config(rng, n);
    c.buffer_capacity.reset();
    c.adapt_threshold.reset();
    auto lower = c;
    for (auto& s : lower.bandwidth_schedule) {
      if (rng() % 2) s.bytes_per_sec = s.bytes_per_sec * (rng() % 100) / 100;
    }
    CAPTURE(trial);
    CHECK(count_tag(simulate(lower, n).first, EffectTag::Clean) <= count_tag(simulate(c, n).first, EffectTag::Clean));
  }
}

TEST_CASE("config validation and JSON") {
  auto c = ample(10);
  c.deauth_events = {{90, 20}};
  CHECK_THROWS_AS(simulate(c, 100), Error);
  auto bad = ample(10);
  bad.bandwidth_schedule = {{5, 100}};
  CHECK_THROWS_AS(simulate(bad, 100), Error);
  bad = ample(10);
  bad.fast_playout_cap = 0;
  CHECK_THROWS_AS(simulate(bad, 100), Error);

  auto parsed = parse_config(R"({"fps": "30000/1001", "frame_bytes_full": 5000,
      "bandwidth_schedule": [{"from_tick": 0, "bytes_per_sec": 200000}, {"from_tick": 50, "bytes_per_sec": 1000}],
      "deauth_events": [{"start_tick": 10, "duration_ticks": 5}], "adapt_threshold": null, "drop_policy": "DropNewest"})");
  CHECK(parsed.fps == Rational{30000, 1001});
  CHECK(parsed.buffer_capacity == std::optional<std::size_t>{300});
  CHECK_FALSE(parsed.adapt_threshold);
  CHECK(parsed.drop_policy == DropPolicy::DropNewest);
  CHECK(parsed.bandwidth_schedule.size() == 2);
  auto round = parse_config(config_to_json(parsed));
  CHECK(config_to_json(round) == config_to_json(parsed));

  CHECK(parse_config(R"({"bandwidth_schedule": [{"from_tick": 0, "bytes_per_sec": 1}], "buffer_capacity": null})",
                     Rational{12, 1})
            .fps == Rational{12, 1});
  auto kind = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::InvalidArgument;
  };
  CHECK(kind(R"({"bandwidth_schedule": []})") == ErrorKind::InvalidConfig);
  CHECK(kind(R"({"fps": 10, "bandwidth_schedule": [], "bogus": 1})") == ErrorKind::InvalidConfig);
  CHECK(kind(R"({"fps": 10})") == ErrorKind::InvalidConfig);
  CHECK(kind("[1, 2]") == ErrorKind::InvalidConfig);
  CHECK(kind(R"({"fps": 10, "bandwidth_schedule": [], "drop_policy": "Random"})") == ErrorKind::InvalidConfig);
}

TEST_CASE("event log CSV") {
  auto c = ample(10);
  c.deauth_events = {{1, 1}};
  auto csv = log_to_csv(simulate(c, 3).second);
  CHECK(csv == "tick,link_up,bytes_granted,backlog,cam_res,src,tag\n"
               "0,1,100000,0,Full,0,Clean\n"
               "1,0,0,1,Full,0,Freeze\n"
               "2,1,100000,0,Full,2,Fast\n");
}
