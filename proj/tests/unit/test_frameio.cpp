#include <doctest.h>

#include <fstream>
#include <random>

#include "oracles.hpp"
#include "vidattack/error.hpp"
#include "vidattack/frameio.hpp"

using namespace vidattack;
namespace fs = std::filesystem;

namespace {

std::vector<std::byte> bytes_of(const std::string& s) {
  std::vector<std::byte> out;
  for (char c : s) out.push_back(static_cast<std::byte>(c));
  return out;
}

void put(const fs::path& p, const std::string& s) {
  std::ofstream f(p, std::ios::binary);
  f << s;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::InvalidArgument;
}

std::string raw(std::initializer_list<int> values) {
  std::string s;
  for (int v : values) s.push_back(static_cast<char>(v));
  return s;
}

}  // namespace

TEST_CASE("load_sequence reads hand-written P5 files byte for byte") {
  auto dir = oracle::scratch_dir("frameio_pgm");
  const std::string a = raw({0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 255});
  const std::string b = raw({200, 10, 0, 7, 7, 7, 7, 7, 128, 129, 130, 131, 1, 2, 3, 4});
  put(dir / "a.pgm", "P5\n4 4\n255\n" + a);
  put(dir / "b.pgm", "P5\n# written by hand\n4 4\n255\n" + b);
  put(dir / "manifest.json", R"({"fps": "25/1", "width": 4, "height": 4, "frames": ["a.pgm", "b.pgm"],
                                 "labels": null, "format": "PgmDir"})");

  auto v = frameio::load_sequence(dir / "manifest.json");
  REQUIRE(v.size() == 2);
  CHECK(v.width() == 4);
  CHECK(v.height() == 4);
  CHECK(v.fps == Rational{25, 1});
  for (std::size_t i = 0; i < 16; ++i) {
    CHECK(v.frames[0].pixels()[i] == static_cast<std::uint8_t>(a[i]));
    CHECK(v.frames[1].pixels()[i] == static_cast<std::uint8_t>(b[i]));
  }
  CHECK(v.labels == LabelTrack(2));
}

TEST_CASE("missing labels default to zeros; short labels are rejected") {
  auto dir = oracle::scratch_dir("frameio_labels");
  VideoSequence v;
  for (int i = 0; i < 5; ++i) v.frames.emplace_back(2, 2, static_cast<std::uint8_t>(i));
  v.labels = LabelTrack(5);
  frameio::save_sequence(v, dir, frameio::Format::PgmDir);

  put(dir / "manifest.json", R"({"fps": 25, "width": 2, "height": 2,
      "frames": {"pattern": "frame_%05d.pgm", "count": 5}, "format": "PgmDir"})");
  auto loaded = frameio::load_sequence(dir / "manifest.json");
  CHECK(loaded.labels == LabelTrack(std::vector<std::uint8_t>{0, 0, 0, 0, 0}));

  put(dir / "short.txt", "0\n1\n0\n1\n");
  put(dir / "manifest.json", R"({"fps": 25, "width": 2, "height": 2,
      "frames": {"pattern": "frame_%05d.pgm", "count": 5}, "labels": "short.txt", "format": "PgmDir"})");
  CHECK(kind_of([&] { frameio::load_sequence(dir / "manifest.json"); }) == ErrorKind::LabelLengthMismatch);
}

TEST_CASE("load_sequence error paths") {
  auto dir = oracle::scratch_dir("frameio_errors");
  put(dir / "a.pgm", "P5\n2 2\n255\n" + raw({1, 2, 3, 4}));
  put(dir / "b.pgm", "P5\n3 2\n255\n" + raw({1, 2, 3, 4, 5, 6}));

  put(dir / "m1.json", R"({"fps": 25, "width": 2, "height": 2, "frames": ["a.pgm", "gone.pgm"], "format": "PgmDir"})");
  CHECK(kind_of([&] { frameio::load_sequence(dir / "m1.json"); }) == ErrorKind::MissingFile);

  put(dir / "m2.json", R"({"fps": 25, "width": 2, "height": 2, "frames": ["a.pgm", "b.pgm"], "format": "PgmDir"})");
  CHECK(kind_of([&] { frameio::load_sequence(dir / "m2.json"); }) == ErrorKind::DimensionMismatch);

  put(dir / "m3.json", R"({"fps": 25, "width": 2, "frames": ["a.pgm", "a.pgm"], "format": "PgmDir"})");
  CHECK(kind_of([&] { frameio::load_sequence(dir / "m3.json"); }) == ErrorKind::MalformedManifest);

  put(dir / "m4.json", R"({"fps": 25, "width": 2, "height": 2, "frames": ["a.pgm"], "format": "PgmDir"})");
  CHECK(kind_of([&] { frameio::load_sequence(dir / "m4.json"); }) == ErrorKind::MalformedManifest);

  put(dir / "m5.json", "{not json");
  CHECK(kind_of([&] { frameio::load_sequence(dir / "m5.json"); }) == ErrorKind::MalformedManifest);

  CHECK(kind_of([&] { frameio::load_sequence(dir / "absent.json"); }) == ErrorKind::MissingFile);

  put(dir / "bad.txt", "0\n2\n");
  put(dir / "m6.json", R"({"fps": 25, "width": 2, "height": 2, "frames": ["a.pgm", "a.pgm"], "labels": "bad.txt",
                           "format": "PgmDir"})");
  CHECK(kind_of([&] { frameio::load_sequence(dir / "m6.json"); }) == ErrorKind::MalformedLabels);
}

TEST_CASE("Y4M writer emits the plain-text header and FRAME markers") {
  VideoSequence v;
  v.fps = {30000, 1001};
  v.frames.emplace_back(8, 8, std::uint8_t{1});
  v.frames.emplace_back(8, 8, std::uint8_t{2});
  v.labels = LabelTrack(2);
  auto bytes = frameio::encode_y4m(v);
  std::string text(reinterpret_cast<const char*>(bytes.data()), bytes.size());

  CHECK(text.rfind("YUV4MPEG2 W8 H8 ", 0) == 0);
  CHECK(text.substr(0, text.find('\n') + 1) == "YUV4MPEG2 W8 H8 F30000:1001 Ip A1:1 Cmono\n");
  std::size_t markers = 0;
  for (auto p = text.find("FRAME\n"); p != std::string::npos; p = text.find("FRAME\n", p + 1)) ++markers;
  CHECK(markers == 2);
  CHECK(bytes.size() == text.find('\n') + 1 + 2 * (6 + 64));
}

TEST_CASE("parse_y4m on hand-authored streams") {
  SUBCASE("mono 2x2, two frames") {
    auto s = bytes_of("YUV4MPEG2 W2 H2 F25:1 Ip A1:1 Cmono\nFRAME\n" + raw({0, 1, 2, 3}) + "FRAME\n" + raw({4, 5, 6, 7}));
    auto v = frameio::parse_y4m(s);
    REQUIRE(v.size() == 2);
    CHECK(std::vector<std::uint8_t>(v.frames[0].pixels().begin(), v.frames[0].pixels().end()) ==
          std::vector<std::uint8_t>{0, 1, 2, 3});
    CHECK(std::vector<std::uint8_t>(v.frames[1].pixels().begin(), v.frames[1].pixels().end()) ==
          std::vector<std::uint8_t>{4, 5, 6, 7});
    CHECK(v.fps == Rational{25, 1});
  }
  SUBCASE("4:2:0 keeps luma and drops chroma") {
    // 2x2 luma + 1 U + 1 V sample per frame
    auto s = bytes_of("YUV4MPEG2 W2 H2 F30000:1001 C420jpeg\nFRAME\n" + raw({9, 8, 7, 6, 100, 200}) +
                      "FRAME Ixyz\n" + raw({1, 1, 1, 1, 50, 60}));
    auto v = frameio::parse_y4m(s);
    REQUIRE(v.size() == 2);
    CHECK(v.frames[0].at(0, 0) == 9);
    CHECK(v.frames[0].at(1, 1) == 6);
    CHECK(v.frames[1].at(1, 0) == 1);
    CHECK(v.fps == Rational{30000, 1001});
  }
  SUBCASE("bad signature") {
    CHECK(kind_of([] { frameio::parse_y4m(bytes_of("YUV4MPG W2 H2\n")); }) == ErrorKind::BadSignature);
  }
  SUBCASE("declared length longer than the stream") {
    auto s = bytes_of("YUV4MPEG2 W2 H2 F25:1 Cmono XLENGTH=3\nFRAME\n" + raw({0, 1, 2, 3}) + "FRAME\n" + raw({4, 5, 6, 7}));
    CHECK(kind_of([&] { frameio::parse_y4m(s); }) == ErrorKind::TruncatedFrame);
  }
  SUBCASE("partial frame payload") {
    auto s = bytes_of("YUV4MPEG2 W2 H2 F25:1 Cmono\nFRAME\n" + raw({0, 1, 2}));
    CHECK(kind_of([&] { frameio::parse_y4m(s); }) == ErrorKind::TruncatedFrame);
  }
  SUBCASE("4:4:4 is unsupported") {
    auto s = bytes_of("YUV4MPEG2 W2 H2 F25:1 C444\nFRAME\n" + raw({0, 1, 2, 3}));
    CHECK(kind_of([&] { frameio::parse_y4m(s); }) == ErrorKind::UnsupportedColorspace);
  }
}

TEST_CASE("save_sequence rejects sequences below two frames") {
  auto dir = oracle::scratch_dir("frameio_empty");
  VideoSequence empty;
  CHECK_THROWS_AS(frameio::save_sequence(empty, dir, frameio::Format::PgmDir), Error);
  CHECK_THROWS_AS(frameio::save_sequence(empty, dir, frameio::Format::Y4m), Error);
}

TEST_CASE("property: save then load is the identity for both formats") {
  std::mt19937_64 rng(20240607);
  auto dir = oracle::scratch_dir("frameio_roundtrip");
  for (int trial = 0; trial < 25; ++trial) {
    auto v = oracle::random_sequence(rng);
    for (auto fmt : {frameio::Format::PgmDir, frameio::Format::Y4m}) {
      auto sub = dir / (std::to_string(trial) + frameio::to_string(fmt));
      frameio::save_sequence(v, sub, fmt);
      auto back = frameio::load_sequence(sub / "manifest.json");
      CHECK(back == v);
      // loading twice is deterministic
      CHECK(frameio::load_sequence(sub / "manifest.json") == back);
    }
  }
}

TEST_CASE("parse_y4m never faults on corrupted streams") {
  std::mt19937_64 rng(7);
  VideoSequence v;
  v.frames.emplace_back(3, 2, std::uint8_t{5});
  v.frames.emplace_back(3, 2, std::uint8_t{6});
  v.labels = LabelTrack(2);
  const auto good = frameio::encode_y4m(v);
  for (int trial = 0; trial < 2000; ++trial) {
    auto s = good;
    s.resize(rng() % (good.size() + 8));
    for (int flips = static_cast<int>(rng() % 4); flips > 0 && !s.empty(); --flips) {
      s[rng() % s.size()] = static_cast<std::byte>(rng() & 0xff);
    }
    try {
      auto parsed = frameio::parse_y4m(s);
      for (const auto& f : parsed.frames) CHECK(f.size() == std::size_t{f.width()} * f.height());
    } catch (const Error&) {
    }
  }
}

TEST_CASE("PGM header comments are tolerated; 16-bit is not") {
  auto f = frameio::parse_pgm(bytes_of("P5 # c1\n2 # c2\n1\n# c3\n255\n" + raw({10, 20})));
  CHECK(f.width() == 2);
  CHECK(f.at(1, 0) == 20);
  CHECK(kind_of([] { frameio::parse_pgm(bytes_of("P5\n1 1\n65535\n" + raw({0, 0}))); }) ==
        ErrorKind::UnsupportedColorspace);
  CHECK(kind_of([] { frameio::parse_pgm(bytes_of("P2\n1 1\n255\n0")); }) == ErrorKind::BadSignature);
  auto enc = frameio::encode_pgm(f);
  CHECK(std::string(reinterpret_cast<const char*>(enc.data()), 11) == "P5\n2 1\n255\n");
}
