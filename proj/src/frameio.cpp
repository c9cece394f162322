#include "vidattack/frameio.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <string_view>

#include <json.hpp>

#include "vidattack/error.hpp"

namespace vidattack::frameio {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string to_string(Format f) { return f == Format::PgmDir ? "PgmDir" : "Y4m"; }

Format parse_format(const std::string& text) {
  if (text == "PgmDir" || text == "pgm") return Format::PgmDir;
  if (text == "Y4m" || text == "y4m") return Format::Y4m;
  throw Error(ErrorKind::InvalidArgument, "unknown format '" + text + "'");
}

// ---------------------------------------------------------------------------
// file helpers

std::vector<std::byte> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(fs::exists(path) ? ErrorKind::IoFailure : ErrorKind::MissingFile, path.string());
  }
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<std::byte> out(raw.size());
  std::transform(raw.begin(), raw.end(), out.begin(), [](char c) { return static_cast<std::byte>(c); });
  return out;
}

void write_file(const fs::path& path, std::span<const std::byte> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::IoFailure, "write failed: " + path.string());
}

void write_text(const fs::path& path, const std::string& text) {
  write_file(path, std::as_bytes(std::span(text.data(), text.size())));
}

namespace {

std::string read_text(const fs::path& path) {
  auto bytes = read_file(path);
  return {reinterpret_cast<const char*>(bytes.data()), bytes.size()};
}

void append(std::vector<std::byte>& out, std::string_view text) {
  for (char c : text) out.push_back(static_cast<std::byte>(c));
}

// Cursor over an untrusted byte buffer; every read is bounds-checked.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::byte> bytes) : bytes_(bytes) {}

  bool at_end() const noexcept { return pos_ >= bytes_.size(); }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
  std::size_t position() const noexcept { return pos_; }

  int peek() const noexcept { return at_end() ? -1 : static_cast<unsigned char>(bytes_[pos_]); }
  int get() noexcept { return at_end() ? -1 : static_cast<unsigned char>(bytes_[pos_++]); }

  bool starts_with(std::string_view prefix) const noexcept {
    if (remaining() < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
      if (static_cast<char>(bytes_[pos_ + i]) != prefix[i]) return false;
    }
    return true;
  }

  void skip(std::size_t n) noexcept { pos_ = std::min(bytes_.size(), pos_ + n); }

  // Reads up to (not including) '\n' and consumes the newline. Returns false if
  // no newline is found before the end of the buffer.
  bool line(std::string& out) {
    out.clear();
    while (!at_end()) {
      int c = get();
      if (c == '\n') return true;
      out.push_back(static_cast<char>(c));
    }
    return false;
  }

  std::span<const std::byte> take(std::size_t n) {
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  std::span<const std::byte> bytes_;
  std::size_t pos_ = 0;
};

bool is_space(int c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

// PNM header token: skips whitespace and '#' comments.
std::string pnm_token(ByteReader& r) {
  for (;;) {
    int c = r.peek();
    if (c == '#') {
      while (!r.at_end() && r.get() != '\n') {
      }
    } else if (is_space(c)) {
      r.get();
    } else {
      break;
    }
  }
  std::string tok;
  while (!r.at_end() && !is_space(r.peek()) && r.peek() != '#') tok.push_back(static_cast<char>(r.get()));
  return tok;
}

std::uint64_t parse_decimal(const std::string& tok, ErrorKind kind, const char* what) {
  if (tok.empty() || tok.size() > 9 || !std::all_of(tok.begin(), tok.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw Error(kind, std::string("bad ") + what + " '" + tok + "'");
  }
  return std::stoull(tok);
}

std::string frame_name(std::size_t i, std::size_t count) {
  int digits = std::max<int>(5, static_cast<int>(std::to_string(count).size()));
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%0*zu.pgm", digits, i);
  return buf;
}

// Expands a printf-style pattern with a single integer conversion.
std::string expand_pattern(const std::string& pattern, std::size_t index) {
  auto pct = pattern.find('%');
  if (pct == std::string::npos) throw Error(ErrorKind::MalformedManifest, "pattern has no conversion: " + pattern);
  auto conv = pattern.find_first_of("dui", pct);
  if (conv == std::string::npos) throw Error(ErrorKind::MalformedManifest, "unsupported pattern: " + pattern);
  auto spec = pattern.substr(pct + 1, conv - pct - 1);
  if (!std::all_of(spec.begin(), spec.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw Error(ErrorKind::MalformedManifest, "unsupported pattern: " + pattern);
  }
  std::string digits = std::to_string(index);
  std::size_t width = spec.empty() ? 0 : std::stoul(spec);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return pattern.substr(0, pct) + digits + pattern.substr(conv + 1);
}

}  // namespace

// ---------------------------------------------------------------------------
// PGM

Frame parse_pgm(std::span<const std::byte> bytes) {
  ByteReader r(bytes);
  if (!r.starts_with("P5")) throw Error(ErrorKind::BadSignature, "not a binary PGM (P5)");
  r.skip(2);
  auto w = parse_decimal(pnm_token(r), ErrorKind::MalformedManifest, "PGM width");
  auto h = parse_decimal(pnm_token(r), ErrorKind::MalformedManifest, "PGM height");
  auto maxval = parse_decimal(pnm_token(r), ErrorKind::MalformedManifest, "PGM maxval");
  if (w == 0 || h == 0) throw Error(ErrorKind::DimensionMismatch, "PGM dimensions must be positive");
  if (maxval == 0 || maxval > 255) throw Error(ErrorKind::UnsupportedColorspace, "only 8-bit PGM is supported");
  if (!is_space(r.get())) throw Error(ErrorKind::MalformedManifest, "PGM header not terminated by whitespace");
  std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (r.remaining() < n) throw Error(ErrorKind::TruncatedFrame, "PGM raster shorter than header declares");
  auto raster = r.take(n);
  std::vector<std::uint8_t> px(n);
  std::transform(raster.begin(), raster.end(), px.begin(), [](std::byte b) { return std::to_integer<std::uint8_t>(b); });
  return Frame(static_cast<std::uint32_t>(w), static_cast<std::uint32_t>(h), std::move(px));
}

std::vector<std::byte> encode_pgm(const Frame& frame) {
  std::vector<std::byte> out;
  out.reserve(frame.size() + 32);
  append(out, "P5\n" + std::to_string(frame.width()) + " " + std::to_string(frame.height()) + "\n255\n");
  for (auto p : frame.pixels()) out.push_back(static_cast<std::byte>(p));
  return out;
}

// ---------------------------------------------------------------------------
// Y4M

VideoSequence parse_y4m(std::span<const std::byte> bytes) {
  ByteReader r(bytes);
  if (!r.starts_with("YUV4MPEG2")) throw Error(ErrorKind::BadSignature, "missing YUV4MPEG2 signature");
  r.skip(9);
  if (r.peek() != ' ' && r.peek() != '\n') throw Error(ErrorKind::BadSignature, "missing YUV4MPEG2 signature");

  std::string header;
  if (!r.line(header)) throw Error(ErrorKind::TruncatedFrame, "unterminated stream header");

  std::uint64_t width = 0, height = 0;
  Rational fps{25, 1};
  std::string colorspace = "420jpeg";
  std::optional<std::uint64_t> declared;

  std::size_t pos = 0;
  while (pos < header.size()) {
    auto end = header.find(' ', pos);
    if (end == std::string::npos) end = header.size();
    std::string tok = header.substr(pos, end - pos);
    pos = end + 1;
    if (tok.empty()) continue;
    std::string val = tok.substr(1);
    switch (tok[0]) {
      case 'W': width = parse_decimal(val, ErrorKind::MalformedManifest, "Y4M width"); break;
      case 'H': height = parse_decimal(val, ErrorKind::MalformedManifest, "Y4M height"); break;
      case 'F': {
        auto colon = val.find(':');
        if (colon == std::string::npos) throw Error(ErrorKind::MalformedManifest, "bad Y4M frame rate " + val);
        auto num = parse_decimal(val.substr(0, colon), ErrorKind::MalformedManifest, "Y4M fps");
        auto den = parse_decimal(val.substr(colon + 1), ErrorKind::MalformedManifest, "Y4M fps");
        if (num == 0 || den == 0) throw Error(ErrorKind::MalformedManifest, "Y4M fps must be positive");
        fps = {static_cast<std::uint32_t>(num), static_cast<std::uint32_t>(den)};
        break;
      }
      case 'C': colorspace = val; break;
      case 'X':
        if (val.rfind("LENGTH=", 0) == 0) declared = parse_decimal(val.substr(7), ErrorKind::MalformedManifest, "XLENGTH");
        break;
      default: break;  // I, A and unknown parameters carry no luma information
    }
  }
  if (width == 0 || height == 0) throw Error(ErrorKind::MalformedManifest, "Y4M header lacks W/H");

  std::size_t chroma = 0;
  if (colorspace == "mono") {
    chroma = 0;
  } else if (colorspace == "420" || colorspace == "420jpeg" || colorspace == "420paldv" || colorspace == "420mpeg2") {
    chroma = 2 * ((width + 1) / 2) * ((height + 1) / 2);
  } else {
    throw Error(ErrorKind::UnsupportedColorspace, "colorspace C" + colorspace + " is not supported");
  }

  const std::size_t luma = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  VideoSequence video;
  video.fps = fps;
  std::string frame_header;
  while (!r.at_end()) {
    if (declared && video.frames.size() == *declared) break;
    if (!r.starts_with("FRAME")) throw Error(ErrorKind::TruncatedFrame, "expected FRAME marker");
    if (!r.line(frame_header)) throw Error(ErrorKind::TruncatedFrame, "unterminated FRAME header");
    if (frame_header.size() > 5 && frame_header[5] != ' ') throw Error(ErrorKind::TruncatedFrame, "bad FRAME marker");
    if (r.remaining() < luma + chroma) {
      throw Error(ErrorKind::TruncatedFrame, "frame " + std::to_string(video.frames.size()) + " is truncated");
    }
    auto plane = r.take(luma);
    std::vector<std::uint8_t> px(luma);
    std::transform(plane.begin(), plane.end(), px.begin(), [](std::byte b) { return std::to_integer<std::uint8_t>(b); });
    video.frames.emplace_back(static_cast<std::uint32_t>(width), static_cast<std::uint32_t>(height), std::move(px));
    r.skip(chroma);
  }
  if (declared && video.frames.size() < *declared) {
    throw Error(ErrorKind::TruncatedFrame, "header declares " + std::to_string(*declared) + " frames, stream has " +
                                               std::to_string(video.frames.size()));
  }
  video.labels = LabelTrack(video.frames.size());
  return video;
}

std::vector<std::byte> encode_y4m(const VideoSequence& video) {
  video.validate();
  if (video.frames.empty()) throw Error(ErrorKind::InvalidArgument, "cannot encode an empty sequence");
  std::vector<std::byte> out;
  out.reserve(64 + video.size() * (video.frames.front().size() + 6));
  append(out, "YUV4MPEG2 W" + std::to_string(video.width()) + " H" + std::to_string(video.height()) + " F" +
                  std::to_string(video.fps.num) + ":" + std::to_string(video.fps.den) + " Ip A1:1 Cmono\n");
  for (const auto& f : video.frames) {
    append(out, "FRAME\n");
    for (auto p : f.pixels()) out.push_back(static_cast<std::byte>(p));
  }
  return out;
}

// ---------------------------------------------------------------------------
// labels

LabelTrack parse_labels(const std::string& text) {
  std::vector<std::uint8_t> values;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line == "0") {
      values.push_back(0);
    } else if (line == "1") {
      values.push_back(1);
    } else {
      throw Error(ErrorKind::MalformedLabels, "line " + std::to_string(line_no) + ": expected 0 or 1");
    }
  }
  return LabelTrack(std::move(values));
}

std::string encode_labels(const LabelTrack& labels) {
  std::string out;
  out.reserve(labels.size() * 2);
  for (auto v : labels) {
    out.push_back(v ? '1' : '0');
    out.push_back('\n');
  }
  return out;
}

// ---------------------------------------------------------------------------
// manifest

Manifest parse_manifest(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedManifest, e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::MalformedManifest, "manifest must be a JSON object");

  Manifest m;
  try {
    const auto& fps = doc.at("fps");
    if (fps.is_string()) {
      m.fps = parse_rational(fps.get<std::string>());
    } else if (fps.is_number_unsigned() && fps.get<std::uint64_t>() > 0) {
      m.fps = {fps.get<std::uint32_t>(), 1};
    } else {
      throw Error(ErrorKind::MalformedManifest, "fps must be \"num/den\" or a positive integer");
    }
    m.width = doc.at("width").get<std::uint32_t>();
    m.height = doc.at("height").get<std::uint32_t>();
    m.format = parse_format(doc.at("format").get<std::string>());

    const auto& frames = doc.at("frames");
    if (frames.is_array()) {
      for (const auto& f : frames) m.frames.push_back(f.get<std::string>());
    } else if (frames.is_string()) {
      m.frames.push_back(frames.get<std::string>());
    } else if (frames.is_object()) {
      auto pattern = frames.at("pattern").get<std::string>();
      auto count = frames.at("count").get<std::size_t>();
      auto start = frames.value("start", std::size_t{0});
      for (std::size_t i = 0; i < count; ++i) m.frames.push_back(expand_pattern(pattern, start + i));
    } else {
      throw Error(ErrorKind::MalformedManifest, "frames must be a list, a string or a pattern object");
    }

    if (auto it = doc.find("labels"); it != doc.end() && !it->is_null()) m.labels = it->get<std::string>();
    if (auto it = doc.find("provenance"); it != doc.end() && !it->is_null()) m.provenance_json = it->dump();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::MalformedManifest) throw;
    throw Error(ErrorKind::MalformedManifest, e.what());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedManifest, e.what());
  }
  if (m.width == 0 || m.height == 0) throw Error(ErrorKind::MalformedManifest, "width/height must be positive");
  if (m.format == Format::Y4m && m.frames.size() != 1) {
    throw Error(ErrorKind::MalformedManifest, "Y4m manifest must reference exactly one file");
  }
  return m;
}

std::string manifest_to_json(const Manifest& m) {
  json doc;
  doc["fps"] = to_string(m.fps);
  doc["width"] = m.width;
  doc["height"] = m.height;
  doc["frames"] = m.frames;
  doc["labels"] = m.labels ? json(*m.labels) : json(nullptr);
  doc["format"] = to_string(m.format);
  if (!m.provenance_json.empty()) doc["provenance"] = json::parse(m.provenance_json);
  return doc.dump(2) + "\n";
}

VideoSequence load_sequence(const fs::path& manifest_path) {
  const Manifest m = parse_manifest(read_text(manifest_path));
  const fs::path dir = manifest_path.parent_path();

  VideoSequence video;
  video.fps = m.fps;
  if (m.format == Format::Y4m) {
    auto bytes = read_file(dir / m.frames.front());
    video = parse_y4m(bytes);
    video.fps = m.fps;
  } else {
    video.frames.reserve(m.frames.size());
    for (const auto& name : m.frames) video.frames.push_back(parse_pgm(read_file(dir / name)));
  }
  if (video.frames.size() < 2) {
    throw Error(ErrorKind::MalformedManifest, "a sequence needs at least 2 frames, got " + std::to_string(video.size()));
  }
  for (const auto& f : video.frames) {
    if (f.width() != m.width || f.height() != m.height) {
      throw Error(ErrorKind::DimensionMismatch, "frame is " + std::to_string(f.width()) + "x" +
                                                    std::to_string(f.height()) + ", manifest says " +
                                                    std::to_string(m.width) + "x" + std::to_string(m.height));
    }
  }

  if (m.labels) {
    video.labels = parse_labels(read_text(dir / *m.labels));
    if (video.labels.size() != video.frames.size()) {
      throw Error(ErrorKind::LabelLengthMismatch, std::to_string(video.labels.size()) + " labels for " +
                                                      std::to_string(video.frames.size()) + " frames");
    }
  } else {
    video.labels = LabelTrack(video.frames.size());
  }
  return video;
}

Manifest save_sequence(const VideoSequence& video, const fs::path& out_dir, Format format,
                       const std::string& provenance_json) {
  if (video.frames.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "a sequence needs at least 2 frames, got " + std::to_string(video.size()));
  }
  video.validate();

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::IoFailure, "cannot create " + out_dir.string() + ": " + ec.message());

  Manifest m;
  m.fps = video.fps;
  m.width = video.width();
  m.height = video.height();
  m.format = format;
  m.labels = "labels.txt";
  m.provenance_json = provenance_json;

  if (format == Format::Y4m) {
    m.frames = {"video.y4m"};
    write_file(out_dir / "video.y4m", encode_y4m(video));
  } else {
    for (std::size_t i = 0; i < video.size(); ++i) {
      m.frames.push_back(frame_name(i, video.size()));
      write_file(out_dir / m.frames.back(), encode_pgm(video.frames[i]));
    }
  }
  write_text(out_dir / "labels.txt", encode_labels(video.labels));
  write_text(out_dir / "manifest.json", manifest_to_json(m));
  return m;
}

}  // namespace vidattack::frameio
