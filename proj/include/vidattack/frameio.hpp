#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vidattack/frame.hpp"

namespace vidattack::frameio {

enum class Format { PgmDir, Y4m };

std::string to_string(Format f);
Format parse_format(const std::string& text);

/// On-disk description of a sequence. `frames` holds paths relative to the
/// manifest directory; for Y4m it holds exactly one entry.
struct Manifest {
  Rational fps;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<std::string> frames;
  std::optional<std::string> labels;
  Format format = Format::PgmDir;
  // Free-form object carried through untouched (attack onset, seeds, ...).
  std::string provenance_json;
};

/// Parses manifest JSON text. `frames` may be a list of file names or an
/// object {"pattern": "frame_%05d.pgm", "count": N, "start": 0}.
Manifest parse_manifest(const std::string& json_text);
std::string manifest_to_json(const Manifest& m);

VideoSequence load_sequence(const std::filesystem::path& manifest_path);

/// Writes frames, labels.txt and manifest.json into `out_dir` (created if
/// needed) and returns the manifest that was written.
Manifest save_sequence(const VideoSequence& video, const std::filesystem::path& out_dir, Format format,
                       const std::string& provenance_json = {});

// P5 PGM, maxval <= 255. Comments are accepted on read and never written.
Frame parse_pgm(std::span<const std::byte> bytes);
std::vector<std::byte> encode_pgm(const Frame& frame);

// YUV4MPEG2. Mono and 4:2:0 inputs are accepted; chroma is discarded. An
// optional XLENGTH=<n> header extension declares the frame count.
VideoSequence parse_y4m(std::span<const std::byte> bytes);
std::vector<std::byte> encode_y4m(const VideoSequence& video);

LabelTrack parse_labels(const std::string& text);
std::string encode_labels(const LabelTrack& labels);

std::vector<std::byte> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::byte> bytes);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace vidattack::frameio
