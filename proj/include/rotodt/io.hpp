#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "rotodt/volume.hpp"

namespace rotodt {

using json = nlohmann::json;

/// 16 bytes at the start of every volume file.
inline constexpr char kVolumeMagic[17] = "ROTODT-VOLUME-01";

/// Layout: magic, uint64 little-endian header length, JSON header
/// {N, r_s, dtype, order, endianness, meta}, then N³ little-endian float32
/// real parts with j1 slowest. `meta` is copied into the header.
void write_volume(const std::filesystem::path& path, const Volume& vol,
                  const json& meta = json::object());

struct VolumeFile {
  Volume volume;
  json header;
};

VolumeFile read_volume(const std::filesystem::path& path);

/// Samples as little-endian float64 records (y1, y2, y3, re, im) plus a JSON
/// sidecar next to them (same path with ".json" appended).
void write_samples(const std::filesystem::path& path, const KSpaceSamples& samples,
                   const json& sidecar);

struct SamplesFile {
  KSpaceSamples samples;
  json sidecar;
};

SamplesFile read_samples(const std::filesystem::path& path);

std::filesystem::path sidecar_path(const std::filesystem::path& samples_path);

/// 8-bit grayscale PNG of the plane j1 = index (rows j2, columns j3) with
/// the real parts mapped linearly from [lo, hi] of the whole volume.
void write_png_slice(const std::filesystem::path& path, const Volume& vol, int index);

void write_json(const std::filesystem::path& path, const json& value);
json read_json(const std::filesystem::path& path);

/// Writes go to a temporary sibling and are renamed into place, so a failed
/// write never leaves a truncated file behind.
class AtomicFile {
 public:
  explicit AtomicFile(std::filesystem::path target);
  ~AtomicFile();
  AtomicFile(const AtomicFile&) = delete;
  AtomicFile& operator=(const AtomicFile&) = delete;

  const std::filesystem::path& temp_path() const { return temp_; }
  void commit();

 private:
  std::filesystem::path target_;
  std::filesystem::path temp_;
  bool committed_ = false;
};

}  // namespace rotodt
