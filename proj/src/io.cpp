#include "rotodt/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>

namespace rotodt {

namespace fs = std::filesystem;

namespace {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian hosts are not supported");

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    std::reverse(b, b + sizeof(T));
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

template <class T>
void put(std::ostream& out, T v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return to_little(v);
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + p.string() + " for writing");
  return out;
}

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot open " + p.string());
  return in;
}

void finish(std::ofstream& out, const fs::path& p) {
  out.flush();
  if (!out) throw Error("write failed: " + p.string());
  out.close();
}

}  // namespace

AtomicFile::AtomicFile(fs::path target) : target_(std::move(target)) {
  std::random_device rd;
  temp_ = target_;
  temp_ += ".tmp" + std::to_string(rd());
}

AtomicFile::~AtomicFile() {
  if (!committed_) {
    std::error_code ec;
    fs::remove(temp_, ec);
  }
}

void AtomicFile::commit() {
  fs::rename(temp_, target_);
  committed_ = true;
}

void write_volume(const fs::path& path, const Volume& vol, const json& meta) {
  if (vol.values.size() != vol.grid.size())
    throw InvalidArgument("volume size does not match its grid");
  json header = {{"N", vol.grid.N},
                 {"r_s", vol.grid.support_radius},
                 {"dtype", "float32"},
                 {"order", "j1-slowest"},
                 {"endianness", "little"},
                 {"meta", meta}};
  const std::string text = header.dump();
  AtomicFile file(path);
  {
    auto out = open_out(file.temp_path());
    out.write(kVolumeMagic, 16);
    put<std::uint64_t>(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    std::vector<float> buf(vol.values.size());
    for (std::size_t i = 0; i < buf.size(); ++i)
      buf[i] = to_little(static_cast<float>(vol.values[i].real()));
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
    finish(out, file.temp_path());
  }
  file.commit();
}

VolumeFile read_volume(const fs::path& path) {
  auto in = open_in(path);
  char magic[16];
  in.read(magic, 16);
  if (!in || std::memcmp(magic, kVolumeMagic, 16) != 0)
    throw Error(path.string() + " is not a volume file");
  const auto len = get<std::uint64_t>(in);
  if (!in || len > (1u << 26)) throw Error(path.string() + ": corrupt header length");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw Error(path.string() + ": truncated header");
  VolumeFile vf;
  try {
    vf.header = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(path.string() + ": bad header: " + e.what());
  }
  if (vf.header.value("dtype", "") != "float32" || vf.header.value("order", "") != "j1-slowest")
    throw Error(path.string() + ": unsupported dtype or order");
  const GridSpec grid = build_grid(vf.header.at("N").get<int>(), vf.header.at("r_s").get<double>());
  std::vector<float> buf(grid.size());
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!in) throw Error(path.string() + ": truncated payload");
  vf.volume = Volume(grid);
  for (std::size_t i = 0; i < buf.size(); ++i) vf.volume.values[i] = to_little(buf[i]);
  return vf;
}

fs::path sidecar_path(const fs::path& samples_path) {
  fs::path p = samples_path;
  p += ".json";
  return p;
}

void write_samples(const fs::path& path, const KSpaceSamples& samples, const json& sidecar) {
  samples.validate();
  json meta = sidecar;
  meta["count"] = samples.size();
  meta["record"] = {"y1", "y2", "y3", "re", "im"};
  meta["dtype"] = "float64";
  meta["endianness"] = "little";
  meta["sign"] = static_cast<int>(samples.imaging);
  if (samples.noise) {
    meta["noise"]["level"] = samples.noise->level;
    meta["noise"]["relative_level"] = samples.noise->relative_level;
    meta["noise"]["seed"] = samples.noise->seed;
    meta["noise"]["complex"] = samples.noise->complex_noise;
  }
  AtomicFile data(path);
  AtomicFile side(sidecar_path(path));
  {
    auto out = open_out(data.temp_path());
    std::vector<double> rec(5 * samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const Vec3& y = samples.points[i];
      const double r[5] = {y.x(), y.y(), y.z(), samples.values[i].real(), samples.values[i].imag()};
      for (int c = 0; c < 5; ++c) rec[5 * i + c] = to_little(r[c]);
    }
    out.write(reinterpret_cast<const char*>(rec.data()),
              static_cast<std::streamsize>(rec.size() * sizeof(double)));
    finish(out, data.temp_path());
  }
  {
    auto out = open_out(side.temp_path());
    out << meta.dump(2) << '\n';
    finish(out, side.temp_path());
  }
  data.commit();
  side.commit();
}

SamplesFile read_samples(const fs::path& path) {
  SamplesFile sf;
  sf.sidecar = read_json(sidecar_path(path));
  const auto count = sf.sidecar.at("count").get<std::size_t>();
  const auto bytes = fs::file_size(path);
  if (bytes != count * 5 * sizeof(double))
    throw Error(path.string() + ": size " + std::to_string(bytes) + " does not match " +
                std::to_string(count) + " records");
  auto in = open_in(path);
  std::vector<double> rec(5 * count);
  in.read(reinterpret_cast<char*>(rec.data()), static_cast<std::streamsize>(bytes));
  if (!in) throw Error(path.string() + ": read failed");
  auto& s = sf.samples;
  s.points.resize(count);
  s.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double* r = &rec[5 * i];
    s.points[i] = Vec3(to_little(r[0]), to_little(r[1]), to_little(r[2]));
    s.values[i] = cplx(to_little(r[3]), to_little(r[4]));
  }
  s.imaging = sf.sidecar.value("sign", 1) < 0 ? Imaging::kReflection : Imaging::kTransmission;
  if (sf.sidecar.contains("noise")) {
    const json& n = sf.sidecar["noise"];
    NoiseRecord nr;
    nr.level = n.value("level", 0.0);
    nr.relative_level = n.value("relative_level", 0.0);
    nr.seed = n.value("seed", std::uint64_t{0});
    nr.complex_noise = n.value("complex", false);
    s.noise = nr;
  }
  s.validate();
  return sf;
}

void write_png_slice(const fs::path& path, const Volume& vol, int index) {
  const int N = vol.grid.N;
  if (index < -N / 2 || index >= N / 2)
    throw InvalidArgument("slice index " + std::to_string(index) + " outside [" +
                          std::to_string(-N / 2) + ", " + std::to_string(N / 2 - 1) + "]");
  double lo = INFINITY, hi = -INFINITY;
  for (const cplx& v : vol.values) {
    lo = std::min(lo, v.real());
    hi = std::max(hi, v.real());
  }
  const double span = hi > lo ? hi - lo : 1.0;
  std::vector<png_byte> pixels(static_cast<std::size_t>(N) * N);
  for (int j2 = -N / 2; j2 < N / 2; ++j2)
    for (int j3 = -N / 2; j3 < N / 2; ++j3) {
      const double t = (vol.at(index, j2, j3).real() - lo) / span;
      pixels[static_cast<std::size_t>(j2 + N / 2) * N + (j3 + N / 2)] =
          static_cast<png_byte>(std::lround(255.0 * std::clamp(t, 0.0, 1.0)));
    }

  AtomicFile file(path);
  {
    FILE* fp = std::fopen(file.temp_path().c_str(), "wb");
    if (!fp) throw Error("cannot open " + path.string() + " for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
      png_destroy_write_struct(&png, &info);
      std::fclose(fp);
      throw Error("libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
      png_destroy_write_struct(&png, &info);
      std::fclose(fp);
      throw Error("libpng failed writing " + path.string());
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, N, N, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    std::vector<png_bytep> rows(N);
    for (int r = 0; r < N; ++r) rows[r] = &pixels[static_cast<std::size_t>(r) * N];
    png_set_rows(png, info, rows.data());
    png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
    png_destroy_write_struct(&png, &info);
    if (std::fclose(fp) != 0) throw Error("write failed: " + path.string());
  }
  file.commit();
}

void write_json(const fs::path& path, const json& value) {
  AtomicFile file(path);
  {
    auto out = open_out(file.temp_path());
    out << value.dump(2) << '\n';
    finish(out, file.temp_path());
  }
  file.commit();
}

json read_json(const fs::path& path) {
  auto in = open_in(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

}  // namespace rotodt
