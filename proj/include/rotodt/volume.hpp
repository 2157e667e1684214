#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rotodt/common.hpp"
#include "rotodt/geometry.hpp"
#include "rotodt/sampling.hpp"

namespace rotodt {

/// N³ samples of a function on R_N, row-major with j1 slowest.
struct Volume {
  GridSpec grid;
  std::vector<cplx> values;

  Volume() = default;
  explicit Volume(const GridSpec& g) : grid(g), values(g.size()) {}
  Volume(const GridSpec& g, std::vector<cplx> v);

  cplx& at(int j1, int j2, int j3) { return values[grid.index(j1, j2, j3)]; }
  const cplx& at(int j1, int j2, int j3) const {
    return values[grid.index(j1, j2, j3)];
  }
  std::size_t size() const { return values.size(); }
};

/// Real parts of a volume.
std::vector<double> real_part(const Volume& v);
/// Largest |Im| relative to the largest |value|.
double relative_imaginary(const Volume& v);

/// Noise bookkeeping carried with a data set.
struct NoiseRecord {
  double level = 0.0;           // δ
  double relative_level = 0.0;  // δ / max|data|
  std::uint64_t seed = 0;
  bool complex_noise = false;
};

/// Nonuniform k-space data: values of F f at points y.
struct KSpaceSamples {
  std::vector<Vec3> points;
  std::vector<cplx> values;
  Imaging imaging = Imaging::kTransmission;
  std::optional<NoiseRecord> noise;

  std::size_t size() const { return points.size(); }
  void validate() const;
};

}  // namespace rotodt
