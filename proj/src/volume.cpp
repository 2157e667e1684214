#include "rotodt/volume.hpp"

#include <algorithm>
#include <cmath>

namespace rotodt {

Volume::Volume(const GridSpec& g, std::vector<cplx> v)
    : grid(g), values(std::move(v)) {
  if (values.size() != grid.size())
    throw InvalidArgument("volume has " + std::to_string(values.size()) +
                          " values, grid expects " + std::to_string(grid.size()));
}

std::vector<double> real_part(const Volume& v) {
  std::vector<double> out(v.size());
  std::transform(v.values.begin(), v.values.end(), out.begin(),
                 [](const cplx& z) { return z.real(); });
  return out;
}

double relative_imaginary(const Volume& v) {
  double peak = 0.0, imag = 0.0;
  for (const cplx& z : v.values) {
    peak = std::max(peak, std::abs(z));
    imag = std::max(imag, std::abs(z.imag()));
  }
  return peak > 0.0 ? imag / peak : 0.0;
}

void KSpaceSamples::validate() const {
  if (points.size() != values.size())
    throw InvalidArgument("sample points and values differ in length");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].allFinite() || !std::isfinite(values[i].real()) ||
        !std::isfinite(values[i].imag()))
      throw InvalidArgument("non-finite sample at index " + std::to_string(i));
  }
}

}  // namespace rotodt
