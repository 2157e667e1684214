#include "rotodt/validation.hpp"

#include <algorithm>
#include <cmath>

#include "rotodt/parallel.hpp"
#include "rotodt/phantoms.hpp"
#include "rotodt/transform.hpp"

namespace rotodt {

cplx green_kernel(const Vec3& r, double k0) {
  const double d = r.norm();
  if (d == 0.0) throw SingularityError("Green's function is singular at r = 0");
  return std::polar(1.0 / (4.0 * kPi * d), k0 * d);
}

PlanarField born_direct_scatter(const Volume& f, const WaveParameters& w,
                                Imaging imaging, const DetectorSpec& detector) {
  if (detector.size <= 0 || detector.size % 2 != 0)
    throw InvalidArgument("detector size must be even and positive");
  if (!(detector.spacing > 0.0)) throw InvalidArgument("detector spacing must be positive");
  const GridSpec& g = f.grid;
  const double h = g.spacing();
  const double plane = sign_of(imaging) * w.detector_distance;

  struct Source {
    Vec3 r;
    cplx value;
  };
  std::vector<Source> sources;
  double reach = 0.0;
  for (int j1 = -g.N / 2; j1 < g.N / 2; ++j1)
    for (int j2 = -g.N / 2; j2 < g.N / 2; ++j2)
      for (int j3 = -g.N / 2; j3 < g.N / 2; ++j3) {
        const cplx v = f.at(j1, j2, j3);
        if (v == cplx{}) continue;
        const Vec3 r(h * j1, h * j2, h * j3);
        reach = std::max(reach, sign_of(imaging) * r[2] + 0.5 * h);
        sources.push_back({r, v * std::polar(h * h * h, w.k0 * r[2])});
      }
  if (!sources.empty() && reach >= w.detector_distance)
    throw InvalidArgument("detector plane intersects the support of f");

  PlanarField field;
  field.N = detector.size;
  field.spacing = detector.spacing;
  field.distance = w.detector_distance;
  field.imaging = imaging;
  field.values.assign(static_cast<std::size_t>(field.N) * field.N, cplx{});
  const int N = field.N;
  parallel_for(static_cast<std::size_t>(N), [&](std::size_t b, std::size_t e) {
    for (std::size_t a1 = b; a1 < e; ++a1)
      for (int m2 = -N / 2; m2 < N / 2; ++m2) {
        const Vec3 x(field.coordinate(static_cast<int>(a1) - N / 2), field.coordinate(m2), plane);
        cplx u = 0.0;
        for (const auto& s : sources) u += s.value * green_kernel(x - s.r, w.k0);
        field.values[a1 * N + (m2 + N / 2)] = u;
      }
  });
  return field;
}

FdtReport fdt_check(const Volume& f, const Phantom* phantom, const WaveParameters& w,
                    Imaging imaging, const DetectorSpec& detector, double band_fraction) {
  if (!(band_fraction > 0.0 && band_fraction < 1.0))
    throw InvalidArgument("band fraction must lie in (0, 1)");
  const PlanarField field = born_direct_scatter(f, w, imaging, detector);
  const auto spectrum = planar_spectrum(field);
  const int N = field.N;
  const double band = band_fraction * w.k0;

  std::vector<Vec3> points;
  std::vector<cplx> measured;
  for (int j1 = -N / 2; j1 < N / 2; ++j1)
    for (int j2 = -N / 2; j2 < N / 2; ++j2) {
      const double k1 = field.frequency(j1), k2 = field.frequency(j2);
      if (k1 * k1 + k2 * k2 > band * band) continue;
      const double kap = kappa(k1, k2, w.k0).real();
      const cplx factor = -std::sqrt(2.0 / kPi) *
                          std::polar(1.0, -kap * field.distance) * kap * cplx(0.0, 1.0);
      measured.push_back(factor * spectrum[static_cast<std::size_t>(j1 + N / 2) * N + (j2 + N / 2)]);
      points.push_back(hemisphere_point(k1, k2, w.k0, imaging));
    }

  FdtReport report;
  report.grid_size = f.grid.N;
  report.band = band;
  report.compared = points.size();
  const auto discrete = ndft_direct(f, points);
  std::vector<cplx> reference = discrete;
  if (phantom != nullptr && phantom->has_fourier())
    for (std::size_t i = 0; i < points.size(); ++i) reference[i] = *phantom->fourier(points[i]);

  auto compare = [&](const std::vector<cplx>& ref, double* worst) {
    double num = 0.0, den = 0.0, peak = 0.0, diff = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      num += std::norm(measured[i] - ref[i]);
      den += std::norm(ref[i]);
      peak = std::max(peak, std::abs(ref[i]));
      diff = std::max(diff, std::abs(measured[i] - ref[i]));
    }
    if (worst) *worst = peak > 0.0 ? diff / peak : diff;
    if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::sqrt(num / den);
  };
  report.relative_error = compare(reference, &report.max_pointwise_error);
  report.discrete_relative_error = compare(discrete, nullptr);
  return report;
}

}  // namespace rotodt
