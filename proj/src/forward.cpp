#include "rotodt/forward.hpp"

#include <algorithm>
#include <cmath>

#include "rotodt/nufft.hpp"
#include "rotodt/parallel.hpp"
#include "rotodt/phantoms.hpp"
#include "rotodt/transform.hpp"

namespace rotodt {

double analytic_ball_ft(const Vec3& y, double a) {
  if (!(a > 0.0)) throw InvalidArgument("ball radius must be positive");
  const double r = y.norm();
  const double x = a * r;
  const double c = std::sqrt(2.0 / kPi);
  if (x < 0.05) {
    // sin x − x cos x = x³/3 − x⁵/30 + x⁷/840 − x⁹/45360 + …
    const double x2 = x * x;
    return c * a * a * a *
           (1.0 / 3.0 - x2 * (1.0 / 30.0 - x2 * (1.0 / 840.0 - x2 / 45360.0)));
  }
  return c * (std::sin(x) - x * std::cos(x)) / (r * r * r);
}

KSpaceSamples analytic_kspace(const Phantom& phantom, std::span<const Vec3> points,
                              Imaging imaging) {
  if (!phantom.has_fourier())
    throw InvalidArgument("no closed-form transform for " + phantom.describe());
  KSpaceSamples out;
  out.points.assign(points.begin(), points.end());
  out.values.resize(points.size());
  out.imaging = imaging;
  parallel_for(points.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) out.values[i] = *phantom.fourier(points[i]);
  });
  return out;
}

namespace {

KSpaceSamples synthesize_with(int N, int factor, double fine_spacing,
                              std::span<const Vec3> points, double eps,
                              Imaging imaging, const SublatticeFill& fill) {
  if (!(eps >= 1e-12 && eps <= 1e-2))
    throw InvalidArgument("transform accuracy must lie in [1e-12, 1e-2]");
  KSpaceSamples out;
  out.points.assign(points.begin(), points.end());
  out.imaging = imaging;
  out.values = fine_grid_forward(N, factor, fine_spacing, points, eps, fill);
  const double weight = std::pow(2.0 * kPi, -1.5) * std::pow(fine_spacing, 3);
  for (cplx& v : out.values) v *= weight;
  return out;
}

}  // namespace

KSpaceSamples synthesize_kspace(const Phantom& phantom, const GridSpec& grid,
                                int factor, std::span<const Vec3> points,
                                double eps, Imaging imaging) {
  if (factor < 1) throw InvalidArgument("fine grid factor must be >= 1");
  if (phantom.support_radius() > grid.support_radius)
    throw InvalidArgument("phantom support exceeds r_s");
  const int N = grid.N;
  const double hf = grid.spacing() / factor;
  auto fill = [&](const std::array<int, 3>& q, std::span<cplx> out) {
    parallel_for(static_cast<std::size_t>(N), [&](std::size_t b, std::size_t e) {
      for (std::size_t a1 = b; a1 < e; ++a1) {
        const double r1 = hf * (factor * (static_cast<int>(a1) - N / 2) + q[0]);
        cplx* dst = out.data() + a1 * N * N;
        for (int m2 = -N / 2; m2 < N / 2; ++m2) {
          const double r2 = hf * (factor * m2 + q[1]);
          for (int m3 = -N / 2; m3 < N / 2; ++m3)
            *dst++ = phantom(Vec3(r1, r2, hf * (factor * m3 + q[2])));
        }
      }
    });
  };
  return synthesize_with(N, factor, hf, points, eps, imaging, fill);
}

KSpaceSamples synthesize_kspace(const Volume& fine, int factor,
                                std::span<const Vec3> points, double eps,
                                Imaging imaging) {
  if (factor < 1 || fine.grid.N % factor != 0 || (fine.grid.N / factor) % 2 != 0)
    throw InvalidArgument("fine grid size must be an even multiple of the factor");
  const int N = fine.grid.N / factor;
  auto fill = [&](const std::array<int, 3>& q, std::span<cplx> out) {
    std::size_t i = 0;
    for (int m1 = -N / 2; m1 < N / 2; ++m1)
      for (int m2 = -N / 2; m2 < N / 2; ++m2)
        for (int m3 = -N / 2; m3 < N / 2; ++m3)
          out[i++] = fine.at(factor * m1 + q[0], factor * m2 + q[1], factor * m3 + q[2]);
  };
  return synthesize_with(N, factor, fine.grid.spacing(), points, eps, imaging, fill);
}

PlanarField detector_for(const SampleDesign& design, const WaveParameters& w,
                         Imaging imaging) {
  PlanarField f;
  f.N = design.N();
  f.spacing = 2.0 * kPi / (design.N() * design.frequency_step());
  f.frequency_offset = design.frequency_offset();
  f.distance = w.detector_distance;
  f.imaging = imaging;
  f.values.assign(static_cast<std::size_t>(f.N) * f.N, cplx{});
  return f;
}

namespace {

/// E[j][m] = exp(sign·i k_j r_m).
std::vector<cplx> phase_table(const PlanarField& f, double sign) {
  const int N = f.N;
  std::vector<cplx> e(static_cast<std::size_t>(N) * N);
  for (int j = 0; j < N; ++j)
    for (int m = 0; m < N; ++m)
      e[static_cast<std::size_t>(j) * N + m] =
          std::polar(1.0, sign * f.frequency(j - N / 2) * f.coordinate(m - N / 2));
  return e;
}

/// out[a][c] = scale Σ_{b,d} E[a][b] E[c][d] in[b][d].
std::vector<cplx> separable(const std::vector<cplx>& e, std::span<const cplx> in,
                            int N, double scale) {
  const std::size_t n = static_cast<std::size_t>(N);
  std::vector<cplx> tmp(n * n), out(n * n);
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t c = 0; c < n; ++c) {
      cplx s = 0.0;
      for (std::size_t d = 0; d < n; ++d) s += e[c * n + d] * in[b * n + d];
      tmp[b * n + c] = s;
    }
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t c = 0; c < n; ++c) {
      cplx s = 0.0;
      for (std::size_t b = 0; b < n; ++b) s += e[a * n + b] * tmp[b * n + c];
      out[a * n + c] = scale * s;
    }
  return out;
}

void check_field(const PlanarField& f) {
  if (f.N <= 0 || f.N % 2 != 0) throw InvalidArgument("detector size must be even");
  if (f.values.size() != static_cast<std::size_t>(f.N) * f.N)
    throw InvalidArgument("detector field has the wrong number of samples");
  if (!(f.spacing > 0.0)) throw InvalidArgument("detector spacing must be positive");
}

}  // namespace

std::vector<cplx> planar_spectrum(const PlanarField& field) {
  check_field(field);
  const double scale = field.spacing * field.spacing / (2.0 * kPi);
  return separable(phase_table(field, -1.0), field.values, field.N, scale);
}

void planar_synthesis(std::span<const cplx> spectrum, PlanarField& field) {
  check_field(field);
  if (spectrum.size() != field.values.size())
    throw InvalidArgument("spectrum has the wrong number of samples");
  const double dk = field.frequency_step();
  const int N = field.N;
  // transpose of the forward table with the opposite sign
  auto e = phase_table(field, 1.0);
  std::vector<cplx> et(e.size());
  for (int j = 0; j < N; ++j)
    for (int m = 0; m < N; ++m)
      et[static_cast<std::size_t>(m) * N + j] = e[static_cast<std::size_t>(j) * N + m];
  field.values = separable(et, spectrum, N, dk * dk / (2.0 * kPi));
}

PlanarField kspace_to_field(std::span<const cplx> angle_values,
                            const SampleDesign& design, const WaveParameters& w,
                            Imaging imaging) {
  const auto& disk = design.disk();
  if (angle_values.size() != disk.size())
    throw InvalidArgument("expected one value per disk point of the design");
  PlanarField field = detector_for(design, w, imaging);
  const int N = field.N;
  std::vector<cplx> spectrum(field.values.size());
  const double c = std::sqrt(kPi / 2.0);
  for (std::size_t i = 0; i < disk.size(); ++i) {
    const cplx kap = kappa(disk[i].k1, disk[i].k2, w.k0);
    if (kap.real() <= 0.0) throw SingularityError("kappa = 0 on the design disk");
    const cplx factor = c * cplx(0.0, 1.0) * std::polar(1.0, kap.real() * w.detector_distance) / kap.real();
    spectrum[static_cast<std::size_t>(disk[i].j1 + N / 2) * N + (disk[i].j2 + N / 2)] =
        factor * angle_values[i];
  }
  planar_synthesis(spectrum, field);
  return field;
}

KSpaceSamples field_to_kspace(const PlanarField& field, const SampleDesign& design,
                              int s, const Trajectory& traj,
                              const WaveParameters& w) {
  if (field.N != design.N()) throw InvalidArgument("detector and design sizes differ");
  if (s < 0 || s >= design.S()) throw InvalidArgument("angle index out of range");
  const auto spectrum = planar_spectrum(field);
  const int N = field.N;
  const auto& disk = design.disk();
  KSpaceSamples out;
  out.imaging = field.imaging;
  out.points.reserve(disk.size());
  out.values.reserve(disk.size());
  const double c = -std::sqrt(2.0 / kPi);
  const double t = design.time(s);
  for (const auto& d : disk) {
    const cplx kap = kappa(d.k1, d.k2, w.k0);
    if (kap.real() <= 0.0) throw SingularityError("kappa = 0 on the design disk");
    const cplx factor = c * std::polar(1.0, -kap.real() * field.distance) * kap.real() * cplx(0.0, 1.0);
    out.values.push_back(
        factor * spectrum[static_cast<std::size_t>(d.j1 + N / 2) * N + (d.j2 + N / 2)]);
    out.points.push_back(t_map({d.k1, d.k2, t, field.imaging}, traj, w));
  }
  return out;
}

PlanarField rytov_to_born(const PlanarField& total, const WaveParameters& w) {
  check_field(total);
  PlanarField out = total;
  const cplx u_inc = std::polar(1.0, w.k0 * sign_of(total.imaging) * total.distance);
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    if (total.values[i] == cplx{})
      throw SingularityError("total field vanishes at detector sample " + std::to_string(i));
    out.values[i] = u_inc * std::log(total.values[i] / u_inc);
  }
  return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double unit_open(std::uint64_t bits) {
  // (0, 1]
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace

double gaussian_draw(std::uint64_t seed, std::uint64_t counter) {
  const std::uint64_t key = splitmix64(seed);
  const double u1 = unit_open(splitmix64(key ^ splitmix64(2 * counter)));
  const double u2 = unit_open(splitmix64(key ^ splitmix64(2 * counter + 1)));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

KSpaceSamples add_noise(const KSpaceSamples& samples, const NoiseSpec& spec) {
  double peak = 0.0;
  for (const cplx& v : samples.values) peak = std::max(peak, std::abs(v));
  double delta = spec.level;
  if (spec.relative_level >= 0.0) delta = spec.relative_level * peak;
  if (!(delta >= 0.0)) throw InvalidArgument("noise level must be >= 0");
  KSpaceSamples out = samples;
  NoiseRecord rec;
  rec.level = delta;
  rec.relative_level = peak > 0.0 ? delta / peak : 0.0;
  rec.seed = spec.seed;
  rec.complex_noise = spec.complex_noise;
  out.noise = rec;
  if (delta == 0.0) return out;
  constexpr std::uint64_t kImagStream = 1ULL << 63;
  parallel_for(out.values.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      if (spec.complex_noise) {
        const double s = delta / std::sqrt(2.0);
        out.values[i] += cplx(s * gaussian_draw(spec.seed, i),
                              s * gaussian_draw(spec.seed, i | kImagStream));
      } else {
        out.values[i] += delta * gaussian_draw(spec.seed, i);
      }
    }
  });
  return out;
}

}  // namespace rotodt
