#include "rotodt/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "rotodt/parallel.hpp"
#include "rotodt/phantoms.hpp"

namespace rotodt {

namespace {

void check_same_grid(const Volume& a, const Volume& b) {
  if (!(a.grid == b.grid) || a.size() != b.size())
    throw InvalidArgument("volumes are defined on different grids");
}

/// Separable Gaussian filter along one axis of an N³ array, without
/// boundary handling: only outputs at distance ≥ radius from the faces are
/// later used.
void filter_axis(const std::vector<double>& in, std::vector<double>& out, int N,
                 int axis, const std::vector<double>& kernel) {
  const int r = static_cast<int>(kernel.size() / 2);
  const std::size_t n = static_cast<std::size_t>(N);
  const std::size_t stride = axis == 0 ? n * n : axis == 1 ? n : 1;
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t i0 = b; i0 < e; ++i0)
      for (std::size_t i1 = 0; i1 < n; ++i1)
        for (std::size_t i2 = 0; i2 < n; ++i2) {
          const std::size_t idx = (i0 * n + i1) * n + i2;
          const std::size_t pos = axis == 0 ? i0 : axis == 1 ? i1 : i2;
          if (pos < static_cast<std::size_t>(r) || pos + r >= n) {
            out[idx] = 0.0;
            continue;
          }
          double s = 0.0;
          const double* p = in.data() + idx - r * stride;
          for (int k = 0; k <= 2 * r; ++k) s += kernel[k] * p[k * stride];
          out[idx] = s;
        }
  });
}

std::vector<double> smooth(const std::vector<double>& v, int N,
                           const std::vector<double>& kernel) {
  std::vector<double> a(v.size()), b(v.size());
  filter_axis(v, a, N, 0, kernel);
  filter_axis(a, b, N, 1, kernel);
  filter_axis(b, a, N, 2, kernel);
  return a;
}

}  // namespace

double psnr(const Volume& truth, const Volume& test) {
  check_same_grid(truth, test);
  double peak = 0.0, sse = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    peak = std::max(peak, std::norm(truth.values[i]));
    sse += std::norm(truth.values[i] - test.values[i]);
  }
  if (peak == 0.0) throw InvalidArgument("PSNR undefined for an all-zero reference");
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak / (sse / static_cast<double>(truth.size())));
}

double ssim3d(const Volume& truth, const Volume& test, const SsimOptions& opt) {
  check_same_grid(truth, test);
  const int N = truth.grid.N;
  const int r = opt.radius;
  if (r < 0 || !(opt.sigma > 0.0)) throw InvalidArgument("invalid SSIM window");
  if (N < 2 * r + 1) throw InvalidArgument("volume smaller than the SSIM window");
  std::vector<double> kernel(2 * r + 1);
  double ksum = 0.0;
  for (int k = -r; k <= r; ++k) {
    kernel[k + r] = std::exp(-0.5 * k * k / (opt.sigma * opt.sigma));
    ksum += kernel[k + r];
  }
  for (double& k : kernel) k /= ksum;

  const auto x = real_part(truth);
  const auto y = real_part(test);
  double range = opt.data_range;
  if (!(range > 0.0)) {
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    range = *hi - *lo;
    if (range == 0.0) range = 1.0;
  }
  const double c1 = std::pow(opt.k1 * range, 2);
  const double c2 = std::pow(opt.k2 * range, 2);

  std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto ux = smooth(x, N, kernel);
  const auto uy = smooth(y, N, kernel);
  const auto uxx = smooth(xx, N, kernel);
  const auto uyy = smooth(yy, N, kernel);
  const auto uxy = smooth(xy, N, kernel);

  double total = 0.0;
  std::size_t count = 0;
  const std::size_t n = static_cast<std::size_t>(N);
  for (int i0 = r; i0 < N - r; ++i0)
    for (int i1 = r; i1 < N - r; ++i1)
      for (int i2 = r; i2 < N - r; ++i2) {
        const std::size_t i = (i0 * n + i1) * n + i2;
        const double vx = uxx[i] - ux[i] * ux[i];
        const double vy = uyy[i] - uy[i] * uy[i];
        const double cxy = uxy[i] - ux[i] * uy[i];
        const double num = (2 * ux[i] * uy[i] + c1) * (2 * cxy + c2);
        const double den = (ux[i] * ux[i] + uy[i] * uy[i] + c1) * (vx + vy + c2);
        total += num / den;
        ++count;
      }
  return total / static_cast<double>(count);
}

double rmse(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.size() != b.size()) throw InvalidArgument("rmse of arrays of different length");
  if (a.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
  return std::sqrt(s / static_cast<double>(a.size()));
}

QualityReport quality(const Volume& truth, const Volume& test) {
  QualityReport q;
  q.psnr = psnr(truth, test);
  q.ssim = ssim3d(truth, test);
  q.rmse = rmse(truth.values, test.values);
  return q;
}

Volume averaged_truth(const Phantom& phantom, const GridSpec& grid, int factor) {
  return rasterize(phantom, grid, factor);
}

}  // namespace rotodt
