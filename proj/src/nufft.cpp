#include "rotodt/nufft.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <string>

#include <fftw3.h>
#include <gsl/gsl_integration.h>

#include "rotodt/parallel.hpp"

namespace rotodt {

namespace {

constexpr int kOversampling = 2;
constexpr int kMaxWidth = 16;

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(cplx* p) const { fftw_free(p); }
};
using GridBuffer = std::unique_ptr<cplx[], FftwFree>;

GridBuffer alloc_grid(std::size_t count) {
  auto* p = static_cast<cplx*>(fftw_malloc(sizeof(cplx) * count));
  if (p == nullptr) throw std::bad_alloc();
  std::fill_n(p, count, cplx{});
  return GridBuffer(p);
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

inline int wrap(int i, int n) {
  const int r = i % n;
  return r < 0 ? r + n : r;
}

/// 3D FFT of an n³ grid whose spectrum lives on the N³ "mode" corner
/// set {0..N/2−1} ∪ {n−N/2..n−1} per axis. One direction fills the grid from
/// modes, the other only needs the mode outputs, so 1D passes over rows that
/// are identically zero (or unused) are skipped.
class PrunedFft3d {
 public:
  PrunedFft3d(int n, int modes) : n_(n), modes_(modes) {
    for (int i = 0; i < modes / 2; ++i) rows_.push_back(i);
    for (int i = n - modes / 2; i < n; ++i) rows_.push_back(i);
  }

  int n() const { return n_; }
  std::size_t size() const {
    return static_cast<std::size_t>(n_) * n_ * static_cast<std::size_t>(n_);
  }

  /// Modes -> grid with exp(+2πi j l / n).
  void synthesize(cplx* g) const {
    ensure_plans(g);
    const std::size_t n = n_;
    const std::size_t half = modes_ / 2;
    parallel_for(rows_.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t r = b; r < e; ++r) {
        cplx* slab = g + rows_[r] * n * n;
        fftw_execute_dft(a_back_.get(), as_fftw(slab), as_fftw(slab));
        cplx* upper = slab + (n - half) * n;
        fftw_execute_dft(a_back_.get(), as_fftw(upper), as_fftw(upper));
        fftw_execute_dft(b_back_.get(), as_fftw(slab), as_fftw(slab));
      }
    });
    parallel_for(n, [&](std::size_t b, std::size_t e) {
      for (std::size_t i2 = b; i2 < e; ++i2) {
        cplx* col = g + i2 * n;
        fftw_execute_dft(c_back_.get(), as_fftw(col), as_fftw(col));
      }
    });
  }

  /// Grid -> modes with exp(−2πi j l / n); only mode entries are valid after.
  void analyze(cplx* g) const {
    ensure_plans(g);
    const std::size_t n = n_;
    const std::size_t half = modes_ / 2;
    parallel_for(n, [&](std::size_t b, std::size_t e) {
      for (std::size_t i2 = b; i2 < e; ++i2) {
        cplx* col = g + i2 * n;
        fftw_execute_dft(c_fwd_.get(), as_fftw(col), as_fftw(col));
      }
    });
    parallel_for(rows_.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t r = b; r < e; ++r) {
        cplx* slab = g + rows_[r] * n * n;
        fftw_execute_dft(b_fwd_.get(), as_fftw(slab), as_fftw(slab));
        fftw_execute_dft(a_fwd_.get(), as_fftw(slab), as_fftw(slab));
        cplx* upper = slab + (n - half) * n;
        fftw_execute_dft(a_fwd_.get(), as_fftw(upper), as_fftw(upper));
      }
    });
  }

 private:
  void ensure_plans(cplx* g) const {
    std::call_once(once_, [&] {
      std::lock_guard lock(planner_mutex());
      const int n = n_;
      const int len[1] = {n};
      auto make = [&](int howmany, int stride, int dist, int sign) {
        fftw_plan p = fftw_plan_many_dft(1, len, howmany, as_fftw(g), nullptr,
                                         stride, dist, as_fftw(g), nullptr,
                                         stride, dist, sign, FFTW_ESTIMATE);
        if (p == nullptr) throw Error("FFTW planning failed");
        return Plan(p);
      };
      a_back_ = make(modes_ / 2, 1, n, FFTW_BACKWARD);
      b_back_ = make(n, n, 1, FFTW_BACKWARD);
      c_back_ = make(n, n * n, 1, FFTW_BACKWARD);
      a_fwd_ = make(modes_ / 2, 1, n, FFTW_FORWARD);
      b_fwd_ = make(n, n, 1, FFTW_FORWARD);
      c_fwd_ = make(n, n * n, 1, FFTW_FORWARD);
    });
  }

  int n_;
  int modes_;
  std::vector<std::size_t> rows_;
  mutable std::once_flag once_;
  mutable Plan a_back_, b_back_, c_back_, a_fwd_, b_fwd_, c_fwd_;
};

/// Kernel values on the w fine cells starting at the returned index.
inline int window(const EsKernel& k, double s, double* vals) {
  const int w = k.width;
  const int l0 = static_cast<int>(std::ceil(s - 0.5 * w));
  const double inv = 2.0 / w;
  for (int a = 0; a < w; ++a) {
    const double z = (s - (l0 + a)) * inv;
    const double u = 1.0 - z * z;
    vals[a] = u > 0.0 ? std::exp(k.beta * (std::sqrt(u) - 1.0)) : 0.0;
  }
  return l0;
}

/// Scaled fine-grid coordinates of the points, checked against the band.
std::vector<double> fine_coordinates(std::span<const Vec3> points,
                                     double spacing, int fine, double limit) {
  std::vector<double> s(points.size() * 3);
  const double scale = -spacing * fine / (2.0 * kPi);
  for (std::size_t p = 0; p < points.size(); ++p) {
    for (int d = 0; d < 3; ++d) {
      const double theta = spacing * points[p][d];
      if (!(std::abs(theta) <= limit * (1.0 + 1e-12)))
        throw InvalidArgument(
            "nonuniform point outside the representable band: |y_" +
            std::to_string(d + 1) + "| = " + std::to_string(std::abs(points[p][d])) +
            " > " + std::to_string(limit / spacing));
      s[3 * p + d] = scale * points[p][d];
    }
  }
  return s;
}

/// Cache-friendly ordering by coarse fine-grid cell.
std::vector<std::size_t> sort_points(const std::vector<double>& s, int n) {
  const std::size_t count = s.size() / 3;
  std::vector<std::uint64_t> key(count);
  constexpr int kBin = 16;
  const std::uint64_t bins = static_cast<std::uint64_t>(n / kBin + 1);
  for (std::size_t p = 0; p < count; ++p) {
    std::uint64_t k = 0;
    for (int d = 0; d < 3; ++d)
      k = k * bins +
          static_cast<std::uint64_t>(wrap(static_cast<int>(std::floor(s[3 * p + d])), n) / kBin);
    key[p] = k;
  }
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
  return order;
}

}  // namespace

EsKernel EsKernel::for_tolerance(double eps) {
  if (!(eps >= 1e-14 && eps < 1.0))
    throw InvalidArgument("NUFFT tolerance must lie in [1e-14, 1)");
  EsKernel k;
  k.width = std::clamp(static_cast<int>(std::ceil(-std::log10(eps))) + 2, 2, kMaxWidth);
  const double ratio = k.width == 2 ? 2.20 : k.width == 3 ? 2.26 : k.width == 4 ? 2.38 : 2.30;
  k.beta = ratio * k.width;
  return k;
}

double EsKernel::operator()(double z) const {
  const double x = 2.0 * z / width;
  const double u = 1.0 - x * x;
  return u > 0.0 ? std::exp(beta * (std::sqrt(u) - 1.0)) : 0.0;
}

std::vector<double> EsKernel::fourier_series(int fine_size, int max_mode) const {
  const int nodes = 4 * width + 48;
  gsl_integration_glfixed_table* table = gsl_integration_glfixed_table_alloc(nodes);
  if (table == nullptr) throw Error("quadrature table allocation failed");
  std::vector<double> z(nodes), wq(nodes), f(nodes);
  for (int i = 0; i < nodes; ++i) {
    gsl_integration_glfixed_point(0.0, 0.5 * width, i, &z[i], &wq[i], table);
    f[i] = (*this)(z[i]);
  }
  gsl_integration_glfixed_table_free(table);
  std::vector<double> out(static_cast<std::size_t>(max_mode) + 1);
  for (int k = 0; k <= max_mode; ++k) {
    double acc = 0.0;
    const double omega = 2.0 * kPi * k / fine_size;
    for (int i = 0; i < nodes; ++i) acc += wq[i] * f[i] * std::cos(omega * z[i]);
    out[k] = 2.0 * acc;
  }
  return out;
}

struct NufftPlan::Impl {
  int N = 0;
  int n = 0;
  EsKernel kernel;
  std::vector<double> correction;  // 1/ψ̂(j) at j + N/2
  std::vector<double> s;           // sorted fine coordinates
  std::vector<std::size_t> order;  // sorted slot -> original point
  std::unique_ptr<PrunedFft3d> fft;

  void modes_to_grid(std::span<const cplx> modes, cplx* g) const {
    const int half = N / 2;
    parallel_for(static_cast<std::size_t>(N), [&](std::size_t b, std::size_t e) {
      for (std::size_t a1 = b; a1 < e; ++a1) {
        const int j1 = static_cast<int>(a1) - half;
        const std::size_t i1 = wrap(j1, n);
        for (int j2 = -half; j2 < half; ++j2) {
          const std::size_t i2 = wrap(j2, n);
          const double c12 = correction[a1] * correction[j2 + half];
          const cplx* src = modes.data() + (a1 * N + (j2 + half)) * N;
          cplx* dst = g + (i1 * n + i2) * n;
          for (int j3 = -half; j3 < half; ++j3)
            dst[wrap(j3, n)] = src[j3 + half] * (c12 * correction[j3 + half]);
        }
      }
    });
  }

  void grid_to_modes(const cplx* g, std::span<cplx> modes) const {
    const int half = N / 2;
    parallel_for(static_cast<std::size_t>(N), [&](std::size_t b, std::size_t e) {
      for (std::size_t a1 = b; a1 < e; ++a1) {
        const int j1 = static_cast<int>(a1) - half;
        const std::size_t i1 = wrap(j1, n);
        for (int j2 = -half; j2 < half; ++j2) {
          const std::size_t i2 = wrap(j2, n);
          const double c12 = correction[a1] * correction[j2 + half];
          const cplx* src = g + (i1 * n + i2) * n;
          cplx* dst = modes.data() + (a1 * N + (j2 + half)) * N;
          for (int j3 = -half; j3 < half; ++j3)
            dst[j3 + half] = src[wrap(j3, n)] * (c12 * correction[j3 + half]);
        }
      }
    });
  }
};

NufftPlan::NufftPlan(int N, double spacing, std::span<const Vec3> points,
                     double eps)
    : impl_(std::make_unique<Impl>()) {
  if (N <= 0 || N % 2 != 0) throw InvalidArgument("NUFFT mode count must be even");
  if (!(spacing > 0.0)) throw InvalidArgument("grid spacing must be positive");
  Impl& im = *impl_;
  im.N = N;
  im.kernel = EsKernel::for_tolerance(eps);
  // fine size: oversampled, even, and at least two kernel widths
  im.n = std::max(kOversampling * N, 2 * im.kernel.width);
  im.n += im.n % 2;
  const auto phi = im.kernel.fourier_series(im.n, N / 2);
  im.correction.resize(static_cast<std::size_t>(N));
  for (int j = -N / 2; j < N / 2; ++j) im.correction[j + N / 2] = 1.0 / phi[std::abs(j)];
  auto raw = fine_coordinates(points, spacing, im.n, kPi);
  im.order = sort_points(raw, im.n);
  im.s.resize(raw.size());
  for (std::size_t p = 0; p < im.order.size(); ++p)
    for (int d = 0; d < 3; ++d) im.s[3 * p + d] = raw[3 * im.order[p] + d];
  im.fft = std::make_unique<PrunedFft3d>(im.n, N);
}

NufftPlan::~NufftPlan() = default;
NufftPlan::NufftPlan(NufftPlan&&) noexcept = default;
NufftPlan& NufftPlan::operator=(NufftPlan&&) noexcept = default;

int NufftPlan::modes() const { return impl_->N; }
int NufftPlan::fine_size() const { return impl_->n; }
int NufftPlan::kernel_width() const { return impl_->kernel.width; }
std::size_t NufftPlan::num_points() const { return impl_->order.size(); }

namespace {

/// out[p] = Σ_window ψ ψ ψ · grid, for a grid of side n indexed with
/// periodic wrap (offset 0) or, when offset != 0, a non-periodic box whose
/// first cell is at fine index `offset`.
void interpolate(const EsKernel& ker, const cplx* g, int n, bool periodic,
                 int offset, std::span<const double> s,
                 std::span<const std::size_t> order, std::span<cplx> out) {
  const int w = ker.width;
  const std::size_t nn = static_cast<std::size_t>(n);
  parallel_for(order.size(), [&](std::size_t b, std::size_t e) {
    double v1[kMaxWidth], v2[kMaxWidth], v3[kMaxWidth];
    int i1[kMaxWidth], i2[kMaxWidth];
    for (std::size_t p = b; p < e; ++p) {
      const int l1 = window(ker, s[3 * p], v1);
      const int l2 = window(ker, s[3 * p + 1], v2);
      const int l3 = window(ker, s[3 * p + 2], v3);
      for (int a = 0; a < w; ++a) {
        i1[a] = periodic ? wrap(l1 + a, n) : l1 + a - offset;
        i2[a] = periodic ? wrap(l2 + a, n) : l2 + a - offset;
      }
      const int start3 = periodic ? wrap(l3, n) : l3 - offset;
      const bool contiguous = start3 + w <= n;
      double re = 0.0, im = 0.0;
      for (int a = 0; a < w; ++a) {
        for (int c = 0; c < w; ++c) {
          const double* row = reinterpret_cast<const double*>(
              g + (static_cast<std::size_t>(i1[a]) * nn + static_cast<std::size_t>(i2[c])) * nn);
          double rr = 0.0, ri = 0.0;
          if (contiguous) {
            const double* q = row + 2 * start3;
            for (int d = 0; d < w; ++d) {
              rr += q[2 * d] * v3[d];
              ri += q[2 * d + 1] * v3[d];
            }
          } else {
            for (int d = 0; d < w; ++d) {
              const int idx = wrap(start3 + d, n);
              rr += row[2 * idx] * v3[d];
              ri += row[2 * idx + 1] * v3[d];
            }
          }
          const double k12 = v1[a] * v2[c];
          re += rr * k12;
          im += ri * k12;
        }
      }
      out[order[p]] = {re, im};
    }
  });
}

}  // namespace

void NufftPlan::forward(std::span<const cplx> modes, std::span<cplx> out) const {
  const Impl& im = *impl_;
  if (modes.size() != static_cast<std::size_t>(im.N) * im.N * im.N)
    throw InvalidArgument("mode array has the wrong size");
  if (out.size() != im.order.size())
    throw InvalidArgument("output array has the wrong size");
  GridBuffer g = alloc_grid(im.fft->size());
  im.modes_to_grid(modes, g.get());
  im.fft->synthesize(g.get());
  interpolate(im.kernel, g.get(), im.n, true, 0, im.s, im.order, out);
}

void NufftPlan::adjoint(std::span<const cplx> values, std::span<cplx> modes) const {
  const Impl& im = *impl_;
  if (modes.size() != static_cast<std::size_t>(im.N) * im.N * im.N)
    throw InvalidArgument("mode array has the wrong size");
  if (values.size() != im.order.size())
    throw InvalidArgument("value array has the wrong size");
  GridBuffer g = alloc_grid(im.fft->size());
  const int w = im.kernel.width;
  const int n = im.n;
  const std::size_t nn = static_cast<std::size_t>(n);
  const int workers = std::max(1, std::min(num_threads(), n));
  // each worker owns a slab of first-axis rows and skips other contributions
  parallel_for(static_cast<std::size_t>(workers), [&](std::size_t b, std::size_t e) {
    for (std::size_t worker = b; worker < e; ++worker) {
      const int row_lo = static_cast<int>(n * worker / workers);
      const int row_hi = static_cast<int>(n * (worker + 1) / workers);
      double v1[kMaxWidth], v2[kMaxWidth], v3[kMaxWidth];
      int i1[kMaxWidth], i2[kMaxWidth], i3[kMaxWidth];
      for (std::size_t p = 0; p < im.order.size(); ++p) {
        const int l1 = window(im.kernel, im.s[3 * p], v1);
        bool touches = workers == 1;
        for (int a = 0; a < w; ++a) {
          i1[a] = wrap(l1 + a, n);
          touches = touches || (i1[a] >= row_lo && i1[a] < row_hi);
        }
        if (!touches) continue;
        const int l2 = window(im.kernel, im.s[3 * p + 1], v2);
        const int l3 = window(im.kernel, im.s[3 * p + 2], v3);
        for (int a = 0; a < w; ++a) {
          i2[a] = wrap(l2 + a, n);
          i3[a] = wrap(l3 + a, n);
        }
        const int start3 = i3[0];
        const bool contiguous = start3 + w <= n;
        const cplx val = values[im.order[p]];
        for (int a = 0; a < w; ++a) {
          if (i1[a] < row_lo || i1[a] >= row_hi) continue;
          const double ka = v1[a];
          for (int c = 0; c < w; ++c) {
            const double k12 = ka * v2[c];
            const double vr = val.real() * k12, vi = val.imag() * k12;
            double* row = reinterpret_cast<double*>(
                g.get() + (static_cast<std::size_t>(i1[a]) * nn + static_cast<std::size_t>(i2[c])) * nn);
            if (contiguous) {
              double* q = row + 2 * start3;
              for (int d = 0; d < w; ++d) {
                q[2 * d] += vr * v3[d];
                q[2 * d + 1] += vi * v3[d];
              }
            } else {
              for (int d = 0; d < w; ++d) {
                row[2 * i3[d]] += vr * v3[d];
                row[2 * i3[d] + 1] += vi * v3[d];
              }
            }
          }
        }
      }
    }
  });
  im.fft->analyze(g.get());
  im.grid_to_modes(g.get(), modes);
}

std::vector<cplx> fine_grid_forward(int N, int factor, double fine_spacing,
                                    std::span<const Vec3> points, double eps,
                                    const SublatticeFill& fill) {
  if (N <= 0 || N % 2 != 0) throw InvalidArgument("coarse size must be even");
  if (factor < 1) throw InvalidArgument("fine factor must be >= 1");
  if (!(fine_spacing > 0.0)) throw InvalidArgument("fine spacing must be positive");
  const EsKernel ker = EsKernel::for_tolerance(eps);
  const int w = ker.width;
  int m = std::max(kOversampling * N, 2 * w);
  m += m % 2;
  const long fine_size = static_cast<long>(factor) * m;  // n_F

  // fine coordinates s = θ n_F / 2π with θ = −h_f y; the points reach at most
  // |θ| ≤ π / D, i.e. |s| ≤ m / 2
  auto raw = fine_coordinates(points, fine_spacing, static_cast<int>(fine_size),
                              kPi / factor);
  const int lmin = -m / 2 - w / 2 - 2;
  const int box = m + w + 5;
  const std::size_t bb = static_cast<std::size_t>(box);
  std::vector<std::size_t> order(points.size());
  {
    // sort on the box coordinates
    std::vector<double> shifted(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) shifted[i] = raw[i] - lmin;
    order = sort_points(shifted, box);
  }
  std::vector<double> s(raw.size());
  for (std::size_t p = 0; p < order.size(); ++p)
    for (int d = 0; d < 3; ++d) s[3 * p + d] = raw[3 * order[p] + d];

  const int fine_modes = factor * N;
  const auto phi = ker.fourier_series(static_cast<int>(fine_size), fine_modes / 2);
  const auto inv_phi = [&](int J) { return 1.0 / phi[std::abs(J)]; };

  // phase tables e^{2πi q l / n_F} over the box, per residue q
  std::vector<std::vector<cplx>> phase(static_cast<std::size_t>(factor),
                                       std::vector<cplx>(bb));
  for (int q = 0; q < factor; ++q)
    for (int l = 0; l < box; ++l) {
      const double arg = 2.0 * kPi * static_cast<double>(q) *
                         static_cast<double>(l + lmin) / static_cast<double>(fine_size);
      phase[q][l] = std::polar(1.0, arg);
    }
  std::vector<int> box_to_grid(bb);
  for (int l = 0; l < box; ++l) box_to_grid[l] = wrap(l + lmin, m);

  std::vector<cplx> accum(bb * bb * bb);
  std::vector<cplx> sub(static_cast<std::size_t>(N) * N * N);
  PrunedFft3d fft(m, N);
  GridBuffer g = alloc_grid(fft.size());
  const std::size_t mm = static_cast<std::size_t>(m);
  const int half = N / 2;

  for (int q1 = 0; q1 < factor; ++q1)
    for (int q2 = 0; q2 < factor; ++q2)
      for (int q3 = 0; q3 < factor; ++q3) {
        fill({q1, q2, q3}, sub);
        std::fill_n(g.get(), fft.size(), cplx{});
        for (int a1 = 0; a1 < N; ++a1) {
          const double c1 = inv_phi(factor * (a1 - half) + q1);
          const std::size_t i1 = wrap(a1 - half, m);
          for (int a2 = 0; a2 < N; ++a2) {
            const double c12 = c1 * inv_phi(factor * (a2 - half) + q2);
            const std::size_t i2 = wrap(a2 - half, m);
            const cplx* src = sub.data() + (static_cast<std::size_t>(a1) * N + a2) * N;
            cplx* dst = g.get() + (i1 * mm + i2) * mm;
            for (int a3 = 0; a3 < N; ++a3)
              dst[wrap(a3 - half, m)] = src[a3] * (c12 * inv_phi(factor * (a3 - half) + q3));
          }
        }
        fft.synthesize(g.get());
        const auto& p1 = phase[q1];
        const auto& p2 = phase[q2];
        const auto& p3 = phase[q3];
        parallel_for(bb, [&](std::size_t b, std::size_t e) {
          for (std::size_t l1 = b; l1 < e; ++l1) {
            const std::size_t i1 = box_to_grid[l1];
            for (std::size_t l2 = 0; l2 < bb; ++l2) {
              const cplx ph12 = p1[l1] * p2[l2];
              const cplx* row = g.get() + (i1 * mm + box_to_grid[l2]) * mm;
              cplx* acc = accum.data() + (l1 * bb + l2) * bb;
              for (std::size_t l3 = 0; l3 < bb; ++l3)
                acc[l3] += (ph12 * p3[l3]) * row[box_to_grid[l3]];
            }
          }
        });
      }

  std::vector<cplx> out(points.size());
  interpolate(ker, accum.data(), box, false, lmin, s, order, out);
  return out;
}

}  // namespace rotodt
