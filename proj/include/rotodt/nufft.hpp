#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "rotodt/common.hpp"

namespace rotodt {

/// Exponential-of-semicircle window ψ(z) = exp(β(√(1 − (2z/w)²) − 1)),
/// supported on |z| < w/2 (z in fine-grid cells).
struct EsKernel {
  int width = 0;
  double beta = 0.0;

  /// Width and shape chosen for relative accuracy eps at oversampling 2
  /// (one cell wider than the usual log10(1/eps) + 1 rule).
  static EsKernel for_tolerance(double eps);

  double operator()(double z) const;
  /// ψ̂(k) = ∫ ψ(z) cos(2π k z / n) dz for k = 0 … max_mode.
  std::vector<double> fourier_series(int fine_size, int max_mode) const;
};

/// Type-2/type-1 nonuniform FFT on an N³ mode grid with spacing h:
///
///   forward:  out_p = Σ_j x_j exp(−i h j·y_p),   j ∈ I_N³
///   adjoint:  x_j   = Σ_p g_p exp(+i h j·y_p)
///
/// Points must lie in the band [−π/h, π/h]³. The plan owns the sorted point
/// geometry; forward/adjoint allocate their own work grids and may be called
/// concurrently.
class NufftPlan {
 public:
  NufftPlan(int N, double spacing, std::span<const Vec3> points, double eps);
  ~NufftPlan();
  NufftPlan(const NufftPlan&) = delete;
  NufftPlan& operator=(const NufftPlan&) = delete;
  NufftPlan(NufftPlan&&) noexcept;
  NufftPlan& operator=(NufftPlan&&) noexcept;

  void forward(std::span<const cplx> modes, std::span<cplx> out) const;
  void adjoint(std::span<const cplx> values, std::span<cplx> modes) const;

  int modes() const;
  int fine_size() const;
  int kernel_width() const;
  std::size_t num_points() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Fills the N³ sub-lattice J = D·m + q (m ∈ I_N³, row-major, m1 slowest) of
/// a fine grid with D·N points per axis.
using SublatticeFill =
    std::function<void(const std::array<int, 3>& q, std::span<cplx> out)>;

/// Forward sums Σ_J f_J exp(−i h_f J·y_p) over a fine grid J ∈ I_{DN}³ for
/// points inside the coarse band [−π/(D h_f), π/(D h_f)]³. The fine grid is
/// never stored: it is consumed as D³ polyphase sub-lattices, each going
/// through an N-sized oversampled FFT, and the results are combined on the
/// part of the fine frequency grid the points can reach.
std::vector<cplx> fine_grid_forward(int N, int factor, double fine_spacing,
                                    std::span<const Vec3> points, double eps,
                                    const SublatticeFill& fill);

}  // namespace rotodt
