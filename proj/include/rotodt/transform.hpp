#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "rotodt/common.hpp"
#include "rotodt/nufft.hpp"
#include "rotodt/sampling.hpp"
#include "rotodt/volume.hpp"

namespace rotodt {

// The discrete Fourier operator on R_N,
//
//   (F x)(y) = (2π)^{-3/2} (2r_s/N)³ Σ_j x_j exp(−i (2r_s/N) j·y),
//
// approximates the continuous transform Ff(y) = (2π)^{-3/2} ∫ f e^{−i r·y} dr.
// Its adjoint carries the same constant and exp(+i ...).

/// (2π)^{-3/2} (2r_s/N)³.
double quadrature_weight(const GridSpec& grid);

/// Exact O(N³ M) evaluation.
std::vector<cplx> ndft_direct(const Volume& vol, std::span<const Vec3> points);
Volume ndft_adjoint_direct(std::span<const Vec3> points,
                           std::span<const cplx> values, const GridSpec& grid);

/// Fast F and F* on a fixed point set; ε ∈ [1e-12, 1e-2].
class FourierOperator {
 public:
  FourierOperator(const GridSpec& grid, std::span<const Vec3> points, double eps);

  const GridSpec& grid() const { return grid_; }
  std::size_t num_points() const { return plan_->num_points(); }
  double tolerance() const { return eps_; }

  void forward(std::span<const cplx> x, std::span<cplx> out) const;
  void adjoint(std::span<const cplx> values, std::span<cplx> x) const;

  std::vector<cplx> forward(const Volume& vol) const;
  Volume adjoint(std::span<const cplx> values) const;

 private:
  GridSpec grid_;
  double eps_;
  double weight_;
  std::shared_ptr<const NufftPlan> plan_;
};

std::vector<cplx> nufft_forward(const Volume& vol, std::span<const Vec3> points,
                                double eps);
Volume nufft_adjoint(std::span<const Vec3> points, std::span<const cplx> values,
                     const GridSpec& grid, double eps);

/// Per-iteration RMS residual ‖F x_k − b‖/√M and ‖x_k‖, k = 1 … K.
struct ResidualHistory {
  std::vector<double> residual;
  std::vector<double> solution_norm;

  std::size_t size() const { return residual.size(); }
};

using LinearMap = std::function<void(std::span<const cplx>, std::span<cplx>)>;

/// Called after iteration k (1-based) with the current iterate; returning
/// false stops the solver.
using CgneRecorder = std::function<bool(int k, std::span<const cplx> x,
                                        double residual, double solution_norm)>;

struct CgneResult {
  std::vector<cplx> solution;
  ResidualHistory history;
};

/// Conjugate gradients on F*F x = F*b from x₀ = 0 (CGLS form: one forward
/// and one adjoint application per step).
CgneResult cgne_solve(const LinearMap& forward, const LinearMap& adjoint,
                      std::span<const cplx> data, std::size_t unknowns,
                      int max_iters, const CgneRecorder& recorder = {});

struct CgneVolumeResult {
  Volume volume;
  ResidualHistory history;
};

CgneVolumeResult cgne_solve(const FourierOperator& op,
                            const KSpaceSamples& data, int max_iters,
                            const CgneRecorder& recorder = {});

}  // namespace rotodt
