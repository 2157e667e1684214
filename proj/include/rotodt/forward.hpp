#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rotodt/common.hpp"
#include "rotodt/geometry.hpp"
#include "rotodt/sampling.hpp"
#include "rotodt/volume.hpp"

namespace rotodt {

class Phantom;

/// √(2/π)(sin‖ay‖ − ‖ay‖ cos‖ay‖)/‖y‖³, with the Taylor limit near 0.
double analytic_ball_ft(const Vec3& y, double a);

/// Fourier transform values from the closed form of the phantom.
KSpaceSamples analytic_kspace(const Phantom& phantom, std::span<const Vec3> points,
                              Imaging imaging = Imaging::kTransmission);

/// Fourier transform approximated by the discrete transform on the fine grid
/// R_n, n = factor·N: (2π)^{-3/2} (2r_s/n)³ Σ f(r) e^{−i r·y}. The phantom
/// is sampled lazily, the fine volume is never stored.
KSpaceSamples synthesize_kspace(const Phantom& phantom, const GridSpec& grid,
                                int factor, std::span<const Vec3> points,
                                double eps,
                                Imaging imaging = Imaging::kTransmission);
/// Same from stored fine-grid samples; fine.N must be divisible by factor.
KSpaceSamples synthesize_kspace(const Volume& fine, int factor,
                                std::span<const Vec3> points, double eps,
                                Imaging imaging = Imaging::kTransmission);

/// Complex field on a square detector plane r3 = ±r_M. Samples sit at
/// r = spacing·(m1, m2), m ∈ I_N², row-major with m1 slowest. Its 2D
/// spectrum lives on k = frequency_step·(j + frequency_offset), j ∈ I_N²,
/// where frequency_step·spacing = 2π/N.
struct PlanarField {
  int N = 0;
  double spacing = 0.0;
  double frequency_offset = 0.0;
  double distance = 0.0;  // r_M
  Imaging imaging = Imaging::kTransmission;
  std::vector<cplx> values;

  double frequency_step() const { return 2.0 * kPi / (N * spacing); }
  double coordinate(int m) const { return spacing * m; }
  double frequency(int j) const { return frequency_step() * (j + frequency_offset); }
  cplx& at(int m1, int m2) {
    return values[static_cast<std::size_t>(m1 + N / 2) * N + (m2 + N / 2)];
  }
  const cplx& at(int m1, int m2) const {
    return values[static_cast<std::size_t>(m1 + N / 2) * N + (m2 + N / 2)];
  }
};

/// Empty field whose spectrum grid is the design's frequency lattice.
PlanarField detector_for(const SampleDesign& design, const WaveParameters& w,
                         Imaging imaging);

/// F₁₂u(k) = (1/2π) ∫ u(r) e^{−i k·r} dr by the rectangle rule, for all N²
/// lattice frequencies (row-major, j1 slowest).
std::vector<cplx> planar_spectrum(const PlanarField& field);
/// Inverse of planar_spectrum on the same grids.
void planar_synthesis(std::span<const cplx> spectrum, PlanarField& field);

/// Field at the detector predicted by the Born model from the values of Ff on
/// one angle of the design (disk order): F₁₂u = √(π/2) i e^{iκr_M}/κ · Ff,
/// zero outside the disk.
PlanarField kspace_to_field(std::span<const cplx> angle_values,
                            const SampleDesign& design, const WaveParameters& w,
                            Imaging imaging);

/// Inverse relation: Ff = −√(2/π) e^{−iκr_M} κ i F₁₂u on the disk of the
/// design; the points are T±(k1, k2, t_s).
KSpaceSamples field_to_kspace(const PlanarField& field, const SampleDesign& design,
                              int s, const Trajectory& traj,
                              const WaveParameters& w);

/// u_inc φ with φ = Log(u_tot/u_inc), u_inc = e^{i k0 r3} on the plane.
PlanarField rytov_to_born(const PlanarField& total, const WaveParameters& w);

struct NoiseSpec {
  double level = 0.0;              // δ; used when relative_level < 0
  double relative_level = -1.0;    // δ / max|Ff| if >= 0
  std::uint64_t seed = 0;
  bool complex_noise = false;      // draw real and imaginary parts
};

/// Standard normal draw determined only by (seed, counter).
double gaussian_draw(std::uint64_t seed, std::uint64_t counter);

/// g + δ N(0,1) with one independent draw per sample (two when complex).
KSpaceSamples add_noise(const KSpaceSamples& samples, const NoiseSpec& spec);

}  // namespace rotodt
