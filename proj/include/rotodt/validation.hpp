#pragma once

#include <vector>

#include "rotodt/common.hpp"
#include "rotodt/forward.hpp"
#include "rotodt/geometry.hpp"
#include "rotodt/volume.hpp"

namespace rotodt {

class Phantom;

/// Outgoing Helmholtz Green's function e^{i k0 ‖r‖}/(4π‖r‖).
cplx green_kernel(const Vec3& r, double k0);

/// Detector geometry for the direct scattering oracle.
struct DetectorSpec {
  int size = 128;        // samples per axis (even)
  double spacing = 0.5;  // in length units
};

/// Born scattered field Σ f(r') e^{i k0 r3'} G(r − r') ΔV on the plane
/// r3 = ±r_M (midpoint rule over the nonzero voxels).
PlanarField born_direct_scatter(const Volume& f, const WaveParameters& w,
                                Imaging imaging, const DetectorSpec& detector);

struct FdtReport {
  int grid_size = 0;
  double band = 0.0;                 // compared |k| ≤ band
  std::size_t compared = 0;          // number of frequencies
  double relative_error = 0.0;       // vs the reference transform
  double max_pointwise_error = 0.0;  // relative to the largest reference value
  double discrete_relative_error = 0.0;  // vs the discrete transform of f
};

/// Scatters f with the oracle, converts the field to k-space through the
/// Fourier diffraction relation and compares on the disk |k| ≤ band_fraction·k0
/// with the phantom's closed-form transform (or the discrete transform of f
/// when no closed form exists).
FdtReport fdt_check(const Volume& f, const Phantom* phantom, const WaveParameters& w,
                    Imaging imaging, const DetectorSpec& detector,
                    double band_fraction = 0.8);

}  // namespace rotodt
