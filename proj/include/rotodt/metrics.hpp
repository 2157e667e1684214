#pragma once

#include <limits>
#include <span>

#include "rotodt/common.hpp"
#include "rotodt/sampling.hpp"
#include "rotodt/volume.hpp"

namespace rotodt {

class Phantom;

struct QualityReport {
  double psnr = 0.0;
  double ssim = 0.0;
  double rmse = 0.0;
};

/// 10 log10(max|truth|² / mean|truth − test|²); +∞ when they coincide.
double psnr(const Volume& truth, const Volume& test);

/// Parameters of the local statistics window.
struct SsimOptions {
  double sigma = 1.5;
  int radius = 5;  // window 2·radius + 1 per axis
  double k1 = 0.01;
  double k2 = 0.03;
  /// Dynamic range D; nonpositive selects max − min of the truth (1 for a
  /// constant truth).
  double data_range = 0.0;
};

/// Mean SSIM of the real parts over voxels whose full window fits inside the
/// volume. Local means and (co)variances use a normalized separable
/// Gaussian.
double ssim3d(const Volume& truth, const Volume& test, const SsimOptions& opt = {});

/// √(mean |a − b|²).
double rmse(std::span<const cplx> a, std::span<const cplx> b);

QualityReport quality(const Volume& truth, const Volume& test);

/// Mean of the phantom over the factor³ neighborhood of each voxel on the
/// grid refined by `factor`.
Volume averaged_truth(const Phantom& phantom, const GridSpec& grid, int factor = 5);

}  // namespace rotodt
