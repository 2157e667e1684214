#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rotodt/common.hpp"
#include "rotodt/geometry.hpp"
#include "rotodt/sampling.hpp"
#include "rotodt/volume.hpp"

namespace rotodt {

/// Solid ellipsoid {r : ‖diag(1/axes) · rotation · (r − center)‖ ≤ 1}.
struct Ellipsoid {
  Vec3 center = Vec3::Zero();
  Vec3 half_axes = Vec3::Ones();
  Mat3 rotation = Mat3::Identity();  // world to body frame
  double value = 1.0;

  bool contains(const Vec3& r) const;
  /// (2π)^{-3/2} ∫ 1_E(r) e^{−i r·y} dr.
  cplx fourier(const Vec3& y) const;
  double extent() const;  // ‖center‖ + max half axis
};

enum class SheppLoganContrast { kModified, kOriginal };

std::string to_string(SheppLoganContrast c);
SheppLoganContrast shepp_logan_contrast_from_string(const std::string& name);

/// Test scattering potentials.
class Phantom {
 public:
  enum class Kind { kBall, kBallWithGap, kSheppLogan, kConstant };

  static Phantom ball(double radius, double amplitude = 1.0);
  /// Ball with the slab |r2| ≤ half_width removed.
  static Phantom ball_with_gap(double radius, double half_width,
                               double amplitude = 1.0);
  /// Ten-ellipsoid head phantom; unit-cube coordinates scaled by `scale`.
  static Phantom shepp_logan(double scale,
                             SheppLoganContrast contrast = SheppLoganContrast::kModified,
                             double amplitude = 1.0);
  /// Unbounded constant; exempt from the support check.
  static Phantom constant(double value);

  Kind kind() const { return kind_; }
  double amplitude() const { return amplitude_; }
  double radius() const { return radius_; }
  double gap_half_width() const { return gap_; }
  const std::vector<Ellipsoid>& ellipsoids() const { return ellipsoids_; }

  double operator()(const Vec3& r) const;
  /// Radius of the smallest origin-centered ball containing the support.
  double support_radius() const;
  /// Closed-form Fourier transform where one exists (ball, Shepp–Logan,
  /// zero amplitude).
  std::optional<cplx> fourier(const Vec3& y) const;
  bool has_fourier() const;

  std::string describe() const;

 private:
  Kind kind_ = Kind::kBall;
  double amplitude_ = 1.0;
  double radius_ = 0.0;
  double gap_ = 0.0;
  SheppLoganContrast contrast_ = SheppLoganContrast::kModified;
  std::vector<Ellipsoid> ellipsoids_;
};

/// Voxel means over an oversample³ sub-grid of step 2r_s/(oversample·N)
/// centered at each voxel; oversample must be odd.
Volume rasterize(const Phantom& phantom, const GridSpec& grid, int oversample = 1);

/// f = k0² (n/n0)² − k0² from a refractive-index volume.
Volume potential_from_index(const Volume& index, const WaveParameters& w);

}  // namespace rotodt
