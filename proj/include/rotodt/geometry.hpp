#pragma once

#include "rotodt/common.hpp"
#include "rotodt/trajectory.hpp"

namespace rotodt {

/// Physical constants of the measurement setup.
struct WaveParameters {
  double wavelength = 1.0;
  double k0 = 2.0 * kPi;
  double support_radius = 1.0;
  double detector_distance = 2.0;
  double background_index = 1.0;

  /// Derives k0 = 2π/λ and validates r_M > r_s > 0, n0 > 0.
  static WaveParameters from_wavelength(double wavelength,
                                        double support_radius,
                                        double detector_distance,
                                        double background_index = 1.0);
  void validate() const;
};

/// Transmission (+1) measures on r3 = r_M, reflection (-1) on r3 = -r_M.
enum class Imaging : int { kTransmission = 1, kReflection = -1 };

inline double sign_of(Imaging imaging) {
  return imaging == Imaging::kTransmission ? 1.0 : -1.0;
}

/// A point (k1, k2, t) of the sampling domain together with its imaging side.
struct KPoint {
  double k1 = 0.0;
  double k2 = 0.0;
  double t = 0.0;
  Imaging imaging = Imaging::kTransmission;
};

/// κ(k1, k2): √(k0² − k1² − k2²) inside the disk, i·√(k1² + k2² − k0²) outside.
cplx kappa(double k1, double k2, double k0);

/// Rodrigues formula (1 − cos α)(n·y) n + cos α y − sin α (n × y).
Vec3 rotate(const Vec3& axis, double angle, const Vec3& y);
Mat3 rotation_matrix(const Vec3& axis, double angle);

/// h = (k1, k2, ±κ − k0); requires k1² + k2² < k0².
Vec3 hemisphere_point(double k1, double k2, double k0, Imaging imaging);

/// T±(k1, k2, t) = R_{n(t), α(t)} h.
Vec3 t_map(const KPoint& p, const Trajectory& traj, const WaveParameters& w);

/// |det ∇T±| at p, closed form in terms of n, n', α, α' and h.
double jacobian(const KPoint& p, const Trajectory& traj,
                const WaveParameters& w);

/// Analytic Banach indicatrix Card(T⁻¹(T(p))) for the presets where it is
/// known: full rotation about a fixed axis ≠ e3 (value 2) and the half
/// rotation α(t) = t ∈ [0, π] about e1 (piecewise). Throws
/// NoAnalyticIndicatrix otherwise.
int indicatrix_analytic(const KPoint& p, const Trajectory& traj,
                        const WaveParameters& w);

/// Half-rotation case table evaluated at a k-space point y.
int half_rotation_indicatrix(const Vec3& y, double k0);

class NoAnalyticIndicatrix : public Error {
 public:
  using Error::Error;
};

/// True if traj is one of the presets accepted by indicatrix_analytic.
bool has_analytic_indicatrix(const Trajectory& traj, Imaging imaging);

/// Number of t ∈ [0, L] solving y·e(t) = −‖y‖²/(2k0), e(t) = R_{n(t),α(t)} e3.
/// This equals Card(T+⁻¹(y)) for 0 < ‖y‖ < √2 k0.
int indicatrix_numeric(const Vec3& y, const Trajectory& traj,
                       const WaveParameters& w);

/// Membership in the k-space coverage of a full rotation about e1.
bool torus_contains(const Vec3& y, const WaveParameters& w, Imaging imaging);

}  // namespace rotodt
