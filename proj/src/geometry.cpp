#include "rotodt/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace rotodt {

WaveParameters WaveParameters::from_wavelength(double wavelength,
                                               double support_radius,
                                               double detector_distance,
                                               double background_index) {
  WaveParameters w;
  w.wavelength = wavelength;
  w.k0 = 2.0 * kPi / wavelength;
  w.support_radius = support_radius;
  w.detector_distance = detector_distance;
  w.background_index = background_index;
  w.validate();
  return w;
}

void WaveParameters::validate() const {
  if (!(wavelength > 0.0) || !(k0 > 0.0))
    throw InvalidArgument("wavelength and k0 must be positive");
  if (std::abs(k0 * wavelength - 2.0 * kPi) > 1e-9 * 2.0 * kPi)
    throw InvalidArgument("k0 must equal 2*pi/wavelength");
  if (!(support_radius > 0.0))
    throw InvalidArgument("support radius must be positive");
  if (!(detector_distance > support_radius))
    throw InvalidArgument("detector distance must exceed the support radius");
  if (!(background_index > 0.0))
    throw InvalidArgument("background index must be positive");
}

cplx kappa(double k1, double k2, double k0) {
  const double d = k0 * k0 - k1 * k1 - k2 * k2;
  if (d >= 0.0) return {std::sqrt(d), 0.0};
  return {0.0, std::sqrt(-d)};
}

Vec3 rotate(const Vec3& axis, double angle, const Vec3& y) {
  if (std::abs(axis.norm() - 1.0) > 1e-9)
    throw InvalidArgument("rotation axis must be a unit vector");
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return (1.0 - c) * axis.dot(y) * axis + c * y - s * axis.cross(y);
}

Mat3 rotation_matrix(const Vec3& axis, double angle) {
  Mat3 r;
  for (int col = 0; col < 3; ++col) r.col(col) = rotate(axis, angle, Vec3::Unit(col));
  return r;
}

namespace {

double inside_kappa(double k1, double k2, double k0) {
  const double d = k0 * k0 - k1 * k1 - k2 * k2;
  if (!(d > 0.0))
    throw InvalidArgument("frequency (" + std::to_string(k1) + ", " +
                          std::to_string(k2) + ") not inside the k0 disk");
  return std::sqrt(d);
}

}  // namespace

Vec3 hemisphere_point(double k1, double k2, double k0, Imaging imaging) {
  const double kap = inside_kappa(k1, k2, k0);
  return {k1, k2, sign_of(imaging) * kap - k0};
}

Vec3 t_map(const KPoint& p, const Trajectory& traj, const WaveParameters& w) {
  const Pose pose = traj.at(p.t);
  return rotate(pose.axis, pose.angle,
                hemisphere_point(p.k1, p.k2, w.k0, p.imaging));
}

double jacobian(const KPoint& p, const Trajectory& traj,
                const WaveParameters& w) {
  const double d = w.k0 * w.k0 - p.k1 * p.k1 - p.k2 * p.k2;
  if (d == 0.0)
    throw SingularityError("jacobian is singular on the boundary kappa = 0");
  const double kap = inside_kappa(p.k1, p.k2, w.k0);
  const Pose pose = traj.at(p.t);
  const Vec3& n = pose.axis;
  const Vec3& dn = pose.axis_rate;
  const Vec3 h(p.k1, p.k2, sign_of(p.imaging) * kap - w.k0);
  const double c = std::cos(pose.angle);
  const double s = std::sin(pose.angle);
  const double nh = n.dot(h);
  const double v3 = (1.0 - c) * (n.z() * dn.dot(h) - dn.z() * nh) -
                    n.z() * n.dot(dn.cross(h)) * s -
                    pose.angle_rate * (n.x() * p.k2 - n.y() * p.k1) +
                    nh * (n.x() * dn.y() - n.y() * dn.x()) * s;
  return w.k0 / kap * std::abs(v3);
}

namespace {

bool near(double a, double b, double tol = 1e-12) {
  return std::abs(a - b) <= tol * std::max(1.0, std::abs(b));
}

bool is_full_fixed_rotation(const Trajectory& traj) {
  return traj.kind() == Trajectory::Kind::kFixedAxis &&
         near(traj.start_angle(), 0.0) && near(traj.angular_rate(), 1.0) &&
         near(traj.duration(), 2.0 * kPi) &&
         std::hypot(traj.fixed_axis_direction().x(),
                    traj.fixed_axis_direction().y()) > 1e-12;
}

bool is_half_rotation_e1(const Trajectory& traj) {
  return traj.kind() == Trajectory::Kind::kFixedAxis &&
         near(traj.start_angle(), 0.0) && near(traj.angular_rate(), 1.0) &&
         near(traj.duration(), kPi) &&
         (traj.fixed_axis_direction() - Vec3::UnitX()).norm() < 1e-12;
}

}  // namespace

bool has_analytic_indicatrix(const Trajectory& traj, Imaging imaging) {
  return is_full_fixed_rotation(traj) ||
         (imaging == Imaging::kTransmission && is_half_rotation_e1(traj));
}

int half_rotation_indicatrix(const Vec3& y, double k0) {
  const double y2 = y.y();
  const double y3 = y.z();
  const double q = y.squaredNorm();
  const double a = 2.0 * k0 * std::abs(y3);
  if (y2 < 0.0) {
    if (a <= q && q <= 2.0 * k0 * std::hypot(y2, y3)) return 2;
    if (a > q) return 1;
    return 0;
  }
  if (y2 > 0.0) return a >= q ? 1 : 0;
  return 1;
}

int indicatrix_analytic(const KPoint& p, const Trajectory& traj,
                        const WaveParameters& w) {
  if (is_full_fixed_rotation(traj)) return 2;
  if (p.imaging == Imaging::kTransmission && is_half_rotation_e1(traj))
    return half_rotation_indicatrix(t_map(p, traj, w), w.k0);
  throw NoAnalyticIndicatrix("no analytic indicatrix for trajectory " +
                             traj.describe() +
                             "; use the numeric or constant mode");
}

int indicatrix_numeric(const Vec3& y, const Trajectory& traj,
                       const WaveParameters& w) {
  const double ynorm = y.norm();
  if (ynorm == 0.0)
    throw InvalidArgument(
        "indicatrix undefined at y = 0 (every t solves the equation)");
  if (!(ynorm < std::sqrt(2.0) * w.k0))
    throw InvalidArgument("numeric indicatrix requires |y| < sqrt(2) k0");

  const double target = -y.squaredNorm() / (2.0 * w.k0);
  const auto residual = [&](double t) {
    const Pose pose = traj.at(t);
    return y.dot(rotate(pose.axis, pose.angle, Vec3::UnitZ())) - target;
  };

  constexpr int kSamples = 4096;
  const double length = traj.duration();
  const double dt = length / (kSamples - 1);
  std::vector<double> ts(kSamples), gs(kSamples);
  for (int i = 0; i < kSamples; ++i) {
    ts[i] = i == kSamples - 1 ? length : i * dt;
    gs[i] = residual(ts[i]);
  }

  const auto bisect = [&](double lo, double glo, double hi) {
    while (hi - lo > 1e-10) {
      const double mid = 0.5 * (lo + hi);
      const double gm = residual(mid);
      if (gm == 0.0) return mid;
      if ((gm < 0.0) == (glo < 0.0)) {
        lo = mid;
        glo = gm;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  };

  std::vector<double> roots;
  const double touch_tol = 1e-9 * std::max(ynorm, 1.0);
  for (int i = 0; i < kSamples; ++i) {
    if (gs[i] == 0.0) {
      roots.push_back(ts[i]);
      continue;
    }
    if (i + 1 < kSamples && gs[i + 1] != 0.0 &&
        (gs[i] < 0.0) != (gs[i + 1] < 0.0)) {
      roots.push_back(bisect(ts[i], gs[i], ts[i + 1]));
      continue;
    }
    // tangential contact: |g| has a local minimum without a sign change
    if (i > 0 && i + 1 < kSamples && std::abs(gs[i]) <= std::abs(gs[i - 1]) &&
        std::abs(gs[i]) <= std::abs(gs[i + 1]) &&
        (gs[i - 1] < 0.0) == (gs[i] < 0.0) &&
        (gs[i + 1] < 0.0) == (gs[i] < 0.0)) {
      // golden-section search for the minimum of |g| on [t_{i-1}, t_{i+1}]
      const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
      double a = ts[i - 1], b = ts[i + 1];
      double c = b - gr * (b - a), d = a + gr * (b - a);
      double fc = std::abs(residual(c)), fd = std::abs(residual(d));
      while (b - a > 1e-10) {
        if (fc < fd) {
          b = d;
          d = c;
          fd = fc;
          c = b - gr * (b - a);
          fc = std::abs(residual(c));
        } else {
          a = c;
          c = d;
          fc = fd;
          d = a + gr * (b - a);
          fd = std::abs(residual(d));
        }
      }
      if (std::min(fc, fd) <= touch_tol) roots.push_back(0.5 * (a + b));
    }
  }

  std::sort(roots.begin(), roots.end());
  const double merge = 1e-6 * length;
  int count = 0;
  double last = -1.0;
  for (double r : roots) {
    if (count == 0 || r - last > merge) ++count;
    last = r;
  }
  return count;
}

bool torus_contains(const Vec3& y, const WaveParameters& w, Imaging imaging) {
  const double k0 = w.k0;
  const double q = y.squaredNorm();
  const double ring = std::hypot(y.y(), y.z()) - k0;
  const bool in_torus = ring * ring + y.x() * y.x() <= k0 * k0;
  if (imaging == Imaging::kTransmission) return q < 2.0 * k0 * k0 && in_torus;
  return q > 2.0 * k0 * k0 && in_torus;
}

}  // namespace rotodt
