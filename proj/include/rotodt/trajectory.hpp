#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "rotodt/common.hpp"

namespace rotodt {

/// Orientation of the object at one trajectory parameter: rotation axis n,
/// angle α and their derivatives with respect to t.
struct Pose {
  Vec3 axis;
  Vec3 axis_rate;
  double angle = 0.0;
  double angle_rate = 0.0;
};

/// Rotation history t -> (n(t), α(t)) on [0, L].
///
/// Three kinds exist: a fixed axis with a linear angle, the oscillating axis
/// n(t) = (cos(c sin t), sin(c sin t), 0) with α(t) = t on [0, 2π], and a
/// tabulated history interpolated by cubic splines. Evaluation is read-only
/// and safe to call concurrently.
class Trajectory {
 public:
  enum class Kind { kFixedAxis, kOscillatingAxis, kTabulated };

  /// α(t) = start_angle + rate * t on [0, duration]. The axis is normalized.
  static Trajectory fixed_axis(const Vec3& axis, double duration,
                               double start_angle = 0.0, double rate = 1.0);
  /// Fixed axis swept over the angle range [from, to] with unit rate.
  static Trajectory fixed_axis_range(const Vec3& axis, double from, double to);
  /// α ≡ 0 on [0, duration]; every pose is the identity.
  static Trajectory identity(double duration = 2.0 * kPi);
  static Trajectory oscillating_axis(double c);
  /// Samples must be strictly increasing in t; axes are renormalized.
  static Trajectory tabulated(std::vector<double> t, std::vector<Vec3> axes,
                              std::vector<double> angles);
  /// CSV with header and columns t,n1,n2,n3,alpha.
  static Trajectory from_csv(const std::filesystem::path& path);

  Kind kind() const { return kind_; }
  double duration() const { return duration_; }
  Pose at(double t) const;

  // Parameters of the analytic kinds; meaningless for other kinds.
  const Vec3& fixed_axis_direction() const { return axis_; }
  double start_angle() const { return start_angle_; }
  double angular_rate() const { return rate_; }
  double oscillation() const { return c_; }

  /// Tabulated source samples (empty for analytic kinds).
  const std::vector<double>& table_times() const;
  const std::vector<Vec3>& table_axes() const;
  const std::vector<double>& table_angles() const;

  /// Short human readable description for metadata.
  std::string describe() const;

 private:
  struct Table;

  Kind kind_ = Kind::kFixedAxis;
  double duration_ = 0.0;
  Vec3 axis_ = Vec3::UnitX();
  double start_angle_ = 0.0;
  double rate_ = 1.0;
  double c_ = 0.0;
  std::shared_ptr<const Table> table_;
};

}  // namespace rotodt
