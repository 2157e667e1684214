#include "rotodt/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_spline.h>

namespace rotodt {

namespace {

struct SplineDeleter {
  void operator()(gsl_spline* s) const { gsl_spline_free(s); }
};
using SplinePtr = std::unique_ptr<gsl_spline, SplineDeleter>;

SplinePtr make_spline(const std::vector<double>& x,
                      const std::vector<double>& y) {
  SplinePtr s(gsl_spline_alloc(gsl_interp_cspline, x.size()));
  if (!s) throw Error("spline allocation failed");
  if (gsl_spline_init(s.get(), x.data(), y.data(), x.size()) != GSL_SUCCESS)
    throw InvalidArgument("spline initialization failed");
  return s;
}

void check_interval(double t, double duration) {
  const double slack = 1e-9 * std::max(1.0, duration);
  if (!(t >= -slack && t <= duration + slack))
    throw InvalidArgument("trajectory parameter t=" + std::to_string(t) +
                          " outside [0, " + std::to_string(duration) + "]");
}

}  // namespace

struct Trajectory::Table {
  std::vector<double> t;
  std::vector<Vec3> axes;
  std::vector<double> angles;
  SplinePtr n1, n2, n3, alpha;
};

Trajectory Trajectory::fixed_axis(const Vec3& axis, double duration,
                                  double start_angle, double rate) {
  const double norm = axis.norm();
  if (!(norm > 0.0) || !std::isfinite(norm))
    throw InvalidArgument("rotation axis must be a nonzero finite vector");
  if (!(duration > 0.0)) throw InvalidArgument("duration must be positive");
  Trajectory tr;
  tr.kind_ = Kind::kFixedAxis;
  tr.axis_ = axis / norm;
  tr.duration_ = duration;
  tr.start_angle_ = start_angle;
  tr.rate_ = rate;
  return tr;
}

Trajectory Trajectory::fixed_axis_range(const Vec3& axis, double from,
                                        double to) {
  if (!(to > from)) throw InvalidArgument("angle range must be increasing");
  return fixed_axis(axis, to - from, from, 1.0);
}

Trajectory Trajectory::identity(double duration) {
  return fixed_axis(Vec3::UnitZ(), duration, 0.0, 0.0);
}

Trajectory Trajectory::oscillating_axis(double c) {
  if (!std::isfinite(c)) throw InvalidArgument("oscillation must be finite");
  Trajectory tr;
  tr.kind_ = Kind::kOscillatingAxis;
  tr.duration_ = 2.0 * kPi;
  tr.c_ = c;
  return tr;
}

Trajectory Trajectory::tabulated(std::vector<double> t, std::vector<Vec3> axes,
                                 std::vector<double> angles) {
  const std::size_t n = t.size();
  if (n < 3 || axes.size() != n || angles.size() != n)
    throw InvalidArgument("tabulated trajectory needs >= 3 aligned samples");
  for (std::size_t i = 1; i < n; ++i)
    if (!(t[i] > t[i - 1]))
      throw InvalidArgument("tabulated times must be strictly increasing");
  if (std::abs(t.front()) > 1e-12)
    throw InvalidArgument("tabulated trajectory must start at t = 0");
  auto table = std::make_shared<Table>();
  std::vector<double> c1(n), c2(n), c3(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double norm = axes[i].norm();
    if (!(norm > 0.0)) throw InvalidArgument("zero axis in table");
    axes[i] /= norm;
    c1[i] = axes[i].x();
    c2[i] = axes[i].y();
    c3[i] = axes[i].z();
  }
  gsl_set_error_handler_off();
  table->n1 = make_spline(t, c1);
  table->n2 = make_spline(t, c2);
  table->n3 = make_spline(t, c3);
  table->alpha = make_spline(t, angles);
  table->t = std::move(t);
  table->axes = std::move(axes);
  table->angles = std::move(angles);

  Trajectory tr;
  tr.kind_ = Kind::kTabulated;
  tr.duration_ = table->t.back();
  tr.table_ = std::move(table);
  return tr;
}

Trajectory Trajectory::from_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open trajectory table " + path.string());
  std::vector<double> t, angles;
  std::vector<Vec3> axes;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (t.empty()) continue;  // header
      throw InvalidArgument("non-numeric row " + std::to_string(line_no) +
                            " in " + path.string());
    }
    if (row.size() != 5)
      throw InvalidArgument("expected columns t,n1,n2,n3,alpha at row " +
                            std::to_string(line_no));
    t.push_back(row[0]);
    axes.emplace_back(row[1], row[2], row[3]);
    angles.push_back(row[4]);
  }
  return tabulated(std::move(t), std::move(axes), std::move(angles));
}

Pose Trajectory::at(double t) const {
  check_interval(t, duration_);
  t = std::clamp(t, 0.0, duration_);
  Pose pose;
  switch (kind_) {
    case Kind::kFixedAxis:
      pose.axis = axis_;
      pose.axis_rate = Vec3::Zero();
      pose.angle = start_angle_ + rate_ * t;
      pose.angle_rate = rate_;
      break;
    case Kind::kOscillatingAxis: {
      const double phi = c_ * std::sin(t);
      const double dphi = c_ * std::cos(t);
      pose.axis = Vec3(std::cos(phi), std::sin(phi), 0.0);
      pose.axis_rate = Vec3(-std::sin(phi) * dphi, std::cos(phi) * dphi, 0.0);
      pose.angle = t;
      pose.angle_rate = 1.0;
      break;
    }
    case Kind::kTabulated: {
      const Table& tb = *table_;
      const Vec3 m(gsl_spline_eval(tb.n1.get(), t, nullptr),
                   gsl_spline_eval(tb.n2.get(), t, nullptr),
                   gsl_spline_eval(tb.n3.get(), t, nullptr));
      const Vec3 dm(gsl_spline_eval_deriv(tb.n1.get(), t, nullptr),
                    gsl_spline_eval_deriv(tb.n2.get(), t, nullptr),
                    gsl_spline_eval_deriv(tb.n3.get(), t, nullptr));
      const double norm = m.norm();
      if (!(norm > 0.0))
        throw SingularityError("interpolated axis vanishes at t=" +
                               std::to_string(t));
      pose.axis = m / norm;
      // derivative of m/|m|: tangential part of m' scaled by 1/|m|
      pose.axis_rate = (dm - pose.axis * pose.axis.dot(dm)) / norm;
      pose.angle = gsl_spline_eval(tb.alpha.get(), t, nullptr);
      pose.angle_rate = gsl_spline_eval_deriv(tb.alpha.get(), t, nullptr);
      break;
    }
  }
  return pose;
}

namespace {
const std::vector<double> kEmptyD;
const std::vector<Vec3> kEmptyV;
}  // namespace

const std::vector<double>& Trajectory::table_times() const {
  return table_ ? table_->t : kEmptyD;
}
const std::vector<Vec3>& Trajectory::table_axes() const {
  return table_ ? table_->axes : kEmptyV;
}
const std::vector<double>& Trajectory::table_angles() const {
  return table_ ? table_->angles : kEmptyD;
}

std::string Trajectory::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::kFixedAxis:
      os << "fixed-axis n=(" << axis_.x() << "," << axis_.y() << ","
         << axis_.z() << ") alpha=" << start_angle_ << "+" << rate_
         << "*t, L=" << duration_;
      break;
    case Kind::kOscillatingAxis:
      os << "oscillating-axis c=" << c_ << ", L=" << duration_;
      break;
    case Kind::kTabulated:
      os << "tabulated " << table_->t.size() << " samples, L=" << duration_;
      break;
  }
  return os.str();
}

}  // namespace rotodt
