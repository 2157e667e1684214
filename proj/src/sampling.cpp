#include "rotodt/sampling.hpp"

#include <cmath>
#include <ostream>

#include "rotodt/parallel.hpp"

namespace rotodt {

std::vector<double> GridSpec::axis() const {
  std::vector<double> a(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) a[i] = coordinate(i - N / 2);
  return a;
}

GridSpec build_grid(int N, double support_radius) {
  if (N <= 0 || N % 2 != 0)
    throw InvalidArgument("grid size N must be a positive even integer, got " +
                          std::to_string(N));
  if (!(support_radius > 0.0))
    throw InvalidArgument("support radius must be positive");
  return GridSpec{N, support_radius};
}

std::string to_string(LatticeRule rule) {
  return rule == LatticeRule::kLinspace ? "linspace" : "integer";
}

LatticeRule lattice_rule_from_string(const std::string& name) {
  if (name == "linspace") return LatticeRule::kLinspace;
  if (name == "integer") return LatticeRule::kIntegerStrict;
  throw InvalidArgument("unknown lattice rule '" + name +
                        "' (expected linspace or integer)");
}

int default_angle_count(int N) {
  return static_cast<int>(std::ceil(4.0 * N / kPi));
}

SampleDesign::SampleDesign(int N, int S, double k0, double duration,
                           LatticeRule rule)
    : N_(N), S_(S), k0_(k0), duration_(duration), rule_(rule) {
  if (N <= 0 || N % 2 != 0)
    throw InvalidArgument("design size N must be a positive even integer");
  if (S < 1) throw InvalidArgument("angle count S must be >= 1");
  if (!(k0 > 0.0) || !(duration > 0.0))
    throw InvalidArgument("k0 and duration must be positive");
  if (rule == LatticeRule::kLinspace) {
    dk_ = 2.0 * k0 / (N - 1);
    offset_ = 0.5;
  } else {
    dk_ = 2.0 * k0 / N;
    offset_ = 0.0;
  }
  const double half = N / 2.0;
  for (int j1 = -N / 2; j1 < N / 2; ++j1) {
    for (int j2 = -N / 2; j2 < N / 2; ++j2) {
      bool keep;
      if (rule == LatticeRule::kLinspace) {
        const double a = j1 + offset_, b = j2 + offset_;
        const double r = (N - 1) / 2.0;
        keep = a * a + b * b <= r * r;
      } else {
        keep = static_cast<double>(j1) * j1 + static_cast<double>(j2) * j2 <
               half * half;
      }
      if (keep) disk_.push_back({j1, j2, frequency(j1), frequency(j2)});
    }
  }
}

DesignPoint SampleDesign::point(std::size_t i) const {
  const std::size_t per = disk_.size();
  const int s = static_cast<int>(i / per);
  const DiskPoint& d = disk_[i % per];
  return {d.j1, d.j2, s, d.k1, d.k2, time(s)};
}

SampleDesign build_design(int N, int S, const WaveParameters& w,
                          double duration, LatticeRule rule) {
  if (S <= 0) S = default_angle_count(N);
  return SampleDesign(N, S, w.k0, duration, rule);
}

std::vector<Vec3> build_kspace_points(const SampleDesign& design,
                                      const Trajectory& traj,
                                      const WaveParameters& w,
                                      Imaging imaging) {
  if (design.time(design.S() - 1) > traj.duration() * (1.0 + 1e-12))
    throw InvalidArgument("trajectory duration does not cover the design");
  const std::size_t per = design.per_angle();
  std::vector<Vec3> out(design.size());
  std::vector<Vec3> hemi(per);
  for (std::size_t p = 0; p < per; ++p) {
    const auto& d = design.disk()[p];
    hemi[p] = hemisphere_point(d.k1, d.k2, w.k0, imaging);
  }
  parallel_for(static_cast<std::size_t>(design.S()), [&](std::size_t b,
                                                          std::size_t e) {
    for (std::size_t s = b; s < e; ++s) {
      const Pose pose = traj.at(design.time(static_cast<int>(s)));
      const Mat3 r = rotation_matrix(pose.axis, pose.angle);
      for (std::size_t p = 0; p < per; ++p) out[s * per + p] = r * hemi[p];
    }
  });
  return out;
}

void write_design_csv(std::ostream& out, const SampleDesign& design,
                      std::span<const Vec3> points) {
  if (points.size() != design.size())
    throw InvalidArgument("point list does not match the design");
  out << "j1,j2,s,k1,k2,t,y1,y2,y3\n";
  out.precision(17);
  for (std::size_t i = 0; i < design.size(); ++i) {
    const DesignPoint p = design.point(i);
    const Vec3& y = points[i];
    out << p.j1 << ',' << p.j2 << ',' << p.s << ',' << p.k1 << ',' << p.k2
        << ',' << p.t << ',' << y.x() << ',' << y.y() << ',' << y.z() << '\n';
  }
}

}  // namespace rotodt
