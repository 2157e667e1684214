#include <cmath>
#include <set>
#include <sstream>
#include <string>

#include "doctest.h"
#include "rotodt/sampling.hpp"
#include "rotodt/trajectory.hpp"

using namespace rotodt;

TEST_CASE("grid layout") {
  const GridSpec g = build_grid(8, 2.0);
  CHECK(g.spacing() == doctest::Approx(0.5));
  CHECK(g.size() == 512);
  CHECK(g.coordinate(-4) == doctest::Approx(-2.0));
  CHECK(g.coordinate(3) == doctest::Approx(1.5));
  CHECK(g.index(-4, -4, -4) == 0);
  CHECK(g.index(-4, -4, -3) == 1);
  CHECK(g.index(-3, -4, -4) == 64);
  CHECK(g.index(3, 3, 3) == 511);
  const auto axis = g.axis();
  REQUIRE(axis.size() == 8);
  CHECK(axis.front() == doctest::Approx(-2.0));
  CHECK(axis[4] == 0.0);
  CHECK(g.band() == doctest::Approx(kPi * 8 / 4.0));
  CHECK_THROWS_AS(build_grid(7, 1.0), InvalidArgument);
  CHECK_THROWS_AS(build_grid(0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(build_grid(8, 0.0), InvalidArgument);
}

TEST_CASE("default angle count") {
  CHECK(default_angle_count(80) == 102);
  CHECK(default_angle_count(160) == 204);
  CHECK(default_angle_count(16) == 21);
}

TEST_CASE("design for N = 80 has 496944 points") {
  const WaveParameters w = WaveParameters::from_wavelength(1.0, 80 / (4 * std::sqrt(2.0)), 20.0);
  const SampleDesign d = build_design(80, 0, w);
  CHECK(d.S() == 102);
  CHECK(d.per_angle() == 4872);
  CHECK(d.size() == 496944);
  CHECK(d.frequency_step() == doctest::Approx(2 * w.k0 / 79));

  // independent count for the same rule
  std::size_t count = 0;
  for (int a = 0; a < 80; ++a)
    for (int b = 0; b < 80; ++b) {
      const double k1 = -w.k0 + 2 * w.k0 * a / 79.0;
      const double k2 = -w.k0 + 2 * w.k0 * b / 79.0;
      if (k1 * k1 + k2 * k2 <= w.k0 * w.k0) ++count;
    }
  CHECK(count == d.per_angle());
}

TEST_CASE("integer lattice rule") {
  const WaveParameters w = WaveParameters::from_wavelength(1.0, 14.0, 20.0);
  const SampleDesign d = build_design(80, 0, w, 2 * kPi, LatticeRule::kIntegerStrict);
  std::size_t count = 0;
  for (int j1 = -40; j1 < 40; ++j1)
    for (int j2 = -40; j2 < 40; ++j2)
      if (j1 * j1 + j2 * j2 < 40 * 40) ++count;
  CHECK(d.per_angle() == count);
  CHECK(d.frequency_step() == doctest::Approx(2 * w.k0 / 80));
  CHECK(d.frequency_offset() == 0.0);
  for (const auto& p : d.disk()) CHECK(p.k1 * p.k1 + p.k2 * p.k2 < w.k0 * w.k0);
  CHECK(lattice_rule_from_string(to_string(LatticeRule::kIntegerStrict)) ==
        LatticeRule::kIntegerStrict);
  CHECK(lattice_rule_from_string("linspace") == LatticeRule::kLinspace);
  CHECK_THROWS_AS(lattice_rule_from_string("hexagonal"), InvalidArgument);
}

TEST_CASE("design points and ordering") {
  const WaveParameters w = WaveParameters::from_wavelength(1.0, 3.0, 5.0);
  const SampleDesign d = build_design(16, 8, w);
  CHECK(d.time_step() == doctest::Approx(2 * kPi / 8));
  std::set<std::pair<int, int>> seen;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const DesignPoint p = d.point(i);
    CHECK(p.s == static_cast<int>(i / d.per_angle()));
    CHECK(p.t == doctest::Approx(2 * kPi * p.s / 8));
    CHECK(p.k1 == doctest::Approx(d.frequency(p.j1)));
    CHECK(p.k2 == doctest::Approx(d.frequency(p.j2)));
    CHECK(std::hypot(p.k1, p.k2) <= w.k0 * (1 + 1e-12));
    if (p.s == 0) seen.insert({p.j1, p.j2});
  }
  CHECK(seen.size() == d.per_angle());
  // lexicographic in (j1, j2) within an angle
  for (std::size_t i = 1; i < d.per_angle(); ++i) {
    const auto& a = d.disk()[i - 1];
    const auto& b = d.disk()[i];
    CHECK(std::make_pair(a.j1, a.j2) < std::make_pair(b.j1, b.j2));
  }
  CHECK_THROWS_AS(build_design(15, 8, w), InvalidArgument);
}

TEST_CASE("kspace points follow the trajectory") {
  const WaveParameters w = WaveParameters::from_wavelength(1.0, 3.0, 5.0);
  const SampleDesign d = build_design(16, 0, w);
  const Trajectory traj = Trajectory::fixed_axis(Vec3::UnitX(), 2 * kPi);
  const auto pts = build_kspace_points(d, traj, w, Imaging::kTransmission);
  REQUIRE(pts.size() == d.size());
  for (std::size_t i = 0; i < d.size(); i += 7) {
    const DesignPoint p = d.point(i);
    const Vec3 expect = t_map(KPoint{p.k1, p.k2, p.t, Imaging::kTransmission}, traj, w);
    CHECK((pts[i] - expect).norm() < 1e-12);
    CHECK(pts[i].squaredNorm() <= 2 * w.k0 * w.k0 * (1 + 1e-12));
  }
  // reflection lands outside the sqrt(2) k0 ball
  const auto refl = build_kspace_points(d, traj, w, Imaging::kReflection);
  for (std::size_t i = 0; i < refl.size(); i += 11)
    CHECK(refl[i].squaredNorm() >= 2 * w.k0 * w.k0 * (1 - 1e-12));
}

TEST_CASE("design csv") {
  const WaveParameters w = WaveParameters::from_wavelength(1.0, 3.0, 5.0);
  const SampleDesign d = build_design(8, 3, w);
  const auto pts = build_kspace_points(d, Trajectory::fixed_axis(Vec3::UnitX(), 2 * kPi), w,
                                       Imaging::kTransmission);
  std::ostringstream out;
  write_design_csv(out, d, pts);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "j1,j2,s,k1,k2,t,y1,y2,y3");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 8);
  }
  CHECK(rows == d.size());
}
