#include <cmath>
#include <random>

#include "doctest.h"
#include "rotodt/forward.hpp"
#include "rotodt/metrics.hpp"
#include "rotodt/phantoms.hpp"

using namespace rotodt;

namespace {

// (2π)^{-3/2} Σ 1_E(r) e^{-i r·y} h³ on a cube of side 2·half with n³ midpoints
cplx riemann_ft(const Ellipsoid& e, const Vec3& y, double half, int n) {
  const double h = 2 * half / n;
  cplx sum = 0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        const Vec3 r(-half + h * (a + 0.5), -half + h * (b + 0.5), -half + h * (c + 0.5));
        if (e.contains(r)) sum += std::polar(1.0, -r.dot(y));
      }
  return sum * h * h * h / std::pow(2 * kPi, 1.5);
}

}  // namespace

TEST_CASE("ball membership and support") {
  const Phantom b = Phantom::ball(2.0, 0.5);
  CHECK(b(Vec3(0, 0, 0)) == 0.5);
  CHECK(b(Vec3(1.99, 0, 0)) == 0.5);
  CHECK(b(Vec3(1.2, 1.2, 1.2)) == 0.0);
  CHECK(b.support_radius() == 2.0);
  CHECK(b.has_fourier());
  CHECK_THROWS_AS(Phantom::ball(-1.0), InvalidArgument);
}

TEST_CASE("ball with gap removes the slab") {
  const Phantom g = Phantom::ball_with_gap(9.0, 0.5);
  CHECK(g(Vec3(0, 0, 0)) == 0.0);
  CHECK(g(Vec3(3, 0.4, 0)) == 0.0);
  CHECK(g(Vec3(3, 0.6, 0)) == 1.0);
  CHECK(g(Vec3(0, -2, 5)) == 1.0);
  CHECK_FALSE(g.has_fourier());
  CHECK_FALSE(g.fourier(Vec3(1, 0, 0)).has_value());
}

TEST_CASE("ellipsoid transform matches a Riemann sum") {
  Ellipsoid e;
  e.center = Vec3(0.3, -0.2, 0.1);
  e.half_axes = Vec3(1.0, 0.6, 0.8);
  e.rotation = rotation_matrix(Vec3(1, 2, 3).normalized(), 0.7);
  e.value = 1.0;
  const double vol = 4.0 / 3.0 * kPi * 0.48 / std::pow(2 * kPi, 1.5);
  CHECK(std::abs(e.fourier(Vec3::Zero()) - vol) < 1e-12);
  for (const Vec3& y : {Vec3(1.0, 0.0, 0.0), Vec3(0.5, -1.5, 2.0), Vec3(-2.0, 1.0, 0.3)}) {
    const cplx num = riemann_ft(e, y, 1.5, 150);
    CHECK(std::abs(e.fourier(y) - num) < 1e-3);
  }
}

TEST_CASE("shepp logan") {
  const Phantom sl = Phantom::shepp_logan(10.0);
  CHECK(sl.ellipsoids().size() == 10);
  CHECK(sl.support_radius() <= 10.0 + 1e-12);
  // the outer shell minus the brain matter at the center
  CHECK(sl(Vec3::Zero()) == doctest::Approx(0.2));
  CHECK(sl(Vec3(9.9, 9.9, 0)) == 0.0);
  const Phantom orig = Phantom::shepp_logan(10.0, SheppLoganContrast::kOriginal);
  CHECK(orig(Vec3::Zero()) == doctest::Approx(1.02));
  CHECK(shepp_logan_contrast_from_string(to_string(SheppLoganContrast::kOriginal)) ==
        SheppLoganContrast::kOriginal);
  CHECK_THROWS_AS(shepp_logan_contrast_from_string("bright"), InvalidArgument);

  // fourier is the sum of the ellipsoid transforms
  const Vec3 y(0.4, -0.3, 0.9);
  cplx sum = 0;
  for (const Ellipsoid& e : sl.ellipsoids()) sum += e.value * e.fourier(y);
  CHECK(std::abs(*sl.fourier(y) - sum) < 1e-14);
  // a real phantom has a Hermitian transform
  CHECK(std::abs(*sl.fourier(-y) - std::conj(*sl.fourier(y))) < 1e-12);
}

TEST_CASE("rasterize and averaged truth") {
  const GridSpec g = build_grid(16, 4.0);
  const Phantom b = Phantom::ball(2.6);
  const Volume v1 = rasterize(b, g);
  for (int j1 = -8; j1 < 8; ++j1)
    for (int j2 = -8; j2 < 8; ++j2)
      for (int j3 = -8; j3 < 8; ++j3) {
        const Vec3 r(g.coordinate(j1), g.coordinate(j2), g.coordinate(j3));
        CHECK(v1.at(j1, j2, j3).real() == b(r));
      }

  const Volume av = averaged_truth(b, g, 5);
  const Volume r5 = rasterize(b, g, 5);
  CHECK(av.values == r5.values);
  const double half_diag = std::sqrt(3.0) * g.spacing() / 2;
  for (int j1 = -8; j1 < 8; ++j1)
    for (int j2 = -8; j2 < 8; ++j2)
      for (int j3 = -8; j3 < 8; ++j3) {
        const double d = Vec3(g.coordinate(j1), g.coordinate(j2), g.coordinate(j3)).norm();
        const double x = av.at(j1, j2, j3).real();
        if (d + half_diag < 2.6) CHECK(x == 1.0);
        if (d - half_diag > 2.6) CHECK(x == 0.0);
        CHECK(x >= 0.0);
        CHECK(x <= 1.0);
      }

  const Volume c = averaged_truth(Phantom::constant(0.7), g);
  for (const cplx& x : c.values) CHECK(x.real() == doctest::Approx(0.7));

  CHECK_THROWS_AS(rasterize(b, g, 4), InvalidArgument);
  CHECK_THROWS_AS(rasterize(Phantom::ball(5.0), g), InvalidArgument);
}

TEST_CASE("potential from refractive index") {
  const WaveParameters w = WaveParameters::from_wavelength(1.0, 2.0, 3.0, 1.33);
  const GridSpec g = build_grid(4, 2.0);
  Volume n(g);
  for (cplx& x : n.values) x = 1.33;
  n.at(0, 0, 0) = 1.4;
  const Volume f = potential_from_index(n, w);
  CHECK(std::abs(f.at(1, 1, 1)) < 1e-12);
  const double expect = w.k0 * w.k0 * (std::pow(1.4 / 1.33, 2) - 1);
  CHECK(f.at(0, 0, 0).real() == doctest::Approx(expect));
}
