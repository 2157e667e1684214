#include "rotodt/phantoms.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rotodt/forward.hpp"
#include "rotodt/parallel.hpp"

namespace rotodt {

namespace {

Mat3 rotation_z(double phi) {
  // body coordinates of a point rotated by −phi about e3
  Mat3 m;
  m << std::cos(phi), std::sin(phi), 0.0,
      -std::sin(phi), std::cos(phi), 0.0,
      0.0, 0.0, 1.0;
  return m;
}

struct SheppLoganRow {
  double cx, cy, cz, ax, ay, az, phi, original, modified;
};

// Centers and half axes in the unit cube, rotation about e3 in radians.
constexpr SheppLoganRow kSheppLogan[] = {
    {0.0, 0.0, 0.0, 0.69, 0.92, 0.9, 0.0, 2.0, 1.0},
    {0.0, 0.0, 0.0, 0.6624, 0.874, 0.88, 0.0, -0.98, -0.8},
    {-0.22, 0.0, -0.25, 0.41, 0.16, 0.21, 3 * kPi / 5, -0.02, -0.2},
    {0.22, 0.0, -0.25, 0.31, 0.11, 0.22, 2 * kPi / 5, -0.02, -0.2},
    {0.0, 0.35, -0.25, 0.21, 0.25, 0.5, 0.0, 0.01, 0.1},
    {0.0, 0.1, -0.25, 0.046, 0.046, 0.046, 0.0, 0.01, 0.1},
    {-0.08, -0.65, -0.25, 0.046, 0.023, 0.02, 0.0, 0.01, 0.1},
    {0.06, -0.65, -0.25, 0.046, 0.023, 0.02, kPi / 2, 0.01, 0.1},
    {0.06, -0.105, 0.625, 0.056, 0.04, 0.1, kPi / 2, 0.01, 0.1},
    {0.0, 0.1, 0.625, 0.056, 0.056, 0.1, 0.0, 0.01, 0.1},
};

}  // namespace

bool Ellipsoid::contains(const Vec3& r) const {
  const Vec3 b = rotation * (r - center);
  const double q = (b.array() / half_axes.array()).square().sum();
  return q <= 1.0;
}

cplx Ellipsoid::fourier(const Vec3& y) const {
  // E = c + Rᵀ diag(a) B₁, so the transform is |det| e^{−i c·y} F1_B(diag(a) R y)
  const Vec3 scaled = half_axes.cwiseProduct(rotation * y);
  const double det = half_axes.prod();
  return det * analytic_ball_ft(scaled, 1.0) * std::polar(1.0, -center.dot(y));
}

double Ellipsoid::extent() const { return center.norm() + half_axes.maxCoeff(); }

std::string to_string(SheppLoganContrast c) {
  return c == SheppLoganContrast::kModified ? "modified" : "original";
}

SheppLoganContrast shepp_logan_contrast_from_string(const std::string& name) {
  if (name == "modified") return SheppLoganContrast::kModified;
  if (name == "original") return SheppLoganContrast::kOriginal;
  throw InvalidArgument("unknown Shepp-Logan contrast '" + name + "'");
}

Phantom Phantom::ball(double radius, double amplitude) {
  if (!(radius > 0.0)) throw InvalidArgument("ball radius must be positive");
  Phantom p;
  p.kind_ = Kind::kBall;
  p.radius_ = radius;
  p.amplitude_ = amplitude;
  return p;
}

Phantom Phantom::ball_with_gap(double radius, double half_width, double amplitude) {
  if (!(radius > 0.0)) throw InvalidArgument("ball radius must be positive");
  if (!(half_width >= 0.0)) throw InvalidArgument("gap half width must be >= 0");
  Phantom p;
  p.kind_ = Kind::kBallWithGap;
  p.radius_ = radius;
  p.gap_ = half_width;
  p.amplitude_ = amplitude;
  return p;
}

Phantom Phantom::shepp_logan(double scale, SheppLoganContrast contrast,
                             double amplitude) {
  if (!(scale > 0.0)) throw InvalidArgument("phantom scale must be positive");
  Phantom p;
  p.kind_ = Kind::kSheppLogan;
  p.radius_ = scale;
  p.contrast_ = contrast;
  p.amplitude_ = amplitude;
  for (const auto& row : kSheppLogan) {
    Ellipsoid e;
    e.center = scale * Vec3(row.cx, row.cy, row.cz);
    e.half_axes = scale * Vec3(row.ax, row.ay, row.az);
    e.rotation = rotation_z(row.phi);
    e.value = contrast == SheppLoganContrast::kModified ? row.modified : row.original;
    p.ellipsoids_.push_back(e);
  }
  return p;
}

Phantom Phantom::constant(double value) {
  Phantom p;
  p.kind_ = Kind::kConstant;
  p.amplitude_ = value;
  return p;
}

double Phantom::operator()(const Vec3& r) const {
  switch (kind_) {
    case Kind::kBall:
      return r.squaredNorm() <= radius_ * radius_ ? amplitude_ : 0.0;
    case Kind::kBallWithGap:
      return r.squaredNorm() <= radius_ * radius_ && std::abs(r[1]) > gap_
                 ? amplitude_
                 : 0.0;
    case Kind::kSheppLogan: {
      const double outer = ellipsoids_.front().half_axes.maxCoeff();
      if (r.squaredNorm() > outer * outer) return 0.0;
      double v = 0.0;
      for (const auto& e : ellipsoids_)
        if (e.contains(r)) v += e.value;
      return amplitude_ * v;
    }
    case Kind::kConstant:
      return amplitude_;
  }
  return 0.0;
}

double Phantom::support_radius() const {
  switch (kind_) {
    case Kind::kBall:
    case Kind::kBallWithGap:
      return radius_;
    case Kind::kSheppLogan: {
      double r = 0.0;
      for (const auto& e : ellipsoids_) r = std::max(r, e.extent());
      return r;
    }
    case Kind::kConstant:
      return amplitude_ == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

bool Phantom::has_fourier() const {
  return kind_ == Kind::kBall || kind_ == Kind::kSheppLogan ||
         (kind_ == Kind::kConstant && amplitude_ == 0.0);
}

std::optional<cplx> Phantom::fourier(const Vec3& y) const {
  switch (kind_) {
    case Kind::kBall:
      return amplitude_ * analytic_ball_ft(y, radius_);
    case Kind::kSheppLogan: {
      cplx v = 0.0;
      for (const auto& e : ellipsoids_) v += e.value * e.fourier(y);
      return amplitude_ * v;
    }
    case Kind::kConstant:
      if (amplitude_ == 0.0) return cplx{};
      return std::nullopt;
    case Kind::kBallWithGap:
      return std::nullopt;
  }
  return std::nullopt;
}

std::string Phantom::describe() const {
  std::ostringstream s;
  switch (kind_) {
    case Kind::kBall:
      s << "ball(radius=" << radius_;
      break;
    case Kind::kBallWithGap:
      s << "ball-with-gap(radius=" << radius_ << ", half_width=" << gap_;
      break;
    case Kind::kSheppLogan:
      s << "shepp-logan-3d(scale=" << radius_ << ", contrast=" << to_string(contrast_);
      break;
    case Kind::kConstant:
      s << "constant(";
      break;
  }
  s << (kind_ == Kind::kConstant ? "" : ", ") << "amplitude=" << amplitude_ << ")";
  return s.str();
}

Volume rasterize(const Phantom& phantom, const GridSpec& grid, int oversample) {
  if (oversample < 1 || oversample % 2 == 0)
    throw InvalidArgument("oversample must be a positive odd integer");
  if (phantom.kind() != Phantom::Kind::kConstant &&
      phantom.support_radius() > grid.support_radius)
    throw InvalidArgument("phantom support radius " +
                          std::to_string(phantom.support_radius()) +
                          " exceeds r_s = " + std::to_string(grid.support_radius));
  Volume vol(grid);
  const int N = grid.N;
  const double h = grid.spacing();
  const double step = h / oversample;
  const int half = oversample / 2;
  const double norm = 1.0 / (static_cast<double>(oversample) * oversample * oversample);
  parallel_for(static_cast<std::size_t>(N), [&](std::size_t b, std::size_t e) {
    for (std::size_t a1 = b; a1 < e; ++a1) {
      const int j1 = static_cast<int>(a1) - N / 2;
      for (int j2 = -N / 2; j2 < N / 2; ++j2)
        for (int j3 = -N / 2; j3 < N / 2; ++j3) {
          const Vec3 r(h * j1, h * j2, h * j3);
          double acc = 0.0;
          for (int s1 = -half; s1 <= half; ++s1)
            for (int s2 = -half; s2 <= half; ++s2)
              for (int s3 = -half; s3 <= half; ++s3)
                acc += phantom(r + step * Vec3(s1, s2, s3));
          vol.at(j1, j2, j3) = acc * norm;
        }
    }
  });
  return vol;
}

Volume potential_from_index(const Volume& index, const WaveParameters& w) {
  Volume f(index.grid);
  const double k2 = w.k0 * w.k0;
  for (std::size_t i = 0; i < index.size(); ++i) {
    const cplx n = index.values[i];
    if (!(n.real() > 0.0) || n.imag() != 0.0)
      throw InvalidArgument("refractive index must be real and positive");
    const double ratio = n.real() / w.background_index;
    f.values[i] = k2 * ratio * ratio - k2;
  }
  return f;
}

}  // namespace rotodt
