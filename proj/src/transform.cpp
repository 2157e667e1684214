#include "rotodt/transform.hpp"

#include <cmath>
#include <string>

#include "rotodt/parallel.hpp"

namespace rotodt {

namespace {

/// exp(sign·i h j y) for j ∈ I_N.
void axis_phases(int N, double h, double y, double sign, cplx* out) {
  for (int a = 0; a < N; ++a) out[a] = std::polar(1.0, sign * h * (a - N / 2) * y);
}

void check_finite(std::span<const cplx> v, const char* what) {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!std::isfinite(v[i].real()) || !std::isfinite(v[i].imag()))
      throw Error(std::string("non-finite ") + what + " at index " + std::to_string(i));
}

double norm2(std::span<const cplx> v) {
  double s = 0.0;
  for (const cplx& z : v) s += std::norm(z);
  return s;
}

}  // namespace

double quadrature_weight(const GridSpec& grid) {
  const double h = grid.spacing();
  return std::pow(2.0 * kPi, -1.5) * h * h * h;
}

std::vector<cplx> ndft_direct(const Volume& vol, std::span<const Vec3> points) {
  const int N = vol.grid.N;
  const double h = vol.grid.spacing();
  const double weight = quadrature_weight(vol.grid);
  std::vector<cplx> out(points.size());
  parallel_for(points.size(), [&](std::size_t b, std::size_t e) {
    std::vector<cplx> p1(N), p2(N), p3(N);
    for (std::size_t p = b; p < e; ++p) {
      axis_phases(N, h, points[p][0], -1.0, p1.data());
      axis_phases(N, h, points[p][1], -1.0, p2.data());
      axis_phases(N, h, points[p][2], -1.0, p3.data());
      cplx acc1 = 0.0;
      const cplx* f = vol.values.data();
      for (int a = 0; a < N; ++a) {
        cplx acc2 = 0.0;
        for (int c = 0; c < N; ++c) {
          cplx acc3 = 0.0;
          for (int d = 0; d < N; ++d) acc3 += f[d] * p3[d];
          f += N;
          acc2 += acc3 * p2[c];
        }
        acc1 += acc2 * p1[a];
      }
      out[p] = weight * acc1;
    }
  });
  return out;
}

Volume ndft_adjoint_direct(std::span<const Vec3> points,
                           std::span<const cplx> values, const GridSpec& grid) {
  if (points.size() != values.size())
    throw InvalidArgument("points and values differ in length");
  const int N = grid.N;
  const double h = grid.spacing();
  const double weight = quadrature_weight(grid);
  Volume vol(grid);
  const std::size_t n = static_cast<std::size_t>(N);
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    std::vector<cplx> p2(N), p3(N);
    for (std::size_t p = 0; p < points.size(); ++p) {
      axis_phases(N, h, points[p][1], 1.0, p2.data());
      axis_phases(N, h, points[p][2], 1.0, p3.data());
      for (std::size_t a = b; a < e; ++a) {
        const cplx g1 = values[p] * std::polar(1.0, h * (static_cast<int>(a) - N / 2) * points[p][0]);
        cplx* x = vol.values.data() + a * n * n;
        for (int c = 0; c < N; ++c) {
          const cplx g12 = g1 * p2[c];
          for (int d = 0; d < N; ++d) x[d] += g12 * p3[d];
          x += N;
        }
      }
    }
  });
  for (cplx& v : vol.values) v *= weight;
  return vol;
}

FourierOperator::FourierOperator(const GridSpec& grid,
                                 std::span<const Vec3> points, double eps)
    : grid_(grid), eps_(eps), weight_(quadrature_weight(grid)) {
  if (!(eps >= 1e-12 && eps <= 1e-2))
    throw InvalidArgument("transform accuracy must lie in [1e-12, 1e-2]");
  plan_ = std::make_shared<const NufftPlan>(grid.N, grid.spacing(), points, eps);
}

void FourierOperator::forward(std::span<const cplx> x, std::span<cplx> out) const {
  plan_->forward(x, out);
  for (cplx& v : out) v *= weight_;
}

void FourierOperator::adjoint(std::span<const cplx> values, std::span<cplx> x) const {
  plan_->adjoint(values, x);
  for (cplx& v : x) v *= weight_;
}

std::vector<cplx> FourierOperator::forward(const Volume& vol) const {
  if (!(vol.grid == grid_)) throw InvalidArgument("volume grid does not match operator");
  std::vector<cplx> out(num_points());
  forward(vol.values, out);
  return out;
}

Volume FourierOperator::adjoint(std::span<const cplx> values) const {
  Volume vol(grid_);
  adjoint(values, vol.values);
  return vol;
}

std::vector<cplx> nufft_forward(const Volume& vol, std::span<const Vec3> points,
                                double eps) {
  return FourierOperator(vol.grid, points, eps).forward(vol);
}

Volume nufft_adjoint(std::span<const Vec3> points, std::span<const cplx> values,
                     const GridSpec& grid, double eps) {
  return FourierOperator(grid, points, eps).adjoint(values);
}

CgneResult cgne_solve(const LinearMap& forward, const LinearMap& adjoint,
                      std::span<const cplx> data, std::size_t unknowns,
                      int max_iters, const CgneRecorder& recorder) {
  if (max_iters < 1) throw InvalidArgument("max_iters must be >= 1");
  check_finite(data, "data value");
  const std::size_t m = data.size();
  const double inv_sqrt_m = m > 0 ? 1.0 / std::sqrt(static_cast<double>(m)) : 0.0;
  CgneResult result;
  std::vector<cplx>& x = result.solution;
  x.assign(unknowns, cplx{});
  std::vector<cplx> r(data.begin(), data.end());
  std::vector<cplx> s(unknowns), p(unknowns), q(m);
  adjoint(r, s);
  check_finite(s, "adjoint value");
  p = s;
  double gamma = norm2(s);
  double xnorm2 = 0.0;
  for (int k = 1; k <= max_iters; ++k) {
    if (gamma > 0.0) {
      forward(p, q);
      check_finite(q, "forward value");
      const double qq = norm2(q);
      if (qq > 0.0) {
        const double alpha = gamma / qq;
        for (std::size_t i = 0; i < unknowns; ++i) x[i] += alpha * p[i];
        for (std::size_t i = 0; i < m; ++i) r[i] -= alpha * q[i];
        adjoint(r, s);
        check_finite(s, "adjoint value");
        const double next = norm2(s);
        const double beta = next / gamma;
        for (std::size_t i = 0; i < unknowns; ++i) p[i] = s[i] + beta * p[i];
        gamma = next;
        xnorm2 = norm2(x);
      } else {
        gamma = 0.0;
      }
    }
    const double res = std::sqrt(norm2(r)) * inv_sqrt_m;
    const double xn = std::sqrt(xnorm2);
    if (!std::isfinite(res) || !std::isfinite(xn))
      throw Error("CGNE diverged at iteration " + std::to_string(k));
    result.history.residual.push_back(res);
    result.history.solution_norm.push_back(xn);
    if (recorder && !recorder(k, x, res, xn)) break;
  }
  return result;
}

CgneVolumeResult cgne_solve(const FourierOperator& op, const KSpaceSamples& data,
                            int max_iters, const CgneRecorder& recorder) {
  data.validate();
  if (data.size() != op.num_points())
    throw InvalidArgument("sample count does not match the operator");
  auto fwd = [&](std::span<const cplx> x, std::span<cplx> out) { op.forward(x, out); };
  auto adj = [&](std::span<const cplx> v, std::span<cplx> x) { op.adjoint(v, x); };
  auto res = cgne_solve(fwd, adj, data.values, op.grid().size(), max_iters, recorder);
  return {Volume(op.grid(), std::move(res.solution)), std::move(res.history)};
}

}  // namespace rotodt
