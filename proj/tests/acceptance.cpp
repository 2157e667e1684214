// End-to-end acceptance checks. One PASS/FAIL line per criterion; exit code 0
// only if every criterion passes. `--only 2,5` restricts the run.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "rotodt/experiment.hpp"
#include "rotodt/parallel.hpp"

using namespace rotodt;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool within(double value, double target, double tol) { return std::abs(value - target) <= tol; }
bool within_rel(double value, double target, double rel) {
  return std::abs(value - target) <= rel * std::abs(target);
}

double rmse(const KSpaceSamples& a, const KSpaceSamples& b) { return rotodt::rmse(a.values, b.values); }

ExperimentConfig ball_config(int N) {
  ExperimentConfig c;
  c.N = N;
  c.phantom.kind = "ball";
  c.phantom.radius = 9.0;
  return c;
}

// ---------------------------------------------------------------------------

Outcome forward_rmse() {
  // literal reading: design Y_N, fine grid n = 5N, r_s = N/(4√2)
  const double target80 = 3.72e-2, target160 = 9.37e-3;
  double literal[2];
  int i = 0;
  for (int N : {80, 160}) {
    const Experiment ex(ball_config(N));
    const auto pts = ex.points();
    const auto exact = analytic_kspace(ex.phantom, pts);
    const auto fine = synthesize_kspace(ex.phantom, ex.grid, 5, pts, 1e-8);
    literal[i++] = rmse(fine, exact);
  }
  // table reading: fixed r_s of the N = 80 experiment, grid size n on Y_80
  const Experiment ex80(ball_config(80));
  const auto pts = ex80.points();
  const auto exact = analytic_kspace(ex80.phantom, pts);
  double table[2];
  i = 0;
  for (int n : {80, 160}) {
    const GridSpec g = build_grid(n, ex80.grid.support_radius);
    table[i++] = rmse(synthesize_kspace(ex80.phantom, g, 1, pts, 1e-8), exact);
  }
  Outcome o;
  o.pass = within_rel(literal[0], target80, 0.1) && within_rel(literal[1], target160, 0.1);
  o.detail = fmt("N=80/n=400 %.3e (target 3.72e-2), N=160/n=800 %.3e (target 9.37e-3); "
                 "fixed r_s with n=80/160 on Y_80: %.3e / %.3e",
                 literal[0], literal[1], table[0], table[1]);
  return o;
}

Outcome ball_reconstruction() {
  const Experiment ex(ball_config(80));
  const auto pts = ex.points();
  const Volume truth = truth_volume(ex);
  KSpaceSamples exact = analytic_kspace(ex.phantom, pts);
  KSpaceSamples approx = synthesize_kspace(ex.phantom, ex.grid, 5, pts, 1e-8);
  auto run = [&](const KSpaceSamples& data, ReconMethod m) {
    ReconConfig c;
    c.method = m;
    c.max_iters = 20;
    const ReconReport r = reconstruct(data, ex.design, ex.trajectory, ex.grid, ex.wave, c);
    return quality(truth, r.volume);
  };
  const QualityReport cg = run(exact, ReconMethod::kCgne), bp = run(exact, ReconMethod::kBackprop);
  const QualityReport cga = run(approx, ReconMethod::kCgne), bpa = run(approx, ReconMethod::kBackprop);
  Outcome o;
  o.pass = within(cg.psnr, 32.60, 0.5) && within(cg.ssim, 0.885, 0.03) &&
           within(bp.psnr, 27.00, 0.5) && within(bp.ssim, 0.370, 0.05) &&
           within(cga.psnr, 32.61, 0.5) && within(cga.ssim, 0.885, 0.03) &&
           within(bpa.psnr, 27.02, 0.5) && within(bpa.ssim, 0.370, 0.05);
  o.detail = fmt("exact: CGNE %.2f dB / %.3f, backprop %.2f dB / %.3f; fine-grid data: CGNE %.2f / "
                 "%.3f, backprop %.2f / %.3f",
                 cg.psnr, cg.ssim, bp.psnr, bp.ssim, cga.psnr, cga.ssim, bpa.psnr, bpa.ssim);
  return o;
}

Outcome sample_count() {
  const Experiment ex(ball_config(80));
  const json s = design_summary(ex);
  Outcome o;
  o.pass = ex.design.size() == 496944;
  o.detail = fmt("%zu points (%d angles x %zu), lattice %s; integer lattice would give %zu",
                 ex.design.size(), ex.design.S(), ex.design.per_angle(),
                 to_string(ex.design.rule()).c_str(),
                 s["conventions"][1]["total"].get<std::size_t>());
  return o;
}

Outcome diffraction_validation() {
  const json t = run_validation(ValidationConfig{}, 1.0);
  std::ostringstream rows;
  for (const json& r : t["rows"])
    rows << " n_o=" << r["n_o"].get<int>() << ":" << fmt("%.4f", r["relative_error"].get<double>());
  const double last = t["final_relative_error"].get<double>();
  Outcome o;
  o.pass = last <= 0.05 && t["monotone_decrease"].get<bool>();
  o.detail = "band-limited relative error" + rows.str() + (o.pass ? "" : " (needs <= 0.05, decreasing)");
  return o;
}

// --- geometry oracles -------------------------------------------------------

double fd_jacobian(const KPoint& p, const Trajectory& traj, const WaveParameters& w) {
  const double hk = 1e-6 * w.k0, ht = 1e-6;
  Mat3 d;
  for (int c = 0; c < 3; ++c) {
    KPoint a = p, b = p;
    double* fa = c == 0 ? &a.k1 : c == 1 ? &a.k2 : &a.t;
    double* fb = c == 0 ? &b.k1 : c == 1 ? &b.k2 : &b.t;
    const double h = c == 2 ? ht : hk;
    *fa += h;
    *fb -= h;
    d.col(c) = (t_map(a, traj, w) - t_map(b, traj, w)) / (2 * h);
  }
  return std::abs(d.determinant());
}

KPoint random_point(std::mt19937_64& rng, const Trajectory& traj, double k0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  KPoint p;
  do {
    p.k1 = k0 * u(rng);
    p.k2 = k0 * u(rng);
  } while (k0 * k0 - p.k1 * p.k1 - p.k2 * p.k2 < 0.05 * 0.05 * k0 * k0);
  p.t = traj.duration() * (0.001 + 0.998 * 0.5 * (u(rng) + 1.0));
  return p;
}

Outcome jacobian_suite() {
  const WaveParameters w = WaveParameters::from_wavelength(1.0, 5.0, 6.0);
  const std::pair<const char*, Trajectory> cases[] = {
      {"fixed e1", Trajectory::fixed_axis(Vec3::UnitX(), 2 * kPi)},
      {"half rotation", Trajectory::fixed_axis_range(Vec3::UnitX(), 0.0, kPi)},
      {"oscillating c=pi/8", Trajectory::oscillating_axis(kPi / 8)},
  };
  std::mt19937_64 rng(101);
  Outcome o{true, ""};
  for (const auto& [name, traj] : cases) {
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const KPoint p = random_point(rng, traj, w.k0);
      const double fd = fd_jacobian(p, traj, w);
      worst = std::max(worst, std::abs(jacobian(p, traj, w) - fd) / std::max(fd, w.k0 * w.k0));
    }
    o.pass = o.pass && worst <= 1e-6;
    o.detail += fmt("%s%s max rel %.1e", o.detail.empty() ? "" : ", ", name, worst);
  }
  return o;
}

int dense_roots(const Vec3& y, const Trajectory& traj, double k0) {
  const int n = 20000;
  const double L = traj.duration();
  auto g = [&](double t) {
    const Pose p = traj.at(t);
    return y.dot(rotation_matrix(p.axis, p.angle).col(2)) + y.squaredNorm() / (2 * k0);
  };
  int count = 0;
  double prev = g(0.0);
  for (int i = 1; i <= n; ++i) {
    const double cur = g(L * i / n);
    if ((prev < 0) != (cur < 0)) ++count;
    prev = cur;
  }
  return count;
}

Outcome indicatrix_suite() {
  const WaveParameters w = WaveParameters::from_wavelength(1.0, 5.0, 6.0);
  const double k0 = w.k0;
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> u(0.0, 1.0), jit(-1.0, 1.0);

  // full rotation about e1: value 2 away from the tangential circles
  const Trajectory full = Trajectory::fixed_axis(Vec3::UnitX(), 2 * kPi);
  int full_ok = 0, full_n = 0;
  while (full_n < 250) {
    const KPoint p = random_point(rng, full, k0);
    const Vec3 y = t_map(p, full, w);
    const double amp = std::hypot(y.y(), y.z());
    if (y.norm() < 0.05 * k0 || y.squaredNorm() / (2 * k0) > 0.95 * amp) continue;
    full_ok += indicatrix_numeric(y, full, w) == 2;
    ++full_n;
  }

  // half rotation: five-case table vs numeric count, guarded near region boundaries
  const Trajectory half = Trajectory::fixed_axis_range(Vec3::UnitX(), 0.0, kPi);
  int half_ok = 0, half_n = 0;
  while (half_n < 250) {
    const KPoint p = random_point(rng, half, k0);
    const Vec3 y = t_map(p, half, w);
    const double q = y.squaredNorm(), g = 0.02 * k0 * k0;
    if (std::abs(y.y()) < 0.02 * k0 || std::abs(2 * k0 * std::abs(y.z()) - q) < g ||
        std::abs(q - 2 * k0 * std::hypot(y.y(), y.z())) < g || y.norm() < 0.05 * k0)
      continue;
    const int table = half_rotation_indicatrix(y, k0);
    half_ok += table == indicatrix_numeric(y, half, w) && table == dense_roots(y, half, k0);
    ++half_n;
  }

  // oscillating axis: 4 near the y1 axis for 0 < y1 < 2 k0 sin c, 2 near the y3 axis
  const double c = kPi / 8;
  const Trajectory osc = Trajectory::oscillating_axis(c);
  int four_ok = 0, two_ok = 0;
  const int n_osc = 250;
  for (int i = 0; i < n_osc; ++i) {
    const double y1 = 2 * k0 * std::sin(c) * (0.2 + 0.7 * u(rng));
    const double r = 0.05 * y1 * y1 / (2 * k0);
    four_ok += indicatrix_numeric(Vec3(y1 + r * jit(rng), r * jit(rng), r * jit(rng)), osc, w) == 4;
    const double y3 = k0 * (0.1 + 1.2 * u(rng)), s = 0.02 * k0;
    two_ok += indicatrix_numeric(Vec3(s * jit(rng), s * jit(rng), y3 + s * jit(rng)), osc, w) == 2;
  }
  Outcome o;
  o.pass = full_ok == full_n && half_ok == half_n && four_ok == n_osc && two_ok == n_osc;
  o.detail = fmt("full rotation %d/%d equal 2, half rotation %d/%d match the table, "
                 "oscillating axis %d/%d equal 4 near y1, %d/%d equal 2 near y3",
                 full_ok, full_n, half_ok, half_n, four_ok, n_osc, two_ok, n_osc);
  return o;
}

// --- transform -----------------------------------------------------------------

std::vector<cplx> random_values(std::size_t m, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<cplx> v(m);
  for (auto& z : v) z = {g(rng), g(rng)};
  return v;
}

cplx inner(std::span<const cplx> a, std::span<const cplx> b) {
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * std::conj(b[i]);
  return s;
}

double norm2(std::span<const cplx> a) { return std::sqrt(std::real(inner(a, a))); }

double rel_err(std::span<const cplx> a, std::span<const cplx> b) {
  std::vector<cplx> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return norm2(d) / norm2(b);
}

Outcome transform_suite() {
  const GridSpec g = build_grid(16, 3.0);
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> u(-g.band(), g.band());
  std::vector<Vec3> pts(2000);
  for (auto& p : pts) p = Vec3(u(rng), u(rng), u(rng));
  const Volume x(g, random_values(g.size(), rng));
  const auto y = random_values(pts.size(), rng);

  const auto fx = ndft_direct(x, pts);
  const Volume fty = ndft_adjoint_direct(pts, y, g);
  const double direct_adj =
      std::abs(inner(fx, y) - inner(x.values, fty.values)) / (norm2(x.values) * norm2(y));
  bool pass = direct_adj <= 1e-12;
  std::string detail = fmt("direct adjoint %.1e", direct_adj);
  for (double eps : {1e-4, 1e-6, 1e-8}) {
    FourierOperator op(g, pts, eps);
    const auto ffx = op.forward(x);
    const Volume ffty = op.adjoint(y);
    const double err = rel_err(ffx, fx);
    const double err_adj = rel_err(ffty.values, fty.values);
    const double adj = std::abs(inner(ffx, y) - inner(x.values, ffty.values)) / (norm2(ffx) * norm2(y));
    pass = pass && err <= eps && err_adj <= eps && adj <= 10 * eps;
    detail += fmt("; eps %.0e: fwd %.1e adj %.1e identity %.1e", eps, err, err_adj, adj);
  }

  // consistent system: sparse truth, oversampled points
  const GridSpec gs = build_grid(8, 1.0);
  std::uniform_real_distribution<double> us(-gs.band(), gs.band());
  std::vector<Vec3> ps(2000);
  for (auto& p : ps) p = Vec3(us(rng), us(rng), us(rng));
  FourierOperator op(gs, ps, 1e-12);
  Volume truth(gs);
  std::uniform_int_distribution<std::size_t> pick(0, gs.size() - 1);
  for (int i = 0; i < 40; ++i) truth.values[pick(rng)] = cplx(1.0 + i % 3, 0.5 * (i % 2));
  KSpaceSamples data;
  data.points = ps;
  data.values = op.forward(truth);
  const auto res = cgne_solve(op, data, 60);
  const double rec = rel_err(res.volume.values, truth.values);
  pass = pass && rec <= 1e-6;
  detail += fmt("; CGNE consistent recovery %.1e", rec);
  return {pass, detail};
}

// --- noise and stopping ----------------------------------------------------------

Outcome noise_stopping() {
  ExperimentConfig c;
  c.N = 160;
  c.phantom.kind = "shepp-logan";
  const Experiment ex(c);
  const auto pts = ex.points();
  const KSpaceSamples clean = analytic_kspace(ex.phantom, pts);
  const Volume truth = truth_volume(ex);
  const FourierOperator op(ex.grid, pts, c.recon.eps);

  struct Level {
    double rel;
    int iters;
  };
  const Level levels[] = {{0.001, 30}, {0.002, 22}, {0.005, 15}, {0.01, 12}};
  ReconConfig bp_cfg;
  bp_cfg.method = ReconMethod::kBackprop;
  double bp_prev = psnr(truth, backpropagate(clean, ex.design, ex.trajectory, ex.grid, ex.wave, bp_cfg));
  std::string detail = fmt("backprop clean %.2f", bp_prev);
  bool bp_strict = true, bp_below = true, semi = true, disc_ok = true;

  for (const Level& lv : levels) {
    NoiseSpec ns;
    ns.relative_level = lv.rel;
    ns.seed = 20240601;
    const KSpaceSamples noisy = add_noise(clean, ns);
    ReconConfig cfg;
    cfg.max_iters = lv.iters;
    cfg.stopping = StoppingRule::kDiscrepancy;
    cfg.noise_level = noisy.noise->level;
    const ReconReport r = reconstruct_cgne(noisy, ex.grid, cfg, &truth, &op);
    const auto& h = r.psnr_history;
    const auto best = std::max_element(h.begin(), h.end()) - h.begin();
    const bool interior = best > 0 && best + 1 < static_cast<long>(h.size());
    const double disc = h[r.choice.index - 1];
    const double bp = psnr(truth, backpropagate(noisy, ex.design, ex.trajectory, ex.grid, ex.wave, bp_cfg));

    semi = semi && (lv.rel == 0.002 || interior);
    bp_strict = bp_strict && bp < bp_prev;
    bp_below = bp_below && bp < disc && bp < h[best];
    if (lv.rel == 0.001) disc_ok = !r.choice.flagged && within(disc, 30.16, 1.5);
    bp_prev = bp;
    detail += fmt("; %.1f%%: best %.2f (k=%ld), discrepancy %.2f (k=%d%s), backprop %.2f",
                  100 * lv.rel, h[best], best + 1, disc, r.choice.index,
                  r.choice.flagged ? ", flagged" : "", bp);
  }
  Outcome o;
  o.pass = disc_ok && semi && bp_strict && bp_below;
  if (!disc_ok) detail += " [discrepancy at 0.1% outside 30.16 +- 1.5]";
  if (!semi) detail += " [no interior PSNR maximum]";
  if (!bp_strict) detail += " [backprop not strictly decreasing]";
  if (!bp_below) detail += " [backprop not below CGNE]";
  o.detail = detail;
  return o;
}

Outcome gap_axis_effect() {
  QualityReport q[2];
  int i = 0;
  for (const Vec3& axis : {Vec3(Vec3::UnitX()), Vec3(Vec3::UnitY())}) {
    ExperimentConfig c = ball_config(80);
    c.phantom.kind = "ball-with-gap";
    c.trajectory.axis = axis;
    c.data.source = DataSource::kFineGrid;
    const Experiment ex(c);
    const KSpaceSamples data = clean_data(ex, ex.points());
    const Volume truth = truth_volume(ex);
    q[i++] = *run_reconstruction(ex, data, &truth).quality;
  }
  Outcome o;
  o.pass = q[1].psnr < q[0].psnr && q[1].ssim < q[0].ssim && q[0].psnr - q[1].psnr >= 3.0;
  o.detail = fmt("CGNE(20), fine-grid data, about e1 %.2f dB / %.3f, about e2 %.2f dB / %.3f (gap %.2f dB)",
                 q[0].psnr, q[0].ssim, q[1].psnr, q[1].ssim, q[0].psnr - q[1].psnr);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int a = 1; a < argc; ++a) {
    const std::string arg = argv[a];
    if (arg == "--only" && a + 1 < argc) {
      std::stringstream ss(argv[++a]);
      for (std::string tok; std::getline(ss, tok, ',');) only.insert(std::stoi(tok));
    } else if (arg == "--threads" && a + 1 < argc) {
      set_num_threads(std::stoi(argv[++a]));
    } else {
      std::cerr << "usage: acceptance [--only 1,2,...] [--threads K]\n";
      return 2;
    }
  }

  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"forward synthesis RMSE", forward_rmse},
      {"ball reconstruction quality", ball_reconstruction},
      {"sample count", sample_count},
      {"Fourier diffraction relation", diffraction_validation},
      {"jacobian vs finite differences", jacobian_suite},
      {"indicatrix root counting", indicatrix_suite},
      {"transform accuracy and adjoint", transform_suite},
      {"noise and stopping rules", noise_stopping},
      {"gap ball axis effect", gap_axis_effect},
  };

  int failed = 0;
  for (int k = 0; k < 9; ++k) {
    if (!only.empty() && !only.count(k + 1)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << k + 1 << " (" << criteria[k].first
              << "): " << o.detail << fmt(" [%.0f s]", secs) << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
