#include <cmath>
#include <random>

#include "doctest.h"
#include "rotodt/forward.hpp"
#include "rotodt/metrics.hpp"
#include "rotodt/phantoms.hpp"
#include "rotodt/recon.hpp"

using namespace rotodt;

namespace {

ResidualHistory history_from(const std::vector<double>& res, const std::vector<double>& norms) {
  ResidualHistory h;
  h.residual = res;
  h.solution_norm = norms;
  return h;
}

struct Small {
  int N = 16;
  WaveParameters w = WaveParameters::from_wavelength(1.0, 16 / (4 * std::sqrt(2.0)), 4.0);
  GridSpec grid = build_grid(16, 16 / (4 * std::sqrt(2.0)));
  Trajectory traj = Trajectory::fixed_axis(Vec3::UnitX(), 2 * kPi);
  SampleDesign design = build_design(16, 0, w);
  Phantom ball = Phantom::ball(1.8);
  std::vector<Vec3> points = build_kspace_points(design, traj, w, Imaging::kTransmission);
  KSpaceSamples data = analytic_kspace(ball, points);
  Volume truth = averaged_truth(ball, grid);
};

}  // namespace

TEST_CASE("discrepancy principle") {
  const double d = 0.1;
  const auto h = history_from({5 * d, 2 * d, 0.9 * d, 0.5 * d}, {1, 2, 3, 4});
  const StopChoice c = stop_discrepancy(h, d);
  CHECK(c.index == 3);
  CHECK_FALSE(c.flagged);
  CHECK(stop_discrepancy(h, d, 2.5).index == 2);
  const StopChoice z = stop_discrepancy(h, 0.0);
  CHECK(z.index == 4);
  CHECK(z.flagged);
  CHECK(stop_discrepancy(h, 0.01).flagged);
  CHECK_THROWS_AS(stop_discrepancy(ResidualHistory{}, d), InvalidArgument);
}

TEST_CASE("l-curve corner") {
  // steep drop in the residual until k = 7, then the norm takes off
  std::vector<double> res, norms;
  for (int k = 1; k <= 20; ++k) {
    const double lr = k <= 7 ? 3.0 - 0.5 * (k - 1) : -0.02 * (k - 7);
    const double ln = k <= 7 ? 0.01 * k : 0.07 + 0.4 * (k - 7);
    res.push_back(std::pow(10.0, lr));
    norms.push_back(std::pow(10.0, ln));
  }
  const StopChoice c = stop_lcurve(history_from(res, norms));
  CHECK(c.index == 7);
  CHECK_FALSE(c.flagged);

  // a straight line in log-log coordinates has no corner
  std::vector<double> lres, lnorm;
  for (int k = 1; k <= 20; ++k) {
    lres.push_back(std::pow(10.0, 2.0 - 0.1 * k));
    lnorm.push_back(std::pow(10.0, 0.1 * k));
  }
  const StopChoice s = stop_lcurve(history_from(lres, lnorm));
  CHECK(s.flagged);
  CHECK(s.index == 20);

  CHECK_THROWS_AS(stop_lcurve(history_from({1, 0.5, 0.2}, {1, 2, 3})), InvalidArgument);
}

TEST_CASE("config validation and names") {
  ReconConfig c;
  CHECK_NOTHROW(c.validate());
  c.max_iters = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = ReconConfig{};
  c.stopping = StoppingRule::kDiscrepancy;
  c.noise_level = -1;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = ReconConfig{};
  c.eps = 0.5;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  for (auto m : {ReconMethod::kBackprop, ReconMethod::kCgne})
    CHECK(recon_method_from_string(to_string(m)) == m);
  for (auto s : {StoppingRule::kFixed, StoppingRule::kDiscrepancy, StoppingRule::kLCurve})
    CHECK(stopping_rule_from_string(to_string(s)) == s);
  for (auto m : {IndicatrixMode::kAuto, IndicatrixMode::kAnalytic, IndicatrixMode::kNumeric,
                 IndicatrixMode::kConstant})
    CHECK(indicatrix_mode_from_string(to_string(m)) == m);
  CHECK_THROWS_AS(recon_method_from_string("tv"), InvalidArgument);
}

TEST_CASE("backprop weights") {
  Small s;
  ReconConfig cfg;
  const auto w = backprop_weights(s.design, s.traj, s.w, Imaging::kTransmission, cfg);
  REQUIRE(w.size() == s.design.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const DesignPoint p = s.design.point(i);
    const double kap = std::sqrt(s.w.k0 * s.w.k0 - p.k1 * p.k1 - p.k2 * p.k2);
    CHECK(w[i] == doctest::Approx(s.w.k0 * std::abs(p.k2) / kap / 2));
  }

  cfg.indicatrix = IndicatrixMode::kConstant;
  cfg.indicatrix_constant = 4.0;
  const auto w4 = backprop_weights(s.design, s.traj, s.w, Imaging::kTransmission, cfg);
  CHECK(w4[10] == doctest::Approx(w[10] / 2));

  // numeric root counting agrees with the case table away from region edges
  const Trajectory half = Trajectory::fixed_axis_range(Vec3::UnitX(), 0.0, kPi);
  const SampleDesign hd = build_design(16, 0, s.w, kPi);
  cfg = ReconConfig{};
  const auto wa = backprop_weights(hd, half, s.w, Imaging::kTransmission, cfg);
  cfg.indicatrix = IndicatrixMode::kNumeric;
  const auto wn = backprop_weights(hd, half, s.w, Imaging::kTransmission, cfg);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < wa.size(); ++i)
    if (std::abs(wa[i] - wn[i]) <= 1e-12 * std::max(1.0, wa[i])) ++agree;
  CHECK(agree >= 0.95 * wa.size());

  // auto mode: the oscillating axis uses 2, a tabulated history has no rule
  cfg = ReconConfig{};
  const Trajectory osc = Trajectory::oscillating_axis(0.2);
  const auto wo = backprop_weights(s.design, osc, s.w, Imaging::kTransmission, cfg);
  const DesignPoint p = s.design.point(30);
  CHECK(wo[30] == doctest::Approx(jacobian(KPoint{p.k1, p.k2, p.t}, osc, s.w) / 2));
  const Trajectory tab = Trajectory::tabulated({0, 1, 2, 3}, {Vec3::UnitX(), Vec3::UnitX(), Vec3::UnitX(), Vec3::UnitX()},
                                               {0, 1, 2, 3});
  CHECK_THROWS_AS(backprop_weights(build_design(16, 0, s.w, 3.0), tab, s.w,
                                   Imaging::kTransmission, cfg),
                  NoAnalyticIndicatrix);
  cfg.indicatrix = IndicatrixMode::kAnalytic;
  CHECK_THROWS_AS(backprop_weights(s.design, osc, s.w, Imaging::kTransmission, cfg),
                  NoAnalyticIndicatrix);
}

TEST_CASE("backpropagation is linear and vanishes on zero data") {
  Small s;
  ReconConfig cfg;
  cfg.method = ReconMethod::kBackprop;
  KSpaceSamples zero = s.data;
  for (cplx& v : zero.values) v = 0;
  const Volume z = backpropagate(zero, s.design, s.traj, s.grid, s.w, cfg);
  for (const cplx& v : z.values) CHECK(v == cplx{});

  const Volume a = backpropagate(s.data, s.design, s.traj, s.grid, s.w, cfg);
  KSpaceSamples twice = s.data;
  for (cplx& v : twice.values) v *= 2.0;
  const Volume b = backpropagate(twice, s.design, s.traj, s.grid, s.w, cfg);
  double worst = 0, peak = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(b.values[i] - 2.0 * a.values[i]));
    peak = std::max(peak, std::abs(a.values[i]));
  }
  CHECK(worst <= 1e-12 * peak);
  CHECK(psnr(s.truth, a) > 10.0);

  KSpaceSamples wrong = s.data;
  wrong.values.pop_back();
  wrong.points.pop_back();
  CHECK_THROWS_AS(backpropagate(wrong, s.design, s.traj, s.grid, s.w, cfg), InvalidArgument);
}

TEST_CASE("cgne reconstruction improves on backpropagation") {
  Small s;
  ReconConfig cfg;
  cfg.max_iters = 10;
  const ReconReport r = reconstruct(s.data, s.design, s.traj, s.grid, s.w, cfg, &s.truth);
  REQUIRE(r.history.size() == 10);
  REQUIRE(r.psnr_history.size() == 10);
  CHECK(r.choice.index == 10);
  for (std::size_t k = 1; k < r.history.size(); ++k)
    CHECK(r.history.residual[k] <= r.history.residual[k - 1] * (1 + 1e-9));
  // noiseless data: the first iterations only improve
  for (int k = 1; k < 5; ++k) CHECK(r.psnr_history[k] >= r.psnr_history[k - 1]);
  CHECK(r.psnr_history.back() == doctest::Approx(psnr(s.truth, r.volume)));
  CHECK(r.timings.count("iterations") == 1);

  cfg.method = ReconMethod::kBackprop;
  const ReconReport bp = reconstruct(s.data, s.design, s.traj, s.grid, s.w, cfg, &s.truth);
  CHECK(psnr(s.truth, bp.volume) < psnr(s.truth, r.volume));
}

TEST_CASE("cgne stopping rules") {
  Small s;
  NoiseSpec ns;
  ns.relative_level = 0.01;
  ns.seed = 5;
  const KSpaceSamples noisy = add_noise(s.data, ns);
  ReconConfig cfg;
  cfg.max_iters = 30;
  cfg.stopping = StoppingRule::kDiscrepancy;
  cfg.noise_level = noisy.noise->level;
  const ReconReport d = reconstruct(noisy, s.design, s.traj, s.grid, s.w, cfg, &s.truth);
  CHECK(d.choice.index >= 1);
  CHECK(d.choice.index <= 30);
  if (!d.choice.flagged) {
    CHECK(d.history.residual[d.choice.index - 1] <= cfg.noise_level);
    CHECK(psnr(s.truth, d.volume) == doctest::Approx(d.psnr_history[d.choice.index - 1]));
  }

  cfg.stopping = StoppingRule::kLCurve;
  const ReconReport l = reconstruct(noisy, s.design, s.traj, s.grid, s.w, cfg, &s.truth);
  CHECK(l.choice.index >= 1);
  CHECK(psnr(s.truth, l.volume) == doctest::Approx(l.psnr_history[l.choice.index - 1]));
}
