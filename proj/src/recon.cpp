#include "rotodt/recon.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "rotodt/metrics.hpp"
#include "rotodt/parallel.hpp"

namespace rotodt {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <class E>
E parse_enum(const std::string& s, std::initializer_list<std::pair<const char*, E>> table,
             const char* what) {
  for (const auto& [name, value] : table)
    if (s == name) return value;
  throw InvalidArgument(std::string("unknown ") + what + " '" + s + "'");
}

}  // namespace

std::string to_string(ReconMethod m) {
  return m == ReconMethod::kBackprop ? "backprop" : "cgne";
}

std::string to_string(StoppingRule s) {
  switch (s) {
    case StoppingRule::kFixed: return "fixed";
    case StoppingRule::kDiscrepancy: return "discrepancy";
    case StoppingRule::kLCurve: return "l-curve";
  }
  return "";
}

std::string to_string(IndicatrixMode m) {
  switch (m) {
    case IndicatrixMode::kAuto: return "auto";
    case IndicatrixMode::kAnalytic: return "analytic";
    case IndicatrixMode::kNumeric: return "numeric";
    case IndicatrixMode::kConstant: return "constant";
  }
  return "";
}

ReconMethod recon_method_from_string(const std::string& s) {
  return parse_enum<ReconMethod>(
      s, {{"backprop", ReconMethod::kBackprop}, {"cgne", ReconMethod::kCgne}},
      "reconstruction method");
}

StoppingRule stopping_rule_from_string(const std::string& s) {
  return parse_enum<StoppingRule>(s,
                                  {{"fixed", StoppingRule::kFixed},
                                   {"discrepancy", StoppingRule::kDiscrepancy},
                                   {"l-curve", StoppingRule::kLCurve}},
                                  "stopping rule");
}

IndicatrixMode indicatrix_mode_from_string(const std::string& s) {
  return parse_enum<IndicatrixMode>(s,
                                    {{"auto", IndicatrixMode::kAuto},
                                     {"analytic", IndicatrixMode::kAnalytic},
                                     {"numeric", IndicatrixMode::kNumeric},
                                     {"constant", IndicatrixMode::kConstant}},
                                    "indicatrix mode");
}

void ReconConfig::validate() const {
  if (max_iters < 1) throw InvalidArgument("max_iters must be >= 1");
  if (stopping == StoppingRule::kDiscrepancy && !(noise_level >= 0.0))
    throw InvalidArgument("discrepancy principle needs a noise level >= 0");
  if (!(tau > 0.0)) throw InvalidArgument("discrepancy factor must be positive");
  if (indicatrix == IndicatrixMode::kConstant && !(indicatrix_constant > 0.0))
    throw InvalidArgument("indicatrix constant must be positive");
  if (!(eps >= 1e-12 && eps <= 1e-2))
    throw InvalidArgument("transform accuracy must lie in [1e-12, 1e-2]");
}

StopChoice stop_discrepancy(const ResidualHistory& history, double delta, double tau) {
  if (history.size() == 0) throw InvalidArgument("empty residual history");
  const double bound = tau * delta;
  for (std::size_t k = 0; k < history.size(); ++k)
    if (delta > 0.0 && history.residual[k] <= bound)
      return {static_cast<int>(k) + 1, false, ""};
  return {static_cast<int>(history.size()), true, "residual never reached tau*delta"};
}

namespace {

struct P2 {
  double x, y;
};

std::vector<std::size_t> stable_argsort(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  return idx;
}

// Largest turning angle among the kept segments; −1 when none turns the
// convex way.
int corner_by_angles(const std::vector<P2>& w, const std::vector<int>& elmts) {
  double best = 0.0;
  int at = -1;
  for (std::size_t i = 0; i + 1 < elmts.size(); ++i) {
    const P2& a = w[elmts[i]];
    const P2& b = w[elmts[i + 1]];
    const double d = a.x * b.y - b.x * a.y;
    if (at < 0 || d < best) {
      best = d;
      at = static_cast<int>(i);
    }
  }
  // unit-vector cross products at rounding level mean a straight line
  if (at >= 0 && best < -1e-10) return elmts[at] + 1;
  return -1;
}

// Point closest to the intersection of the flattest and steepest kept
// segments.
int corner_by_global_behavior(const std::vector<P2>& p, const std::vector<P2>& w,
                              const std::vector<int>& elmts) {
  const int ln = static_cast<int>(elmts.size());
  std::vector<double> hwedge(ln);
  for (int i = 0; i < ln; ++i) hwedge[i] = std::abs(w[elmts[i]].y);
  const auto order = stable_argsort(hwedge);
  // 1-based views of the sorted positions
  auto In = [&](int i) { return static_cast<int>(order[i - 1]) + 1; };
  int count = 1;
  int mn = In(1);
  int mx = In(ln);
  while (mn >= mx && count < ln) {
    mx = std::max(mx, In(ln - count));
    ++count;
    mn = std::min(mn, In(count));
  }
  int I = 0, J = 0;
  if (count > 1) {
    for (int i = 1; i <= count && I == 0; ++i)
      for (int j = ln; j >= ln - count + 1; --j)
        if (In(i) < In(j)) {
          I = In(i);
          J = In(j);
          break;
        }
    if (I == 0) {
      I = In(1);
      J = In(ln);
    }
  } else {
    I = In(1);
    J = In(ln);
  }
  const int eI = elmts[I - 1];
  const int eJ = elmts[J - 1];
  const P2& a = p[eJ];
  const P2& b = p[eJ + 1];
  const double x3 = b.x + (p[eI].y - b.y) / (b.y - a.y) * (b.x - a.x);
  const P2 origin{x3, p[eI].y};
  int index = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = std::pow(origin.x - p[i].x, 2) + std::pow(origin.y - p[i].y, 2);
    if (d < best) {
      best = d;
      index = static_cast<int>(i);
    }
  }
  return index;
}

}  // namespace

StopChoice stop_lcurve(const ResidualHistory& history) {
  if (history.size() < 4) throw InvalidArgument("L-curve needs at least 4 iterations");
  std::vector<int> kept;
  for (std::size_t k = 0; k < history.size(); ++k) {
    const double r = history.residual[k], e = history.solution_norm[k];
    if (std::isfinite(r) && std::isfinite(e) && r > 0.0 && e > 0.0)
      kept.push_back(static_cast<int>(k));
  }
  const int last = static_cast<int>(history.size());
  if (kept.size() < 3) return {last, true, "too few usable L-curve points"};
  StopChoice choice;
  const int nP = static_cast<int>(kept.size());
  std::vector<P2> p(nP);
  for (int i = 0; i < nP; ++i)
    p[i] = {std::log10(history.residual[kept[i]]), std::log10(history.solution_norm[kept[i]])};
  for (int i = 0; i + 1 < nP; ++i)
    if (p[i].x < p[i + 1].x || p[i].y > p[i + 1].y) {
      choice.note = "L-curve is not monotone";
      break;
    }

  std::vector<P2> w(nP - 1);
  std::vector<double> len(nP - 1);
  for (int i = 0; i + 1 < nP; ++i) {
    const double dx = p[i + 1].x - p[i].x, dy = p[i + 1].y - p[i].y;
    len[i] = std::hypot(dx, dy);
    w[i] = len[i] > 0.0 ? P2{dx / len[i], dy / len[i]} : P2{0.0, 0.0};
  }
  auto by_length = stable_argsort(len);
  std::reverse(by_length.begin(), by_length.end());

  std::vector<int> clist;
  bool convex = false;
  for (int count = std::min(5, nP - 1); count < (nP - 1) * 2; count *= 2) {
    std::vector<int> elmts(by_length.begin(),
                           by_length.begin() + std::min(count, nP - 1));
    std::sort(elmts.begin(), elmts.end());
    const int a = corner_by_angles(w, elmts);
    if (a >= 0) {
      convex = true;
      if (std::find(clist.begin(), clist.end(), a) == clist.end()) clist.push_back(a);
    }
    if (elmts.size() >= 1) {
      const int g = corner_by_global_behavior(p, w, elmts);
      if (std::find(clist.begin(), clist.end(), g) == clist.end()) clist.push_back(g);
    }
  }
  if (!convex) return {last, true, "L-curve has no convex corner"};
  if (std::find(clist.begin(), clist.end(), 0) == clist.end()) clist.push_back(0);
  std::sort(clist.begin(), clist.end());

  // candidates where the solution norm grows at least as much as the
  // residual shrinks (1-based positions of the differences)
  const int nc = static_cast<int>(clist.size());
  std::vector<int> vz;
  for (int i = 1; i < nc; ++i)
    if (p[clist[i]].y - p[clist[i - 1]].y >= std::abs(p[clist[i]].x - p[clist[i - 1]].x))
      vz.push_back(i);
  if (!vz.empty() && vz.front() == 1) vz.erase(vz.begin());

  int index;
  if (vz.empty()) {
    index = clist.back();
  } else {
    std::vector<P2> v(nc - 1);
    for (int i = 0; i + 1 < nc; ++i) {
      const double dx = p[clist[i + 1]].x - p[clist[i]].x;
      const double dy = p[clist[i + 1]].y - p[clist[i]].y;
      const double n = std::hypot(dx, dy);
      v[i] = {dx / n, dy / n};
    }
    // delta(m) for 1-based m = 1 … nc − 2
    auto delta = [&](int m) { return v[m - 1].x * v[m].y - v[m].x * v[m - 1].y; };
    int pick = -1;
    for (int z : vz)
      if (delta(z - 1) <= 0.0) {
        pick = z;
        break;
      }
    index = clist[(pick < 0 ? vz.back() : pick) - 1];
  }
  choice.index = kept[index] + 1;
  return choice;
}

std::vector<double> backprop_weights(const SampleDesign& design, const Trajectory& traj,
                                     const WaveParameters& w, Imaging imaging,
                                     const ReconConfig& config) {
  IndicatrixMode mode = config.indicatrix;
  double constant = config.indicatrix_constant;
  if (mode == IndicatrixMode::kAuto) {
    if (has_analytic_indicatrix(traj, imaging)) {
      mode = IndicatrixMode::kAnalytic;
    } else if (traj.kind() == Trajectory::Kind::kOscillatingAxis) {
      mode = IndicatrixMode::kConstant;
      constant = 2.0;
    } else {
      throw NoAnalyticIndicatrix(
          "no analytic indicatrix for " + traj.describe() +
          "; choose the numeric or constant indicatrix mode");
    }
  }
  if (mode == IndicatrixMode::kAnalytic && !has_analytic_indicatrix(traj, imaging))
    throw NoAnalyticIndicatrix("no analytic indicatrix for " + traj.describe());

  const std::size_t per = design.per_angle();
  std::vector<double> weights(design.size());
  parallel_for(weights.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const auto& d = design.disk()[i % per];
      const KPoint p{d.k1, d.k2, design.time(static_cast<int>(i / per)), imaging};
      const double jac = jacobian(p, traj, w);
      if (jac == 0.0) {
        weights[i] = 0.0;
        continue;
      }
      double card = constant;
      if (mode == IndicatrixMode::kAnalytic) {
        card = indicatrix_analytic(p, traj, w);
      } else if (mode == IndicatrixMode::kNumeric) {
        const Vec3 y = t_map(p, traj, w);
        card = y.norm() > 0.0 ? indicatrix_numeric(y, traj, w) : 0.0;
      }
      weights[i] = card > 0.0 ? jac / card : 0.0;
    }
  });
  return weights;
}

double backprop_scale(const SampleDesign& design, const GridSpec& grid) {
  // nominal detector cell 2k0/N of the frequency lattice, exact Δt = L/S
  const double dk = 2.0 * design.k0() / design.N();
  const double h = grid.spacing();
  return dk * dk * design.time_step() / (h * h * h);
}

Volume backpropagate(const KSpaceSamples& samples, const SampleDesign& design,
                     const Trajectory& traj, const GridSpec& grid,
                     const WaveParameters& w, const ReconConfig& config,
                     double* imaginary_fraction) {
  config.validate();
  samples.validate();
  if (samples.size() != design.size())
    throw InvalidArgument("sample count " + std::to_string(samples.size()) +
                          " does not match the design (" + std::to_string(design.size()) + ")");
  const auto weights = backprop_weights(design, traj, w, samples.imaging, config);
  std::vector<cplx> g(samples.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = samples.values[i] * weights[i];
  FourierOperator op(grid, samples.points, config.eps);
  Volume vol = op.adjoint(g);
  const double scale = backprop_scale(design, grid);
  for (cplx& v : vol.values) v *= scale;
  if (imaginary_fraction) *imaginary_fraction = relative_imaginary(vol);
  for (cplx& v : vol.values) v = v.real();
  return vol;
}

ReconReport reconstruct_cgne(const KSpaceSamples& samples, const GridSpec& grid,
                             const ReconConfig& config, const Volume* truth,
                             const FourierOperator* op) {
  config.validate();
  samples.validate();
  ReconReport report;
  auto t0 = Clock::now();
  std::optional<FourierOperator> own;
  if (op == nullptr) {
    own.emplace(grid, samples.points, config.eps);
    op = &*own;
  }
  if (!(op->grid() == grid) || op->num_points() != samples.size())
    throw InvalidArgument("operator does not match the samples");
  report.timings["plan"] = seconds_since(t0);

  const bool real = config.real_unknowns;
  auto fwd = [&](std::span<const cplx> x, std::span<cplx> out) { op->forward(x, out); };
  auto adj = [&](std::span<const cplx> v, std::span<cplx> x) {
    op->adjoint(v, x);
    if (real)
      for (cplx& z : x) z = z.real();
  };

  const double delta = config.noise_level;
  const bool discrepancy = config.stopping == StoppingRule::kDiscrepancy;
  std::optional<StopChoice> crossed;
  std::vector<cplx> snapshot;
  Volume work(grid);
  auto recorder = [&](int k, std::span<const cplx> x, double res, double) {
    if (truth) {
      for (std::size_t i = 0; i < x.size(); ++i) work.values[i] = x[i].real();
      report.psnr_history.push_back(psnr(*truth, work));
    }
    if (discrepancy && !crossed && delta > 0.0 && res <= config.tau * delta) {
      crossed = StopChoice{k, false, ""};
      snapshot.assign(x.begin(), x.end());
    }
    return true;
  };

  t0 = Clock::now();
  auto result = cgne_solve(fwd, adj, samples.values, grid.size(), config.max_iters, recorder);
  report.timings["iterations"] = seconds_since(t0);
  report.history = std::move(result.history);

  std::vector<cplx> chosen;
  switch (config.stopping) {
    case StoppingRule::kFixed:
      report.choice = {static_cast<int>(report.history.size()), false, ""};
      chosen = std::move(result.solution);
      break;
    case StoppingRule::kDiscrepancy:
      if (crossed) {
        report.choice = *crossed;
        chosen = std::move(snapshot);
      } else {
        report.choice = stop_discrepancy(report.history, delta, config.tau);
        chosen = std::move(result.solution);
      }
      break;
    case StoppingRule::kLCurve: {
      report.choice = stop_lcurve(report.history);
      if (report.choice.index == static_cast<int>(report.history.size())) {
        chosen = std::move(result.solution);
      } else {
        t0 = Clock::now();
        auto rerun = cgne_solve(fwd, adj, samples.values, grid.size(), report.choice.index);
        report.timings["rerun"] = seconds_since(t0);
        chosen = std::move(rerun.solution);
      }
      break;
    }
  }
  Volume vol(grid, std::move(chosen));
  report.imaginary_fraction = relative_imaginary(vol);
  for (cplx& v : vol.values) v = v.real();
  report.volume = std::move(vol);
  return report;
}

ReconReport reconstruct(const KSpaceSamples& samples, const SampleDesign& design,
                        const Trajectory& traj, const GridSpec& grid,
                        const WaveParameters& w, const ReconConfig& config,
                        const Volume* truth) {
  if (config.method == ReconMethod::kCgne) return reconstruct_cgne(samples, grid, config, truth);
  ReconReport report;
  const auto t0 = Clock::now();
  report.volume = backpropagate(samples, design, traj, grid, w, config, &report.imaginary_fraction);
  report.timings["backprop"] = seconds_since(t0);
  if (truth) report.psnr_history.push_back(psnr(*truth, report.volume));
  return report;
}

}  // namespace rotodt
