#include "rotodt/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>

#include "rotodt/metrics.hpp"

namespace rotodt {

namespace fs = std::filesystem;

std::string to_string(DataSource s) {
  switch (s) {
    case DataSource::kAnalytic: return "analytic";
    case DataSource::kFineGrid: return "fine-grid";
    case DataSource::kFile: return "file";
  }
  return "";
}

namespace {

// Typed access to one JSON object; remembers which keys were read so that
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw InvalidArgument(where_ + " must be a JSON object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_[key].is_null();
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    try {
      return j_[key].get<T>();
    } catch (const json::exception&) {
      throw InvalidArgument(path(key) + " has the wrong type");
    }
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string path(const std::string& key) const {
    return where_.empty() ? key : where_ + "." + key;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) throw InvalidArgument("unknown config key '" + path(key) + "'");
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

double angle_value(const json& v, const std::string& where) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "0") return 0.0;
    if (s == "pi") return kPi;
    if (s == "2pi") return 2.0 * kPi;
  }
  throw InvalidArgument(where + ": angle must be a number, \"pi\" or \"2pi\"");
}

Imaging imaging_from_string(const std::string& s, const std::string& where) {
  if (s == "transmission") return Imaging::kTransmission;
  if (s == "reflection") return Imaging::kReflection;
  throw InvalidArgument(where + ": imaging must be transmission or reflection");
}

std::string imaging_name(Imaging im) {
  return im == Imaging::kTransmission ? "transmission" : "reflection";
}

Vec3 vec3_from(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 3) throw InvalidArgument(where + " must be [x, y, z]");
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    if (!v[i].is_number()) throw InvalidArgument(where + " must be numeric");
    out[i] = v[i].get<double>();
  }
  return out;
}

template <class F>
auto rethrow_at(const std::string& where, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(where + ": " + e.what());
  }
}

}  // namespace

double ExperimentConfig::resolved_support_radius() const {
  return support_radius ? *support_radius : N * wavelength / (4.0 * std::sqrt(2.0));
}

double ExperimentConfig::resolved_detector_distance() const {
  return detector_distance ? *detector_distance : 2.0 * resolved_support_radius();
}

ExperimentConfig parse_config(const json& doc) {
  ExperimentConfig c;
  Section top(doc, "");

  if (top.has("wave")) {
    Section s(top.raw("wave"), "wave");
    c.wavelength = s.get("wavelength", c.wavelength);
    c.background_index = s.get("background_index", c.background_index);
    if (s.has("detector_distance")) c.detector_distance = s.get("detector_distance", 0.0);
    s.finish();
  }
  c.N = top.get("N", c.N);
  if (top.has("support_radius")) c.support_radius = top.get("support_radius", 0.0);
  c.angles = top.get("angles", c.angles);
  c.lattice = rethrow_at("lattice", [&] {
    return lattice_rule_from_string(top.get<std::string>("lattice", "linspace"));
  });
  c.imaging = imaging_from_string(top.get<std::string>("imaging", "transmission"), "imaging");

  if (top.has("trajectory")) {
    Section s(top.raw("trajectory"), "trajectory");
    auto& t = c.trajectory;
    t.kind = s.get<std::string>("kind", t.kind);
    if (t.kind == "fixed-axis") {
      if (s.has("axis")) t.axis = vec3_from(s.raw("axis"), "trajectory.axis");
      if (s.has("range")) {
        const json& r = s.raw("range");
        if (!r.is_array() || r.size() != 2) throw InvalidArgument("trajectory.range must be [from, to]");
        t.from = angle_value(r[0], "trajectory.range");
        t.to = angle_value(r[1], "trajectory.range");
      }
    } else if (t.kind == "oscillating-axis") {
      t.c = s.get("c", t.c);
    } else if (t.kind == "tabulated") {
      t.file = s.get<std::string>("file", "");
      if (t.file.empty()) throw InvalidArgument("trajectory.file is required for tabulated");
    } else {
      throw InvalidArgument("trajectory.kind must be fixed-axis, oscillating-axis or tabulated");
    }
    s.finish();
  }

  if (top.has("phantom")) {
    Section s(top.raw("phantom"), "phantom");
    auto& p = c.phantom;
    p.kind = s.get<std::string>("kind", p.kind);
    p.amplitude = s.get("amplitude", p.amplitude);
    if (p.kind == "ball") {
      p.radius = s.get("radius", p.radius);
    } else if (p.kind == "ball-with-gap") {
      p.radius = s.get("radius", p.radius);
      p.half_width = s.get("half_width", p.half_width);
    } else if (p.kind == "shepp-logan") {
      if (s.has("scale")) p.scale = s.get("scale", 0.0);
      p.contrast = rethrow_at("phantom.contrast", [&] {
        return shepp_logan_contrast_from_string(s.get<std::string>("contrast", "modified"));
      });
    } else if (p.kind == "constant") {
      p.amplitude = s.get("value", p.amplitude);
    } else {
      throw InvalidArgument("phantom.kind must be ball, ball-with-gap, shepp-logan or constant");
    }
    s.finish();
  }

  if (top.has("data")) {
    Section s(top.raw("data"), "data");
    auto& d = c.data;
    const std::string src = s.get<std::string>("source", "analytic");
    if (src == "analytic") d.source = DataSource::kAnalytic;
    else if (src == "fine-grid") d.source = DataSource::kFineGrid;
    else if (src == "file") d.source = DataSource::kFile;
    else throw InvalidArgument("data.source must be analytic, fine-grid or file");
    d.factor = s.get("factor", d.factor);
    d.eps = s.get("eps", d.eps);
    d.file = s.get<std::string>("file", "");
    if (d.source == DataSource::kFile && d.file.empty())
      throw InvalidArgument("data.file is required for source file");
    s.finish();
  }

  if (top.has("noise")) {
    Section s(top.raw("noise"), "noise");
    auto& n = c.noise;
    n.level = s.get("level", n.level);
    n.relative_level = s.get("relative_level", n.relative_level);
    n.seed = s.get<std::uint64_t>("seed", n.seed);
    n.complex_noise = s.get("complex", n.complex_noise);
    s.finish();
  }

  if (top.has("recon")) {
    Section s(top.raw("recon"), "recon");
    auto& r = c.recon;
    r.method = rethrow_at("recon.method", [&] {
      return recon_method_from_string(s.get<std::string>("method", to_string(r.method)));
    });
    r.max_iters = s.get("max_iters", r.max_iters);
    r.stopping = rethrow_at("recon.stopping", [&] {
      return stopping_rule_from_string(s.get<std::string>("stopping", to_string(r.stopping)));
    });
    if (s.has("noise_level")) {
      r.noise_level = s.get("noise_level", 0.0);
      c.recon_noise_from_data = false;
    }
    r.tau = s.get("tau", r.tau);
    r.indicatrix = rethrow_at("recon.indicatrix", [&] {
      return indicatrix_mode_from_string(s.get<std::string>("indicatrix", to_string(r.indicatrix)));
    });
    r.indicatrix_constant = s.get("indicatrix_constant", r.indicatrix_constant);
    r.eps = s.get("eps", r.eps);
    r.real_unknowns = s.get("real_unknowns", r.real_unknowns);
    s.finish();
  }

  if (top.has("truth")) {
    Section s(top.raw("truth"), "truth");
    c.truth_factor = s.get("factor", c.truth_factor);
    s.finish();
  }

  if (top.has("validation")) {
    Section s(top.raw("validation"), "validation");
    auto& v = c.validation;
    v.sizes = s.get("sizes", v.sizes);
    v.radius = s.get("radius", v.radius);
    v.support_radius = s.get("support_radius", v.support_radius);
    v.detector_distance = s.get("detector_distance", v.detector_distance);
    v.detector_size = s.get("detector_size", v.detector_size);
    v.detector_spacing = s.get("detector_spacing", v.detector_spacing);
    v.band_fraction = s.get("band_fraction", v.band_fraction);
    v.oversample = s.get("oversample", v.oversample);
    v.imaging = imaging_from_string(s.get<std::string>("imaging", "transmission"), "validation.imaging");
    v.zero_phantom = s.get("zero_phantom", v.zero_phantom);
    s.finish();
  }

  c.output = top.get<std::string>("output", c.output.string());
  top.finish();

  // cross-field checks
  if (c.N < 2 || c.N % 2 != 0) throw InvalidArgument("N must be even and >= 2 (got " + std::to_string(c.N) + ")");
  if (c.angles < 0) throw InvalidArgument("angles must be >= 0");
  if (!(c.wavelength > 0.0)) throw InvalidArgument("wave.wavelength must be positive");
  const double rs = c.resolved_support_radius();
  if (!(rs > 0.0)) throw InvalidArgument("support_radius must be positive");
  const double k0 = 2.0 * kPi / c.wavelength;
  if (c.N < 2.0 * std::sqrt(2.0) * k0 * rs / kPi * (1.0 - 1e-12))
    throw InvalidArgument("grid too coarse: N must be >= 2 sqrt(2) k0 r_s / pi = " +
                          std::to_string(2.0 * std::sqrt(2.0) * k0 * rs / kPi));
  if (c.data.factor < 1 || c.data.factor % 2 == 0)
    throw InvalidArgument("data.factor must be a positive odd integer");
  if (!(c.data.eps >= 1e-12 && c.data.eps <= 1e-2)) throw InvalidArgument("data.eps must lie in [1e-12, 1e-2]");
  if (c.truth_factor < 1 || c.truth_factor % 2 == 0)
    throw InvalidArgument("truth.factor must be a positive odd integer");
  if (!(c.noise.level >= 0.0)) throw InvalidArgument("noise.level must be >= 0");
  if (c.trajectory.kind == "fixed-axis" && !(c.trajectory.to > c.trajectory.from))
    throw InvalidArgument("trajectory.range must be increasing");
  if (c.trajectory.kind == "fixed-axis" && !(c.trajectory.axis.norm() > 0.0))
    throw InvalidArgument("trajectory.axis must be nonzero");
  if (c.validation.sizes.empty()) throw InvalidArgument("validation.sizes must not be empty");
  for (int n : c.validation.sizes)
    if (n < 2 || n % 2 != 0 || n > 48) throw InvalidArgument("validation.sizes must be even and <= 48");
  rethrow_at("recon", [&] { c.recon.validate(); });
  WaveParameters::from_wavelength(c.wavelength, rs, c.resolved_detector_distance(), c.background_index);
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  return parse_config(read_json(path));
}

json to_json(const ExperimentConfig& c) {
  json t;
  t["kind"] = c.trajectory.kind;
  if (c.trajectory.kind == "fixed-axis") {
    t["axis"] = {c.trajectory.axis.x(), c.trajectory.axis.y(), c.trajectory.axis.z()};
    t["range"] = {c.trajectory.from, c.trajectory.to};
  } else if (c.trajectory.kind == "oscillating-axis") {
    t["c"] = c.trajectory.c;
  } else {
    t["file"] = c.trajectory.file.string();
  }
  json p;
  p["kind"] = c.phantom.kind;
  if (c.phantom.kind == "ball" || c.phantom.kind == "ball-with-gap") p["radius"] = c.phantom.radius;
  if (c.phantom.kind == "ball-with-gap") p["half_width"] = c.phantom.half_width;
  if (c.phantom.kind == "shepp-logan") {
    p["scale"] = c.phantom.scale ? *c.phantom.scale
                                 : kSheppLoganFill * c.resolved_support_radius() /
                                       Phantom::shepp_logan(1.0).support_radius();
    p["contrast"] = to_string(c.phantom.contrast);
  }
  if (c.phantom.kind == "constant") p["value"] = c.phantom.amplitude;
  else p["amplitude"] = c.phantom.amplitude;

  json d = {{"source", to_string(c.data.source)}, {"factor", c.data.factor}, {"eps", c.data.eps}};
  if (c.data.source == DataSource::kFile) d["file"] = c.data.file.string();

  json r = {{"method", to_string(c.recon.method)},
            {"max_iters", c.recon.max_iters},
            {"stopping", to_string(c.recon.stopping)},
            {"tau", c.recon.tau},
            {"indicatrix", to_string(c.recon.indicatrix)},
            {"indicatrix_constant", c.recon.indicatrix_constant},
            {"eps", c.recon.eps},
            {"real_unknowns", c.recon.real_unknowns}};
  if (!c.recon_noise_from_data) r["noise_level"] = c.recon.noise_level;

  const auto& v = c.validation;
  return {
      {"wave",
       {{"wavelength", c.wavelength},
        {"k0", 2.0 * kPi / c.wavelength},
        {"background_index", c.background_index},
        {"detector_distance", c.resolved_detector_distance()}}},
      {"N", c.N},
      {"support_radius", c.resolved_support_radius()},
      {"angles", c.angles > 0 ? c.angles : default_angle_count(c.N)},
      {"lattice", to_string(c.lattice)},
      {"imaging", imaging_name(c.imaging)},
      {"trajectory", t},
      {"phantom", p},
      {"data", d},
      {"noise",
       {{"level", c.noise.level},
        {"relative_level", c.noise.relative_level},
        {"seed", c.noise.seed},
        {"complex", c.noise.complex_noise},
        {"model", c.noise.complex_noise ? "complex: delta/sqrt(2) N(0,1) per part"
                                        : "real: delta N(0,1) added to the real part"}}},
      {"recon", r},
      {"truth", {{"factor", c.truth_factor}}},
      {"validation",
       {{"sizes", v.sizes},
        {"radius", v.radius},
        {"support_radius", v.support_radius},
        {"detector_distance", v.detector_distance},
        {"detector_size", v.detector_size},
        {"detector_spacing", v.detector_spacing},
        {"band_fraction", v.band_fraction},
        {"oversample", v.oversample},
        {"imaging", imaging_name(v.imaging)},
        {"zero_phantom", v.zero_phantom}}},
      {"output", c.output.string()},
  };
}

Trajectory make_trajectory(const TrajectoryConfig& t) {
  if (t.kind == "fixed-axis") return Trajectory::fixed_axis_range(t.axis.normalized(), t.from, t.to);
  if (t.kind == "oscillating-axis") return Trajectory::oscillating_axis(t.c);
  return Trajectory::from_csv(t.file);
}

Phantom make_phantom(const PhantomConfig& p, double support_radius) {
  if (p.kind == "ball") return Phantom::ball(p.radius, p.amplitude);
  if (p.kind == "ball-with-gap") return Phantom::ball_with_gap(p.radius, p.half_width, p.amplitude);
  if (p.kind == "shepp-logan") {
    const double scale =
        p.scale ? *p.scale : kSheppLoganFill * support_radius / Phantom::shepp_logan(1.0).support_radius();
    return Phantom::shepp_logan(scale, p.contrast, p.amplitude);
  }
  return Phantom::constant(p.amplitude);
}

namespace {

WaveParameters wave_of(const ExperimentConfig& c) {
  return WaveParameters::from_wavelength(c.wavelength, c.resolved_support_radius(),
                                         c.resolved_detector_distance(), c.background_index);
}

}  // namespace

Experiment::Experiment(ExperimentConfig cfg)
    : config(std::move(cfg)),
      wave(wave_of(config)),
      grid(build_grid(config.N, config.resolved_support_radius())),
      trajectory(make_trajectory(config.trajectory)),
      design(build_design(config.N, config.angles, wave, trajectory.duration(), config.lattice)),
      phantom(make_phantom(config.phantom, config.resolved_support_radius())) {
  if (phantom.kind() != Phantom::Kind::kConstant && phantom.support_radius() > grid.support_radius)
    throw InvalidArgument("phantom support " + std::to_string(phantom.support_radius()) +
                          " exceeds r_s = " + std::to_string(grid.support_radius));
  if (config.data.source == DataSource::kAnalytic && !phantom.has_fourier())
    throw InvalidArgument("data.source analytic needs a closed-form transform, which " +
                          phantom.describe() + " lacks; use fine-grid");
}

std::vector<Vec3> Experiment::points() const {
  return build_kspace_points(design, trajectory, wave, config.imaging);
}

KSpaceSamples clean_data(const Experiment& ex, const std::vector<Vec3>& points) {
  const auto& d = ex.config.data;
  switch (d.source) {
    case DataSource::kAnalytic:
      return analytic_kspace(ex.phantom, points, ex.config.imaging);
    case DataSource::kFineGrid:
      return synthesize_kspace(ex.phantom, ex.grid, d.factor, points, d.eps, ex.config.imaging);
    case DataSource::kFile: {
      SamplesFile f = read_samples(d.file);
      f.samples.noise.reset();
      return std::move(f.samples);
    }
  }
  throw Error("unreachable data source");
}

KSpaceSamples simulate(const Experiment& ex) {
  KSpaceSamples s = clean_data(ex, ex.points());
  check_samples_match(ex, s);
  return add_noise(s, ex.config.noise);
}

json samples_metadata(const Experiment& ex, const KSpaceSamples& samples) {
  double peak = 0.0;
  for (const cplx& v : samples.values) peak = std::max(peak, std::abs(v));
  return {{"N", ex.config.N},
          {"S", ex.design.S()},
          {"per_angle", ex.design.per_angle()},
          {"k0", ex.wave.k0},
          {"support_radius", ex.grid.support_radius},
          {"trajectory", ex.trajectory.describe()},
          {"max_abs", peak},
          {"config", to_json(ex.config)},
          {"conventions",
           {{"fourier", "(2pi)^(-3/2) int f(r) exp(-i r.y) dr"},
            {"lattice", to_string(ex.design.rule())},
            {"frequency_step", ex.design.frequency_step()},
            {"frequency_offset", ex.design.frequency_offset()},
            {"time_grid", "t_s = L s / S"},
            {"order", "angle-major, then (j1, j2) lexicographic"}}}};
}

void check_samples_match(const Experiment& ex, const KSpaceSamples& samples) {
  if (samples.size() != ex.design.size())
    throw InvalidArgument("sample/design mismatch: " + std::to_string(samples.size()) +
                          " samples, design has " + std::to_string(ex.design.size()));
  if (samples.imaging != ex.config.imaging)
    throw InvalidArgument("sample/design mismatch: imaging side differs");
  const auto pts = ex.points();
  double worst = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    worst = std::max(worst, (pts[i] - samples.points[i]).norm());
  if (worst > 1e-9 * ex.wave.k0)
    throw InvalidArgument("sample/design mismatch: points deviate by up to " + std::to_string(worst));
}

Volume truth_volume(const Experiment& ex) {
  return averaged_truth(ex.phantom, ex.grid, ex.config.truth_factor);
}

ReconConfig effective_recon_config(const Experiment& ex, const KSpaceSamples& samples) {
  ReconConfig r = ex.config.recon;
  if (ex.config.recon_noise_from_data) r.noise_level = samples.noise ? samples.noise->level : 0.0;
  return r;
}

RunResult run_reconstruction(const Experiment& ex, const KSpaceSamples& samples,
                             const Volume* truth) {
  check_samples_match(ex, samples);
  RunResult out;
  out.report = reconstruct(samples, ex.design, ex.trajectory, ex.grid, ex.wave,
                           effective_recon_config(ex, samples), truth);
  if (truth) out.quality = quality(*truth, out.report.volume);
  return out;
}

json number_or_sentinel(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

json quality_json(const QualityReport& q) {
  return {{"psnr", number_or_sentinel(q.psnr)},
          {"ssim", number_or_sentinel(q.ssim)},
          {"rmse", number_or_sentinel(q.rmse)}};
}

json report_json(const Experiment& ex, const RunResult& run) {
  const ReconReport& r = run.report;
  json j;
  j["config"] = to_json(ex.config);
  j["method"] = to_string(ex.config.recon.method);
  j["iterations"] = r.history.size();
  j["residual_history"] = r.history.residual;
  j["solution_norm_history"] = r.history.solution_norm;
  json ph = json::array();
  for (double p : r.psnr_history) ph.push_back(number_or_sentinel(p));
  j["psnr_history"] = ph;
  j["chosen_iteration"] = r.choice.index;
  j["choice_flagged"] = r.choice.flagged;
  j["choice_note"] = r.choice.note;
  j["imaginary_fraction"] = r.imaginary_fraction;
  if (run.quality) j["quality"] = quality_json(*run.quality);
  j["metrics_conventions"] = {
      {"truth", "voxel means over a " + std::to_string(ex.config.truth_factor) + "^3 subgrid"},
      {"psnr", "10 log10(max|truth|^2 / mean|truth - test|^2)"},
      {"ssim", "3D Gaussian window sigma 1.5, 11^3, K1 0.01, K2 0.03, D = truth max - min"}};
  j["timings"] = r.timings;
  return j;
}

json run_validation(const ValidationConfig& v, double wavelength) {
  const WaveParameters w = WaveParameters::from_wavelength(wavelength, v.support_radius,
                                                           v.detector_distance);
  const Phantom ball = Phantom::ball(v.radius);
  const DetectorSpec det{v.detector_size, v.detector_spacing};
  json rows = json::array();
  for (int n : v.sizes) {
    const GridSpec g = build_grid(n, v.support_radius);
    const Volume f = v.zero_phantom ? Volume(g) : rasterize(ball, g, v.oversample);
    const auto t0 = std::chrono::steady_clock::now();
    const FdtReport r = fdt_check(f, v.zero_phantom ? nullptr : &ball, w, v.imaging, det,
                                  v.band_fraction);
    rows.push_back({{"n_o", n},
                    {"relative_error", r.relative_error},
                    {"max_pointwise_error", r.max_pointwise_error},
                    {"discrete_relative_error", r.discrete_relative_error},
                    {"frequencies", r.compared},
                    {"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}});
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < rows.size(); ++i)
    decreasing = decreasing && rows[i]["relative_error"].get<double>() <
                                   rows[i - 1]["relative_error"].get<double>();
  return {{"phantom", v.zero_phantom ? "zero" : "ball"},
          {"radius", v.radius},
          {"band", v.band_fraction * w.k0},
          {"imaging", imaging_name(v.imaging)},
          {"rows", rows},
          {"final_relative_error", rows.back()["relative_error"]},
          {"monotone_decrease", decreasing}};
}

json design_summary(const Experiment& ex) {
  json rules = json::array();
  for (LatticeRule rule : {LatticeRule::kLinspace, LatticeRule::kIntegerStrict}) {
    const SampleDesign d = build_design(ex.config.N, ex.config.angles, ex.wave,
                                        ex.trajectory.duration(), rule);
    rules.push_back({{"lattice", to_string(rule)},
                     {"frequency_step", d.frequency_step()},
                     {"frequency_offset", d.frequency_offset()},
                     {"per_angle", d.per_angle()},
                     {"total", d.size()}});
  }
  return {{"N", ex.config.N},
          {"S", ex.design.S()},
          {"k0", ex.wave.k0},
          {"trajectory", ex.trajectory.describe()},
          {"active_lattice", to_string(ex.design.rule())},
          {"per_angle", ex.design.per_angle()},
          {"total", ex.design.size()},
          {"conventions", rules},
          {"notes",
           "linspace: k in linspace(-k0, k0, N) per axis, kept when k1^2 + k2^2 <= k0^2; "
           "reproduces 496944 points for N = 80, S = 102. "
           "integer: k = (2 k0 / N) j, j in {-N/2..N/2-1}, kept when j1^2 + j2^2 < (N/2)^2."}};
}

}  // namespace rotodt
