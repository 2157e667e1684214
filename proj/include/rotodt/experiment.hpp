#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rotodt/forward.hpp"
#include "rotodt/io.hpp"
#include "rotodt/metrics.hpp"
#include "rotodt/phantoms.hpp"
#include "rotodt/recon.hpp"
#include "rotodt/sampling.hpp"
#include "rotodt/trajectory.hpp"
#include "rotodt/validation.hpp"

namespace rotodt {

enum class DataSource { kAnalytic, kFineGrid, kFile };

std::string to_string(DataSource s);

struct TrajectoryConfig {
  std::string kind = "fixed-axis";  // fixed-axis | oscillating-axis | tabulated
  Vec3 axis = Vec3::UnitX();
  double from = 0.0;
  double to = 2.0 * kPi;
  double c = 0.0;
  std::filesystem::path file;
};

/// Default Shepp-Logan support radius as a fraction of r_s.
inline constexpr double kSheppLoganFill = 0.75;

struct PhantomConfig {
  std::string kind = "ball";  // ball | ball-with-gap | shepp-logan | constant
  double radius = 9.0;
  double half_width = 0.5;
  std::optional<double> scale;  // default: support fills B_{kSheppLoganFill r_s}
  SheppLoganContrast contrast = SheppLoganContrast::kModified;
  double amplitude = 1.0;
};

struct DataConfig {
  DataSource source = DataSource::kAnalytic;
  int factor = 5;
  double eps = 1e-8;
  std::filesystem::path file;
};

struct ValidationConfig {
  std::vector<int> sizes{16, 24, 32};
  double radius = 2.0;
  double support_radius = 2.5;
  double detector_distance = 3.0;
  int detector_size = 128;
  double detector_spacing = 0.5;
  double band_fraction = 0.8;
  int oversample = 1;
  Imaging imaging = Imaging::kTransmission;
  bool zero_phantom = false;
};

/// A complete experiment. Every field has a default; the defaults describe
/// the N = 80 ball under a full rotation about e1 reconstructed by CGNE(20).
struct ExperimentConfig {
  double wavelength = 1.0;
  double background_index = 1.0;
  std::optional<double> detector_distance;  // default 2 r_s
  int N = 80;
  std::optional<double> support_radius;     // default N λ / (4√2)
  int angles = 0;                           // 0 selects ⌈4N/π⌉
  LatticeRule lattice = LatticeRule::kLinspace;
  Imaging imaging = Imaging::kTransmission;
  TrajectoryConfig trajectory;
  PhantomConfig phantom;
  DataConfig data;
  NoiseSpec noise;
  ReconConfig recon;
  bool recon_noise_from_data = true;  // discrepancy δ from the samples' record
  int truth_factor = 5;
  ValidationConfig validation;
  std::filesystem::path output = "out";

  double resolved_support_radius() const;
  double resolved_detector_distance() const;
};

/// Parses and validates; unknown keys are rejected. Errors name the
/// offending key.
ExperimentConfig parse_config(const json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Normalized echo with every convention spelled out.
json to_json(const ExperimentConfig& cfg);

/// The derived objects of a configuration.
struct Experiment {
  ExperimentConfig config;
  WaveParameters wave;
  GridSpec grid;
  Trajectory trajectory;
  SampleDesign design;
  Phantom phantom;

  explicit Experiment(ExperimentConfig cfg);

  std::vector<Vec3> points() const;
};

Trajectory make_trajectory(const TrajectoryConfig& t);
Phantom make_phantom(const PhantomConfig& p, double support_radius);

/// Clean data from the configured source, then noise.
KSpaceSamples simulate(const Experiment& ex);
KSpaceSamples clean_data(const Experiment& ex, const std::vector<Vec3>& points);

json samples_metadata(const Experiment& ex, const KSpaceSamples& samples);

/// Throws InvalidArgument unless the samples sit on the experiment's design.
void check_samples_match(const Experiment& ex, const KSpaceSamples& samples);

Volume truth_volume(const Experiment& ex);

/// δ used by the discrepancy principle: the configured value, else the
/// samples' noise record.
ReconConfig effective_recon_config(const Experiment& ex, const KSpaceSamples& samples);

struct RunResult {
  ReconReport report;
  std::optional<QualityReport> quality;
};

RunResult run_reconstruction(const Experiment& ex, const KSpaceSamples& samples,
                             const Volume* truth);

/// Serialized report. Timings go under "timings" so that reruns can be
/// compared with that key removed.
json report_json(const Experiment& ex, const RunResult& run);
json quality_json(const QualityReport& q);

/// Oracle sweep over the configured sizes.
json run_validation(const ValidationConfig& v, double wavelength);

/// Point counts under every lattice convention plus the active one.
json design_summary(const Experiment& ex);

/// JSON number, or the strings "inf"/"-inf"/"nan".
json number_or_sentinel(double x);

}  // namespace rotodt
