#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rotodt/geometry.hpp"
#include "rotodt/sampling.hpp"
#include "rotodt/transform.hpp"
#include "rotodt/volume.hpp"

namespace rotodt {

enum class ReconMethod { kBackprop, kCgne };
enum class StoppingRule { kFixed, kDiscrepancy, kLCurve };
/// kAuto: analytic where known, the constant 2 for the oscillating axis,
/// an error otherwise.
enum class IndicatrixMode { kAuto, kAnalytic, kNumeric, kConstant };

std::string to_string(ReconMethod m);
std::string to_string(StoppingRule s);
std::string to_string(IndicatrixMode m);
ReconMethod recon_method_from_string(const std::string& s);
StoppingRule stopping_rule_from_string(const std::string& s);
IndicatrixMode indicatrix_mode_from_string(const std::string& s);

struct ReconConfig {
  ReconMethod method = ReconMethod::kCgne;
  int max_iters = 20;
  StoppingRule stopping = StoppingRule::kFixed;
  double noise_level = 0.0;  // δ for the discrepancy principle
  double tau = 1.0;
  IndicatrixMode indicatrix = IndicatrixMode::kAuto;
  double indicatrix_constant = 2.0;
  double eps = 1e-6;
  /// Restrict CGNE to real volumes (adjoint replaced by Re F*).
  bool real_unknowns = false;

  void validate() const;
};

struct StopChoice {
  int index = 0;  // 1-based iteration
  bool flagged = false;
  std::string note;
};

/// Smallest k with residual_k ≤ τδ; the last index, flagged, if none.
StopChoice stop_discrepancy(const ResidualHistory& history, double delta,
                            double tau = 1.0);

/// Corner of the log-log curve (residual, solution norm) by adaptive
/// pruning. Flags degenerate curves and falls back to the last index.
StopChoice stop_lcurve(const ResidualHistory& history);

struct ReconReport {
  Volume volume;  // real part of the solution
  ResidualHistory history;
  std::vector<double> psnr_history;  // per iteration when a truth is given
  StopChoice choice;
  double imaginary_fraction = 0.0;  // max|Im| / max|x| before taking Re
  std::map<std::string, double> timings;  // seconds
};

/// |∇T±| / Card(T±⁻¹(T±(·))) for every design point, in design order.
std::vector<double> backprop_weights(const SampleDesign& design,
                                     const Trajectory& traj,
                                     const WaveParameters& w, Imaging imaging,
                                     const ReconConfig& config);

/// Δk² Δt / h³ with Δk = 2k0/N and Δt = L/S: the ratio between the
/// backpropagation quadrature and the weight carried by the adjoint operator.
double backprop_scale(const SampleDesign& design, const GridSpec& grid);

Volume backpropagate(const KSpaceSamples& samples, const SampleDesign& design,
                     const Trajectory& traj, const GridSpec& grid,
                     const WaveParameters& w, const ReconConfig& config,
                     double* imaginary_fraction = nullptr);

/// CGNE with the configured stopping rule. With a truth, the PSNR of the
/// real part of every iterate is recorded.
ReconReport reconstruct_cgne(const KSpaceSamples& samples, const GridSpec& grid,
                             const ReconConfig& config,
                             const Volume* truth = nullptr,
                             const FourierOperator* op = nullptr);

ReconReport reconstruct(const KSpaceSamples& samples, const SampleDesign& design,
                        const Trajectory& traj, const GridSpec& grid,
                        const WaveParameters& w, const ReconConfig& config,
                        const Volume* truth = nullptr);

}  // namespace rotodt
