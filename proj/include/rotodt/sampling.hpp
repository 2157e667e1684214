#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rotodt/common.hpp"
#include "rotodt/geometry.hpp"

namespace rotodt {

/// Equispaced N×N×N grid R_N = (2 r_s / N) · I_N³, I_N = {−N/2, …, N/2 − 1}.
struct GridSpec {
  int N = 0;
  double support_radius = 0.0;

  double spacing() const { return 2.0 * support_radius / N; }
  double coordinate(int j) const { return spacing() * j; }
  std::size_t size() const {
    return static_cast<std::size_t>(N) * static_cast<std::size_t>(N) *
           static_cast<std::size_t>(N);
  }
  /// Half-width πN/(2 r_s) of the frequency band the grid represents.
  double band() const { return kPi * N / (2.0 * support_radius); }
  /// The 1D factor (2 r_s / N) · I_N.
  std::vector<double> axis() const;
  /// Flat row-major index (j1 slowest) of j ∈ I_N³.
  std::size_t index(int j1, int j2, int j3) const {
    const std::size_t n = static_cast<std::size_t>(N);
    return (static_cast<std::size_t>(j1 + N / 2) * n +
            static_cast<std::size_t>(j2 + N / 2)) *
               n +
           static_cast<std::size_t>(j3 + N / 2);
  }

  bool operator==(const GridSpec&) const = default;
};

/// Rejects odd or nonpositive N and nonpositive r_s.
GridSpec build_grid(int N, double support_radius);

/// Detector-frequency lattice conventions.
///  - kLinspace: k ∈ linspace(−k0, k0, N), i.e. spacing 2k0/(N−1) with
///    half-integer offsets, kept when k1² + k2² ≤ k0² (κ > 0 automatically).
///  - kIntegerStrict: k = (2k0/N)·j, j ∈ I_N, kept when j1² + j2² < (N/2)².
enum class LatticeRule { kLinspace, kIntegerStrict };

std::string to_string(LatticeRule rule);
LatticeRule lattice_rule_from_string(const std::string& name);

/// Default angle count S = ⌈4N/π⌉.
int default_angle_count(int N);

struct DesignPoint {
  int j1 = 0;
  int j2 = 0;
  int s = 0;
  double k1 = 0.0;
  double k2 = 0.0;
  double t = 0.0;
};

/// The sampling set U_{N,S}: an in-disk frequency lattice repeated at S
/// equispaced trajectory parameters t_s = L s / S. Points are ordered
/// lexicographically by (s, j1, j2).
class SampleDesign {
 public:
  SampleDesign(int N, int S, double k0, double duration, LatticeRule rule);

  int N() const { return N_; }
  int S() const { return S_; }
  double k0() const { return k0_; }
  double duration() const { return duration_; }
  LatticeRule rule() const { return rule_; }
  /// Lattice spacing Δk and offset: k = Δk (j + offset).
  double frequency_step() const { return dk_; }
  double frequency_offset() const { return offset_; }
  double time_step() const { return duration_ / S_; }
  double frequency(int j) const { return dk_ * (j + offset_); }

  std::size_t per_angle() const { return disk_.size(); }
  std::size_t size() const { return disk_.size() * static_cast<std::size_t>(S_); }
  DesignPoint point(std::size_t i) const;
  double time(int s) const { return duration_ * s / S_; }

  struct DiskPoint {
    int j1, j2;
    double k1, k2;
  };
  const std::vector<DiskPoint>& disk() const { return disk_; }

 private:
  int N_, S_;
  double k0_, duration_;
  LatticeRule rule_;
  double dk_, offset_;
  std::vector<DiskPoint> disk_;
};

/// Builds U_{N,S}; S <= 0 selects ⌈4N/π⌉ and duration defaults to 2π.
SampleDesign build_design(int N, int S, const WaveParameters& w,
                          double duration = 2.0 * kPi,
                          LatticeRule rule = LatticeRule::kLinspace);

/// Y_N^± = T±(U_{N,S}) in design order.
std::vector<Vec3> build_kspace_points(const SampleDesign& design,
                                      const Trajectory& traj,
                                      const WaveParameters& w,
                                      Imaging imaging);

/// CSV dump with columns j1,j2,s,k1,k2,t,y1,y2,y3.
void write_design_csv(std::ostream& out, const SampleDesign& design,
                      std::span<const Vec3> points);

}  // namespace rotodt
