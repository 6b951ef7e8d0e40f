#pragma once

// Particle-swarm synthesis of DFT gates on the three-element processor.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qfp/core.hpp"

namespace qfp {

enum class Execution { serial, parallel };

inline constexpr double kSynthesisFidelityClamp = 1e-4;

/// Parameter layout of a synthesis problem. A parameter vector holds the B
/// shaper phases, then (amplitude, phase) for each harmonic of EOM 1, then
/// the same for EOM 2 unless `symmetric` ties EOM 2 to the time reverse of
/// EOM 1.
struct SearchSpace {
  int d = 2;
  int channels = 2;                        // B
  int harmonics = 1;                       // P
  bool symmetric = false;
  double amplitude_max = 4.0 * std::numbers::pi;
  int total_modes = kDefaultModes;

  /// P defaults to d - 1 (at least 0).
  static SearchSpace for_dimension(int d, int channels, std::optional<int> harmonics = std::nullopt,
                                   bool symmetric = false);

  void validate() const;
  int size() const { return channels + (symmetric ? 2 : 4) * harmonics; }
  bool periodic(int index) const;
  double lower(int index) const;
  double upper(int index) const;
  ModeLattice lattice() const { return ModeLattice::centered(d, total_modes); }

  /// Smallest power-of-two sample count that resolves every drive in the
  /// space: at least 4 (M + sum_p p * A_max), never below 64.
  int resolving_samples() const;

  friend bool operator==(const SearchSpace&, const SearchSpace&) = default;
};

struct PsoSettings {
  int swarm_size = 100;
  int iterations = 2000;
  double inertia = 0.729;
  double cognitive = 1.49445;
  double social = 1.49445;
  double velocity_clamp = 0.2;  // fraction of each coordinate's range
  int restarts = 8;
  std::uint64_t seed = 1;
  /// Social attractor: 0 uses the swarm-wide best, k > 0 the best of the 2k
  /// ring neighbours plus the particle itself.
  int neighbors = 1;
  /// Nelder-Mead evaluations spent refining each restart's best point.
  int polish_evaluations = 5000;
  /// In a general (non-symmetric) space, search the time-reversal-tied
  /// subspace first and polish its best point over all B + 4P parameters.
  bool symmetric_seed = true;
  /// Stop a restart once the swarm best has not improved by more than
  /// `stall_tolerance` for this many iterations. 0 runs the full budget.
  int stall_iterations = 0;
  double stall_tolerance = 1e-9;
  /// Samples per period for coefficient extraction; 0 picks
  /// SearchSpace::resolving_samples().
  int samples = 0;
  /// Fidelity clamp of the synthesis cost. At 1e-4 the cost saturates once
  /// F >= 0.9999 and the search then maximizes P_W.
  double fidelity_clamp = kSynthesisFidelityClamp;

  void validate() const;

  friend bool operator==(const PsoSettings&, const PsoSettings&) = default;
};

QfpConfig decode(std::span<const double> params, const SearchSpace& space);
std::vector<double> encode(const QfpConfig& config, const SearchSpace& space);

/// Cost of the decoded configuration against F_d. Pure and deterministic.
double objective(std::span<const double> params, const SearchSpace& space,
                 const CoefficientOptions& options = {}, double clamp = kDefaultFidelityClamp);

struct SynthesisResult {
  QfpConfig config;
  GateMetrics metrics;
  SearchSpace space;
  PsoSettings pso;
  std::vector<double> params;
  int iterations_used = 0;
  double wall_time_s = 0.0;
  std::vector<double> trace;  // best cost after each iteration, restarts concatenated
};

SynthesisResult pso_optimize(const SearchSpace& space, const PsoSettings& settings,
                             Execution execution = Execution::parallel);

/// Recomputes metrics from the stored configuration; throws NumericalError
/// if they disagree with the stored ones by more than `tol`.
void verify_metrics(const SynthesisResult& result, double tol = 1e-9);

struct SweepPoint {
  int channels = 0;
  double cost = 0.0;
  double fidelity = 0.0;
  double success_prob = 0.0;
  bool failed = false;
  std::string error;
};

struct SweepResult {
  int d = 0;
  std::vector<SweepPoint> points;
  int min_bandwidth = 0;
  std::vector<SynthesisResult> solutions;  // one per successful point
};

/// Mantissa and exponent of `x` rounded to `digits` significant digits.
struct SignificantDigits {
  long long mantissa = 0;
  int exponent = 0;
  friend bool operator==(const SignificantDigits&, const SignificantDigits&) = default;
};
SignificantDigits round_significant(double x, int digits);

/// Smallest B whose cost agrees with the best cost of the grid to three
/// significant digits. Failed points are skipped. Returns 0 when every point
/// failed.
int min_bandwidth(std::span<const SweepPoint> points);

SweepResult bandwidth_sweep(int d, std::span<const int> channel_grid, const PsoSettings& settings,
                            std::optional<int> harmonics = std::nullopt, bool symmetric = false,
                            Execution execution = Execution::parallel);

struct SingleEomBound {
  int d = 0;
  double fidelity = 0.0;
  double success_prob = 0.0;
  double bound = 0.0;  // d / (2d - 1)
  bool reached_fidelity = false;
  RfDrive drive;
};

/// Optimizes a lone EOM, flanked only by lossless phase masks on the
/// computational bins, for the d-point DFT and reports its success
/// probability next to the ceiling d / (2d - 1). P defaults to 2(d - 1):
/// with only d - 1 harmonics a lone EOM cannot reach F = 0.9999 for d >= 3.
/// The cost clamp is lowered to half the distance from the floor to F = 1,
/// so the optimizer saturates on the feasible side of the floor.
SingleEomBound single_eom_bound_check(int d, const PsoSettings& settings,
                                      std::optional<int> harmonics = std::nullopt,
                                      double fidelity_floor = 0.9999,
                                      Execution execution = Execution::parallel);

}  // namespace qfp
