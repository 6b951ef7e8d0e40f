#pragma once

// Three-element quantum frequency processor (EOM, pulse shaper, EOM) acting
// on a truncated lattice of frequency bins, and gate scoring against target
// unitaries.
//
// Time is measured in units of the modulation period T = 2*pi/dw, so the
// physical bin spacing never enters any computation.

#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qfp {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr int kDefaultModes = 64;
inline constexpr int kDefaultSamples = 4096;
inline constexpr double kDefaultFidelityClamp = 1e-12;

/// Wraps an angle into [0, 2*pi). Values already in range are returned
/// unchanged (bit-exact).
double wrap_phase(double radians);

/// Maps an angle difference onto (-pi, pi].
double shortest_arc(double radians);

struct Harmonic {
  double amplitude = 0.0;  // radians, >= 0
  double phase = 0.0;      // radians, [0, 2*pi)

  friend bool operator==(const Harmonic&, const Harmonic&) = default;
};

/// Periodic phase drive of one EOM:
///   A(t) = sum_{p=1..P} amplitude_p * cos(2*pi*p*t/T + phase_p).
/// An empty harmonic list is the zero waveform (EOM off).
class RfDrive {
 public:
  RfDrive() = default;
  /// Throws ValidationError on non-finite or negative amplitudes or
  /// non-finite phases. Phases are wrapped into [0, 2*pi).
  explicit RfDrive(std::vector<Harmonic> harmonics);

  static RfDrive off() { return RfDrive(); }

  int cutoff() const { return static_cast<int>(harmonics_.size()); }
  bool is_off() const { return harmonics_.empty(); }
  std::span<const Harmonic> harmonics() const { return harmonics_; }
  const Harmonic& harmonic(int p) const { return harmonics_.at(static_cast<std::size_t>(p - 1)); }

  /// A(t) with t expressed in periods.
  double waveform(double t) const;

  friend bool operator==(const RfDrive&, const RfDrive&) = default;

 private:
  std::vector<Harmonic> harmonics_;
};

/// The drive whose waveform is A(-t).
RfDrive time_reverse(const RfDrive& drive);

/// Placement of the computational band inside the simulated lattice.
struct ModeLattice {
  int total_modes = kDefaultModes;
  int comp_dim = 1;
  int comp_offset = (kDefaultModes - 1) / 2;

  /// Computational band centered: comp_offset = floor((M - d) / 2).
  static ModeLattice centered(int comp_dim, int total_modes = kDefaultModes);
  void validate() const;

  friend bool operator==(const ModeLattice&, const ModeLattice&) = default;
};

/// Static per-bin phases. Only `phases.size()` contiguous channels starting
/// at `channel_offset` are shaped; all other lattice modes see zero phase.
struct ShaperConfig {
  std::vector<double> phases;
  int channel_offset = 0;

  int channels() const { return static_cast<int>(phases.size()); }

  /// Shaped band centered on the computational band:
  /// channel_offset = comp_offset - floor((B - d) / 2).
  static ShaperConfig centered(std::vector<double> phases, const ModeLattice& lattice);
  static ShaperConfig flat(int channels, const ModeLattice& lattice);

  /// Phase seen by each of the lattice's modes.
  std::vector<double> lattice_phases(int total_modes) const;

  friend bool operator==(const ShaperConfig&, const ShaperConfig&) = default;
};

struct QfpConfig {
  RfDrive drive_a;
  ShaperConfig shaper;
  RfDrive drive_b;
  ModeLattice lattice;

  /// Throws ValidationError unless d <= B <= M and the computational band
  /// lies inside the shaped band, which lies inside the lattice.
  void validate() const;

  friend bool operator==(const QfpConfig&, const QfpConfig&) = default;
};

/// Fourier-series coefficients c_n, n = -half_width..half_width.
class FourierCoefficients {
 public:
  FourierCoefficients(int half_width, std::vector<cplx> values);

  int half_width() const { return half_width_; }
  /// Zero outside the stored window.
  cplx operator[](int n) const {
    return (n < -half_width_ || n > half_width_) ? cplx{} : values_[static_cast<std::size_t>(n + half_width_)];
  }
  std::span<const cplx> values() const { return values_; }
  double mass() const;

 private:
  int half_width_;
  std::vector<cplx> values_;
};

struct CoefficientOptions {
  int samples = kDefaultSamples;   // uniform samples per period
  double truncation_tol = 1e-10;   // allowed spectral mass outside the window
};

/// Coefficients of exp(i A(t)) under the mean-over-one-period normalization,
/// so that sum_n |c_n|^2 = 1. An EOM with drive A scatters input bin n into
/// output bin m with amplitude c_{m-n}.
///
/// Throws TruncationError if more than `truncation_tol` of the spectral mass
/// falls outside |n| <= half_width, or if the sample count is too small to
/// resolve the drive without aliasing.
FourierCoefficients eom_coefficients(const RfDrive& drive, int half_width,
                                     const CoefficientOptions& options = {});

/// Smallest half-width whose window holds all but `tol` of the spectral mass,
/// capped at `cap`. Returns `cap` when the cap is reached.
int minimal_half_width(const RfDrive& drive, double tol, int cap,
                       const CoefficientOptions& options = {});

/// (F_d)_{mn} = d^{-1/2} exp(-2*pi*i*m*n/d).
Matrix dft_matrix(int d);

/// d x d computational block of the transfer matrix
///   W_mn = sum_k d_{m-k} exp(i phi_k) c_{k-n},
/// with k running over every lattice mode.
Matrix assemble_transfer(const QfpConfig& config, const CoefficientOptions& options = {});

/// The same transform over the full M x M lattice.
Matrix assemble_full_transfer(const QfpConfig& config, const CoefficientOptions& options = {});

Matrix computational_block(const Matrix& full, const ModeLattice& lattice);

struct GateMetrics {
  double fidelity = 0.0;
  double success_prob = 0.0;
  double cost = 0.0;
};

/// C = P * log10(1 - F), with F clamped to at most 1 - clamp.
double cost(double fidelity, double success_prob, double clamp = kDefaultFidelityClamp);

/// P_W = Tr(W^dag W) / d and F_W = |Tr(W^dag T)|^2 / (d^2 P_W).
/// Throws ValidationError on dimension mismatch or a non-unitary target, and
/// NumericalError when W is identically zero.
GateMetrics gate_metrics(const Matrix& w, const Matrix& target,
                         double clamp = kDefaultFidelityClamp);

}  // namespace qfp
