#pragma once

// Two-photon frequency-bin states measured through a pair of parallel gates.

#include <cstdint>
#include <variant>
#include <vector>

#include "qfp/core.hpp"

namespace qfp {

/// Amplitude table psi(k, l) over idler bin k and signal bin l.
class BiphotonState {
 public:
  /// Throws ValidationError unless the table is square and normalized to
  /// within 1e-12.
  explicit BiphotonState(Matrix amplitudes);

  int dim() const { return static_cast<int>(amplitudes_.rows()); }
  const Matrix& amplitudes() const { return amplitudes_; }

 private:
  Matrix amplitudes_;
};

/// (|02> + e^{i phi}|11> + e^{2 i phi}|20>) / sqrt(3), idler first.
BiphotonState prepare_phi_state(double phi);

/// d^{-1/2} sum_k |k, d-1-k>.
BiphotonState maximally_entangled(int d);

/// Real d x d table indexed (idler outcome, signal outcome).
using RealTable = Eigen::MatrixXd;

struct JointDistribution {
  RealTable probs;
  double escape_mass = 0.0;  // probability that left the computational space

  int dim() const { return static_cast<int>(probs.rows()); }
  /// Throws ValidationError on negative entries or total mass off by > tol.
  void validate(double tol = 1e-9) const;
};

/// p(m, n) = |sum_{k,l} W_I(m,k) W_S(n,l) psi(k,l)|^2.
JointDistribution joint_distribution(const BiphotonState& state, const Matrix& gate_idler,
                                     const Matrix& gate_signal);

using CountTable = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// N coincidences drawn over the d^2 outcomes, post-selected on the
/// computational space.
struct Multinomial {
  std::int64_t total = 0;
};

/// Independent Poisson counts per outcome with mean flux * dwell * p(m, n),
/// as in raster-scanned sequential acquisition. Escaped probability reduces
/// the rates.
struct Poisson {
  double flux = 0.0;
  double dwell = 1.0;
};

using DwellModel = std::variant<Multinomial, Poisson>;

struct CountsTable {
  CountTable counts;
  DwellModel model;

  int dim() const { return static_cast<int>(counts.rows()); }
  std::int64_t total() const { return counts.sum(); }
};

/// Throws NumericalError when the distribution holds no probability inside
/// the computational space.
CountsTable sample_counts(const JointDistribution& dist, const DwellModel& model, std::uint64_t seed);

}  // namespace qfp
