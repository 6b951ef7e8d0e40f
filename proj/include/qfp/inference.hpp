#pragma once

// Entanglement quantification from two-basis coincidence data.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qfp/biphoton.hpp"
#include "qfp/synth.hpp"

namespace qfp {

/// Flattened joint distribution, index m * d + n with m the idler outcome
/// and n the signal outcome.
using ProbabilityVector = std::vector<double>;

/// Throws ValidationError unless `p` has length d^2, is non-negative and
/// sums to one within `tol`.
void validate_simplex(std::span<const double> p, int d, double tol = 1e-12);

/// H(idler | signal) = H(idler, signal) - H(signal), in bits.
double conditional_entropy(std::span<const double> p, int d);

/// log2 d - H(logical) - H(Fourier), the entropic lower bound on the
/// distillable entanglement for a single pair of distributions.
double entropic_bound(std::span<const double> p_logical, std::span<const double> p_fourier, int d);

struct PosteriorSummary {
  std::string quantity;
  double mean = 0.0;
  double std = 0.0;
  int n_samples = 0;
  std::uint64_t seed = 0;
  bool prior_only = false;  // at least one count table was empty
};

inline constexpr int kDefaultPosteriorSamples = 1 << 14;

/// Per-draw entropic bounds under independent flat-Dirichlet posteriors
/// Dir(counts + 1) for the two tables. Draw i uses its own random stream.
std::vector<double> entropic_bound_draws(const CountTable& logical, const CountTable& fourier, int n_samples,
                                         std::uint64_t seed, Execution execution = Execution::parallel);

PosteriorSummary entropic_bound_posterior(const CountTable& logical, const CountTable& fourier, int d,
                                          int n_samples, std::uint64_t seed,
                                          Execution execution = Execution::parallel);

/// Bipartite density matrix on a d x d space, row index k * d + l with k the
/// idler and l the signal.
class DensityMatrix {
 public:
  /// Throws ValidationError unless rho is d^2 x d^2, Hermitian and of unit
  /// trace within 1e-10, with eigenvalues >= -1e-9.
  DensityMatrix(Matrix rho, int d);

  static DensityMatrix pure(const BiphotonState& state);

  int dim() const { return d_; }
  const Matrix& matrix() const { return rho_; }

 private:
  Matrix rho_;
  int d_;
};

/// Partial transpose over the idler subsystem.
Matrix partial_transpose_idler(const Matrix& rho, int d);

/// log2 of the trace norm of the idler partial transpose, in ebits.
double log_negativity(const DensityMatrix& rho);

/// <phi| rho |phi> for the qutrit state prepare_phi_state(phi).
double state_fidelity(const DensityMatrix& rho, double phi);

}  // namespace qfp
