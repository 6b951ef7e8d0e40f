#include "qfp/inference.hpp"

#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

#include "qfp/error.hpp"
#include "qfp/rng.hpp"

namespace qfp {

namespace {

double plogp(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

// H(idler, signal) - H(signal) without simplex validation.
double conditional_entropy_unchecked(std::span<const double> p, int d) {
  double joint = 0.0;
  double signal_entropy = 0.0;
  for (int n = 0; n < d; ++n) {
    double column = 0.0;
    for (int m = 0; m < d; ++m) {
      const double x = p[static_cast<std::size_t>(m * d + n)];
      joint -= plogp(x);
      column += x;
    }
    signal_entropy -= plogp(column);
  }
  return joint - signal_entropy;
}

// Flat-prior Dirichlet draw, normalized Gamma(counts + 1, 1) variates.
void dirichlet_draw(const CountTable& counts, Rng& rng, std::vector<double>& out) {
  const auto d = counts.rows();
  out.resize(static_cast<std::size_t>(counts.size()));
  double total = 0.0;
  for (Eigen::Index m = 0; m < d; ++m) {
    for (Eigen::Index n = 0; n < d; ++n) {
      const double alpha = static_cast<double>(counts(m, n)) + 1.0;
      const double g = std::gamma_distribution<double>(alpha, 1.0)(rng);
      out[static_cast<std::size_t>(m * d + n)] = g;
      total += g;
    }
  }
  for (auto& x : out) x /= total;
}

void check_counts(const CountTable& t, int d, const char* name) {
  if (t.rows() != d || t.cols() != d) {
    throw ValidationError(std::string(name) + " count table must be " + std::to_string(d) + "x" + std::to_string(d));
  }
  if (d > 0 && t.minCoeff() < 0) throw ValidationError(std::string(name) + " counts must be non-negative");
}

}  // namespace

void validate_simplex(std::span<const double> p, int d, double tol) {
  if (d < 1 || p.size() != static_cast<std::size_t>(d) * static_cast<std::size_t>(d)) {
    throw ValidationError("probability vector must have length d^2");
  }
  double sum = 0.0;
  for (double x : p) {
    if (!std::isfinite(x) || x < 0.0) throw ValidationError("probabilities must be finite and non-negative");
    sum += x;
  }
  if (std::abs(sum - 1.0) > tol) throw ValidationError("probability vector does not sum to one");
}

double conditional_entropy(std::span<const double> p, int d) {
  validate_simplex(p, d);
  return conditional_entropy_unchecked(p, d);
}

double entropic_bound(std::span<const double> p_logical, std::span<const double> p_fourier, int d) {
  return std::log2(static_cast<double>(d)) - conditional_entropy(p_logical, d) - conditional_entropy(p_fourier, d);
}

std::vector<double> entropic_bound_draws(const CountTable& logical, const CountTable& fourier, int n_samples,
                                         std::uint64_t seed, Execution execution) {
  const int d = static_cast<int>(logical.rows());
  check_counts(logical, d, "logical-basis");
  check_counts(fourier, d, "Fourier-basis");
  if (n_samples < 1) throw ValidationError("n_samples must be >= 1");

  std::vector<double> draws(static_cast<std::size_t>(n_samples));
  auto one = [&](int i) {
    thread_local std::vector<double> pl, pf;
    Rng rng = make_stream(seed, static_cast<std::uint64_t>(i));
    dirichlet_draw(logical, rng, pl);
    dirichlet_draw(fourier, rng, pf);
    // Normalized draws carry rounding-level simplex error; no revalidation.
    const double h = std::log2(static_cast<double>(d)) - conditional_entropy_unchecked(pl, d) -
                     conditional_entropy_unchecked(pf, d);
    draws[static_cast<std::size_t>(i)] = h;
  };

  if (execution == Execution::serial) {
    for (int i = 0; i < n_samples; ++i) one(i);
  } else {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n_samples; ++i) one(i);
  }
  return draws;
}

PosteriorSummary entropic_bound_posterior(const CountTable& logical, const CountTable& fourier, int d, int n_samples,
                                          std::uint64_t seed, Execution execution) {
  if (d < 1) throw ValidationError("d must be >= 1");
  check_counts(logical, d, "logical-basis");
  check_counts(fourier, d, "Fourier-basis");
  const auto draws = entropic_bound_draws(logical, fourier, n_samples, seed, execution);

  PosteriorSummary s;
  s.quantity = "entropic_bound_ebits";
  s.n_samples = n_samples;
  s.seed = seed;
  s.prior_only = logical.sum() == 0 || fourier.sum() == 0;
  // Serial summation in draw order keeps the summary schedule-independent.
  s.mean = std::accumulate(draws.begin(), draws.end(), 0.0) / n_samples;
  double ss = 0.0;
  for (double x : draws) ss += (x - s.mean) * (x - s.mean);
  s.std = n_samples > 1 ? std::sqrt(ss / (n_samples - 1)) : 0.0;
  return s;
}

DensityMatrix::DensityMatrix(Matrix rho, int d) : rho_(std::move(rho)), d_(d) {
  if (d < 1 || rho_.rows() != d * d || rho_.cols() != d * d) {
    throw ValidationError("density matrix must be d^2 x d^2");
  }
  if (!rho_.allFinite()) throw ValidationError("density matrix entries must be finite");
  if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > 1e-10) throw ValidationError("density matrix is not Hermitian");
  if (std::abs(rho_.trace() - cplx(1.0, 0.0)) > 1e-10) throw ValidationError("density matrix trace is not one");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(rho_, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-9) throw ValidationError("density matrix is not positive semidefinite");
}

DensityMatrix DensityMatrix::pure(const BiphotonState& state) {
  const int d = state.dim();
  Eigen::VectorXcd v(d * d);
  for (int k = 0; k < d; ++k) {
    for (int l = 0; l < d; ++l) v(k * d + l) = state.amplitudes()(k, l);
  }
  return DensityMatrix(v * v.adjoint(), d);
}

Matrix partial_transpose_idler(const Matrix& rho, int d) {
  if (rho.rows() != d * d || rho.cols() != d * d) throw ValidationError("density matrix must be d^2 x d^2");
  Matrix out(d * d, d * d);
  for (int k = 0; k < d; ++k) {
    for (int l = 0; l < d; ++l) {
      for (int kp = 0; kp < d; ++kp) {
        for (int lp = 0; lp < d; ++lp) out(k * d + l, kp * d + lp) = rho(kp * d + l, k * d + lp);
      }
    }
  }
  return out;
}

double log_negativity(const DensityMatrix& rho) {
  const Matrix pt = partial_transpose_idler(rho.matrix(), rho.dim());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(pt, Eigen::EigenvaluesOnly);
  const double trace_norm = eig.eigenvalues().cwiseAbs().sum();
  return std::max(0.0, std::log2(trace_norm));
}

double state_fidelity(const DensityMatrix& rho, double phi) {
  if (rho.dim() != 3) throw ValidationError("state fidelity is defined for qutrit pairs (d = 3)");
  const auto target = DensityMatrix::pure(prepare_phi_state(phi));
  return (target.matrix() * rho.matrix()).trace().real();
}

}  // namespace qfp
