#include "qfp/biphoton.hpp"

#include <cmath>
#include <random>

#include "qfp/error.hpp"
#include "qfp/rng.hpp"

namespace qfp {

BiphotonState::BiphotonState(Matrix amplitudes) : amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.rows() != amplitudes_.cols() || amplitudes_.rows() < 1) {
    throw ValidationError("biphoton amplitude table must be square and non-empty");
  }
  if (!amplitudes_.allFinite()) throw ValidationError("biphoton amplitudes must be finite");
  if (std::abs(amplitudes_.squaredNorm() - 1.0) > 1e-12) {
    throw ValidationError("biphoton state is not normalized");
  }
}

BiphotonState prepare_phi_state(double phi) {
  Matrix psi = Matrix::Zero(3, 3);
  const double a = 1.0 / std::sqrt(3.0);
  psi(0, 2) = a;
  psi(1, 1) = std::polar(a, phi);
  psi(2, 0) = std::polar(a, 2.0 * phi);
  return BiphotonState(std::move(psi));
}

BiphotonState maximally_entangled(int d) {
  if (d < 1) throw ValidationError("dimension must be >= 1");
  Matrix psi = Matrix::Zero(d, d);
  for (int k = 0; k < d; ++k) psi(k, d - 1 - k) = 1.0 / std::sqrt(static_cast<double>(d));
  return BiphotonState(std::move(psi));
}

void JointDistribution::validate(double tol) const {
  if (probs.rows() != probs.cols() || probs.rows() < 1) throw ValidationError("joint distribution must be square");
  if (!probs.allFinite() || probs.minCoeff() < 0.0) throw ValidationError("probabilities must be finite and >= 0");
  if (escape_mass < -tol || std::abs(probs.sum() + escape_mass - 1.0) > tol) {
    throw ValidationError("joint distribution does not sum to one");
  }
}

JointDistribution joint_distribution(const BiphotonState& state, const Matrix& gate_idler, const Matrix& gate_signal) {
  const int d = state.dim();
  if (gate_idler.rows() != d || gate_idler.cols() != d || gate_signal.rows() != d || gate_signal.cols() != d) {
    throw ValidationError("gate dimensions do not match the state");
  }
  // Output amplitude table: W_I psi W_S^T.
  const Matrix out = gate_idler * state.amplitudes() * gate_signal.transpose();
  JointDistribution dist;
  dist.probs = out.cwiseAbs2();
  dist.escape_mass = std::max(0.0, 1.0 - dist.probs.sum());
  return dist;
}

CountsTable sample_counts(const JointDistribution& dist, const DwellModel& model, std::uint64_t seed) {
  const int d = dist.dim();
  if (d < 1 || dist.probs.cols() != d) throw ValidationError("joint distribution must be square");
  if (!dist.probs.allFinite() || dist.probs.minCoeff() < 0.0) {
    throw ValidationError("probabilities must be finite and >= 0");
  }
  const double inside = dist.probs.sum();
  if (!(inside > 0.0)) throw NumericalError("distribution has zero total probability");

  Rng rng(seed);
  CountsTable table{CountTable::Zero(d, d), model};

  if (const auto* multi = std::get_if<Multinomial>(&model)) {
    if (multi->total < 0) throw ValidationError("multinomial total must be >= 0");
    // Sequential conditional binomials over the row-major outcome order.
    std::int64_t remaining = multi->total;
    double mass_left = inside;
    for (int m = 0; m < d && remaining > 0; ++m) {
      for (int n = 0; n < d && remaining > 0; ++n) {
        const double p = dist.probs(m, n);
        const bool last = (m == d - 1 && n == d - 1);
        std::int64_t k = remaining;
        if (!last) {
          const double q = mass_left > 0.0 ? std::clamp(p / mass_left, 0.0, 1.0) : 0.0;
          k = std::binomial_distribution<std::int64_t>(remaining, q)(rng);
        }
        table.counts(m, n) = k;
        remaining -= k;
        mass_left -= p;
      }
    }
    return table;
  }

  const auto& poisson = std::get<Poisson>(model);
  if (!(poisson.flux >= 0.0) || !(poisson.dwell >= 0.0)) throw ValidationError("flux and dwell must be >= 0");
  for (int m = 0; m < d; ++m) {
    for (int n = 0; n < d; ++n) {
      const double mean = poisson.flux * poisson.dwell * dist.probs(m, n);
      table.counts(m, n) = mean > 0.0 ? std::poisson_distribution<std::int64_t>(mean)(rng) : 0;
    }
  }
  return table;
}

}  // namespace qfp
