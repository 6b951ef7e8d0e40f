// Biphoton states, joint outcome distributions and count sampling.

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qfp/biphoton.hpp"
#include "qfp/error.hpp"
#include "qfp/synth.hpp"

using namespace qfp;

namespace {

constexpr double kPi = std::numbers::pi;

// Oracle: p(m, n) = |sum_k sum_l WI(m,k) WS(n,l) psi(k,l)|^2 by an explicit
// double sum.
RealTable brute_force(const Matrix& psi, const Matrix& wi, const Matrix& ws) {
  const auto d = psi.rows();
  RealTable p(d, d);
  for (Eigen::Index m = 0; m < d; ++m) {
    for (Eigen::Index n = 0; n < d; ++n) {
      cplx amp = 0.0;
      for (Eigen::Index k = 0; k < d; ++k) {
        for (Eigen::Index l = 0; l < d; ++l) amp += wi(m, k) * ws(n, l) * psi(k, l);
      }
      p(m, n) = std::norm(amp);
    }
  }
  return p;
}

Matrix random_matrix(int d, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> g;
  Matrix w(d, d);
  for (Eigen::Index i = 0; i < d * d; ++i) w.data()[i] = scale * cplx(g(rng), g(rng));
  return w;
}

Matrix random_unitary(int d, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(d, rng, 1.0));
  return qr.householderQ();
}

JointDistribution uniform(int d) {
  JointDistribution dist;
  dist.probs = RealTable::Constant(d, d, 1.0 / (d * d));
  return dist;
}

}  // namespace

TEST(States, PhiState) {
  const auto s0 = prepare_phi_state(0.0);
  EXPECT_EQ(s0.dim(), 3);
  const double r = 1.0 / std::sqrt(3.0);
  for (int k = 0; k < 3; ++k) {
    for (int l = 0; l < 3; ++l) {
      EXPECT_NEAR(std::abs(s0.amplitudes()(k, l) - (k + l == 2 ? r : 0.0)), 0.0, 1e-15);
    }
  }
  const auto s = prepare_phi_state(2.0 * kPi / 3.0);
  EXPECT_NEAR(std::abs(s.amplitudes()(0, 2) - r), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(s.amplitudes()(1, 1) - r * std::polar(1.0, 2.0 * kPi / 3.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(s.amplitudes()(2, 0) - r * std::polar(1.0, 4.0 * kPi / 3.0)), 0.0, 1e-15);
  for (double phi : {0.3, 1.7, -2.0, 10.0}) {
    EXPECT_NEAR(prepare_phi_state(phi).amplitudes().squaredNorm(), 1.0, 1e-12);
  }
}

TEST(States, MaximallyEntangled) {
  EXPECT_THROW(maximally_entangled(0), ValidationError);
  for (int d = 1; d <= 10; ++d) {
    const auto s = maximally_entangled(d);
    EXPECT_NEAR(s.amplitudes().squaredNorm(), 1.0, 1e-12);
    for (int k = 0; k < d; ++k) EXPECT_NEAR(std::abs(s.amplitudes()(k, d - 1 - k) - 1.0 / std::sqrt(d)), 0.0, 1e-15);
  }
}

TEST(States, RejectsUnnormalizedOrNonSquare) {
  EXPECT_THROW(BiphotonState(Matrix::Identity(2, 2)), ValidationError);
  EXPECT_THROW(BiphotonState(Matrix::Constant(2, 3, 1.0 / std::sqrt(6.0))), ValidationError);
}

TEST(Correlations, IdentityGivesAntiDiagonal) {
  for (int d = 1; d <= 10; ++d) {
    const auto dist = joint_distribution(maximally_entangled(d), Matrix::Identity(d, d), Matrix::Identity(d, d));
    for (int m = 0; m < d; ++m) {
      for (int n = 0; n < d; ++n) EXPECT_NEAR(dist.probs(m, n), m + n == d - 1 ? 1.0 / d : 0.0, 1e-15);
    }
    EXPECT_NEAR(dist.escape_mass, 0.0, 1e-9);
  }
}

// [DERIVED] Geometric series: sum_k w^{mk} w^{n(d-1-k)} = d w^{n(d-1)} delta_{mn}.
TEST(Correlations, MatchedDftBasesArePerfectlyCorrelated) {
  for (int d = 1; d <= 10; ++d) {
    const Matrix f = dft_matrix(d);
    const auto dist = joint_distribution(maximally_entangled(d), f, f);
    double off = 0.0;
    for (int m = 0; m < d; ++m) {
      for (int n = 0; n < d; ++n) {
        if (m == n) EXPECT_NEAR(dist.probs(m, n), 1.0 / d, 1e-10);
        else off += dist.probs(m, n);
      }
    }
    EXPECT_LT(off, 1e-10);
    if (d <= 6) EXPECT_LT((dist.probs - brute_force(maximally_entangled(d).amplitudes(), f, f)).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(Correlations, MixedBasesAreUniform) {
  for (int d = 2; d <= 6; ++d) {
    const auto dist = joint_distribution(maximally_entangled(d), Matrix::Identity(d, d), dft_matrix(d));
    const auto oracle = brute_force(maximally_entangled(d).amplitudes(), Matrix::Identity(d, d), dft_matrix(d));
    for (int m = 0; m < d; ++m) {
      for (int n = 0; n < d; ++n) {
        EXPECT_NEAR(dist.probs(m, n), 1.0 / (d * d), 1e-14);
        EXPECT_NEAR(oracle(m, n), 1.0 / (d * d), 1e-14);
      }
    }
  }
}

TEST(Correlations, BruteForceOracleOnLossyGates) {
  std::mt19937_64 rng(12);
  for (int d = 2; d <= 6; ++d) {
    const Matrix psi = maximally_entangled(d).amplitudes();
    const Matrix wi = 0.9 * random_unitary(d, rng);
    const Matrix ws = 0.8 * random_unitary(d, rng);
    const auto dist = joint_distribution(maximally_entangled(d), wi, ws);
    EXPECT_LT((dist.probs - brute_force(psi, wi, ws)).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_NEAR(dist.probs.sum() + dist.escape_mass, 1.0, 1e-9);
    EXPECT_NEAR(dist.escape_mass, 1.0 - 0.81 * 0.64, 1e-12);
    EXPECT_NO_THROW(dist.validate());
  }
  EXPECT_THROW(joint_distribution(maximally_entangled(3), Matrix::Identity(2, 2), Matrix::Identity(3, 3)),
               ValidationError);
}

TEST(Correlations, UnitaryGatesConserveProbability) {
  std::mt19937_64 rng(13);
  for (int d = 2; d <= 8; ++d) {
    const auto dist = joint_distribution(maximally_entangled(d), random_unitary(d, rng), random_unitary(d, rng));
    EXPECT_NEAR(dist.escape_mass, 0.0, 1e-9);
  }
}

TEST(Correlations, LocalPhaseCovariance) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + trial % 5;
    const Matrix psi = random_matrix(d, rng, 1.0).normalized();
    Matrix da = Matrix::Zero(d, d), db = Matrix::Zero(d, d);
    for (int k = 0; k < d; ++k) {
      da(k, k) = std::polar(1.0, phase(rng));
      db(k, k) = std::polar(1.0, phase(rng));
    }
    const auto before = joint_distribution(BiphotonState(psi), Matrix::Identity(d, d), Matrix::Identity(d, d));
    const auto after =
        joint_distribution(BiphotonState(da * psi * db.transpose()), Matrix::Identity(d, d), Matrix::Identity(d, d));
    EXPECT_LT((before.probs - after.probs).cwiseAbs().maxCoeff(), 1e-15);
  }
}

// [DERIVED] Synthesized d = 3 gates on |phi = 0>: three dominant diagonal
// bins and escape mass 1 - P_I P_S.
TEST(Correlations, SynthesizedGatesOnPhiState) {
  PsoSettings s;
  s.iterations = 150;
  s.restarts = 1;
  s.seed = 2;
  const auto r = pso_optimize(SearchSpace::for_dimension(3, 12), s);
  const Matrix w = assemble_transfer(r.config);
  const auto dist = joint_distribution(prepare_phi_state(0.0), w, w);
  EXPECT_NEAR(dist.escape_mass, 1.0 - r.metrics.success_prob * r.metrics.success_prob, 0.02);
  for (int m = 0; m < 3; ++m) EXPECT_GT(dist.probs(m, m), 0.3);
}

TEST(Sampling, DeterministicDistribution) {
  JointDistribution dist;
  dist.probs = RealTable::Zero(3, 3);
  dist.probs(1, 2) = 1.0;
  const auto t = sample_counts(dist, Multinomial{100}, 1);
  EXPECT_EQ(t.counts(1, 2), 100);
  EXPECT_EQ(t.total(), 100);
}

TEST(Sampling, MultinomialPostSelectsAndIsSeeded) {
  JointDistribution dist;
  dist.probs = RealTable::Constant(2, 2, 0.1);  // 60 % escaped
  dist.escape_mass = 0.6;
  const auto a = sample_counts(dist, Multinomial{1000}, 5);
  EXPECT_EQ(a.total(), 1000);
  EXPECT_EQ(a.counts, sample_counts(dist, Multinomial{1000}, 5).counts);
  EXPECT_NE(a.counts, sample_counts(dist, Multinomial{1000}, 6).counts);
}

// [DERIVED] Each cell of a uniform d = 3 table is Binomial(N, 1/9): over
// 10^4 seeds the sample mean lies within 3 standard errors of N/9.
TEST(Sampling, MultinomialMomentsOverSeeds) {
  const std::int64_t n = 90;
  const int seeds = 10000;
  RealTable sum = RealTable::Zero(3, 3);
  for (int s = 0; s < seeds; ++s) {
    const auto t = sample_counts(uniform(3), Multinomial{n}, static_cast<std::uint64_t>(s));
    ASSERT_EQ(t.total(), n);
    sum += t.counts.cast<double>();
  }
  const double p = 1.0 / 9.0;
  const double standard_error = std::sqrt(n * p * (1 - p) / seeds);
  for (int m = 0; m < 3; ++m) {
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(sum(m, k) / seeds, n * p, 3.0 * standard_error);
  }
}

TEST(Sampling, PoissonRates) {
  const auto zero = sample_counts(uniform(3), Poisson{0.0, 1.0}, 1);
  EXPECT_EQ(zero.total(), 0);
  // Mean flux * dwell * p per cell; escaped mass lowers the rates.
  JointDistribution dist = uniform(2);
  dist.probs *= 0.5;
  dist.escape_mass = 0.5;
  const int seeds = 2000;
  double sum = 0.0;
  for (int s = 0; s < seeds; ++s) sum += static_cast<double>(sample_counts(dist, Poisson{400.0, 2.0}, s).total());
  const double mean = 400.0 * 2.0 * 0.5;
  EXPECT_NEAR(sum / seeds, mean, 3.0 * std::sqrt(mean / seeds));
}

TEST(Sampling, Errors) {
  JointDistribution dist;
  dist.probs = RealTable::Zero(2, 2);
  dist.escape_mass = 1.0;
  EXPECT_THROW(sample_counts(dist, Multinomial{10}, 1), NumericalError);
  EXPECT_THROW(sample_counts(uniform(2), Multinomial{-1}, 1), ValidationError);
  EXPECT_THROW(sample_counts(uniform(2), Poisson{-1.0, 1.0}, 1), ValidationError);
}
