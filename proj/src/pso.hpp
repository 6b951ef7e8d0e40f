#pragma once

// Internal: global-best particle swarm with constriction-style coefficients,
// periodic coordinates and deterministic per-particle random streams.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "qfp/synth.hpp"

namespace qfp::detail {

struct Box {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<bool> periodic;  // periodic coordinates live in [lower, upper)

  int size() const { return static_cast<int>(lower.size()); }
};

/// Evaluates the cost of every row in a particles x dim table.
using BatchCost = std::function<void(std::span<const double> positions, std::span<double> costs)>;

struct SwarmOutcome {
  std::vector<double> best;
  double best_cost = 0.0;
  int iterations_used = 0;
  std::vector<double> trace;
};

/// True when `a` should replace `b` as best: lower cost, ties broken by
/// lexicographically smaller parameter vector.
bool better(double cost_a, std::span<const double> a, double cost_b, std::span<const double> b);

SwarmOutcome run_swarm(const Box& box, const PsoSettings& settings, const BatchCost& batch_cost);

}  // namespace qfp::detail
