#pragma once

// Internal: bounded Nelder-Mead refinement of a swarm's best point.

#include <functional>
#include <span>
#include <vector>

#include "pso.hpp"

namespace qfp::detail {

using PointCost = std::function<double(std::span<const double>)>;

struct PolishOutcome {
  std::vector<double> best;
  double best_cost = 0.0;
  int evaluations = 0;
};

/// Adaptive-coefficient Nelder-Mead started from `start`, restarted from
/// the incumbent whenever the simplex collapses, until `budget` evaluations
/// are spent. Periodic coordinates are wrapped and bounded ones clamped
/// before every evaluation, so the returned point always lies in the box.
PolishOutcome nelder_mead(const Box& box, std::span<const double> start, double start_cost,
                          const PointCost& cost, int budget);

}  // namespace qfp::detail
