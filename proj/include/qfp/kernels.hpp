#pragma once

// Data-parallel kernels. Each has a serial reference path and an OpenMP path
// that must produce bit-identical output: every work item is a pure function
// of its own inputs, so the schedule cannot change results.

#include <cstddef>
#include <limits>
#include <span>

#include "qfp/synth.hpp"

namespace qfp::kernels {

/// out[i] = fn(row i) for a row-major table of `width`-wide rows. A row whose
/// evaluation throws gets +infinity.
template <class Fn>
void evaluate_rows(std::span<const double> table, int width, std::span<double> out, Fn&& fn,
                   Execution execution) {
  const auto rows = static_cast<std::ptrdiff_t>(out.size());
  auto one = [&](std::ptrdiff_t i) {
    const auto row = table.subspan(static_cast<std::size_t>(i) * static_cast<std::size_t>(width),
                                   static_cast<std::size_t>(width));
    try {
      out[static_cast<std::size_t>(i)] = fn(row);
    } catch (...) {
      out[static_cast<std::size_t>(i)] = std::numeric_limits<double>::infinity();
    }
  };
  if (execution == Execution::serial) {
    for (std::ptrdiff_t i = 0; i < rows; ++i) one(i);
    return;
  }
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < rows; ++i) one(i);
}

/// Objective values for a whole swarm (particles x space.size() table).
void evaluate_swarm(std::span<const double> positions, const SearchSpace& space,
                    const CoefficientOptions& options, double clamp, std::span<double> costs,
                    Execution execution);

}  // namespace qfp::kernels
