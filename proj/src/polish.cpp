#include "polish.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qfp/core.hpp"

namespace qfp::detail {

namespace {

struct Vertex {
  std::vector<double> x;  // periodic coordinates kept unwrapped
  double f = 0.0;
};

}  // namespace

PolishOutcome nelder_mead(const Box& box, std::span<const double> start, double start_cost, const PointCost& cost,
                          int budget) {
  const int n = box.size();
  const auto nn = static_cast<std::size_t>(n);
  PolishOutcome out{{start.begin(), start.end()}, start_cost, 0};
  if (n == 0 || budget <= 0) return out;

  // Adaptive coefficients for higher-dimensional problems (Gao and Han).
  const double reflect = 1.0;
  const double expand = 1.0 + 2.0 / n;
  const double contract = 0.75 - 1.0 / (2.0 * n);
  const double shrink = 1.0 - 1.0 / n;

  std::vector<double> scratch(nn);
  auto wrapped = [&](const std::vector<double>& x) {
    for (std::size_t k = 0; k < nn; ++k) {
      scratch[k] = box.periodic[k] ? box.lower[k] + wrap_phase(x[k] - box.lower[k]) : x[k];
    }
    return std::span<const double>(scratch);
  };
  auto evaluate = [&](Vertex& v) {
    for (std::size_t k = 0; k < nn; ++k) {
      if (!box.periodic[k]) v.x[k] = std::clamp(v.x[k], box.lower[k], box.upper[k]);
    }
    double f = std::numeric_limits<double>::infinity();
    try {
      f = cost(wrapped(v.x));
    } catch (...) {
    }
    v.f = std::isnan(f) ? std::numeric_limits<double>::infinity() : f;
    ++out.evaluations;
  };
  auto take = [&](const Vertex& v) {
    if (better(v.f, wrapped(v.x), out.best_cost, out.best)) {
      out.best_cost = v.f;
      out.best.assign(scratch.begin(), scratch.end());
    }
  };

  double scale = 0.05;
  while (out.evaluations < budget && scale > 1e-7) {
    const double before = out.best_cost;
    std::vector<Vertex> simplex(nn + 1);
    simplex[0] = {out.best, out.best_cost};
    for (std::size_t k = 0; k < nn; ++k) {
      Vertex v{out.best, 0.0};
      const double step = scale * (box.upper[k] - box.lower[k]);
      v.x[k] += (!box.periodic[k] && v.x[k] + step > box.upper[k]) ? -step : step;
      evaluate(v);
      simplex[k + 1] = std::move(v);
    }

    std::vector<double> centroid(nn);
    Vertex trial{std::vector<double>(nn), 0.0};
    Vertex second{std::vector<double>(nn), 0.0};
    while (out.evaluations < budget) {
      std::stable_sort(simplex.begin(), simplex.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
      const double spread = simplex.back().f - simplex.front().f;
      double diameter = 0.0;
      for (std::size_t i = 1; i <= nn; ++i) {
        for (std::size_t k = 0; k < nn; ++k) {
          diameter = std::max(diameter, std::abs(simplex[i].x[k] - simplex[0].x[k]) / (box.upper[k] - box.lower[k]));
        }
      }
      if (diameter < 1e-10 || (std::isfinite(spread) && spread <= 1e-14 * (1.0 + std::abs(simplex[0].f)) &&
                               diameter < 1e-6)) {
        break;
      }

      std::fill(centroid.begin(), centroid.end(), 0.0);
      for (std::size_t i = 0; i < nn; ++i) {
        for (std::size_t k = 0; k < nn; ++k) centroid[k] += simplex[i].x[k] / n;
      }
      Vertex& worst = simplex.back();
      auto along = [&](Vertex& v, double t) {
        for (std::size_t k = 0; k < nn; ++k) v.x[k] = centroid[k] + t * (worst.x[k] - centroid[k]);
        evaluate(v);
      };

      along(trial, -reflect);
      if (trial.f < simplex[0].f) {
        along(second, -reflect * expand);
        worst = second.f < trial.f ? second : trial;
        continue;
      }
      if (trial.f < simplex[nn - 1].f) {
        worst = trial;
        continue;
      }
      if (trial.f < worst.f) {
        along(second, -reflect * contract);
        if (second.f <= trial.f) {
          worst = second;
          continue;
        }
      } else {
        along(second, contract);
        if (second.f < worst.f) {
          worst = second;
          continue;
        }
      }
      for (std::size_t i = 1; i <= nn && out.evaluations < budget; ++i) {
        for (std::size_t k = 0; k < nn; ++k) {
          simplex[i].x[k] = simplex[0].x[k] + shrink * (simplex[i].x[k] - simplex[0].x[k]);
        }
        evaluate(simplex[i]);
      }
    }
    for (const auto& v : simplex) take(v);
    scale = (out.best_cost < before - 1e-12) ? scale : scale * 0.5;
  }
  return out;
}

}  // namespace qfp::detail
