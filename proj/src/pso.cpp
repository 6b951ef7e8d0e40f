#include "pso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qfp/error.hpp"
#include "polish.hpp"
#include "qfp/rng.hpp"

namespace qfp::detail {

bool better(double cost_a, std::span<const double> a, double cost_b, std::span<const double> b) {
  if (std::isnan(cost_a)) return false;
  if (std::isnan(cost_b)) return true;
  if (cost_a != cost_b) return cost_a < cost_b;
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

namespace {

struct Swarm {
  int particles = 0;
  int dim = 0;
  std::vector<double> x, v, pbest, pbest_cost, cost;
  std::vector<Rng> rngs;

  std::span<double> row(std::vector<double>& table, int i) {
    return {table.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
};

double clean(double c) { return std::isnan(c) ? std::numeric_limits<double>::infinity() : c; }

}  // namespace

SwarmOutcome run_swarm(const Box& box, const PsoSettings& settings, const BatchCost& batch_cost) {
  settings.validate();
  const int dim = box.size();
  const int n = settings.swarm_size;
  const auto total = static_cast<std::size_t>(n) * static_cast<std::size_t>(dim);

  std::vector<double> vmax(static_cast<std::size_t>(dim));
  for (int k = 0; k < dim; ++k) {
    vmax[static_cast<std::size_t>(k)] = settings.velocity_clamp * (box.upper[static_cast<std::size_t>(k)] - box.lower[static_cast<std::size_t>(k)]);
  }

  SwarmOutcome outcome;
  outcome.best_cost = std::numeric_limits<double>::infinity();
  outcome.best.assign(static_cast<std::size_t>(dim), 0.0);
  bool have_best = false;

  for (int restart = 0; restart < settings.restarts; ++restart) {
    Swarm s;
    s.particles = n;
    s.dim = dim;
    s.x.resize(total);
    s.v.resize(total);
    s.cost.resize(static_cast<std::size_t>(n));
    s.rngs.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      s.rngs.push_back(make_stream(settings.seed, static_cast<std::uint64_t>(restart), static_cast<std::uint64_t>(i)));
      auto& rng = s.rngs.back();
      auto xi = s.row(s.x, i);
      auto vi = s.row(s.v, i);
      for (int k = 0; k < dim; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        xi[kk] = box.lower[kk] + uniform01(rng) * (box.upper[kk] - box.lower[kk]);
        vi[kk] = (2.0 * uniform01(rng) - 1.0) * vmax[kk];
      }
    }
    batch_cost(s.x, s.cost);
    for (auto& c : s.cost) c = clean(c);
    s.pbest = s.x;
    s.pbest_cost = s.cost;

    int g = 0;
    for (int i = 1; i < n; ++i) {
      if (better(s.pbest_cost[static_cast<std::size_t>(i)], s.row(s.pbest, i), s.pbest_cost[static_cast<std::size_t>(g)], s.row(s.pbest, g))) g = i;
    }
    std::vector<double> gbest(s.row(s.pbest, g).begin(), s.row(s.pbest, g).end());
    double gbest_cost = s.pbest_cost[static_cast<std::size_t>(g)];

    // Index of the best personal best within the ring neighbourhood of i.
    auto local_best = [&](int i) {
      int best = i;
      for (int off = -settings.neighbors; off <= settings.neighbors; ++off) {
        const int j = ((i + off) % n + n) % n;
        if (better(s.pbest_cost[static_cast<std::size_t>(j)], s.row(s.pbest, j),
                   s.pbest_cost[static_cast<std::size_t>(best)], s.row(s.pbest, best))) {
          best = j;
        }
      }
      return best;
    };
    std::vector<int> attractor(static_cast<std::size_t>(n), -1);

    int stall = 0;
    int iter = 0;
    for (; iter < settings.iterations; ++iter) {
      if (settings.neighbors > 0) {
        for (int i = 0; i < n; ++i) attractor[static_cast<std::size_t>(i)] = local_best(i);
      }
      for (int i = 0; i < n; ++i) {
        auto& rng = s.rngs[static_cast<std::size_t>(i)];
        auto xi = s.row(s.x, i);
        auto vi = s.row(s.v, i);
        auto pi = s.row(s.pbest, i);
        const int a = attractor[static_cast<std::size_t>(i)];
        std::span<const double> social = a < 0 ? std::span<const double>(gbest) : s.row(s.pbest, a);
        for (int k = 0; k < dim; ++k) {
          const auto kk = static_cast<std::size_t>(k);
          double to_personal = pi[kk] - xi[kk];
          double to_global = social[kk] - xi[kk];
          if (box.periodic[kk]) {
            to_personal = shortest_arc(to_personal);
            to_global = shortest_arc(to_global);
          }
          const double r1 = uniform01(rng);
          const double r2 = uniform01(rng);
          double vel = settings.inertia * vi[kk] + settings.cognitive * r1 * to_personal +
                       settings.social * r2 * to_global;
          vel = std::clamp(vel, -vmax[kk], vmax[kk]);
          double pos = xi[kk] + vel;
          if (box.periodic[kk]) {
            pos = box.lower[kk] + wrap_phase(pos - box.lower[kk]);
          } else if (pos < box.lower[kk] || pos > box.upper[kk]) {
            pos = std::clamp(pos, box.lower[kk], box.upper[kk]);
            vel = 0.0;
          }
          vi[kk] = vel;
          xi[kk] = pos;
        }
      }

      batch_cost(s.x, s.cost);

      const double previous = gbest_cost;
      for (int i = 0; i < n; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        const double c = clean(s.cost[ii]);
        if (better(c, s.row(s.x, i), s.pbest_cost[ii], s.row(s.pbest, i))) {
          s.pbest_cost[ii] = c;
          std::copy_n(s.row(s.x, i).begin(), dim, s.row(s.pbest, i).begin());
          if (better(c, s.row(s.pbest, i), gbest_cost, gbest)) {
            gbest_cost = c;
            std::copy_n(s.row(s.pbest, i).begin(), dim, gbest.begin());
          }
        }
      }
      outcome.trace.push_back(have_best ? std::min(outcome.best_cost, gbest_cost) : gbest_cost);

      if (settings.stall_iterations > 0) {
        stall = (previous - gbest_cost > settings.stall_tolerance) ? 0 : stall + 1;
        if (stall >= settings.stall_iterations) {
          ++iter;
          break;
        }
      }
    }
    outcome.iterations_used += iter;

    if (settings.polish_evaluations > 0) {
      std::vector<double> one(1);
      auto point_cost = [&](std::span<const double> x) {
        batch_cost(x, one);
        return one[0];
      };
      auto polished = nelder_mead(box, gbest, gbest_cost, point_cost, settings.polish_evaluations);
      gbest = std::move(polished.best);
      gbest_cost = polished.best_cost;
      outcome.trace.push_back(have_best ? std::min(outcome.best_cost, gbest_cost) : gbest_cost);
    }

    if (!have_best || better(gbest_cost, gbest, outcome.best_cost, outcome.best)) {
      outcome.best = gbest;
      outcome.best_cost = gbest_cost;
      have_best = true;
    }
  }
  return outcome;
}

}  // namespace qfp::detail
