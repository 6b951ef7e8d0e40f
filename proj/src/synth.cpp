#include "qfp/synth.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "qfp/error.hpp"
#include "qfp/kernels.hpp"
#include "polish.hpp"
#include "pso.hpp"
#include "spectrum.hpp"

namespace qfp {

SearchSpace SearchSpace::for_dimension(int d, int channels, std::optional<int> harmonics, bool symmetric) {
  SearchSpace space;
  space.d = d;
  space.channels = channels;
  space.harmonics = harmonics.value_or(std::max(0, d - 1));
  space.symmetric = symmetric;
  space.validate();
  return space;
}

void SearchSpace::validate() const {
  if (d < 1) throw ValidationError("d must be >= 1");
  if (harmonics < 0) throw ValidationError("harmonic count P must be >= 0");
  if (channels < d || channels > total_modes) {
    throw ValidationError("B=" + std::to_string(channels) + " must satisfy d <= B <= M (d=" + std::to_string(d) +
                          ", M=" + std::to_string(total_modes) + ")");
  }
  if (!(amplitude_max > 0.0) || !std::isfinite(amplitude_max)) {
    throw ValidationError("amplitude bound must be positive and finite");
  }
  lattice().validate();
}

bool SearchSpace::periodic(int index) const {
  if (index < channels) return true;
  return (index - channels) % 2 == 1;
}

double SearchSpace::lower(int) const { return 0.0; }

double SearchSpace::upper(int index) const { return periodic(index) ? kTwoPi : amplitude_max; }

int SearchSpace::resolving_samples() const {
  const double bandwidth = amplitude_max * harmonics * (harmonics + 1) / 2.0;
  const auto need = static_cast<unsigned long>(std::ceil(4.0 * (total_modes + bandwidth)));
  return static_cast<int>(std::max(64UL, std::bit_ceil(need)));
}

void PsoSettings::validate() const {
  if (swarm_size < 1 || iterations < 0 || restarts < 1) {
    throw ValidationError("swarm size and restarts must be positive, iterations non-negative");
  }
  if (!(inertia > 0.0) || !(cognitive > 0.0) || !(social > 0.0)) {
    throw ValidationError("PSO coefficients must be positive");
  }
  if (!(velocity_clamp > 0.0)) throw ValidationError("velocity clamp must be positive");
  if (neighbors < 0 || 2 * neighbors + 1 > swarm_size) throw ValidationError("ring neighbourhood must fit the swarm");
  if (polish_evaluations < 0) throw ValidationError("polish_evaluations must be >= 0");
  if (stall_iterations < 0) throw ValidationError("stall_iterations must be >= 0");
  if (samples != 0 && samples < 16) throw ValidationError("samples must be 0 (auto) or >= 16");
  if (!(fidelity_clamp > 0.0 && fidelity_clamp < 1.0)) throw ValidationError("fidelity clamp must lie in (0, 1)");
  if (!(stall_tolerance >= 0.0)) throw ValidationError("stall_tolerance must be >= 0");
}

namespace {

void check_length(std::span<const double> params, const SearchSpace& space) {
  if (static_cast<int>(params.size()) != space.size()) {
    throw ValidationError("parameter vector has length " + std::to_string(params.size()) + ", expected " +
                          std::to_string(space.size()));
  }
}

RfDrive decode_drive(std::span<const double> pairs) {
  std::vector<Harmonic> h(pairs.size() / 2);
  for (std::size_t p = 0; p < h.size(); ++p) h[p] = {pairs[2 * p], pairs[2 * p + 1]};
  return RfDrive(std::move(h));
}

void encode_drive(const RfDrive& drive, int harmonics, std::vector<double>& out) {
  if (drive.cutoff() != harmonics) {
    throw ValidationError("drive has " + std::to_string(drive.cutoff()) + " harmonics, search space expects " +
                          std::to_string(harmonics));
  }
  for (const auto& h : drive.harmonics()) {
    out.push_back(h.amplitude);
    out.push_back(h.phase);
  }
}

CoefficientOptions synthesis_options(const SearchSpace& space, const PsoSettings& settings) {
  CoefficientOptions options;
  options.samples = settings.samples > 0 ? settings.samples : space.resolving_samples();
  return options;
}

detail::Box box_for(const SearchSpace& space) {
  detail::Box box;
  for (int k = 0; k < space.size(); ++k) {
    box.lower.push_back(space.lower(k));
    box.upper.push_back(space.upper(k));
    box.periodic.push_back(space.periodic(k));
  }
  return box;
}

}  // namespace

QfpConfig decode(std::span<const double> params, const SearchSpace& space) {
  check_length(params, space);
  const auto lattice = space.lattice();
  const auto b = static_cast<std::size_t>(space.channels);
  const auto pairs = static_cast<std::size_t>(2 * space.harmonics);

  QfpConfig config;
  config.lattice = lattice;
  config.shaper = ShaperConfig::centered({params.begin(), params.begin() + static_cast<std::ptrdiff_t>(b)}, lattice);
  config.drive_a = decode_drive(params.subspan(b, pairs));
  config.drive_b = space.symmetric ? time_reverse(config.drive_a) : decode_drive(params.subspan(b + pairs, pairs));
  return config;
}

std::vector<double> encode(const QfpConfig& config, const SearchSpace& space) {
  space.validate();
  if (config.lattice != space.lattice() || config.shaper.channels() != space.channels ||
      config.shaper.channel_offset != ShaperConfig::flat(space.channels, space.lattice()).channel_offset) {
    throw ValidationError("configuration geometry does not match the search space");
  }
  std::vector<double> out(config.shaper.phases.begin(), config.shaper.phases.end());
  encode_drive(config.drive_a, space.harmonics, out);
  if (space.symmetric) {
    if (config.drive_b != time_reverse(config.drive_a)) {
      throw ValidationError("symmetric search space requires drive_b = time_reverse(drive_a)");
    }
  } else {
    encode_drive(config.drive_b, space.harmonics, out);
  }
  return out;
}

double objective(std::span<const double> params, const SearchSpace& space, const CoefficientOptions& options,
                 double clamp) {
  const QfpConfig config = decode(params, space);
  return gate_metrics(assemble_transfer(config, options), dft_matrix(space.d), clamp).cost;
}

void kernels::evaluate_swarm(std::span<const double> positions, const SearchSpace& space,
                             const CoefficientOptions& options, double clamp, std::span<double> costs,
                             Execution execution) {
  if (positions.size() != costs.size() * static_cast<std::size_t>(space.size())) {
    throw ValidationError("evaluate_swarm: position table does not match cost count");
  }
  evaluate_rows(
      positions, space.size(), costs,
      [&](std::span<const double> row) { return objective(row, space, options, clamp); }, execution);
}

SynthesisResult pso_optimize(const SearchSpace& space, const PsoSettings& settings, Execution execution) {
  space.validate();
  settings.validate();
  const auto start = std::chrono::steady_clock::now();
  const CoefficientOptions options = synthesis_options(space, settings);

  auto batch_for = [&](const SearchSpace& s) {
    return [&, s](std::span<const double> positions, std::span<double> costs) {
      kernels::evaluate_swarm(positions, s, options, settings.fidelity_clamp, costs, execution);
    };
  };

  SynthesisResult result;
  result.space = space;
  result.pso = settings;

  if (!space.symmetric && settings.symmetric_seed && space.harmonics > 0) {
    SearchSpace tied = space;
    tied.symmetric = true;
    auto outcome = detail::run_swarm(box_for(tied), settings, batch_for(tied));
    const auto seed_point = encode(decode(outcome.best, tied), space);
    auto point_cost = [&](std::span<const double> x) {
      return objective(x, space, options, settings.fidelity_clamp);
    };
    auto polished = detail::nelder_mead(box_for(space), seed_point, point_cost(seed_point), point_cost,
                                        settings.polish_evaluations);
    result.params = std::move(polished.best);
    result.iterations_used = outcome.iterations_used;
    result.trace = std::move(outcome.trace);
    result.trace.push_back(polished.best_cost);
  } else {
    auto outcome = detail::run_swarm(box_for(space), settings, batch_for(space));
    result.params = std::move(outcome.best);
    result.iterations_used = outcome.iterations_used;
    result.trace = std::move(outcome.trace);
  }

  result.config = decode(result.params, space);
  result.metrics = gate_metrics(assemble_transfer(result.config, options), dft_matrix(space.d),
                                settings.fidelity_clamp);
  result.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

void verify_metrics(const SynthesisResult& result, double tol) {
  const auto fresh = gate_metrics(assemble_transfer(result.config), dft_matrix(result.config.lattice.comp_dim),
                                  result.pso.fidelity_clamp);
  const auto& m = result.metrics;
  const double worst = std::max({std::abs(fresh.fidelity - m.fidelity), std::abs(fresh.success_prob - m.success_prob),
                                 std::abs(fresh.cost - m.cost)});
  if (!(worst <= tol)) {
    throw NumericalError("stored metrics disagree with the recomputed ones by " + std::to_string(worst));
  }
}

SignificantDigits round_significant(double x, int digits) {
  if (digits < 1) throw ValidationError("digits must be >= 1");
  if (x == 0.0 || !std::isfinite(x)) return {0, 0};
  int exponent = static_cast<int>(std::floor(std::log10(std::abs(x)))) - (digits - 1);
  auto mantissa = static_cast<long long>(std::llround(x / std::pow(10.0, exponent)));
  const auto limit = static_cast<long long>(std::llround(std::pow(10.0, digits)));
  if (std::llabs(mantissa) >= limit) {
    ++exponent;
    mantissa = static_cast<long long>(std::llround(x / std::pow(10.0, exponent)));
  }
  return {mantissa, exponent};
}

int min_bandwidth(std::span<const SweepPoint> points) {
  const SweepPoint* best = nullptr;
  for (const auto& p : points) {
    if (!p.failed && (best == nullptr || p.cost < best->cost)) best = &p;
  }
  if (best == nullptr) return 0;
  const auto target = round_significant(best->cost, 3);
  for (const auto& p : points) {
    if (!p.failed && round_significant(p.cost, 3) == target) return p.channels;
  }
  return best->channels;
}

SweepResult bandwidth_sweep(int d, std::span<const int> channel_grid, const PsoSettings& settings,
                            std::optional<int> harmonics, bool symmetric, Execution execution) {
  if (channel_grid.empty()) throw ValidationError("bandwidth grid is empty");
  for (std::size_t i = 0; i < channel_grid.size(); ++i) {
    if (channel_grid[i] < d) throw ValidationError("every grid entry must be >= d");
    if (i > 0 && channel_grid[i] <= channel_grid[i - 1]) throw ValidationError("bandwidth grid must be ascending");
  }
  SweepResult sweep;
  sweep.d = d;
  for (int b : channel_grid) {
    SweepPoint point;
    point.channels = b;
    try {
      auto result = pso_optimize(SearchSpace::for_dimension(d, b, harmonics, symmetric), settings, execution);
      point.cost = result.metrics.cost;
      point.fidelity = result.metrics.fidelity;
      point.success_prob = result.metrics.success_prob;
      sweep.solutions.push_back(std::move(result));
    } catch (const std::exception& e) {
      point.failed = true;
      point.error = e.what();
    }
    sweep.points.push_back(std::move(point));
  }
  sweep.min_bandwidth = min_bandwidth(sweep.points);
  return sweep;
}

namespace {

// W_mn = exp(i out_m) c_{m-n} exp(i in_n) for a lone EOM between phase masks.
Matrix single_eom_transfer(std::span<const double> params, int d, int harmonics, int samples) {
  const auto pairs = static_cast<std::size_t>(2 * harmonics);
  const RfDrive drive = decode_drive(params.subspan(0, pairs));
  const auto in_phases = params.subspan(pairs, static_cast<std::size_t>(d));
  const auto out_phases = params.subspan(pairs + static_cast<std::size_t>(d), static_cast<std::size_t>(d));
  thread_local std::vector<cplx> spectrum;
  detail::drive_spectrum(drive, samples, 1e-10, spectrum);
  Matrix w(d, d);
  for (int m = 0; m < d; ++m) {
    for (int n = 0; n < d; ++n) {
      w(m, n) = std::polar(1.0, out_phases[static_cast<std::size_t>(m)]) * detail::spectrum_at(spectrum, m - n) *
                std::polar(1.0, in_phases[static_cast<std::size_t>(n)]);
    }
  }
  return w;
}

}  // namespace

SingleEomBound single_eom_bound_check(int d, const PsoSettings& settings, std::optional<int> harmonics,
                                      double fidelity_floor, Execution execution) {
  if (d < 2) throw ValidationError("single-EOM bound check needs d >= 2");
  settings.validate();
  const int p = harmonics.value_or(2 * (d - 1));
  if (p < 1) throw ValidationError("single-EOM bound check needs at least one harmonic");

  SearchSpace reference = SearchSpace::for_dimension(d, d, p);
  reference.total_modes = std::max(reference.total_modes, 2 * d);
  const int samples = settings.samples > 0 ? settings.samples : reference.resolving_samples();

  detail::Box box;
  for (int k = 0; k < 2 * p; ++k) {
    box.lower.push_back(0.0);
    box.upper.push_back(k % 2 == 0 ? reference.amplitude_max : kTwoPi);
    box.periodic.push_back(k % 2 == 1);
  }
  for (int k = 0; k < 2 * d; ++k) {
    box.lower.push_back(0.0);
    box.upper.push_back(kTwoPi);
    box.periodic.push_back(true);
  }
  const Matrix target = dft_matrix(d);
  const int width = box.size();
  // Saturate the cost halfway between the floor and F = 1 so that the
  // optimizer settles on the feasible side of the floor.
  const double clamp = std::min(settings.fidelity_clamp, 0.5 * (1.0 - fidelity_floor));
  if (!(clamp > 0.0)) throw ValidationError("fidelity floor must lie below 1");
  auto batch = [&](std::span<const double> positions, std::span<double> costs) {
    kernels::evaluate_rows(
        positions, width, costs,
        [&](std::span<const double> row) {
          return gate_metrics(single_eom_transfer(row, d, p, samples), target, clamp).cost;
        },
        execution);
  };
  const auto outcome = detail::run_swarm(box, settings, batch);
  const auto metrics = gate_metrics(single_eom_transfer(outcome.best, d, p, samples), target, clamp);

  SingleEomBound out;
  out.d = d;
  out.fidelity = metrics.fidelity;
  out.success_prob = metrics.success_prob;
  out.bound = static_cast<double>(d) / (2.0 * d - 1.0);
  out.reached_fidelity = metrics.fidelity >= fidelity_floor;
  out.drive = decode_drive(std::span<const double>(outcome.best).subspan(0, static_cast<std::size_t>(2 * p)));
  return out;
}

}  // namespace qfp
