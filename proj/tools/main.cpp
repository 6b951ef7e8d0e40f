// qfp: synthesize frequency-bin DFT gates, simulate biphoton measurements
// through them and bound the entanglement of the resulting counts.

#include <omp.h>

#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "commands.hpp"
#include "qfp/error.hpp"

namespace {

using qfp::cli::json;

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

int report_error(const std::string& command, const std::string& kind, int code, const std::string& message) {
  const json record = {{"status", "error"}, {"command", command}, {"kind", kind}, {"exit_code", code},
                       {"message", message}};
  std::cerr << record.dump() << '\n';
  return code;
}

template <class T>
void set_if(json& j, const char* key, const std::optional<T>& value) {
  if (value) j[key] = *value;
}

struct PsoFlags {
  std::optional<int> swarm, iterations, restarts, neighbors, polish, stall, samples;
  std::optional<double> clamp, inertia, cognitive, social, velocity_clamp;
  bool no_symmetric_seed = false;

  void add(CLI::App* cmd) {
    cmd->add_option("--swarm", swarm, "Particles per swarm (100)");
    cmd->add_option("--iterations", iterations, "Iterations per restart (2000)");
    cmd->add_option("--restarts", restarts, "Independent restarts (8)");
    cmd->add_option("--neighbors", neighbors, "Ring neighbourhood radius, 0 = global best (1)");
    cmd->add_option("--polish", polish, "Nelder-Mead evaluations per polish (5000)");
    cmd->add_option("--stall", stall, "Stop a restart after this many stalled iterations, 0 = never (0)");
    cmd->add_option("--samples", samples, "Samples per RF period, 0 = automatic (0)");
    cmd->add_option("--fidelity-clamp", clamp, "Fidelity clamp of the cost (1e-4)");
    cmd->add_option("--inertia", inertia, "Inertia weight (0.729)");
    cmd->add_option("--cognitive", cognitive, "Cognitive coefficient (1.49445)");
    cmd->add_option("--social", social, "Social coefficient (1.49445)");
    cmd->add_option("--velocity-clamp", velocity_clamp, "Velocity clamp, fraction of range (0.2)");
    cmd->add_flag("--no-symmetric-seed", no_symmetric_seed, "Search the full space directly");
  }

  void apply(json& c) const {
    json pso = c.value("pso", json::object());
    set_if(pso, "swarm_size", swarm);
    set_if(pso, "iterations", iterations);
    set_if(pso, "restarts", restarts);
    set_if(pso, "neighbors", neighbors);
    set_if(pso, "polish_evaluations", polish);
    set_if(pso, "stall_iterations", stall);
    set_if(pso, "samples", samples);
    set_if(pso, "fidelity_clamp", clamp);
    set_if(pso, "inertia", inertia);
    set_if(pso, "cognitive", cognitive);
    set_if(pso, "social", social);
    set_if(pso, "velocity_clamp", velocity_clamp);
    if (no_symmetric_seed) pso["symmetric_seed"] = false;
    if (!pso.empty()) c["pso"] = pso;
  }
};

struct SearchFlags {
  std::optional<int> d, harmonics, modes;
  std::optional<double> amplitude_max;
  bool symmetric = false;

  void add(CLI::App* cmd) {
    cmd->add_option("-d,--dim", d, "Gate dimension d");
    cmd->add_option("-P,--harmonics", harmonics, "RF harmonics per EOM (d-1)");
    cmd->add_option("--modes", modes, "Simulated lattice modes M (64)");
    cmd->add_option("--amplitude-max", amplitude_max, "Upper bound on harmonic amplitudes (4 pi)");
    cmd->add_flag("--symmetric", symmetric, "Tie EOM 2 to the time reverse of EOM 1");
  }

  void apply(json& c) const {
    set_if(c, "d", d);
    set_if(c, "P", harmonics);
    set_if(c, "total_modes", modes);
    set_if(c, "amplitude_max", amplitude_max);
    if (symmetric) c["symmetric"] = true;
  }
};

std::vector<int> parse_grid(const std::string& text) {
  std::vector<int> grid;
  try {
    const auto colon = text.find(':');
    if (colon != std::string::npos) {
      // start:stop:step, inclusive.
      const auto second = text.find(':', colon + 1);
      if (second == std::string::npos) throw std::invalid_argument(text);
      const int start = std::stoi(text.substr(0, colon));
      const int stop = std::stoi(text.substr(colon + 1, second - colon - 1));
      const int step = std::stoi(text.substr(second + 1));
      if (step < 1) throw std::invalid_argument(text);
      for (int b = start; b <= stop; b += step) grid.push_back(b);
    } else {
      std::size_t pos = 0;
      while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        grid.push_back(std::stoi(text.substr(pos, comma - pos)));
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
    }
  } catch (const std::exception&) {
    throw qfp::ValidationError("grid '" + text + "' must be a comma list or start:stop:step");
  }
  return grid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frequency-bin DFT gate synthesis, biphoton simulation and entanglement bounds"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::string config_path;
  std::optional<int> threads;
  bool serial = false;
  app.add_option("--seed", seed, "Random seed (drawn and recorded when omitted)");
  app.add_option("--out", out_dir, "Output directory for artifacts and the run record");
  app.add_option("--config", config_path, "JSON config file or run record to replay");
  app.add_option("--threads", threads, "OpenMP threads")->check(CLI::PositiveNumber);
  app.add_flag("--serial", serial, "Use the serial kernels");

  auto* synth = app.add_subcommand("synth", "Synthesize a d-point DFT gate");
  SearchFlags synth_search;
  PsoFlags synth_pso;
  std::optional<int> synth_b, waveform_points;
  synth_search.add(synth);
  synth_pso.add(synth);
  synth->add_option("-B,--bandwidth", synth_b, "Shaped channels B (minimum-bandwidth table)");
  synth->add_option("--waveform-points", waveform_points, "Samples per period in waveforms.csv (512)");

  auto* sweep = app.add_subcommand("sweep", "Scan the shaper bandwidth and detect B*");
  SearchFlags sweep_search;
  PsoFlags sweep_pso;
  std::optional<std::string> grid;
  sweep_search.add(sweep);
  sweep_pso.add(sweep);
  sweep->add_option("--grid", grid, "Bandwidths as a comma list or start:stop:step");

  auto* correlate = app.add_subcommand("correlate", "Joint outcome distribution of a biphoton state");
  std::optional<std::string> state, gate_idler, gate_signal;
  correlate->add_option("--state", state, "maxent:<d> or phi:<radians>");
  correlate->add_option("--idler", gate_idler, "ideal-dft:<d>, identity:<d> or solution:<file>");
  correlate->add_option("--signal", gate_signal, "ideal-dft:<d>, identity:<d> or solution:<file>");

  auto* counts = app.add_subcommand("counts", "Sample coincidence counts from a distribution");
  std::optional<std::string> dist_file, model;
  std::optional<std::int64_t> total;
  std::optional<double> flux, dwell;
  counts->add_option("--dist", dist_file, "Distribution CSV");
  counts->add_option("--model", model, "multinomial or poisson")->check(CLI::IsMember({"multinomial", "poisson"}));
  counts->add_option("-N,--total", total, "Coincidences (multinomial)");
  counts->add_option("--flux", flux, "Coincidence rate (poisson)");
  counts->add_option("--dwell", dwell, "Integration time per outcome (poisson, 1)");

  auto* bound = app.add_subcommand("bound", "Posterior of the entropic entanglement bound");
  std::optional<std::string> logical, fourier;
  std::optional<int> bound_d, n_samples;
  bound->add_option("--logical", logical, "Logical-basis counts CSV");
  bound->add_option("--fourier", fourier, "Fourier-basis counts CSV");
  bound->add_option("-d,--dim", bound_d, "Dimension (from the tables)");
  bound->add_option("--draws", n_samples, "Posterior draws (16384)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("", "validation", kExitValidation, e.what());
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    json c = json::object();
    if (!config_path.empty()) c = qfp::cli::config_from_file(command, qfp::io::read_json(config_path));
    set_if(c, "seed", seed);
    if (command == "synth") {
      synth_search.apply(c);
      synth_pso.apply(c);
      set_if(c, "B", synth_b);
      set_if(c, "waveform_points", waveform_points);
    } else if (command == "sweep") {
      sweep_search.apply(c);
      sweep_pso.apply(c);
      if (grid) c["grid"] = parse_grid(*grid);
    } else if (command == "correlate") {
      set_if(c, "state", state);
      set_if(c, "gate_idler", gate_idler);
      set_if(c, "gate_signal", gate_signal);
    } else if (command == "counts") {
      set_if(c, "distribution", dist_file);
      set_if(c, "model", model);
      set_if(c, "total", total);
      set_if(c, "flux", flux);
      set_if(c, "dwell", dwell);
    } else {
      set_if(c, "logical", logical);
      set_if(c, "fourier", fourier);
      set_if(c, "d", bound_d);
      set_if(c, "n_samples", n_samples);
    }
    if (seed) c["seed_generated"] = false;

    if (threads) omp_set_num_threads(*threads);
    qfp::cli::RunContext context{out_dir, serial ? qfp::Execution::serial : qfp::Execution::parallel};
    const json resolved = qfp::cli::resolve_config(command, c);
    const json record = qfp::cli::run_command(command, resolved, context);
    std::cout << qfp::cli::summarize(record) << '\n'
              << "run record: " << (context.out_dir / "run.json").string() << '\n';
    return 0;
  } catch (const qfp::ValidationError& e) {
    return report_error(command, "validation", kExitValidation, e.what());
  } catch (const qfp::NumericalError& e) {
    return report_error(command, "numerical", kExitNumerical, e.what());
  } catch (const std::exception& e) {
    return report_error(command, "runtime", kExitNumerical, e.what());
  }
}
