#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

#include "qfp/error.hpp"
#include "qfp/inference.hpp"

namespace qfp::cli {

namespace {

constexpr int kMaxDefaultD = 10;

const std::vector<std::string>& allowed_keys(const std::string& command) {
  static const std::map<std::string, std::vector<std::string>> keys = {
      {"synth", {"d", "B", "P", "symmetric", "seed", "seed_generated", "amplitude_max", "total_modes",
                 "waveform_points", "pso"}},
      {"sweep", {"d", "grid", "P", "symmetric", "seed", "seed_generated", "amplitude_max", "total_modes", "pso"}},
      {"correlate", {"state", "gate_idler", "gate_signal"}},
      {"counts", {"distribution", "model", "total", "flux", "dwell", "seed", "seed_generated"}},
      {"bound", {"logical", "fourier", "d", "n_samples", "seed", "seed_generated"}},
  };
  const auto it = keys.find(command);
  if (it == keys.end()) throw ValidationError("unknown command '" + command + "'");
  return it->second;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

template <class T>
T field(const json& config, const char* key) {
  try {
    return config.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("config field '") + key + "' is missing or has the wrong type");
  }
}

void ensure_seed(json& config) {
  if (!config.contains("seed") || config["seed"].is_null()) {
    std::random_device device;
    config["seed"] = (static_cast<std::uint64_t>(device()) << 32) | device();
    config["seed_generated"] = true;
  } else if (!config.contains("seed_generated")) {
    config["seed_generated"] = false;
  }
  field<std::uint64_t>(config, "seed");
}

PsoSettings pso_of(const json& config) {
  auto settings = io::settings_from_json(config.at("pso"));
  settings.seed = field<std::uint64_t>(config, "seed");
  return settings;
}

SearchSpace space_of(const json& config, int channels) {
  SearchSpace space;
  space.d = field<int>(config, "d");
  space.channels = channels;
  space.harmonics = field<int>(config, "P");
  space.symmetric = field<bool>(config, "symmetric");
  space.amplitude_max = field<double>(config, "amplitude_max");
  space.total_modes = field<int>(config, "total_modes");
  space.validate();
  return space;
}

void resolve_search(json& c) {
  const int d = field<int>(c, "d");
  if (d < 1) throw ValidationError("d must be >= 1");
  if (!c.contains("P")) c["P"] = std::max(0, d - 1);
  if (!c.contains("symmetric")) c["symmetric"] = false;
  if (!c.contains("amplitude_max")) c["amplitude_max"] = SearchSpace{}.amplitude_max;
  if (!c.contains("total_modes")) c["total_modes"] = kDefaultModes;
  auto pso = io::settings_to_json(io::settings_from_json(c.value("pso", json::object())));
  pso.erase("seed");
  c["pso"] = pso;
  ensure_seed(c);
}

// Builtin and file-backed gates, all d x d.
Matrix gate_from_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw ValidationError("gate '" + spec + "' must be kind:argument");
  const auto kind = spec.substr(0, colon);
  const auto arg = spec.substr(colon + 1);
  if (kind == "solution") return assemble_transfer(io::load_solution(arg).config);
  int d = 0;
  try {
    std::size_t used = 0;
    d = std::stoi(arg, &used);
    if (used != arg.size()) throw std::invalid_argument(arg);
  } catch (const std::exception&) {
    throw ValidationError("gate '" + spec + "' needs an integer dimension");
  }
  if (d < 1) throw ValidationError("gate dimension must be >= 1");
  if (kind == "ideal-dft") return dft_matrix(d);
  if (kind == "identity") return Matrix::Identity(d, d);
  throw ValidationError("unknown gate kind '" + kind + "' (ideal-dft:d, identity:d, solution:<file>)");
}

BiphotonState state_from_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  const auto kind = spec.substr(0, colon);
  const auto arg = colon == std::string::npos ? std::string() : spec.substr(colon + 1);
  try {
    std::size_t used = 0;
    if (kind == "maxent") {
      const int d = std::stoi(arg, &used);
      if (used == arg.size()) return maximally_entangled(d);
    } else if (kind == "phi") {
      const double phi = std::stod(arg, &used);
      if (used == arg.size()) return prepare_phi_state(phi);
    }
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception&) {
  }
  throw ValidationError("state '" + spec + "' must be maxent:<d> or phi:<radians>");
}

json run_synth(const json& c, const RunContext& ctx, json& outputs) {
  const auto space = space_of(c, field<int>(c, "B"));
  const auto result = pso_optimize(space, pso_of(c), ctx.execution);
  io::save_solution(ctx.out_dir / "solution.json", result);
  io::write_waveforms(ctx.out_dir / "waveforms.csv", result.config, field<int>(c, "waveform_points"));
  io::write_shaper_phases(ctx.out_dir / "shaper_phases.csv", result.config);
  outputs = {{"solution", "solution.json"}, {"waveforms", "waveforms.csv"}, {"shaper_phases", "shaper_phases.csv"}};
  return {{"fidelity", result.metrics.fidelity},
          {"success_prob", result.metrics.success_prob},
          {"cost", result.metrics.cost},
          {"iterations_used", result.iterations_used},
          {"wall_time_s", result.wall_time_s}};
}

json run_sweep(const json& c, const RunContext& ctx, json& outputs) {
  const auto grid = field<std::vector<int>>(c, "grid");
  for (int b : grid) space_of(c, b);
  const auto sweep = bandwidth_sweep(field<int>(c, "d"), grid, pso_of(c), field<int>(c, "P"),
                                     field<bool>(c, "symmetric"), ctx.execution);
  io::write_sweep(ctx.out_dir / "sweep.csv", sweep);
  outputs = {{"sweep", "sweep.csv"}};
  for (const auto& s : sweep.solutions) {
    const auto name = "solution_B" + std::to_string(s.space.channels) + ".json";
    io::save_solution(ctx.out_dir / name, s);
    outputs[name.substr(0, name.size() - 5)] = name;
  }
  json points = json::array();
  for (const auto& p : sweep.points) {
    json point = {{"B", p.channels}, {"cost", p.cost}, {"fidelity", p.fidelity}, {"success_prob", p.success_prob}};
    if (p.failed) point["error"] = p.error;
    points.push_back(point);
  }
  return {{"min_bandwidth", sweep.min_bandwidth}, {"points", points}};
}

json run_correlate(const json& c, const RunContext& ctx, json& outputs) {
  const auto state = state_from_spec(field<std::string>(c, "state"));
  const auto dist = joint_distribution(state, gate_from_spec(field<std::string>(c, "gate_idler")),
                                       gate_from_spec(field<std::string>(c, "gate_signal")));
  io::write_real_table(ctx.out_dir / "distribution.csv", dist.probs);
  outputs = {{"distribution", "distribution.csv"}};
  return {{"d", dist.dim()}, {"computational_mass", dist.probs.sum()}, {"escape_mass", dist.escape_mass}};
}

json run_counts(const json& c, const RunContext& ctx, json& outputs) {
  const auto dist = io::distribution_from_table(io::read_real_table(field<std::string>(c, "distribution")));
  const auto model_name = field<std::string>(c, "model");
  DwellModel model;
  if (model_name == "multinomial") {
    model = Multinomial{field<std::int64_t>(c, "total")};
  } else {
    model = Poisson{field<double>(c, "flux"), field<double>(c, "dwell")};
  }
  const auto table = sample_counts(dist, model, field<std::uint64_t>(c, "seed"));
  io::write_counts(ctx.out_dir / "counts.csv", table.counts);
  outputs = {{"counts", "counts.csv"}};
  return {{"d", table.dim()}, {"total", table.total()}};
}

json run_bound(const json& c, const RunContext& ctx, json& outputs) {
  const auto logical = io::read_counts(field<std::string>(c, "logical"));
  const auto fourier = io::read_counts(field<std::string>(c, "fourier"));
  const int d = c.contains("d") ? field<int>(c, "d") : static_cast<int>(logical.rows());
  const auto s = entropic_bound_posterior(logical, fourier, d, field<int>(c, "n_samples"),
                                          field<std::uint64_t>(c, "seed"), ctx.execution);
  const json summary = {{"quantity", s.quantity}, {"mean", s.mean},        {"std", s.std},
                        {"n_samples", s.n_samples}, {"seed", s.seed}, {"prior_only", s.prior_only}};
  io::write_json(ctx.out_dir / "posterior.json", summary);
  outputs = {{"posterior", "posterior.json"}};
  return summary;
}

}  // namespace

int default_bandwidth(int d) {
  static constexpr int kTable[] = {12, 16, 20, 24, 28, 32, 32, 36};  // d = 3..10
  if (d < 1) throw ValidationError("d must be >= 1");
  if (d == 1) return 1;
  if (d == 2) return 8;
  if (d > kMaxDefaultD) throw ValidationError("no default bandwidth for d > 10; pass B explicitly");
  return kTable[d - 3];
}

json config_from_file(const std::string& command, const json& file) {
  if (!file.is_object()) throw ValidationError("config file must hold a JSON object");
  if (file.contains("command") && file.contains("config")) {
    if (file.at("command") != command) {
      throw ValidationError("run record is for '" + file.at("command").get<std::string>() + "', not '" + command + "'");
    }
    return file.at("config");
  }
  return file;
}

json resolve_config(const std::string& command, const json& partial) {
  if (!partial.is_object()) throw ValidationError("configuration must be an object");
  const auto& keys = allowed_keys(command);
  for (const auto& [key, value] : partial.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ValidationError("unknown " + command + " setting '" + key + "'");
    }
  }
  json c = partial;
  if (command == "synth") {
    if (!c.contains("d")) throw ValidationError("synth needs d");
    if (!c.contains("B")) c["B"] = default_bandwidth(field<int>(c, "d"));
    if (!c.contains("waveform_points")) c["waveform_points"] = io::kDefaultWaveformPoints;
    if (field<int>(c, "waveform_points") < 2) throw ValidationError("waveform_points must be >= 2");
    resolve_search(c);
    space_of(c, field<int>(c, "B"));
  } else if (command == "sweep") {
    if (!c.contains("d")) throw ValidationError("sweep needs d");
    if (!c.contains("grid")) throw ValidationError("sweep needs a bandwidth grid");
    resolve_search(c);
    const auto grid = field<std::vector<int>>(c, "grid");
    if (grid.empty()) throw ValidationError("bandwidth grid is empty");
    for (int b : grid) space_of(c, b);
  } else if (command == "correlate") {
    for (const char* key : {"state", "gate_idler", "gate_signal"}) {
      if (!c.contains(key)) throw ValidationError(std::string("correlate needs ") + key);
      field<std::string>(c, key);
    }
  } else if (command == "counts") {
    if (!c.contains("distribution")) throw ValidationError("counts needs a distribution file");
    if (!c.contains("model")) c["model"] = "multinomial";
    const auto model = field<std::string>(c, "model");
    if (model == "multinomial") {
      if (!c.contains("total")) throw ValidationError("multinomial counts need a total N");
      if (field<std::int64_t>(c, "total") < 0) throw ValidationError("total must be >= 0");
    } else if (model == "poisson") {
      if (!c.contains("flux")) throw ValidationError("poisson counts need a flux");
      if (!c.contains("dwell")) c["dwell"] = 1.0;
      if (!(field<double>(c, "flux") >= 0.0) || !(field<double>(c, "dwell") >= 0.0)) {
        throw ValidationError("flux and dwell must be >= 0");
      }
    } else {
      throw ValidationError("model must be multinomial or poisson");
    }
    ensure_seed(c);
  } else if (command == "bound") {
    if (!c.contains("logical") || !c.contains("fourier")) {
      throw ValidationError("bound needs logical and fourier count files");
    }
    if (!c.contains("n_samples")) c["n_samples"] = kDefaultPosteriorSamples;
    if (field<int>(c, "n_samples") < 1) throw ValidationError("n_samples must be >= 1");
    ensure_seed(c);
  }
  return c;
}

json run_command(const std::string& command, const json& config, const RunContext& context) {
  const json c = resolve_config(command, config);
  fs::create_directories(context.out_dir);
  json outputs;
  json results;
  if (command == "synth") results = run_synth(c, context, outputs);
  else if (command == "sweep") results = run_sweep(c, context, outputs);
  else if (command == "correlate") results = run_correlate(c, context, outputs);
  else if (command == "counts") results = run_counts(c, context, outputs);
  else results = run_bound(c, context, outputs);

  json record = {{"schema_version", io::kRunRecordSchemaVersion},
                 {"command", command},
                 {"config", c},
                 {"outputs", outputs},
                 {"results", results},
                 {"created_at", utc_timestamp()}};
  io::write_json(context.out_dir / "run.json", record);
  return record;
}

std::string summarize(const json& record) {
  const auto& r = record.at("results");
  const auto& c = record.at("config");
  const auto command = record.at("command").get<std::string>();
  std::ostringstream out;
  out << std::setprecision(6);
  if (command == "synth") {
    out << "d=" << c["d"] << " B=" << c["B"] << " P=" << c["P"] << " seed=" << c["seed"]
        << ": F=" << std::setprecision(8) << r["fidelity"].get<double>()
        << " P_W=" << r["success_prob"].get<double>() << " cost=" << r["cost"].get<double>()
        << std::setprecision(3) << " (" << r["wall_time_s"].get<double>() << " s)";
  } else if (command == "sweep") {
    out << "d=" << c["d"] << " seed=" << c["seed"] << " minimum bandwidth B*=" << r["min_bandwidth"];
    for (const auto& p : r["points"]) {
      out << "\n  B=" << p["B"] << " cost=" << p["cost"].get<double>() << " F=" << p["fidelity"].get<double>()
          << " P_W=" << p["success_prob"].get<double>();
    }
  } else if (command == "correlate") {
    out << "d=" << r["d"] << " joint distribution, escaped mass " << r["escape_mass"].get<double>();
  } else if (command == "counts") {
    out << "d=" << r["d"] << " " << c["model"].get<std::string>() << " counts, total " << r["total"];
  } else {
    out << r["quantity"].get<std::string>() << " = " << r["mean"].get<double>() << " +/- " << r["std"].get<double>()
        << " (" << r["n_samples"] << " draws, seed " << r["seed"] << ")";
  }
  return out.str();
}

bool is_timing_field(const std::string& key) { return key == "wall_time_s" || key == "created_at"; }

}  // namespace qfp::cli
