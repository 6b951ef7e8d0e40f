#include "io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "qfp/error.hpp"

namespace qfp::io {

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  return in;
}

template <class T>
T get(const json& j, const char* key) {
  if (!j.contains(key)) throw ValidationError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("field '") + key + "' has the wrong type");
  }
}

json drive_to_json(const RfDrive& drive) {
  json out = json::array();
  for (const auto& h : drive.harmonics()) out.push_back({{"amp", h.amplitude}, {"phase", h.phase}});
  return out;
}

RfDrive drive_from_json(const json& j, int harmonics, const char* name) {
  if (!j.is_array() || static_cast<int>(j.size()) != harmonics) {
    throw ValidationError(std::string(name) + " must list exactly P harmonics");
  }
  std::vector<Harmonic> list;
  for (const auto& h : j) list.push_back({get<double>(h, "amp"), get<double>(h, "phase")});
  return RfDrive(std::move(list));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream stream(line);
  while (std::getline(stream, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

template <class T>
T parse_number(const std::string& text, const fs::path& path, int line) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ValidationError(path.string() + ":" + std::to_string(line) + ": cannot parse '" + text + "'");
  }
  return value;
}

// Reads a square table: header "idler\signal,0,..,d-1", then rows "m,v0,..".
template <class T>
Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> read_table(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path.string() + " is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  const int d = static_cast<int>(header.size()) - 1;
  if (d < 1) throw ValidationError(path.string() + ": header must list the signal bins");
  for (int n = 0; n < d; ++n) {
    if (parse_number<int>(header[static_cast<std::size_t>(n + 1)], path, 1) != n) {
      throw ValidationError(path.string() + ": header must list signal bins 0..d-1");
    }
  }
  Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> table(d, d);
  int row = 0;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (row >= d || static_cast<int>(cells.size()) != d + 1) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": expected a " + std::to_string(d) +
                            " x " + std::to_string(d) + " table");
    }
    if (parse_number<int>(cells[0], path, line_no) != row) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": idler rows must be in order");
    }
    for (int n = 0; n < d; ++n) table(row, n) = parse_number<T>(cells[static_cast<std::size_t>(n + 1)], path, line_no);
    ++row;
  }
  if (row != d) throw ValidationError(path.string() + ": expected " + std::to_string(d) + " idler rows");
  return table;
}

template <class Table, class Format>
void write_table(const fs::path& path, const Table& table, Format format) {
  auto out = open_out(path);
  out << "idler\\signal";
  for (Eigen::Index n = 0; n < table.cols(); ++n) out << ',' << n;
  out << '\n';
  for (Eigen::Index m = 0; m < table.rows(); ++m) {
    out << m;
    for (Eigen::Index n = 0; n < table.cols(); ++n) out << ',' << format(table(m, n));
    out << '\n';
  }
}

}  // namespace

std::string format_double(double x) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, x);
  if (ec != std::errc()) throw std::runtime_error("cannot format number");
  return {buffer, ptr};
}

json settings_to_json(const PsoSettings& s) {
  return {{"swarm_size", s.swarm_size},
          {"iterations", s.iterations},
          {"inertia", s.inertia},
          {"cognitive", s.cognitive},
          {"social", s.social},
          {"velocity_clamp", s.velocity_clamp},
          {"restarts", s.restarts},
          {"seed", s.seed},
          {"neighbors", s.neighbors},
          {"polish_evaluations", s.polish_evaluations},
          {"symmetric_seed", s.symmetric_seed},
          {"stall_iterations", s.stall_iterations},
          {"stall_tolerance", s.stall_tolerance},
          {"samples", s.samples},
          {"fidelity_clamp", s.fidelity_clamp}};
}

PsoSettings settings_from_json(const json& j, PsoSettings s) {
  if (!j.is_object()) throw ValidationError("PSO settings must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "swarm_size") s.swarm_size = get<int>(j, "swarm_size");
    else if (key == "iterations") s.iterations = get<int>(j, "iterations");
    else if (key == "inertia") s.inertia = get<double>(j, "inertia");
    else if (key == "cognitive") s.cognitive = get<double>(j, "cognitive");
    else if (key == "social") s.social = get<double>(j, "social");
    else if (key == "velocity_clamp") s.velocity_clamp = get<double>(j, "velocity_clamp");
    else if (key == "restarts") s.restarts = get<int>(j, "restarts");
    else if (key == "seed") s.seed = get<std::uint64_t>(j, "seed");
    else if (key == "neighbors") s.neighbors = get<int>(j, "neighbors");
    else if (key == "polish_evaluations") s.polish_evaluations = get<int>(j, "polish_evaluations");
    else if (key == "symmetric_seed") s.symmetric_seed = get<bool>(j, "symmetric_seed");
    else if (key == "stall_iterations") s.stall_iterations = get<int>(j, "stall_iterations");
    else if (key == "stall_tolerance") s.stall_tolerance = get<double>(j, "stall_tolerance");
    else if (key == "samples") s.samples = get<int>(j, "samples");
    else if (key == "fidelity_clamp") s.fidelity_clamp = get<double>(j, "fidelity_clamp");
    else throw ValidationError("unknown PSO setting '" + key + "'");
  }
  s.validate();
  return s;
}

json solution_to_json(const SynthesisResult& r) {
  return {{"schema_version", kSolutionSchemaVersion},
          {"d", r.space.d},
          {"B", r.space.channels},
          {"P", r.space.harmonics},
          {"symmetric", r.space.symmetric},
          {"seed", r.pso.seed},
          {"shaper_phases", r.config.shaper.phases},
          {"eom1", drive_to_json(r.config.drive_a)},
          {"eom2", drive_to_json(r.config.drive_b)},
          {"fidelity", r.metrics.fidelity},
          {"success_prob", r.metrics.success_prob},
          {"cost", r.metrics.cost},
          {"iterations_used", r.iterations_used},
          {"wall_time_s", r.wall_time_s},
          {"total_modes", r.space.total_modes},
          {"amplitude_max", r.space.amplitude_max},
          {"pso", settings_to_json(r.pso)}};
}

SynthesisResult solution_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("solution must be a JSON object");
  if (get<int>(j, "schema_version") != kSolutionSchemaVersion) {
    throw ValidationError("unsupported solution schema_version");
  }
  SynthesisResult r;
  r.space.d = get<int>(j, "d");
  r.space.channels = get<int>(j, "B");
  r.space.harmonics = get<int>(j, "P");
  r.space.symmetric = get<bool>(j, "symmetric");
  r.space.total_modes = j.contains("total_modes") ? get<int>(j, "total_modes") : kDefaultModes;
  if (j.contains("amplitude_max")) r.space.amplitude_max = get<double>(j, "amplitude_max");
  r.space.validate();

  r.pso = j.contains("pso") ? settings_from_json(j.at("pso")) : PsoSettings{};
  r.pso.seed = get<std::uint64_t>(j, "seed");

  const auto phases = get<std::vector<double>>(j, "shaper_phases");
  if (static_cast<int>(phases.size()) != r.space.channels) {
    throw ValidationError("shaper_phases must hold B entries");
  }
  r.config.lattice = r.space.lattice();
  r.config.shaper = ShaperConfig::centered(phases, r.config.lattice);
  r.config.drive_a = drive_from_json(get<json>(j, "eom1"), r.space.harmonics, "eom1");
  r.config.drive_b = drive_from_json(get<json>(j, "eom2"), r.space.harmonics, "eom2");
  r.config.validate();
  r.params = encode(r.config, r.space);

  r.metrics = {get<double>(j, "fidelity"), get<double>(j, "success_prob"), get<double>(j, "cost")};
  r.iterations_used = get<int>(j, "iterations_used");
  r.wall_time_s = get<double>(j, "wall_time_s");
  verify_metrics(r);
  return r;
}

void save_solution(const fs::path& path, const SynthesisResult& result) {
  write_json(path, solution_to_json(result));
}

SynthesisResult load_solution(const fs::path& path) { return solution_from_json(read_json(path)); }

void write_real_table(const fs::path& path, const RealTable& table) {
  write_table(path, table, [](double v) { return format_double(v); });
}

RealTable read_real_table(const fs::path& path) { return read_table<double>(path); }

void write_counts(const fs::path& path, const CountTable& counts) {
  write_table(path, counts, [](std::int64_t v) { return std::to_string(v); });
}

CountTable read_counts(const fs::path& path) {
  CountTable counts = read_table<std::int64_t>(path);
  if ((counts.array() < 0).any()) throw ValidationError(path.string() + ": counts must be non-negative");
  return counts;
}

JointDistribution distribution_from_table(RealTable table) {
  JointDistribution dist;
  dist.escape_mass = std::max(0.0, 1.0 - table.sum());
  dist.probs = std::move(table);
  dist.validate();
  return dist;
}

void write_waveforms(const fs::path& path, const QfpConfig& config, int points) {
  if (points < 2) throw ValidationError("waveform tables need at least 2 points");
  auto out = open_out(path);
  out << "t,A,B\n";
  for (int i = 0; i < points; ++i) {
    const double t = static_cast<double>(i) / points;
    out << format_double(t) << ',' << format_double(config.drive_a.waveform(t)) << ','
        << format_double(config.drive_b.waveform(t)) << '\n';
  }
}

void write_shaper_phases(const fs::path& path, const QfpConfig& config) {
  auto out = open_out(path);
  out << "channel,bin,phase\n";
  const int first = config.shaper.channel_offset - config.lattice.comp_offset;
  for (int k = 0; k < config.shaper.channels(); ++k) {
    out << k << ',' << first + k << ',' << format_double(config.shaper.phases[static_cast<std::size_t>(k)]) << '\n';
  }
}

void write_sweep(const fs::path& path, const SweepResult& sweep) {
  auto out = open_out(path);
  out << "B,cost,fidelity,success_prob,failed\n";
  for (const auto& p : sweep.points) {
    out << p.channels << ',' << format_double(p.cost) << ',' << format_double(p.fidelity) << ','
        << format_double(p.success_prob) << ',' << (p.failed ? 1 : 0) << '\n';
  }
}

json read_json(const fs::path& path) {
  auto in = open_in(path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

}  // namespace qfp::io
