#pragma once

// File formats of the command-line tool: the JSON solution registry and the
// CSV tables exchanged between commands.

#include <filesystem>
#include <string>

#include "json.hpp"
#include "qfp/biphoton.hpp"
#include "qfp/synth.hpp"

namespace qfp::io {

using nlohmann::json;
namespace fs = std::filesystem;

inline constexpr int kSolutionSchemaVersion = 1;
inline constexpr int kRunRecordSchemaVersion = 1;
inline constexpr int kDefaultWaveformPoints = 512;

/// Shortest decimal text that parses back to exactly `x`.
std::string format_double(double x);

json settings_to_json(const PsoSettings& settings);
/// Missing keys keep the defaults of PsoSettings; unknown keys are rejected.
PsoSettings settings_from_json(const json& j, PsoSettings base = {});

json solution_to_json(const SynthesisResult& result);
/// Rebuilds the result and recomputes its metrics; throws NumericalError
/// when they disagree with the stored ones.
SynthesisResult solution_from_json(const json& j);

void save_solution(const fs::path& path, const SynthesisResult& result);
SynthesisResult load_solution(const fs::path& path);

/// d x d table with a header row of signal bins and one row per idler bin.
void write_real_table(const fs::path& path, const RealTable& table);
RealTable read_real_table(const fs::path& path);
void write_counts(const fs::path& path, const CountTable& counts);
CountTable read_counts(const fs::path& path);

/// Probabilities as stored in a table; the escaped mass is 1 - sum.
JointDistribution distribution_from_table(RealTable table);

/// Columns t (periods), A, B, sampled at `points` equally spaced times.
void write_waveforms(const fs::path& path, const QfpConfig& config, int points = kDefaultWaveformPoints);
/// Columns channel, bin (relative to the first computational bin), phase.
void write_shaper_phases(const fs::path& path, const QfpConfig& config);
/// Columns B, cost, fidelity, success_prob, failed.
void write_sweep(const fs::path& path, const SweepResult& sweep);

json read_json(const fs::path& path);
void write_json(const fs::path& path, const json& j);

}  // namespace qfp::io
