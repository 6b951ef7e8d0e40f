#pragma once

// Subcommands of the qfp tool. Every command is a pure function of its fully
// resolved configuration: it writes its artifacts into an output directory
// and returns a run record that embeds the configuration, so re-running the
// record reproduces the same numbers.

#include <string>

#include "io.hpp"

namespace qfp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

inline const std::vector<std::string> kCommands = {"synth", "sweep", "correlate", "counts", "bound"};

/// Default bandwidth B when synth is run without one; throws ValidationError
/// for d > 10.
int default_bandwidth(int d);

/// Accepts either a bare configuration or a run record (whose "config" is
/// used after checking that its command matches).
json config_from_file(const std::string& command, const json& file);

/// Fills every default, merges `pso` settings key-wise, draws a seed for
/// randomized commands that lack one (recorded as "seed_generated"), and
/// validates. The result is accepted unchanged by run_command.
json resolve_config(const std::string& command, const json& partial);

struct RunContext {
  fs::path out_dir = ".";
  Execution execution = Execution::parallel;
};

/// Runs a resolved configuration and returns its run record
/// {schema_version, command, config, outputs, results, created_at}. The record
/// is also written to <out_dir>/run.json.
json run_command(const std::string& command, const json& config, const RunContext& context);

/// One human-readable paragraph describing a run record.
std::string summarize(const json& record);

/// Record fields that carry wall-clock information rather than results.
bool is_timing_field(const std::string& key);

}  // namespace qfp::cli
