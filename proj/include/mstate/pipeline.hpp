#pragma once

// Stage orchestration behind the `mstate` command. Each stage reads the
// artifacts of its predecessors from the output directory and writes its own,
// plus a manifest under <out>/manifest/<stage>.json.
//
//   synth        -> ticks.csv, truth.json  (or returns.csv with synth.mode=planted)
//   aggregate    -> bars.csv
//   correlate    -> returns.csv, correlation.bin, correlation.csv
//   cluster      -> clusters.json
//   powerlaw     -> powerlaw.json
//   ssv          -> ssv.json
//   assign       -> assignments.csv
//   transitions  -> transitions.json, transitions.csv
//   export-graph -> graph.gexf
//   oracle       -> oracle.json

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mstate/ga.hpp"
#include "mstate/timeutil.hpp"

namespace mstate {

struct PipelineConfig {
  std::filesystem::path out = "mstate_out";
  int scale = 15;  // bar width in minutes
  std::chrono::minutes session_open{9 * 60};
  std::chrono::minutes session_close{17 * 60};
  UtcOffset utc_offset{0};
  std::vector<std::chrono::sys_days> days;  // empty: inferred from the ticks
  std::optional<std::filesystem::path> ticks;  // default <out>/ticks.csv
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::size_t bootstrap = 1000;
  bool include_overnight = false;
  std::string correlate_source = "bars";  // or "returns"
  bool correlate_standardize = true;      // per-row z-score before correlating

  // Overrides of the per-scale GA defaults.
  std::optional<std::size_t> ga_population;
  std::optional<std::size_t> ga_generations;
  std::optional<std::size_t> ga_stall;
  std::optional<double> ga_mutation;
  std::optional<double> ga_crossover;
  std::optional<std::size_t> ga_elite;
  std::optional<std::size_t> ga_tournament;

  // Ex-post input for `assign`; default is the in-sample returns.csv.
  std::optional<std::filesystem::path> assign_bars;
  std::optional<std::filesystem::path> assign_returns;

  std::string synth_mode = "market";  // or "planted"
  std::size_t synth_instruments = 16;
  std::size_t synth_states = 4;
  double synth_coupling = 0.9;
  std::size_t synth_days = 5;
  std::chrono::sys_days synth_start{std::chrono::year{2012} / 11 / 1};
  std::vector<std::size_t> synth_cluster_sizes{16, 16, 16, 16};
  std::vector<double> synth_couplings{0.9, 0.9, 0.9, 0.9};
  std::size_t synth_measurements = 400;

  GAConfig ga_config() const;
};

// Applies one key=value setting. Throws ConfigError naming the key for an
// unknown key or a bad value.
void apply_setting(PipelineConfig& config, std::string_view key, std::string_view value);

// Parses key=value lines; blank lines and lines starting with '#' are skipped.
PipelineConfig parse_config(std::string_view text, PipelineConfig base = {});

// Cross-field checks. Throws ConfigError.
void validate(const PipelineConfig& config);

inline constexpr std::string_view kVersion = "0.1.0";

inline constexpr std::string_view kStageNames[] = {
    "aggregate", "correlate", "cluster", "powerlaw", "ssv", "assign",
    "transitions", "export-graph", "synth", "oracle"};

// Runs one stage. Returns the process exit status: 0 on success, 1 for an
// invalid configuration, 2 for a missing input artifact, 3 for any other
// failure. Diagnostics go to `err`.
int run_stage(std::string_view stage, const PipelineConfig& config, std::ostream& err);

}  // namespace mstate
