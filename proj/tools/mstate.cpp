// mstate: market-state detection pipeline.
//
//   mstate <subcommand> [--config PATH] [--seed N] [--scale {5,15,30,60}]
//          [--out DIR] [--include-overnight] [--threads N]

#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mstate/errors.hpp"
#include "mstate/pipeline.hpp"
#include "mstate/textio.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Intraday market-state detection by likelihood clustering of periods"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> scale;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
  bool include_overnight = false;

  const std::map<std::string_view, std::string> about = {
      {"synth", "write synthetic ticks (or planted returns) and the true labels"},
      {"aggregate", "ticks.csv -> bars.csv"},
      {"correlate", "bars.csv -> returns.csv, correlation.bin, correlation.csv"},
      {"cluster", "correlation.bin -> clusters.json (genetic algorithm)"},
      {"powerlaw", "clusters.json -> powerlaw.json (x_min, significant clusters)"},
      {"ssv", "powerlaw.json + returns.csv -> ssv.json"},
      {"assign", "ssv.json + returns or bars -> assignments.csv"},
      {"transitions", "assignments.csv -> transitions.json, transitions.csv"},
      {"export-graph", "clusters.json + correlation.bin -> graph.gexf"},
      {"oracle", "correlation.bin -> oracle.json (exhaustive search, N <= 12)"}};

  for (std::string_view name : mstate::kStageNames) {
    auto* sub = app.add_subcommand(std::string(name), about.at(name));
    sub->add_option("--config", config_path, "key=value configuration file");
    sub->add_option("--seed", seed, "master seed for every randomized stage");
    sub->add_option("--scale", scale, "bar width in minutes (5, 15, 30, 60)");
    sub->add_option("--out", out, "artifact directory");
    sub->add_option("--threads", threads, "worker threads");
    sub->add_flag("--include-overnight", include_overnight,
                  "count last-period to first-period pairs across days");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string stage = app.get_subcommands().front()->get_name();

  mstate::PipelineConfig config;
  try {
    if (!config_path.empty()) {
      std::string text;
      try {
        text = mstate::read_file(config_path);
      } catch (const mstate::Error& e) {
        throw mstate::ConfigError("--config", e.what());
      }
      config = mstate::parse_config(text);
    }
    if (seed) mstate::apply_setting(config, "seed", std::to_string(*seed));
    if (scale) mstate::apply_setting(config, "scale", std::to_string(*scale));
    if (out) mstate::apply_setting(config, "out", *out);
    if (threads) mstate::apply_setting(config, "threads", std::to_string(*threads));
    if (include_overnight) config.include_overnight = true;
  } catch (const mstate::ConfigError& e) {
    std::cerr << "error: invalid configuration key '" << e.key() << "': " << e.what() << '\n';
    return 1;
  }
  return mstate::run_stage(stage, config, std::cerr);
}
