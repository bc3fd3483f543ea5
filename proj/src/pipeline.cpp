#include "mstate/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "mstate/corr.hpp"
#include "mstate/errors.hpp"
#include "mstate/graph.hpp"
#include "mstate/marketdata.hpp"
#include "mstate/powerlaw.hpp"
#include "mstate/states.hpp"
#include "mstate/synth.hpp"
#include "mstate/textio.hpp"
#include "mstate/transitions.hpp"

namespace mstate {

namespace fs = std::filesystem;
using nlohmann::json;

// --- configuration ----------------------------------------------------------

namespace {

std::uint64_t parse_count(std::string_view key, std::string_view value) {
  const auto v = parse_integer(value);
  if (!v || *v < 0) throw ConfigError(std::string(key), "expected a non-negative integer");
  return static_cast<std::uint64_t>(*v);
}

double parse_real(std::string_view key, std::string_view value) {
  const auto v = parse_number(value);
  if (!v) throw ConfigError(std::string(key), "expected a number");
  return *v;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError(std::string(key), "expected true or false");
}

template <typename T, typename Parse>
std::vector<T> parse_list(std::string_view value, Parse parse) {
  std::vector<T> out;
  for (auto f : split_fields(value)) out.push_back(parse(trim(f)));
  return out;
}

template <typename Parse>
auto wrap(std::string_view key, Parse parse) {
  return [key, parse](std::string_view v) {
    try {
      return parse(v);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(std::string(key), e.what());
    }
  };
}

}  // namespace

void apply_setting(PipelineConfig& c, std::string_view key, std::string_view value) {
  const std::string k(key);
  value = trim(value);
  auto count = [&] { return parse_count(key, value); };
  auto real = [&] { return parse_real(key, value); };
  auto guarded = [&](auto parse) { return wrap(key, parse)(value); };

  if (k == "out") {
    if (value.empty()) throw ConfigError(k, "empty path");
    c.out = fs::path(std::string(value));
  } else if (k == "scale") {
    c.scale = static_cast<int>(count());
    if (c.scale != 5 && c.scale != 15 && c.scale != 30 && c.scale != 60)
      throw ConfigError(k, "must be one of 5, 15, 30, 60");
  } else if (k == "session_open") {
    c.session_open = guarded(parse_clock_time);
  } else if (k == "session_close") {
    c.session_close = guarded(parse_clock_time);
  } else if (k == "utc_offset") {
    c.utc_offset = guarded(parse_utc_offset);
  } else if (k == "days") {
    c.days = value.empty() ? std::vector<std::chrono::sys_days>{}
                           : parse_list<std::chrono::sys_days>(value, wrap(key, parse_date));
  } else if (k == "ticks") {
    c.ticks = fs::path(std::string(value));
  } else if (k == "seed") {
    c.seed = count();
  } else if (k == "threads") {
    c.threads = static_cast<unsigned>(count());
    if (c.threads == 0 || c.threads > 256) throw ConfigError(k, "must lie in [1, 256]");
  } else if (k == "bootstrap") {
    c.bootstrap = count();
    if (c.bootstrap < 100) throw ConfigError(k, "must be at least 100");
  } else if (k == "include_overnight") {
    c.include_overnight = parse_bool(key, value);
  } else if (k == "correlate.source") {
    if (value != "bars" && value != "returns") throw ConfigError(k, "must be bars or returns");
    c.correlate_source = std::string(value);
  } else if (k == "correlate.standardize") {
    c.correlate_standardize = parse_bool(key, value);
  } else if (k == "ga.population") {
    c.ga_population = count();
  } else if (k == "ga.generations") {
    c.ga_generations = count();
  } else if (k == "ga.stall") {
    c.ga_stall = count();
  } else if (k == "ga.mutation") {
    c.ga_mutation = real();
  } else if (k == "ga.crossover") {
    c.ga_crossover = real();
  } else if (k == "ga.elite") {
    c.ga_elite = count();
  } else if (k == "ga.tournament") {
    c.ga_tournament = count();
  } else if (k == "assign.bars") {
    c.assign_bars = fs::path(std::string(value));
  } else if (k == "assign.returns") {
    c.assign_returns = fs::path(std::string(value));
  } else if (k == "synth.mode") {
    if (value != "market" && value != "planted") throw ConfigError(k, "must be market or planted");
    c.synth_mode = std::string(value);
  } else if (k == "synth.instruments") {
    c.synth_instruments = count();
  } else if (k == "synth.states") {
    c.synth_states = count();
  } else if (k == "synth.coupling") {
    c.synth_coupling = real();
    if (!(c.synth_coupling >= 0.0 && c.synth_coupling < 1.0))
      throw ConfigError(k, "must lie in [0, 1)");
  } else if (k == "synth.days") {
    c.synth_days = count();
  } else if (k == "synth.start_date") {
    c.synth_start = guarded(parse_date);
  } else if (k == "synth.cluster_sizes") {
    c.synth_cluster_sizes = parse_list<std::size_t>(
        value, [&](std::string_view f) { return static_cast<std::size_t>(parse_count(key, f)); });
  } else if (k == "synth.couplings") {
    c.synth_couplings =
        parse_list<double>(value, [&](std::string_view f) { return parse_real(key, f); });
  } else if (k == "synth.measurements") {
    c.synth_measurements = count();
  } else {
    throw ConfigError(k, "unknown configuration key");
  }
}

PipelineConfig parse_config(std::string_view text, PipelineConfig base) {
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    const auto line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(std::string(line), "expected key=value");
    apply_setting(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

GAConfig PipelineConfig::ga_config() const {
  GAConfig g = GAConfig::for_time_scale(scale);
  if (ga_population) g.population_size = *ga_population;
  if (ga_generations) g.max_generations = *ga_generations;
  if (ga_stall) g.stall_generations = *ga_stall;
  if (ga_mutation) g.mutation_probability = *ga_mutation;
  if (ga_crossover) g.crossover_probability = *ga_crossover;
  if (ga_elite) g.elite_count = *ga_elite;
  if (ga_tournament) g.tournament_size = *ga_tournament;
  g.master_seed = seed;
  return g;
}

namespace {

// Maps the GA's own field names back to configuration keys.
std::string ga_key_for(const std::string& message) {
  static const std::pair<const char*, const char*> kKeys[] = {
      {"population", "ga.population"}, {"stall", "ga.stall"},
      {"generation", "ga.generations"}, {"mutation", "ga.mutation"},
      {"crossover", "ga.crossover"},   {"elite", "ga.elite"},
      {"tournament", "ga.tournament"}};
  for (const auto& [word, key] : kKeys)
    if (message.find(word) != std::string::npos) return key;
  return "ga";
}

SessionCalendar base_calendar(const PipelineConfig& c) {
  SessionCalendar cal;
  cal.open = c.session_open;
  cal.close = c.session_close;
  cal.bar_width = std::chrono::minutes(c.scale);
  cal.utc_offset = c.utc_offset;
  cal.days = c.days;
  return cal;
}

}  // namespace

void validate(const PipelineConfig& c) {
  try {
    c.ga_config().validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(ga_key_for(e.what()), e.what());
  }
  try {
    SessionCalendar cal = base_calendar(c);
    cal.validate();
  } catch (const Error& e) {
    throw ConfigError("session_open/session_close", e.what());
  }
  if (c.synth_cluster_sizes.size() != c.synth_couplings.size())
    throw ConfigError("synth.couplings", "needs one coupling per entry of synth.cluster_sizes");
  for (double g : c.synth_couplings)
    if (!(g >= 0.0 && g < 1.0)) throw ConfigError("synth.couplings", "must lie in [0, 1)");
  if (c.synth_instruments == 0) throw ConfigError("synth.instruments", "must be positive");
  if (c.synth_days == 0) throw ConfigError("synth.days", "must be positive");
  if (c.synth_measurements < 2) throw ConfigError("synth.measurements", "must be at least 2");
}

// --- stages -----------------------------------------------------------------

namespace {

struct StageContext {
  const PipelineConfig& config;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::vector<std::string> warnings;

  fs::path artifact(std::string_view name) const { return config.out / std::string(name); }

  fs::path require(const fs::path& p) {
    if (!fs::exists(p)) throw MissingArtifactError(p.string());
    inputs.push_back(p.string());
    return p;
  }
  fs::path require_named(std::string_view name) { return require(artifact(name)); }

  std::string read(const fs::path& p) { return read_file(require(p)); }
  std::string read_named(std::string_view name) { return read(artifact(name)); }

  void write(std::string_view name, std::string_view contents) {
    const auto p = artifact(name);
    write_file(p, contents);
    outputs.push_back(p.string());
  }
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(what + ": " + e.what());
  }
}

ClusterConfiguration read_clusters(StageContext& ctx) {
  const auto j = parse_json(ctx.read_named("clusters.json"), "clusters.json");
  return ga_result_from_json(j.at("result")).best;
}

CorrelationMatrix read_correlation(StageContext& ctx) {
  return decode_correlation_binary(ctx.read_named("correlation.bin"));
}

ReturnsMatrix read_returns(StageContext& ctx, const fs::path& p) {
  std::istringstream in(ctx.read(p));
  return read_returns_csv(in);
}

BarTable read_bar_file(StageContext& ctx, const fs::path& p) {
  std::istringstream in(ctx.read(p));
  return read_bars(in);
}

void stage_synth(StageContext& ctx) {
  const auto& c = ctx.config;
  if (c.synth_mode == "planted") {
    PlantedSpec spec{c.synth_cluster_sizes, c.synth_couplings, c.synth_measurements, c.seed};
    const auto data = generate(spec);
    std::ostringstream r;
    write_returns_csv(r, data.returns, c.utc_offset);
    ctx.write("returns.csv", r.str());
    ctx.write("truth.json", dump({{"labels", data.truth.labels()}}));
    return;
  }
  SyntheticMarketSpec spec;
  spec.calendar = base_calendar(c);
  if (spec.calendar.days.empty()) {
    // Consecutive weekdays from the start date.
    using namespace std::chrono;
    for (sys_days d = c.synth_start; spec.calendar.days.size() < c.synth_days; d += days{1}) {
      const weekday wd{d};
      if (wd != Saturday && wd != Sunday) spec.calendar.days.push_back(d);
    }
  }
  spec.instruments = c.synth_instruments;
  spec.states = c.synth_states;
  spec.coupling = c.synth_coupling;
  spec.seed = c.seed;
  const auto market = generate_market(spec);
  std::ostringstream t;
  write_ticks(t, market.ticks, c.utc_offset);
  ctx.write("ticks.csv", t.str());
  ctx.write("truth.json", dump({{"labels", market.truth.labels()}}));
}

void stage_aggregate(StageContext& ctx) {
  const auto& c = ctx.config;
  const fs::path src = c.ticks ? *c.ticks : ctx.artifact("ticks.csv");
  std::ifstream in(ctx.require(src));
  const auto ticks = parse_ticks(in);
  SessionCalendar cal = base_calendar(c);
  if (cal.days.empty()) cal.days = infer_trading_days(ticks, cal);
  if (cal.days.empty()) throw InsufficientDataError("no ticks fall inside the session");
  const auto table = aggregate(ticks, cal);
  ctx.warnings.insert(ctx.warnings.end(), table.warnings.begin(), table.warnings.end());
  std::ostringstream out;
  write_bars(out, table, c.utc_offset);
  ctx.write("bars.csv", out.str());
}

void stage_correlate(StageContext& ctx) {
  const auto& c = ctx.config;
  ReturnsMatrix returns;
  if (c.correlate_source == "returns") {
    returns = read_returns(ctx, ctx.artifact("returns.csv"));
  } else {
    returns = feature_returns(read_bar_file(ctx, ctx.artifact("bars.csv")));
    std::ostringstream r;
    write_returns_csv(r, returns, c.utc_offset);
    ctx.write("returns.csv", r.str());
  }
  ctx.warnings.insert(ctx.warnings.end(), returns.warnings.begin(), returns.warnings.end());
  ReturnsMatrix standardized = c.correlate_standardize ? standardize_rows(returns) : returns;
  if (c.correlate_standardize)
    ctx.warnings.insert(ctx.warnings.end(), standardized.warnings.begin() +
                                                static_cast<std::ptrdiff_t>(returns.warnings.size()),
                        standardized.warnings.end());
  const auto corr = period_correlation(standardized, c.threads);
  ctx.write("correlation.bin", encode_correlation_binary(corr));
  std::ostringstream csv;
  write_correlation_csv(csv, corr, returns.periods, c.utc_offset);
  ctx.write("correlation.csv", csv.str());
}

void stage_cluster(StageContext& ctx) {
  const auto corr = read_correlation(ctx);
  const auto ga = ctx.config.ga_config();
  const auto result = evolve(corr, ga, ctx.config.threads);
  const auto stats = cluster_stats(corr, result.best);
  json clusters = json::array();
  for (const auto& s : stats.clusters)
    clusters.push_back({{"label", s.label}, {"n", s.n}, {"c", s.c}, {"g", s.g}});
  ctx.write("clusters.json",
            dump({{"config", to_json(ga)}, {"result", to_json(result)}, {"clusters", clusters}}));
}

void stage_oracle(StageContext& ctx) {
  const auto corr = read_correlation(ctx);
  const auto r = brute_force_best(corr);
  ctx.write("oracle.json", dump({{"labels", r.best.labels()},
                                 {"log_likelihood", r.log_likelihood},
                                 {"partitions_visited", r.partitions_visited}}));
}

void stage_powerlaw(StageContext& ctx) {
  const auto s = read_clusters(ctx);
  const auto corr = read_correlation(ctx);
  const auto stats = cluster_stats(corr, s);
  std::vector<std::int64_t> sizes;
  for (const auto& c : stats.clusters) sizes.push_back(static_cast<std::int64_t>(c.n));

  PowerLawFit fit;
  bool degenerate = false;
  try {
    fit = select_xmin(sizes);
    fit.p_value = p_value(sizes, fit, ctx.config.bootstrap, ctx.config.seed, ctx.config.threads);
  } catch (const DegenerateDataError&) {
    // Every cluster has the same size: no tail to fit, all clusters kept.
    degenerate = true;
    fit.xmin = sizes.empty() ? 1 : *std::min_element(sizes.begin(), sizes.end());
    fit.alpha = kAlphaUpper;
    fit.ks = 0.0;
    fit.n_tail = sizes.size();
    fit.at_upper_bound = true;
    ctx.warnings.push_back("all clusters have the same size; power-law fit skipped");
  }
  json j = to_json(fit);
  j["degenerate"] = degenerate;
  j["plausible"] = fit.p_value ? *fit.p_value > kPlausibleThreshold : false;
  j["bootstrap"] = ctx.config.bootstrap;
  j["sizes"] = sizes;
  j["significant"] = significant_states(stats, fit.xmin);
  ctx.write("powerlaw.json", dump(j));
}

void stage_ssv(StageContext& ctx) {
  const auto returns = read_returns(ctx, ctx.artifact("returns.csv"));
  const auto s = read_clusters(ctx);
  const auto corr = read_correlation(ctx);
  const auto pl = parse_json(ctx.read_named("powerlaw.json"), "powerlaw.json");
  const auto significant = pl.at("significant").get<std::vector<int>>();
  const auto set = extract_ssvs(returns, s, cluster_stats(corr, s), significant);
  if (set.states.empty()) ctx.warnings.push_back("no cluster reaches x_min; no states");
  ctx.warnings.insert(ctx.warnings.end(), set.warnings.begin(), set.warnings.end());
  ctx.write("ssv.json", dump(to_json(set)));
}

void stage_assign(StageContext& ctx) {
  const auto& c = ctx.config;
  const auto set = ssv_set_from_json(parse_json(ctx.read_named("ssv.json"), "ssv.json"));
  ReturnsMatrix returns;
  if (c.assign_bars)
    returns = feature_returns(read_bar_file(ctx, *c.assign_bars));
  else
    returns = read_returns(ctx, c.assign_returns ? *c.assign_returns : ctx.artifact("returns.csv"));
  std::vector<TimedAssignment> rows;
  rows.reserve(returns.period_count());
  for (std::size_t i = 0; i < returns.period_count(); ++i) {
    const auto fv = period_feature_vector(returns, i);
    rows.push_back({fv.period_start, assign_state(fv, set.states)});
  }
  std::ostringstream out;
  write_assignments_csv(out, rows, c.utc_offset);
  ctx.write("assignments.csv", out.str());
}

void stage_transitions(StageContext& ctx) {
  const auto set = ssv_set_from_json(parse_json(ctx.read_named("ssv.json"), "ssv.json"));
  std::istringstream in(ctx.read_named("assignments.csv"));
  const auto rows = read_assignments_csv(in);
  std::vector<int> ids;
  for (const auto& s : set.states) ids.push_back(s.state);
  std::vector<TimedState> seq;
  seq.reserve(rows.size());
  for (const auto& r : rows) seq.push_back({r.period_start, r.assignment.state});
  const auto t = estimate(seq, ids, ctx.config.utc_offset, ctx.config.include_overnight);
  json j = to_json(t);
  j["include_overnight"] = ctx.config.include_overnight;
  ctx.write("transitions.json", dump(j));
  std::ostringstream csv;
  write_transition_csv(csv, t);
  ctx.write("transitions.csv", csv.str());
}

void stage_export_graph(StageContext& ctx) {
  const auto s = read_clusters(ctx);
  const auto corr = read_correlation(ctx);
  const auto returns = read_returns(ctx, ctx.artifact("returns.csv"));
  std::ostringstream out;
  write_gexf(out, s, corr, returns.periods, ctx.config.utc_offset);
  ctx.write("graph.gexf", out.str());
}

void write_manifest(const StageContext& ctx, std::string_view stage, long long elapsed_ms) {
  json j = {{"stage", stage},
            {"inputs", ctx.inputs},
            {"outputs", ctx.outputs},
            {"seed", ctx.config.seed},
            {"threads", ctx.config.threads},
            {"version", kVersion},
            {"warnings", ctx.warnings},
            {"elapsed_ms", elapsed_ms}};
  const fs::path dir = ctx.config.out / "manifest";
  fs::create_directories(dir);
  write_file(dir / (std::string(stage) + ".json"), dump(j));
}

}  // namespace

int run_stage(std::string_view stage, const PipelineConfig& config, std::ostream& err) {
  using Clock = std::chrono::steady_clock;
  static const std::map<std::string_view, void (*)(StageContext&)> kStages = {
      {"synth", stage_synth},         {"aggregate", stage_aggregate},
      {"correlate", stage_correlate}, {"cluster", stage_cluster},
      {"powerlaw", stage_powerlaw},   {"ssv", stage_ssv},
      {"assign", stage_assign},       {"transitions", stage_transitions},
      {"export-graph", stage_export_graph}, {"oracle", stage_oracle}};

  const auto it = kStages.find(stage);
  if (it == kStages.end()) {
    err << "error: unknown subcommand '" << stage << "'\n";
    return 1;
  }
  try {
    validate(config);
    fs::create_directories(config.out);
    StageContext ctx{config, {}, {}, {}};
    const auto start = Clock::now();
    it->second(ctx);
    const auto elapsed =
        std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();
    write_manifest(ctx, stage, elapsed);
    for (const auto& w : ctx.warnings) err << "warning: " << w << '\n';
    return 0;
  } catch (const ConfigError& e) {
    err << "error: invalid configuration key '" << e.key() << "': " << e.what() << '\n';
    return 1;
  } catch (const MissingArtifactError& e) {
    err << "error: " << e.what() << "\nexpected path: " << e.path() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << stage << ": " << e.what() << '\n';
    return 3;
  }
}

}  // namespace mstate
