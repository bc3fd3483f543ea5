#pragma once

// Genetic-algorithm search for the maximum-likelihood partition, plus an
// exhaustive set-partition oracle for small problems.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "mstate/likelihood.hpp"

namespace mstate {

struct GAConfig {
  std::size_t population_size = 1000;
  std::size_t max_generations = 4000;
  std::size_t stall_generations = 500;
  double mutation_probability = 0.09;   // per individual, one gene
  double crossover_probability = 0.9;
  std::size_t elite_count = 1;
  std::size_t tournament_size = 2;
  std::uint64_t master_seed = 0;

  // Calibrated defaults per bar width (5, 15, 30, 60 minutes).
  static GAConfig for_time_scale(int minutes);

  // Throws Error naming the offending field.
  void validate() const;
};

enum class Termination { Stall, MaxGenerations };
std::string_view termination_name(Termination t);

struct GAResult {
  ClusterConfiguration best;  // canonical
  double best_fitness = 0.0;
  std::size_t generations = 0;  // generations bred after the initial population
  Termination termination = Termination::MaxGenerations;
  std::vector<double> trajectory;  // best fitness, initial population first
};

// population_size canonical individuals with genes drawn uniformly from
// [1, n]. Individual k uses its own stream, so the result depends only on
// (n, config).
std::vector<ClusterConfiguration> init_population(std::size_t n, const GAConfig& config);

// Maximizes the log-likelihood of `c`. Each generation: elitism, tournament
// selection, uniform crossover, single-gene mutation, canonicalization, then
// fitness evaluation spread over `threads` workers. Every random decision for
// child k of generation g comes from the stream keyed (seed, g, k), so the
// result is bit-identical for any thread count.
GAResult evolve(const CorrelationMatrix& c, const GAConfig& config, unsigned threads = 1);

struct BruteForceResult {
  ClusterConfiguration best;
  double log_likelihood = 0.0;
  std::uint64_t partitions_visited = 0;
};

inline constexpr std::size_t kBruteForceLimit = 12;

// Enumerates every set partition as a restricted growth string, starting
// from all singletons and ending at the single cluster (reverse
// lexicographic). Ties keep the first maximizer met. Throws RefusalError when
// N exceeds kBruteForceLimit.
BruteForceResult brute_force_best(const CorrelationMatrix& c);

nlohmann::json to_json(const GAConfig& config);
nlohmann::json to_json(const GAResult& result);
GAResult ga_result_from_json(const nlohmann::json& j);

}  // namespace mstate
