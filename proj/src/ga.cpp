#include "mstate/ga.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

#include "mstate/errors.hpp"
#include "mstate/parallel.hpp"
#include "mstate/rng.hpp"

namespace mstate {

namespace {

// Stream domain for the initial population, kept apart from generation keys.
constexpr std::uint64_t kInitDomain = ~std::uint64_t{0};

constexpr double kStallTolerance = 1e-12;

}  // namespace

GAConfig GAConfig::for_time_scale(int minutes) {
  GAConfig c;
  c.max_generations = 4000;
  c.mutation_probability = 0.09;
  c.crossover_probability = 0.9;
  switch (minutes) {
    case 5:
      c.population_size = 4000;
      c.stall_generations = 1000;
      break;
    case 15:
      c.population_size = 1000;
      c.stall_generations = 500;
      break;
    case 30:
      c.population_size = 800;
      c.stall_generations = 500;
      break;
    case 60:
      c.population_size = 600;
      c.stall_generations = 500;
      break;
    default:
      throw Error("time scale must be 5, 15, 30 or 60 minutes");
  }
  return c;
}

void GAConfig::validate() const {
  if (population_size < 1) throw Error("population_size must be positive");
  if (elite_count < 1) throw Error("elite_count must be at least 1");
  if (population_size < 2 * elite_count)
    throw Error("population_size must be at least 2 * elite_count");
  if (!(mutation_probability >= 0.0 && mutation_probability <= 1.0))
    throw Error("mutation_probability must lie in [0, 1]");
  if (!(crossover_probability >= 0.0 && crossover_probability <= 1.0))
    throw Error("crossover_probability must lie in [0, 1]");
  if (stall_generations > max_generations)
    throw Error("stall_generations must not exceed max_generations");
  if (tournament_size < 1) throw Error("tournament_size must be positive");
}

std::string_view termination_name(Termination t) {
  return t == Termination::Stall ? "stall" : "max_generations";
}

std::vector<ClusterConfiguration> init_population(std::size_t n, const GAConfig& config) {
  if (n < 1) throw Error("cannot build a population for zero objects");
  std::vector<ClusterConfiguration> pop;
  pop.reserve(config.population_size);
  std::vector<int> labels(n);
  std::vector<int> scratch(n + 1, 0);
  for (std::size_t k = 0; k < config.population_size; ++k) {
    auto rng = RandomStream::keyed(config.master_seed, {kInitDomain, k});
    for (auto& l : labels) l = 1 + static_cast<int>(rng.below(n));
    canonicalize_in_place(labels, scratch);
    pop.emplace_back(labels);
  }
  return pop;
}

namespace {

std::size_t tournament(RandomStream& rng, std::span<const double> fitness,
                       std::size_t size) {
  std::size_t best = rng.below(fitness.size());
  for (std::size_t t = 1; t < size; ++t) {
    const std::size_t cand = rng.below(fitness.size());
    if (fitness[cand] > fitness[best] || (fitness[cand] == fitness[best] && cand < best))
      best = cand;
  }
  return best;
}

struct AlignmentScratch {
  std::vector<std::size_t> counts;
  std::vector<std::tuple<std::size_t, int, int>> cells;
  std::vector<int> map_b, used_a;
};

// Relabels parent b so each of its clusters takes the label of the parent-a
// cluster it overlaps most, matched greedily by overlap size (ties: lower a
// label, then lower b label). Unmatched b clusters get labels above a's range,
// which may exceed N; canonicalization after crossover folds them back.
void align_labels(std::span<const int> a, std::span<const int> b,
                  std::vector<int>& out, AlignmentScratch& s) {
  const std::size_t n = a.size();
  const int ka = *std::max_element(a.begin(), a.end());
  const int kb = *std::max_element(b.begin(), b.end());
  s.counts.assign(static_cast<std::size_t>(ka + 1) * (kb + 1), 0);
  for (std::size_t i = 0; i < n; ++i) ++s.counts[static_cast<std::size_t>(a[i]) * (kb + 1) + b[i]];
  s.cells.clear();
  for (int la = 1; la <= ka; ++la)
    for (int lb = 1; lb <= kb; ++lb) {
      const auto c = s.counts[static_cast<std::size_t>(la) * (kb + 1) + lb];
      if (c > 0) s.cells.emplace_back(c, la, lb);
    }
  std::sort(s.cells.begin(), s.cells.end(), [](const auto& x, const auto& y) {
    if (std::get<0>(x) != std::get<0>(y)) return std::get<0>(x) > std::get<0>(y);
    if (std::get<1>(x) != std::get<1>(y)) return std::get<1>(x) < std::get<1>(y);
    return std::get<2>(x) < std::get<2>(y);
  });
  s.map_b.assign(kb + 1, 0);
  s.used_a.assign(ka + 1, 0);
  for (const auto& [c, la, lb] : s.cells) {
    if (s.map_b[lb] != 0 || s.used_a[la] != 0) continue;
    s.map_b[lb] = la;
    s.used_a[la] = 1;
  }
  int next = ka + 1;
  for (int lb = 1; lb <= kb; ++lb)
    if (s.map_b[lb] == 0) s.map_b[lb] = next++;
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = s.map_b[b[i]];
}

}  // namespace

GAResult evolve(const CorrelationMatrix& c, const GAConfig& config, unsigned threads) {
  config.validate();
  const std::size_t n = c.rows();
  if (n == 0 || c.cols() != n) throw DimensionMismatchError("correlation must be square and non-empty");

  const std::size_t pop_size = config.population_size;
  std::vector<int> pop(pop_size * n);
  std::vector<int> next(pop_size * n);
  std::vector<double> fitness(pop_size);
  std::vector<double> next_fitness(pop_size);

  {
    const auto initial = init_population(n, config);
    for (std::size_t k = 0; k < pop_size; ++k)
      std::copy(initial[k].labels().begin(), initial[k].labels().end(), pop.begin() + k * n);
  }

  auto individual = [n](std::vector<int>& buf, std::size_t k) {
    return std::span<int>(buf.data() + k * n, n);
  };

  parallel_chunks(pop_size, threads, [&](std::size_t begin, std::size_t end) {
    LikelihoodEvaluator eval(c);
    for (std::size_t k = begin; k < end; ++k) fitness[k] = eval(individual(pop, k));
  });

  auto best_index = [&]() {
    std::size_t b = 0;
    for (std::size_t k = 1; k < pop_size; ++k)
      if (fitness[k] > fitness[b]) b = k;
    return b;
  };

  GAResult result;
  result.trajectory.push_back(fitness[best_index()]);
  double plateau = result.trajectory.back();
  std::size_t stalled = 0;
  std::vector<std::size_t> order(pop_size);

  for (std::size_t gen = 1; gen <= config.max_generations; ++gen) {
    // Elites: highest fitness first, lower index on ties.
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(config.elite_count),
                      order.end(), [&](std::size_t a, std::size_t b) {
                        return fitness[a] > fitness[b] || (fitness[a] == fitness[b] && a < b);
                      });
    for (std::size_t e = 0; e < config.elite_count; ++e) {
      const auto src = individual(pop, order[e]);
      std::copy(src.begin(), src.end(), individual(next, e).begin());
      next_fitness[e] = fitness[order[e]];
    }

    const std::size_t children = pop_size - config.elite_count;
    parallel_chunks(children, threads, [&](std::size_t begin, std::size_t end) {
      LikelihoodEvaluator eval(c);
      std::vector<int> scratch(2 * n + 1, 0);
      std::vector<int> aligned(n);
      AlignmentScratch overlap;
      for (std::size_t j = begin; j < end; ++j) {
        const std::size_t k = config.elite_count + j;
        auto rng = RandomStream::keyed(config.master_seed, {gen, k});
        const auto a = individual(pop, tournament(rng, fitness, config.tournament_size));
        const auto b = individual(pop, tournament(rng, fitness, config.tournament_size));
        auto child = individual(next, k);

        if (rng.bernoulli(config.crossover_probability)) {
          align_labels(a, b, aligned, overlap);
          std::uint64_t bits = 0;
          for (std::size_t i = 0; i < n; ++i) {
            if (i % 64 == 0) bits = rng();
            child[i] = (bits & 1) ? a[i] : aligned[i];
            bits >>= 1;
          }
        } else {
          std::copy(a.begin(), a.end(), child.begin());
        }
        if (rng.bernoulli(config.mutation_probability)) {
          const std::size_t gene = rng.below(n);
          child[gene] = 1 + static_cast<int>(rng.below(n));
        }
        canonicalize_in_place(child, scratch);
        next_fitness[k] = eval(child);
      }
    });

    pop.swap(next);
    fitness.swap(next_fitness);
    result.generations = gen;
    const double best = fitness[best_index()];
    result.trajectory.push_back(best);

    if (best > plateau + kStallTolerance) {
      plateau = best;
      stalled = 0;
    } else if (++stalled >= config.stall_generations) {
      result.termination = Termination::Stall;
      break;
    }
  }

  const std::size_t b = best_index();
  const auto winner = individual(pop, b);
  result.best = ClusterConfiguration(std::vector<int>(winner.begin(), winner.end()));
  result.best_fitness = fitness[b];
  return result;
}

BruteForceResult brute_force_best(const CorrelationMatrix& c) {
  const std::size_t n = c.rows();
  if (c.cols() != n) throw DimensionMismatchError("correlation must be square");
  if (n > kBruteForceLimit)
    throw RefusalError("exhaustive search refused for N = " + std::to_string(n) +
                       " (limit " + std::to_string(kBruteForceLimit) + ")");
  if (n == 0) throw Error("exhaustive search needs at least one object");

  LikelihoodEvaluator eval(c);
  // labels[i] is the restricted growth string; prefix_max[i] = max(labels[0..i]).
  std::vector<int> labels(n), prefix_max(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = prefix_max[i] = static_cast<int>(i + 1);

  BruteForceResult out;
  out.best = ClusterConfiguration(labels);
  out.log_likelihood = eval(labels);
  out.partitions_visited = 1;

  while (true) {
    // Predecessor in lexicographic order: decrement the rightmost position
    // that can go lower, then raise the suffix to its maximum.
    std::size_t i = n;
    while (i > 1 && labels[i - 1] == 1) --i;
    if (i <= 1) break;
    --i;
    --labels[i];
    prefix_max[i] = std::max(prefix_max[i - 1], labels[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      labels[j] = prefix_max[j - 1] + 1;
      prefix_max[j] = labels[j];
    }
    const double value = eval(labels);
    ++out.partitions_visited;
    if (value > out.log_likelihood) {
      out.log_likelihood = value;
      out.best = ClusterConfiguration(labels);
    }
  }
  return out;
}

nlohmann::json to_json(const GAConfig& config) {
  return {{"population_size", config.population_size},
          {"max_generations", config.max_generations},
          {"stall_generations", config.stall_generations},
          {"mutation_probability", config.mutation_probability},
          {"crossover_probability", config.crossover_probability},
          {"elite_count", config.elite_count},
          {"tournament_size", config.tournament_size},
          {"master_seed", config.master_seed}};
}

nlohmann::json to_json(const GAResult& result) {
  return {{"labels", result.best.labels()},
          {"log_likelihood", result.best_fitness},
          {"generations", result.generations},
          {"termination", termination_name(result.termination)},
          {"trajectory", result.trajectory}};
}

GAResult ga_result_from_json(const nlohmann::json& j) {
  GAResult r;
  r.best = ClusterConfiguration(j.at("labels").get<std::vector<int>>());
  r.best_fitness = j.at("log_likelihood").get<double>();
  r.generations = j.at("generations").get<std::size_t>();
  r.termination = j.at("termination").get<std::string>() == "stall"
                      ? Termination::Stall
                      : Termination::MaxGenerations;
  r.trajectory = j.at("trajectory").get<std::vector<double>>();
  return r;
}

}  // namespace mstate
