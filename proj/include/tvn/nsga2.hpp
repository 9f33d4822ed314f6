#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "tvn/genome.hpp"
#include "tvn/objectives.hpp"
#include "tvn/random.hpp"

namespace tvn {

inline constexpr double kInfiniteCrowding = std::numeric_limits<double>::infinity();

struct Individual {
  Suffix suffix;
  ObjectiveVector objectives;
  std::optional<std::size_t> rank;  // Pareto front index, 0-based
  std::optional<double> crowding;
};

struct Nsga2Config {
  int population = 50;
  int generations = 100;
  int suffix_length = 5;
  double mutation_rate = 0.3;
  double crossover_rate = 0.9;
  int tournament_size = 2;
  std::uint64_t seed = 0;

  void validate() const;
};

// Per-generation summary handed to the trace observer.
struct GenerationTrace {
  int generation = 0;
  ObjectiveVector best;  // individual with the lowest f1 in the population
  std::vector<std::size_t> front_sizes;
  // Lowest f1 among members with f2 >= 0.95 (NaN when none qualifies).
  double best_f1_transfer_safe = 0.0;
};

using TraceObserver = std::function<void(const GenerationTrace&)>;

// Minimization dominance over any number of objectives.
bool dominates(std::span<const double> a, std::span<const double> b);
bool dominates(const ObjectiveVector& a, const ObjectiveVector& b);

// Fronts as index lists; writes rank into every individual.
std::vector<std::vector<std::size_t>> fast_nondominated_sort(std::vector<Individual>& pop);
// Same algorithm for raw objective rows (any arity).
std::vector<std::vector<std::size_t>> fast_nondominated_sort(
    std::span<const std::vector<double>> objectives);

// Distances aligned with `front`; writes crowding into the individuals.
std::vector<double> crowding_distance(std::vector<Individual>& pop,
                                      std::span<const std::size_t> front);
std::vector<double> crowding_distance(std::span<const std::vector<double>> front_objectives);

// Tournament on (rank, crowding); returns an index into pop.
std::size_t tournament_select(const std::vector<Individual>& pop, Rng& rng, int size = 2);

struct EvolveResult {
  std::vector<Individual> pareto_set;  // final front 0, deduplicated by suffix
  std::vector<Individual> population;  // final population (size N)
  int generations_run = 0;
};

// Runs the generational loop; throws PipelineError tagged with the generation
// index when evaluation fails.
EvolveResult evolve(const ObjectiveContext& ctx, const Nsga2Config& cfg,
                    const TraceObserver& observer = {});

struct SelectionThresholds {
  double tau2 = 0.9;
  double tau3 = 0.9;
  double relax_step = 0.05;
};

// Lowest f1 among members meeting the f2/f3 floors, relaxing both floors in
// relax_step decrements until a member qualifies. Ties break on the decoded
// suffix string.
const Individual& final_selection(std::span<const Individual> pareto_set, const Alphabet& alphabet,
                                  const SelectionThresholds& thresholds = {});

}  // namespace tvn
