#include "tvn/nsga2.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "tvn/error.hpp"

namespace tvn {

namespace {

std::vector<double> as_row(const ObjectiveVector& v) { return {v.g1, v.g2, v.g3}; }

std::vector<std::vector<double>> rows_of(const std::vector<Individual>& pop) {
  std::vector<std::vector<double>> rows;
  rows.reserve(pop.size());
  for (const auto& ind : pop) rows.push_back(as_row(ind.objectives));
  return rows;
}

// Tournament order: positive when a wins, negative when b wins, 0 on a tie.
int compare_fitness(const Individual& a, const Individual& b) {
  const auto ra = a.rank.value_or(SIZE_MAX);
  const auto rb = b.rank.value_or(SIZE_MAX);
  if (ra != rb) return ra < rb ? 1 : -1;
  const double ca = a.crowding.value_or(0.0);
  const double cb = b.crowding.value_or(0.0);
  if (ca != cb) return ca > cb ? 1 : -1;
  return 0;
}

void rank_and_crowd(std::vector<Individual>& pop,
                    std::vector<std::vector<std::size_t>>* fronts_out = nullptr) {
  auto fronts = fast_nondominated_sort(pop);
  for (const auto& f : fronts) crowding_distance(pop, f);
  if (fronts_out) *fronts_out = std::move(fronts);
}

// Re-raises an evaluation failure with the generation index attached, keeping
// the error class.
[[noreturn]] void rethrow_with_generation(int generation) {
  const std::string where = "generation " + std::to_string(generation) + ": ";
  try {
    throw;
  } catch (const TransportError& e) {
    throw TransportError(where + e.what());
  } catch (const ProtocolError& e) {
    throw ProtocolError(where + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(where + e.what());
  } catch (const std::exception& e) {
    throw PipelineError(where + e.what());
  }
}

void evaluate_into(const ObjectiveContext& ctx, std::vector<Individual>& inds, int generation) {
  std::vector<Suffix> suffixes;
  suffixes.reserve(inds.size());
  for (const auto& ind : inds) suffixes.push_back(ind.suffix);
  std::vector<ObjectiveVector> values;
  try {
    values = eval_batch(ctx, suffixes);
  } catch (...) {
    rethrow_with_generation(generation);
  }
  for (std::size_t i = 0; i < inds.size(); ++i) inds[i].objectives = values[i];
}

GenerationTrace summarize(int generation, const std::vector<Individual>& pop,
                          const std::vector<std::vector<std::size_t>>& fronts) {
  GenerationTrace t;
  t.generation = generation;
  t.best_f1_transfer_safe = std::nan("");
  const Individual* best = nullptr;
  for (const auto& ind : pop) {
    if (!best || ind.objectives.g1 < best->objectives.g1) best = &ind;
    if (ind.objectives.f2() >= 0.95 &&
        (std::isnan(t.best_f1_transfer_safe) || ind.objectives.g1 < t.best_f1_transfer_safe)) {
      t.best_f1_transfer_safe = ind.objectives.g1;
    }
  }
  if (best) t.best = best->objectives;
  for (const auto& f : fronts) t.front_sizes.push_back(f.size());
  return t;
}

}  // namespace

void Nsga2Config::validate() const {
  if (population < 2 || population % 2 != 0) {
    throw ConfigError("population must be even and >= 2");
  }
  if (generations < 0) throw ConfigError("generations must be >= 0");
  if (suffix_length < 0) throw ConfigError("suffix length must be >= 0");
  if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0)) {
    throw ConfigError("mutation rate must lie in [0, 1]");
  }
  if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) {
    throw ConfigError("crossover rate must lie in [0, 1]");
  }
  if (tournament_size < 1) throw ConfigError("tournament size must be >= 1");
}

bool dominates(std::span<const double> a, std::span<const double> b) {
  bool strict = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strict = true;
  }
  return strict;
}

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
  const double ra[] = {a.g1, a.g2, a.g3};
  const double rb[] = {b.g1, b.g2, b.g3};
  return dominates(std::span<const double>(ra), std::span<const double>(rb));
}

std::vector<std::vector<std::size_t>> fast_nondominated_sort(
    std::span<const std::vector<double>> objectives) {
  const std::size_t n = objectives.size();
  std::vector<std::vector<std::size_t>> dominated(n);
  std::vector<std::size_t> domination_count(n, 0);
  std::vector<std::vector<std::size_t>> fronts;
  std::vector<std::size_t> current;
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = 0; q < n; ++q) {
      if (p == q) continue;
      if (dominates(objectives[p], objectives[q])) {
        dominated[p].push_back(q);
      } else if (dominates(objectives[q], objectives[p])) {
        ++domination_count[p];
      }
    }
    if (domination_count[p] == 0) current.push_back(p);
  }
  while (!current.empty()) {
    std::vector<std::size_t> next;
    for (auto p : current) {
      for (auto q : dominated[p]) {
        if (--domination_count[q] == 0) next.push_back(q);
      }
    }
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(current));
    current = std::move(next);
  }
  return fronts;
}

std::vector<std::vector<std::size_t>> fast_nondominated_sort(std::vector<Individual>& pop) {
  const auto rows = rows_of(pop);
  auto fronts = fast_nondominated_sort(std::span<const std::vector<double>>(rows));
  for (std::size_t r = 0; r < fronts.size(); ++r) {
    for (auto i : fronts[r]) pop[i].rank = r;
  }
  return fronts;
}

std::vector<double> crowding_distance(std::span<const std::vector<double>> front_objectives) {
  const std::size_t n = front_objectives.size();
  std::vector<double> dist(n, 0.0);
  if (n == 0) return dist;
  if (n <= 2) {
    std::fill(dist.begin(), dist.end(), kInfiniteCrowding);
    return dist;
  }
  const std::size_t m = front_objectives.front().size();
  std::vector<std::size_t> order(n);
  for (std::size_t k = 0; k < m; ++k) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return front_objectives[a][k] < front_objectives[b][k];
    });
    const double lo = front_objectives[order.front()][k];
    const double hi = front_objectives[order.back()][k];
    dist[order.front()] = kInfiniteCrowding;
    dist[order.back()] = kInfiniteCrowding;
    if (!(hi > lo)) continue;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (std::isinf(dist[order[i]])) continue;
      dist[order[i]] +=
          (front_objectives[order[i + 1]][k] - front_objectives[order[i - 1]][k]) / (hi - lo);
    }
  }
  return dist;
}

std::vector<double> crowding_distance(std::vector<Individual>& pop,
                                      std::span<const std::size_t> front) {
  std::vector<std::vector<double>> rows;
  rows.reserve(front.size());
  for (auto i : front) rows.push_back(as_row(pop[i].objectives));
  auto dist = crowding_distance(std::span<const std::vector<double>>(rows));
  for (std::size_t j = 0; j < front.size(); ++j) pop[front[j]].crowding = dist[j];
  return dist;
}

std::size_t tournament_select(const std::vector<Individual>& pop, Rng& rng, int size) {
  if (pop.empty()) throw ConfigError("tournament on an empty population");
  std::vector<std::size_t> tied;
  tied.push_back(rng.uniform_index(pop.size()));
  for (int k = 1; k < size; ++k) {
    const auto c = rng.uniform_index(pop.size());
    const int cmp = compare_fitness(pop[c], pop[tied.front()]);
    if (cmp > 0) {
      tied.assign(1, c);
    } else if (cmp == 0) {
      tied.push_back(c);
    }
  }
  if (tied.size() == 1) return tied.front();
  return tied[rng.uniform_index(tied.size())];
}

EvolveResult evolve(const ObjectiveContext& ctx, const Nsga2Config& cfg,
                    const TraceObserver& observer) {
  cfg.validate();
  const Rng root(cfg.seed);
  const auto n = static_cast<std::size_t>(cfg.population);
  const Alphabet& alphabet = ctx.alphabet();

  std::vector<Individual> pop(n);
  {
    Rng init = root.substream(hash_tag("init"));
    for (auto& ind : pop) ind.suffix = random_suffix(init, alphabet, cfg.suffix_length);
  }
  evaluate_into(ctx, pop, 0);
  std::vector<std::vector<std::size_t>> fronts;
  rank_and_crowd(pop, &fronts);
  if (observer) observer(summarize(0, pop, fronts));

  for (int g = 1; g <= cfg.generations; ++g) {
    // All variation randomness is drawn before evaluation fans out.
    Rng rng = root.substream(static_cast<std::uint64_t>(g));
    std::vector<Individual> offspring;
    offspring.reserve(n);
    while (offspring.size() < n) {
      const auto& a = pop[tournament_select(pop, rng, cfg.tournament_size)].suffix;
      const auto& b = pop[tournament_select(pop, rng, cfg.tournament_size)].suffix;
      auto children = rng.bernoulli(cfg.crossover_rate) ? crossover(a, b, rng)
                                                        : std::pair<Suffix, Suffix>{a, b};
      offspring.push_back({mutate(children.first, cfg.mutation_rate, alphabet, rng), {}, {}, {}});
      offspring.push_back({mutate(children.second, cfg.mutation_rate, alphabet, rng), {}, {}, {}});
    }
    evaluate_into(ctx, offspring, g);

    std::vector<Individual> merged = std::move(pop);
    merged.insert(merged.end(), std::make_move_iterator(offspring.begin()),
                  std::make_move_iterator(offspring.end()));
    rank_and_crowd(merged, &fronts);

    std::vector<Individual> next;
    next.reserve(n);
    for (auto& front : fronts) {
      if (next.size() + front.size() <= n) {
        for (auto i : front) next.push_back(merged[i]);
        continue;
      }
      std::vector<std::size_t> by_crowding(front.begin(), front.end());
      std::stable_sort(by_crowding.begin(), by_crowding.end(), [&](std::size_t a, std::size_t b) {
        return merged[a].crowding.value_or(0.0) > merged[b].crowding.value_or(0.0);
      });
      for (auto i : by_crowding) {
        if (next.size() == n) break;
        next.push_back(merged[i]);
      }
      break;
    }
    pop = std::move(next);
    for (auto& ind : pop) {
      ind.rank.reset();
      ind.crowding.reset();
    }
    rank_and_crowd(pop, &fronts);
    if (observer) observer(summarize(g, pop, fronts));
  }

  EvolveResult result;
  result.generations_run = cfg.generations;
  std::set<Suffix> seen;
  for (auto i : fronts.front()) {
    if (seen.insert(pop[i].suffix).second) result.pareto_set.push_back(pop[i]);
  }
  result.population = std::move(pop);
  return result;
}

const Individual& final_selection(std::span<const Individual> pareto_set, const Alphabet& alphabet,
                                  const SelectionThresholds& thresholds) {
  if (pareto_set.empty()) throw PipelineError("final selection on an empty Pareto set");
  if (!(thresholds.relax_step > 0.0)) throw ConfigError("relax_step must be positive");
  for (int k = 0;; ++k) {
    const double t2 = thresholds.tau2 - k * thresholds.relax_step;
    const double t3 = thresholds.tau3 - k * thresholds.relax_step;
    const Individual* best = nullptr;
    std::string best_text;
    for (const auto& ind : pareto_set) {
      if (ind.objectives.f2() < t2 || ind.objectives.f3() < t3) continue;
      std::string text = decode(ind.suffix, alphabet);
      if (!best || ind.objectives.g1 < best->objectives.g1 ||
          (ind.objectives.g1 == best->objectives.g1 && text < best_text)) {
        best = &ind;
        best_text = std::move(text);
      }
    }
    if (best) return *best;
    // Cosines are >= -1, so floors below that admit every member.
    if (t2 < -1.0 && t3 < -1.0) break;
  }
  return pareto_set.front();
}

}  // namespace tvn
