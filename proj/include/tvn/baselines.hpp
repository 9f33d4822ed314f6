#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "tvn/genome.hpp"
#include "tvn/objectives.hpp"

namespace tvn {

enum class BaselineKind { kNoAttack, kRandom, kGreedy };

std::string_view to_string(BaselineKind kind);
std::optional<BaselineKind> parse_baseline(std::string_view name);

// Random character insertion.
Suffix random_attack(const Alphabet& alphabet, int length, std::uint64_t seed);

struct GreedyResult {
  Suffix suffix;
  double f1 = 1.0;
  int iterations = 0;
  std::vector<double> f1_history;  // incumbent f1 after every iteration
};

// Coordinate descent on f1 alone. Positions are visited round-robin; each
// iteration scans the whole alphabet for one position and keeps the strict
// best. Stops after `iterations` or after a full pass without improvement.
GreedyResult greedy_attack(const ObjectiveContext& ctx, int length, int iterations,
                           std::uint64_t seed);

}  // namespace tvn
