#include "tvn/baselines.hpp"

#include "tvn/error.hpp"

namespace tvn {

std::string_view to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kNoAttack:
      return "no_attack";
    case BaselineKind::kRandom:
      return "random";
    case BaselineKind::kGreedy:
      return "greedy";
  }
  return "unknown";
}

std::optional<BaselineKind> parse_baseline(std::string_view name) {
  for (auto k : {BaselineKind::kNoAttack, BaselineKind::kRandom, BaselineKind::kGreedy}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

Suffix random_attack(const Alphabet& alphabet, int length, std::uint64_t seed) {
  return random_suffix(seed, alphabet, length);
}

GreedyResult greedy_attack(const ObjectiveContext& ctx, int length, int iterations,
                           std::uint64_t seed) {
  if (iterations < 1) throw ConfigError("greedy search needs at least one iteration");
  const Alphabet& alphabet = ctx.alphabet();
  GreedyResult r;
  r.suffix = random_suffix(seed, alphabet, length);
  r.f1 = eval_f1(ctx, r.suffix);
  if (length == 0) return r;

  std::vector<Suffix> scan(alphabet.size());
  int idle = 0;
  for (int it = 0; it < iterations && idle < length; ++it) {
    const auto pos = static_cast<std::size_t>(it % length);
    for (std::size_t c = 0; c < alphabet.size(); ++c) {
      scan[c] = r.suffix;
      scan[c].genes[pos] = static_cast<std::uint16_t>(c);
    }
    const auto values = eval_f1_batch(ctx, scan);
    std::size_t best = alphabet.size();
    double best_f1 = r.f1;
    for (std::size_t c = 0; c < values.size(); ++c) {
      if (values[c] < best_f1) {
        best_f1 = values[c];
        best = c;
      }
    }
    if (best != alphabet.size()) {
      r.suffix.genes[pos] = static_cast<std::uint16_t>(best);
      r.f1 = best_f1;
      idle = 0;
    } else {
      ++idle;
    }
    r.f1_history.push_back(r.f1);
    r.iterations = it + 1;
  }
  return r;
}

}  // namespace tvn
