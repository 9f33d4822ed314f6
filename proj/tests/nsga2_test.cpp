#include "tvn/nsga2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "tvn/error.hpp"
#include "tvn/simzoo.hpp"

namespace tvn {
namespace {

using Rows = std::vector<std::vector<double>>;

bool dom(const std::vector<double>& a, const std::vector<double>& b) {
  bool strict = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strict = true;
  }
  return strict;
}

// Peel fronts: front k is everything not dominated by any point left.
std::vector<std::set<std::size_t>> brute_fronts(const Rows& rows) {
  std::vector<std::set<std::size_t>> fronts;
  std::set<std::size_t> left;
  for (std::size_t i = 0; i < rows.size(); ++i) left.insert(i);
  while (!left.empty()) {
    std::set<std::size_t> f;
    for (auto i : left) {
      bool dominated = false;
      for (auto j : left) dominated = dominated || dom(rows[j], rows[i]);
      if (!dominated) f.insert(i);
    }
    for (auto i : f) left.erase(i);
    fronts.push_back(f);
  }
  return fronts;
}

std::vector<double> brute_crowding(const Rows& rows) {
  const std::size_t n = rows.size();
  std::vector<double> d(n, 0.0);
  if (n == 0) return d;
  for (std::size_t m = 0; m < rows[0].size(); ++m) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(),
                     [&](auto a, auto b) { return rows[a][m] < rows[b][m]; });
    const double range = rows[idx.back()][m] - rows[idx.front()][m];
    d[idx.front()] = d[idx.back()] = std::numeric_limits<double>::infinity();
    if (range == 0.0) continue;
    for (std::size_t k = 1; k + 1 < n; ++k) {
      d[idx[k]] += (rows[idx[k + 1]][m] - rows[idx[k - 1]][m]) / range;
    }
  }
  return d;
}

Rows random_rows(Rng& rng, std::size_t n, std::size_t m, bool discrete) {
  Rows rows(n, std::vector<double>(m));
  for (auto& r : rows) {
    for (auto& x : r) x = discrete ? static_cast<double>(rng.uniform_index(4)) : rng.uniform01();
  }
  return rows;
}

TEST(DominatesTest, Definition) {
  const std::vector<double> a{1, 1, 1}, b{2, 2, 2}, c{1, 2, 3}, d{1, 3, 1};
  EXPECT_TRUE(dominates(a, b));
  EXPECT_FALSE(dominates(b, a));
  EXPECT_FALSE(dominates(c, c));
  EXPECT_FALSE(dominates(d, b));
  EXPECT_FALSE(dominates(b, d));
}

TEST(SortTest, SingleIndividual) {
  const Rows rows{{0.5, 0.5, 0.5}};
  const auto f = fast_nondominated_sort(rows);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f[0], (std::vector<std::size_t>{0}));
}

TEST(SortTest, TwoObjectiveExample) {
  const Rows rows{{1, 1}, {2, 2}, {1.5, 0.5}};
  const auto f = fast_nondominated_sort(rows);
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(std::set<std::size_t>(f[0].begin(), f[0].end()), (std::set<std::size_t>{0, 2}));
  EXPECT_EQ(f[1], (std::vector<std::size_t>{1}));
}

TEST(SortTest, MatchesBruteForceOracle) {
  Rng rng(2024);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 1 + rng.uniform_index(64);
    const Rows rows = random_rows(rng, n, 3, t % 2 == 0);
    const auto got = fast_nondominated_sort(rows);
    const auto want = brute_fronts(rows);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t k = 0; k < got.size(); ++k) {
      EXPECT_EQ(std::set<std::size_t>(got[k].begin(), got[k].end()), want[k]);
    }
  }
}

TEST(SortTest, WritesRanksIntoPopulation) {
  std::vector<Individual> pop(3);
  pop[0].objectives = {1, 1, 1};
  pop[1].objectives = {2, 2, 2};
  pop[2].objectives = {0, 3, 1};
  fast_nondominated_sort(pop);
  EXPECT_EQ(pop[0].rank, 0u);
  EXPECT_EQ(pop[1].rank, 1u);
  EXPECT_EQ(pop[2].rank, 0u);
}

TEST(CrowdingTest, SmallFrontsAreAllBoundary) {
  for (const Rows& rows : {Rows{{1, 2, 3}}, Rows{{1, 2, 3}, {3, 2, 1}}}) {
    for (double d : crowding_distance(rows)) EXPECT_EQ(d, kInfiniteCrowding);
  }
}

TEST(CrowdingTest, OneObjectiveAnalytic) {
  const auto d = crowding_distance(Rows{{0}, {5}, {10}});
  EXPECT_EQ(d[0], kInfiniteCrowding);
  EXPECT_DOUBLE_EQ(d[1], 1.0);
  EXPECT_EQ(d[2], kInfiniteCrowding);
}

TEST(CrowdingTest, ZeroRangeObjectiveContributesNothing) {
  const auto d = crowding_distance(Rows{{0, 7}, {1, 7}, {3, 7}, {4, 7}});
  EXPECT_NEAR(d[1], 3.0 / 4.0, 1e-15);
  EXPECT_NEAR(d[2], 3.0 / 4.0, 1e-15);
}

TEST(CrowdingTest, MatchesDirectRecomputation) {
  Rng rng(77);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 1 + rng.uniform_index(32);
    const Rows rows = random_rows(rng, n, 3, false);
    const auto got = crowding_distance(rows);
    const auto want = brute_crowding(rows);
    for (std::size_t i = 0; i < n; ++i) {
      if (std::isinf(want[i])) {
        EXPECT_TRUE(std::isinf(got[i]));
      } else {
        EXPECT_NEAR(got[i], want[i], 1e-9);
      }
    }
  }
}

std::vector<Individual> pair(std::size_t r0, double c0, std::size_t r1, double c1) {
  std::vector<Individual> pop(2);
  pop[0].rank = r0;
  pop[0].crowding = c0;
  pop[1].rank = r1;
  pop[1].crowding = c1;
  return pop;
}

TEST(TournamentTest, LowerRankAlwaysWins) {
  const auto pop = pair(0, 0.0, 3, kInfiniteCrowding);
  Rng rng(1);
  // Binary tournament over a pool of two: the pair drawn may be (i, i); count
  // only contested draws by checking the rank-3 individual never beats rank 0
  // when both meet, i.e. it wins at most its self-pairings (~25%).
  int rank3 = 0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) rank3 += tournament_select(pop, rng) == 1;
  EXPECT_NEAR(rank3, n * 0.25, testing::binom3(n, 0.25));
}

TEST(TournamentTest, HigherCrowdingWinsOnTies) {
  const auto pop = pair(1, kInfiniteCrowding, 1, 0.2);
  Rng rng(2);
  int low = 0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) low += tournament_select(pop, rng) == 1;
  EXPECT_NEAR(low, n * 0.25, testing::binom3(n, 0.25));
}

TEST(TournamentTest, FullTiesAreFair) {
  const auto pop = pair(0, 0.5, 0, 0.5);
  Rng rng(3);
  const int n = 10000;
  int first = 0;
  for (int i = 0; i < n; ++i) first += tournament_select(pop, rng) == 0;
  EXPECT_NEAR(first, n * 0.5, testing::binom3(n, 0.5));
}

struct Fixture {
  Zoo zoo = build_default_zoo(0);
  ObjectiveContext ctx = make();
  ObjectiveContext make() const {
    std::vector<EncoderPtr> subs;
    for (const auto& id : zoo.closed_ids()) {
      if (id != "sd-v1.4") subs.push_back(zoo.encoder(id));
    }
    return ObjectiveContext("A photo of a cat.", zoo.encoder("sd-v1.4"), subs,
                            zoo.reference_encoder());
  }
};

TEST(EvolveTest, ZeroGenerationsReturnsInitialFront) {
  const Fixture fx;
  Nsga2Config cfg;
  cfg.generations = 0;
  cfg.seed = 5;
  const auto res = evolve(fx.ctx, cfg);
  EXPECT_EQ(res.generations_run, 0);
  ASSERT_EQ(res.population.size(), 50u);
  Rows rows;
  for (const auto& ind : res.population) {
    rows.push_back({ind.objectives.g1, ind.objectives.g2, ind.objectives.g3});
  }
  const auto want = brute_fronts(rows);
  std::set<Suffix> front0;
  for (auto i : want[0]) front0.insert(res.population[i].suffix);
  std::set<Suffix> got;
  for (const auto& ind : res.pareto_set) got.insert(ind.suffix);
  EXPECT_EQ(got, front0);
}

TEST(EvolveTest, DeterministicAndBeatsRandomSearch) {
  const Fixture fx;
  Nsga2Config cfg;
  cfg.seed = 1;
  std::vector<GenerationTrace> trace;
  const auto a = evolve(fx.ctx, cfg, [&](const GenerationTrace& t) { trace.push_back(t); });
  const auto b = evolve(fx.ctx, cfg);
  ASSERT_EQ(a.pareto_set.size(), b.pareto_set.size());
  for (std::size_t i = 0; i < a.pareto_set.size(); ++i) {
    EXPECT_EQ(a.pareto_set[i].suffix, b.pareto_set[i].suffix);
    EXPECT_EQ(a.pareto_set[i].objectives, b.pareto_set[i].objectives);
  }
  EXPECT_EQ(a.generations_run, 100);
  ASSERT_EQ(trace.size(), 101u);
  // Random-search floor from objectives_test (0.494623).
  double best = 1.0;
  for (const auto& ind : a.pareto_set) best = std::min(best, ind.objectives.f1());
  EXPECT_LE(best, 0.494623);
  // Pareto members are mutually non-dominated and unique.
  std::set<Suffix> seen;
  for (const auto& x : a.pareto_set) {
    EXPECT_TRUE(seen.insert(x.suffix).second);
    for (const auto& y : a.pareto_set) EXPECT_FALSE(dominates(y.objectives, x.objectives));
  }
}

TEST(EvolveTest, TransferSafeBestIsNonIncreasing) {
  // With f2 = 1 for the unperturbed prompt, the floor 0.95 * f2(no attack) is 0.95.
  const Fixture fx;
  Nsga2Config cfg;
  cfg.seed = 3;
  std::vector<double> safe;
  std::vector<double> best;
  evolve(fx.ctx, cfg, [&](const GenerationTrace& t) {
    safe.push_back(t.best_f1_transfer_safe);
    best.push_back(t.best.f1());
  });
  double so_far = std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < safe.size(); ++g) {
    if (std::isnan(safe[g])) continue;
    EXPECT_LE(safe[g], so_far + 1e-15) << "generation " << g;
    so_far = std::min(so_far, safe[g]);
  }
  for (std::size_t g = 1; g < best.size(); ++g) EXPECT_LE(best[g], best[g - 1]);
}

TEST(EvolveTest, RejectsBadConfig) {
  const Fixture fx;
  Nsga2Config cfg;
  cfg.population = 3;
  EXPECT_THROW(evolve(fx.ctx, cfg), ConfigError);
  cfg.population = 50;
  cfg.generations = -1;
  EXPECT_THROW(evolve(fx.ctx, cfg), ConfigError);
}

TEST(FinalSelectionTest, Singleton) {
  std::vector<Individual> set(1);
  set[0].suffix = encode_suffix("abcde", Alphabet::alphanumeric());
  set[0].objectives = {0.9, -0.1, -0.1};
  EXPECT_EQ(final_selection(set, Alphabet::alphanumeric()).suffix, set[0].suffix);
}

TEST(FinalSelectionTest, FilterThenArgmin) {
  std::vector<Individual> set(2);
  set[0].suffix = encode_suffix("aaaaa", Alphabet::alphanumeric());
  set[0].objectives = {0.2, -0.95, -0.95};
  set[1].suffix = encode_suffix("bbbbb", Alphabet::alphanumeric());
  set[1].objectives = {0.1, -0.5, -0.5};
  EXPECT_EQ(final_selection(set, Alphabet::alphanumeric()).suffix, set[0].suffix);
}

TEST(FinalSelectionTest, RelaxesWhenNobodyQualifies) {
  std::vector<Individual> set(2);
  set[0].suffix = encode_suffix("aaaaa", Alphabet::alphanumeric());
  set[0].objectives = {0.2, -0.8, -0.8};
  set[1].suffix = encode_suffix("bbbbb", Alphabet::alphanumeric());
  set[1].objectives = {0.1, -0.6, -0.6};
  EXPECT_EQ(final_selection(set, Alphabet::alphanumeric()).suffix, set[0].suffix);
}

TEST(FinalSelectionTest, TiesBreakOnDecodedSuffix) {
  std::vector<Individual> set(2);
  set[0].suffix = encode_suffix("zzzzz", Alphabet::alphanumeric());
  set[1].suffix = encode_suffix("AAAAA", Alphabet::alphanumeric());
  set[0].objectives = set[1].objectives = {0.3, -0.95, -0.95};
  EXPECT_EQ(final_selection(set, Alphabet::alphanumeric()).suffix, set[1].suffix);
}

}  // namespace
}  // namespace tvn
