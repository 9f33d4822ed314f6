#include "tvn/verify.hpp"

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "tvn/error.hpp"
#include "tvn/pipeline.hpp"

namespace tvn {
namespace {

TEST(ThresholdTest, ReferenceRows) {
  const double rows[][3] = {
      {20.20, 1.4, 24.40}, {19.32, 0.8, 21.72}, {18.44, 2.5, 25.94}, {22.64, 1.3, 26.54}};
  for (const auto& r : rows) {
    const ThresholdBand b = ThresholdBand::from(r[0], r[1]);
    EXPECT_NEAR(b.high, r[2], 1e-6);
    EXPECT_NEAR(b.low, r[0] - 3 * r[1], 1e-12);
    EXPECT_TRUE(b.consistent());
  }
}

TEST(ThresholdTest, FitUsesUnbiasedSd) {
  const std::vector<double> s{1, 2, 3, 4};
  const ThresholdBand b = fit_threshold(s);
  EXPECT_DOUBLE_EQ(b.mu, 2.5);
  EXPECT_NEAR(b.sigma, std::sqrt(5.0 / 3.0), 1e-15);
}

TEST(ThresholdTest, ConstantScoresGiveZeroWidth) {
  const std::vector<double> s{5, 5, 5};
  const ThresholdBand b = fit_threshold(s);
  EXPECT_EQ(b.sigma, 0.0);
  EXPECT_EQ(b.low, 5.0);
  EXPECT_EQ(b.high, 5.0);
  EXPECT_TRUE(b.contains(5.0));
}

TEST(ThresholdTest, NeedsTwoScores) {
  const std::vector<double> one{1.0};
  EXPECT_THROW(fit_threshold(one), ConfigError);
  EXPECT_THROW(fit_threshold(std::vector<double>{}), ConfigError);
}

TEST(DecideTest, ReferenceDecisions) {
  const double rows[][3] = {{20.20, 1.4, 21.10}, {19.32, 0.8, 18.91}, {18.44, 2.5, 19.38},
                            {22.64, 1.3, 23.40}};
  for (const auto& r : rows) {
    const std::vector<double> s{r[2]};
    EXPECT_TRUE(decide(ThresholdBand::from(r[0], r[1]), s, 1).verdict);
  }
  const std::vector<double> five{19.12, 19.12, 19.12, 19.12, 19.12};
  EXPECT_TRUE(decide(ThresholdBand::from(19.32, 0.8), five, 5).verdict);
}

TEST(DecideTest, ClosedBoundaryAndOutside) {
  const ThresholdBand b = ThresholdBand::from(20.0, 1.0);
  EXPECT_TRUE(decide(b, std::vector<double>{b.high}, 1).verdict);
  EXPECT_TRUE(decide(b, std::vector<double>{b.low}, 1).verdict);
  EXPECT_FALSE(decide(b, std::vector<double>{std::nextafter(b.high, 100.0)}, 1).verdict);
  EXPECT_FALSE(decide(b, std::vector<double>{30.0}, 1).verdict);
}

TEST(DecideTest, ShotMismatchThrows) {
  const ThresholdBand b = ThresholdBand::from(20.0, 1.0);
  EXPECT_THROW(decide(b, std::vector<double>{1, 2}, 1), ConfigError);
}

TEST(MetricsTest, ReferenceRow) {
  const MetricsReport m = metrics_from_counts(98, 2, 100, 0);
  EXPECT_DOUBLE_EQ(m.accuracy, 99.0);
  EXPECT_DOUBLE_EQ(m.precision, 98.0);
  EXPECT_DOUBLE_EQ(m.recall, 100.0);
  EXPECT_NEAR(m.f1_score, 2.0 * 98.0 * 100.0 / 198.0, 1e-12);
  EXPECT_DOUBLE_EQ(truncate2(m.f1_score), 98.98);
  EXPECT_EQ(m.trials(), 200);
}

TEST(MetricsTest, ZeroDenominators) {
  const MetricsReport m = metrics_from_counts(0, 0, 10, 10);
  EXPECT_EQ(m.precision, 0.0);
  EXPECT_EQ(m.recall, 0.0);
  EXPECT_EQ(m.f1_score, 0.0);
  EXPECT_DOUBLE_EQ(m.accuracy, 50.0);
  EXPECT_THROW(metrics_from_counts(-1, 0, 0, 0), ConfigError);
}

TEST(Truncate2Test, Convention) {
  EXPECT_DOUBLE_EQ(truncate2(98.98989898), 98.98);
  EXPECT_DOUBLE_EQ(truncate2(95.979), 95.97);
  EXPECT_DOUBLE_EQ(truncate2(99.0), 99.0);
  EXPECT_DOUBLE_EQ(truncate2(100.0), 100.0);
}

struct Crafted {
  Zoo zoo = build_default_zoo(0);
  PromptArtifact prompt = [this] {
    RunConfig cfg;
    cfg.prompts = {"A photo of a cat."};
    return craft(cfg, zoo);
  }();
  std::string adv = prompt.adversarial_prompt();
  std::string base = prompt.best_prompt().base;
};

const Crafted& crafted() {
  static const Crafted c;
  return c;
}

TEST(VerifyCoverageTest, TrueBandCoversAtThreeSigma) {
  const auto& c = crafted();
  SimModel quiet = c.zoo.model("sd-v1.4");
  const double sigma = quiet.noise_sigma;
  quiet.noise_sigma = 0.0;
  Rng unused(0);
  const double mu = SimT2IModel(quiet, c.zoo.reference_encoder(), c.zoo.score).score(c.adv, c.base, unused);
  const ThresholdBand band = ThresholdBand::from(mu, sigma);
  const auto target = c.zoo.t2i("sd-v1.4");
  const int n = 1000;
  int accepted = 0;
  for (int i = 0; i < n; ++i) {
    Rng rng(derive_seed(1, {static_cast<std::uint64_t>(i)}));
    accepted += decide(band, sample_scores(*target, c.adv, c.base, 1, rng), 1).verdict;
  }
  const double p = 0.9973;
  EXPECT_GE(accepted, n * p - testing::binom3(n, p));
}

TEST(VerifyCoverageTest, FittedBandsRejectImpostorsAndFiveShotIsSteadier) {
  const auto& c = crafted();
  const auto target = c.zoo.t2i("sd-v1.4");
  const int n = 500;
  int true1 = 0, true5 = 0, impostor = 0, impostor_trials = 0;
  for (int i = 0; i < n; ++i) {
    const auto si = static_cast<std::uint64_t>(i);
    Rng fit_rng(derive_seed(2, {si}));
    const ThresholdBand band = fit_threshold(sample_scores(*target, c.adv, c.base, 10, fit_rng));
    Rng r1(derive_seed(3, {si})), r5(derive_seed(4, {si}));
    true1 += decide(band, sample_scores(*target, c.adv, c.base, 1, r1), 1).verdict;
    true5 += decide(band, sample_scores(*target, c.adv, c.base, 5, r5), 5).verdict;
    for (const auto& id : c.zoo.closed_ids()) {
      if (id == "sd-v1.4") continue;
      Rng ri(derive_seed(5, {si, hash_tag(id)}));
      impostor += decide(band, sample_scores(*c.zoo.t2i(id), c.adv, c.base, 1, ri), 1).verdict;
      ++impostor_trials;
    }
  }
  // A 10-sample fitted band is a prediction interval with Student-t tails, so
  // 1-shot coverage sits a little under 99.73%.
  EXPECT_GE(true1, 0.95 * n);
  EXPECT_GE(true5, true1);
  EXPECT_LE(impostor, 0.01 * impostor_trials);
}

TEST(EvaluateTest, NoiselessZooIsPerfect) {
  const Zoo zoo = testing::noiseless_zoo(0);
  RunConfig cfg;
  cfg.prompts = {"A photo of a cat."};
  cfg.target = "sd-v1.4";
  const PromptArtifact pa = craft(cfg, zoo);
  const auto target = zoo.t2i("sd-v1.4");
  const BandArtifact band = fit(pa, cfg, *target);
  EXPECT_EQ(band.band.sigma, 0.0);
  std::vector<T2IModelPtr> negs;
  for (const auto& id : zoo.closed_ids()) {
    if (id != "sd-v1.4") negs.push_back(zoo.t2i(id));
  }
  for (int k : {1, 5}) {
    const auto m = evaluate(*target, negs, band.prompt, band.clean_text, band.band, 200, k, Rng(9));
    EXPECT_EQ(m.accuracy, 100.0) << k;
    EXPECT_EQ(m.trials(), 200);
  }
}

TEST(EvaluateTest, UnboundedBandAcceptsEveryone) {
  const Zoo zoo = build_default_zoo(0);
  const ThresholdBand all = ThresholdBand::from(0.0, 1e300);
  std::vector<T2IModelPtr> negs{zoo.t2i("sd-v2.1")};
  const auto m = evaluate(*zoo.t2i("sd-v1.4"), negs, "A cat z", "A cat", all, 200, 1, Rng(1));
  EXPECT_DOUBLE_EQ(m.recall, 100.0);
  EXPECT_DOUBLE_EQ(m.precision, 50.0);
}

TEST(EvaluateTest, BalancedAndOrderIndependent) {
  const Zoo zoo = build_default_zoo(0);
  const ThresholdBand b = ThresholdBand::from(30.0, 2.0);
  std::vector<T2IModelPtr> negs{zoo.t2i("sd-v2.1"), zoo.t2i("openjourney")};
  const auto m = evaluate(*zoo.t2i("sd-v1.4"), negs, "A cat.", "A cat.", b, 101, 1, Rng(4));
  EXPECT_EQ(m.tp + m.fn, 51);
  EXPECT_EQ(m.tn + m.fp, 50);
  EXPECT_EQ(m, evaluate(*zoo.t2i("sd-v1.4"), negs, "A cat.", "A cat.", b, 101, 1, Rng(4)));
  EXPECT_THROW(evaluate(*zoo.t2i("sd-v1.4"), negs, "A", "A", b, 0, 1, Rng(4)), ConfigError);
  EXPECT_THROW(evaluate(*zoo.t2i("sd-v1.4"), negs, "A", "A", b, 10, 0, Rng(4)), ConfigError);
}

TEST(SelectFinalPromptTest, FilterPrecedesArgmax) {
  // On a noiseless zoo, take the candidate with the lowest target score and
  // one with a milder score but higher f2, then put the floor between their
  // f2 values: the milder one must win.
  const Zoo zoo = testing::noiseless_zoo(0);
  const ObjectiveContext ctx("A photo of a cat.", zoo.encoder("sd-v1.4"),
                             {zoo.encoder("sd-v2.1")}, zoo.reference_encoder());
  const Alphabet& a = Alphabet::alphanumeric();
  const auto target = zoo.t2i("sd-v1.4");
  Rng rng(1);
  std::vector<Suffix> cands;
  for (int i = 0; i < 300; ++i) cands.push_back(random_suffix(rng, a, 5));
  const auto obj = eval_batch(ctx, cands);
  std::vector<double> score;
  for (const auto& c : cands) score.push_back(target->score(compose(ctx.base_prompt(), c, a), ctx.base_prompt(), rng));
  std::size_t big = 0;
  for (std::size_t i = 1; i < cands.size(); ++i) {
    if (score[i] < score[big]) big = i;
  }
  std::size_t keep = cands.size();
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (obj[i].f2() > obj[big].f2() + 1e-3 && score[i] > score[big] + 1.0) {
      if (keep == cands.size() || obj[i].f2() > obj[keep].f2()) keep = i;
    }
  }
  ASSERT_LT(keep, cands.size());
  PromptSelectionOptions opt;
  opt.pool_size = 2;
  opt.f2_floor = (obj[big].f2() + obj[keep].f2()) / 2.0;
  opt.min_floor = opt.f2_floor;
  Rng sel(3);
  const std::vector<Suffix> pareto{cands[big], cands[keep]};
  const SelectedPrompt s = select_final_prompt(*target, ctx, pareto, opt, sel);
  EXPECT_EQ(s.prompt.suffix, cands[keep]);
  EXPECT_EQ(s.survivors, 1u);
  EXPECT_EQ(s.pool_size, 2u);
  // Without the filter the big-drop candidate wins.
  opt.f2_floor = opt.min_floor = -1.0;
  Rng sel2(3);
  EXPECT_EQ(select_final_prompt(*target, ctx, pareto, opt, sel2).prompt.suffix, cands[big]);
}

TEST(SelectFinalPromptTest, SingleCandidateAndErrors) {
  const Zoo zoo = build_default_zoo(0);
  const ObjectiveContext ctx("A photo of a cat.", zoo.encoder("sd-v1.4"),
                             {zoo.encoder("sd-v2.1")}, zoo.reference_encoder());
  const Suffix only = encode_suffix("Ab3", Alphabet::alphanumeric());
  PromptSelectionOptions opt;
  opt.pool_size = 1;
  Rng rng(1);
  const std::vector<Suffix> one{only};
  EXPECT_EQ(select_final_prompt(*zoo.t2i("sd-v1.4"), ctx, one, opt, rng).prompt.suffix, only);
  EXPECT_THROW(select_final_prompt(*zoo.t2i("sd-v1.4"), ctx, std::vector<Suffix>{}, opt, rng),
               PipelineError);
}

}  // namespace
}  // namespace tvn
