#include "tvn/verify.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "tvn/error.hpp"

namespace tvn {

ThresholdBand ThresholdBand::from(double mu, double sigma) {
  if (!(sigma >= 0.0)) throw ConfigError("band sigma must be >= 0");
  return ThresholdBand{mu, sigma, mu - 3.0 * sigma, mu + 3.0 * sigma};
}

bool ThresholdBand::consistent() const {
  return sigma >= 0.0 && low <= high && low == mu - 3.0 * sigma && high == mu + 3.0 * sigma;
}

double mean_of(std::span<const double> values) {
  if (values.empty()) throw ConfigError("mean of an empty sample");
  // Exact for constant samples.
  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values[0]; })) {
    return values[0];
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

ThresholdBand fit_threshold(std::span<const double> scores) {
  if (scores.size() < 2) throw ConfigError("fitting a threshold needs at least 2 scores");
  const double mu = mean_of(scores);
  double ss = 0.0;
  for (double s : scores) ss += (s - mu) * (s - mu);
  return ThresholdBand::from(mu, std::sqrt(ss / static_cast<double>(scores.size() - 1)));
}

VerificationDecision decide(const ThresholdBand& band, std::span<const double> scores, int k,
                            std::string claimed) {
  if (k < 1) throw ConfigError("shot count must be >= 1");
  if (scores.size() != static_cast<std::size_t>(k)) {
    throw ConfigError("expected " + std::to_string(k) + " scores, got " +
                      std::to_string(scores.size()));
  }
  VerificationDecision d;
  d.claimed = std::move(claimed);
  d.observed_scores.assign(scores.begin(), scores.end());
  d.shot = k;
  d.mean = mean_of(scores);
  d.band = band;
  d.verdict = band.contains(d.mean);
  return d;
}

MetricsReport metrics_from_counts(std::int64_t tp, std::int64_t fp, std::int64_t tn,
                                  std::int64_t fn) {
  if (tp < 0 || fp < 0 || tn < 0 || fn < 0) throw ConfigError("negative confusion count");
  MetricsReport r{0, 0, 0, 0, tp, fp, tn, fn};
  const auto n = tp + fp + tn + fn;
  if (n > 0) r.accuracy = 100.0 * static_cast<double>(tp + tn) / static_cast<double>(n);
  const double p = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  const double rc = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  r.precision = 100.0 * p;
  r.recall = 100.0 * rc;
  r.f1_score = p + rc > 0.0 ? 100.0 * 2.0 * p * rc / (p + rc) : 0.0;
  return r;
}

std::vector<double> sample_scores(const T2IModel& model, const std::string& prompt,
                                  const std::string& clean_text, int k, Rng& rng) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(std::max(k, 0)));
  for (int i = 0; i < k; ++i) out.push_back(model.score(prompt, clean_text, rng));
  return out;
}

SelectedPrompt select_final_prompt(const T2IModel& target, const ObjectiveContext& ctx,
                                   std::span<const Suffix> pareto_suffixes,
                                   const PromptSelectionOptions& options, Rng& rng) {
  if (pareto_suffixes.empty()) throw PipelineError("prompt selection needs a non-empty Pareto set");
  if (options.pool_size < 1) throw ConfigError("pool size must be >= 1");
  const Alphabet& alphabet = ctx.alphabet();
  const std::string& base = ctx.base_prompt();

  std::vector<Suffix> pool;
  std::set<Suffix> seen;
  for (const auto& s : pareto_suffixes) {
    if (pool.size() == options.pool_size) break;
    if (seen.insert(s).second) pool.push_back(s);
  }
  const std::size_t seeds = pool.size();
  Rng variation = rng.substream(hash_tag("pool"));
  // Small alphabets may not have pool_size distinct variants; give up after a
  // bounded number of duplicate draws.
  const std::size_t max_attempts = 20 * options.pool_size;
  for (std::size_t attempt = 0; pool.size() < options.pool_size && attempt < max_attempts;
       ++attempt) {
    auto variant = mutate(pool[attempt % seeds], options.mutation_rate, alphabet, variation);
    if (seen.insert(variant).second) pool.push_back(std::move(variant));
  }

  const auto objectives = eval_batch(ctx, pool);
  std::vector<std::size_t> survivors;
  double floor = options.f2_floor;
  for (int k = 0;; ++k) {
    floor = options.f2_floor - k * options.relax_step;
    if (floor < options.min_floor - 1e-12) break;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (objectives[i].f2() >= floor) survivors.push_back(i);
    }
    if (!survivors.empty()) break;
  }
  if (survivors.empty()) {
    throw PipelineError("no candidate keeps substitute similarity >= " +
                        std::to_string(options.min_floor) +
                        "; re-run the search with a different seed");
  }

  SelectedPrompt out;
  {
    Rng clean = rng.substream(hash_tag("no-attack"));
    const auto base_scores = sample_scores(target, base, base, options.no_attack_samples, clean);
    out.no_attack_score = mean_of(base_scores);
  }
  const std::size_t none = pool.size();
  std::size_t best = none;
  double best_score = 0.0;
  Rng scoring = rng.substream(hash_tag("candidates"));
  for (auto i : survivors) {
    Rng draw = scoring.substream(i);
    const double s = target.score(compose(base, pool[i], alphabet), base, draw);
    if (best == none || s < best_score ||
        (s == best_score && decode(pool[i], alphabet) < decode(pool[best], alphabet))) {
      best = i;
      best_score = s;
    }
  }
  out.prompt = AdversarialPrompt{base, pool[best]};
  out.objectives = objectives[best];
  out.candidate_score = best_score;
  out.drop = out.no_attack_score - best_score;
  out.f2_floor_used = floor;
  out.pool_size = pool.size();
  out.survivors = survivors.size();
  return out;
}

MetricsReport evaluate(const T2IModel& target, std::span<const T2IModelPtr> negatives,
                       const std::string& prompt, const std::string& clean_text,
                       const ThresholdBand& band, int trials, int k, const Rng& rng) {
  if (trials < 1) throw ConfigError("evaluation needs at least one trial");
  if (k < 1) throw ConfigError("shot count must be >= 1");
  if (negatives.empty()) throw ConfigError("evaluation needs at least one negative model");
  std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (int t = 0; t < trials; ++t) {
    Rng trial = rng.substream(static_cast<std::uint64_t>(t));
    const bool positive = t % 2 == 0;
    const T2IModel& claimant =
        positive ? target : *negatives[trial.uniform_index(negatives.size())];
    const auto scores = sample_scores(claimant, prompt, clean_text, k, trial);
    const bool accepted = decide(band, scores, k, target.name()).verdict;
    if (positive) {
      accepted ? ++tp : ++fn;
    } else {
      accepted ? ++fp : ++tn;
    }
  }
  return metrics_from_counts(tp, fp, tn, fn);
}

double truncate2(double value) {
  const double eps = value < 0 ? -1e-9 : 1e-9;
  return std::trunc(value * 100.0 + eps) / 100.0;
}

}  // namespace tvn
