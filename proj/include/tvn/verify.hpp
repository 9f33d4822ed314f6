#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tvn/genome.hpp"
#include "tvn/nsga2.hpp"
#include "tvn/objectives.hpp"
#include "tvn/random.hpp"
#include "tvn/simzoo.hpp"

namespace tvn {

// Acceptance band mu +/- 3 sigma; boundaries are inclusive.
struct ThresholdBand {
  double mu = 0.0;
  double sigma = 0.0;
  double low = 0.0;
  double high = 0.0;

  static ThresholdBand from(double mu, double sigma);
  bool contains(double value) const { return value >= low && value <= high; }
  bool consistent() const;
  bool operator==(const ThresholdBand&) const = default;
};

// Sample mean and unbiased (n - 1) standard deviation. Needs >= 2 scores.
ThresholdBand fit_threshold(std::span<const double> scores);

struct VerificationDecision {
  std::string claimed;
  std::vector<double> observed_scores;
  int shot = 1;
  double mean = 0.0;
  bool verdict = false;
  ThresholdBand band;
};

// verdict iff mean(scores) lies in the closed band. scores.size() must equal k.
VerificationDecision decide(const ThresholdBand& band, std::span<const double> scores, int k,
                            std::string claimed = {});

// Percent metrics; precision, recall and F1 are 0 when their denominators are.
struct MetricsReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1_score = 0.0;
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  std::int64_t trials() const { return tp + fp + tn + fn; }
  bool operator==(const MetricsReport&) const = default;
};

MetricsReport metrics_from_counts(std::int64_t tp, std::int64_t fp, std::int64_t tn,
                                  std::int64_t fn);

struct PromptSelectionOptions {
  std::size_t pool_size = 1000;
  double f2_floor = 0.9;
  double relax_step = 0.05;
  double min_floor = 0.5;
  double mutation_rate = 0.3;
  int no_attack_samples = 10;
};

struct SelectedPrompt {
  AdversarialPrompt prompt;
  ObjectiveVector objectives;
  double candidate_score = 0.0;  // the single scored generation that won
  double no_attack_score = 0.0;  // mean over no_attack_samples clean generations
  double drop = 0.0;             // no_attack_score - candidate_score
  double f2_floor_used = 0.0;
  std::size_t pool_size = 0;
  std::size_t survivors = 0;
};

// Builds a candidate pool (Pareto members, then mutated variants), drops
// candidates whose substitute similarity f2 is below the floor, scores each
// survivor once on the target and keeps the largest drop.
SelectedPrompt select_final_prompt(const T2IModel& target, const ObjectiveContext& ctx,
                                   std::span<const Suffix> pareto_suffixes,
                                   const PromptSelectionOptions& options, Rng& rng);

// Balanced trials: even trials claim the target, odd trials a uniformly drawn
// negative. Each trial scores k generations of `prompt` against `clean_text`.
MetricsReport evaluate(const T2IModel& target, std::span<const T2IModelPtr> negatives,
                       const std::string& prompt, const std::string& clean_text,
                       const ThresholdBand& band, int trials, int k, const Rng& rng);

// Scores k generations of prompt on model.
std::vector<double> sample_scores(const T2IModel& model, const std::string& prompt,
                                  const std::string& clean_text, int k, Rng& rng);

double mean_of(std::span<const double> values);

// Two-decimal truncation, the convention of the published result tables.
double truncate2(double value);

}  // namespace tvn
