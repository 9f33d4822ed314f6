#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tvn/artifacts.hpp"
#include "tvn/config.hpp"
#include "tvn/nsga2.hpp"
#include "tvn/simzoo.hpp"

namespace tvn {

// Number of random suffixes averaged for the random-insertion baseline.
inline constexpr int kRandomBaselineDraws = 10;

// The default zoo for cfg (zoo seed and zoo options).
Zoo zoo_for(const RunConfig& cfg);

// Encoder for a zoo model id, the zoo reference id, or an http:// URL.
EncoderPtr resolve_encoder(const Zoo& zoo, const std::string& ref);

// Scorer for a model: the configured endpoint if any, else the zoo model.
// Returns nullptr when neither applies.
T2IModelPtr resolve_scorer(const RunConfig& cfg, const Zoo& zoo, const std::string& model);

// Substitutes and reference after applying defaults (the other closed-set
// models, the zoo reference encoder).
std::vector<std::string> effective_substitutes(const RunConfig& cfg, const Zoo& zoo);
std::string effective_reference(const RunConfig& cfg, const Zoo& zoo);

using CraftObserver = std::function<void(std::size_t prompt_index, const GenerationTrace&)>;

// Evolves and selects a suffix for every base prompt and marks the one with
// the largest measured target drop (lowest f1 when no scorer is available).
PromptArtifact craft(const RunConfig& cfg, const Zoo& zoo, const CraftObserver& observer = {});

// Scores cfg.samples generations of the best adversarial prompt on model.
BandArtifact fit(const PromptArtifact& prompt, const RunConfig& cfg, const T2IModel& model);

// k fresh generations on model, decided against the band.
DecisionArtifact verify(const BandArtifact& band, const T2IModel& model, int k, std::uint64_t seed);
// Decision from externally observed scores; k is the number of scores.
DecisionArtifact verify_scores(const BandArtifact& band, const std::vector<double>& scores,
                               const std::string& model);

// One prompt artifact per closed-set model, each crafted against the others.
std::vector<PromptArtifact> craft_closed_set(const RunConfig& cfg, const Zoo& zoo);

// Attack comparison (no attack, random, greedy, TVN) on each crafted prompt.
std::vector<AttackRow> attack_table(const RunConfig& cfg, const Zoo& zoo,
                                    const std::vector<PromptArtifact>& crafted);

// Fits a band per target and runs cfg.trials balanced trials per shot count
// against the closed-set peers ("closed") or the held-out models ("open").
EvaluationArtifact evaluate_crafted(const RunConfig& cfg, const Zoo& zoo,
                                    const std::vector<PromptArtifact>& crafted,
                                    const std::string& setting);

// craft_closed_set + evaluate_crafted(cfg.setting) + attack_table.
EvaluationArtifact evaluate_zoo(const RunConfig& cfg, const Zoo& zoo);

}  // namespace tvn
