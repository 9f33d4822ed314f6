#pragma once

#include <string>
#include <vector>

#include "tvn/artifacts.hpp"

namespace tvn {

// Markdown renderings. Percent values are truncated to two decimals.
std::string render_prompt(const PromptArtifact& a);
// Mean | SD | Threshold | k-shot Mean | Verdict, one row per decision.
std::string render_band(const BandArtifact& band, const std::vector<DecisionArtifact>& decisions);
std::string render_decision(const DecisionArtifact& d);
// Per-target metric table for every shot count plus the average row, and the
// attack comparison table when present.
std::string render_evaluation(const EvaluationArtifact& a);
// Summary of a trace.jsonl stream.
std::string render_trace(const std::string& jsonl);

// Renders any artifact document by its kind.
std::string render_artifact(const std::string& text);

// "%.2f" of truncate2(value).
std::string format2(double value);

}  // namespace tvn
