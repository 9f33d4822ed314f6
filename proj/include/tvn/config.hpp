#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tvn/nsga2.hpp"
#include "tvn/objectives.hpp"
#include "tvn/simzoo.hpp"
#include "tvn/verify.hpp"

namespace tvn {

inline constexpr const char* kSchemaVersion = "1";

// Everything a command needs besides its input artifacts. One JSON document;
// CLI flags override individual fields.
struct RunConfig {
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> zoo_seed;  // defaults to seed

  std::string alphabet = "alnum62";
  Nsga2Config nsga2;  // nsga2.seed is derived per run, not read from here
  SelectionThresholds selection;
  PromptSelectionOptions pool;
  SubstituteAggregation aggregation = SubstituteAggregation::kMean;
  ZooOptions zoo;

  // Encoder references: a zoo model id, the reference id, or an http:// URL.
  std::string target = "sd-v1.4";
  std::vector<std::string> substitutes;  // empty: other closed-set models
  std::string reference;                 // empty: the zoo reference encoder
  std::string endpoint;                  // remote scoring endpoint, if any

  std::vector<std::string> prompts;  // empty: the bundled prompt set
  int samples = 10;
  int report_samples = 100;
  std::vector<int> shots = {1, 5};
  int trials = 200;
  std::string setting = "closed";
  int greedy_iterations = 100;

  std::uint64_t effective_zoo_seed() const { return zoo_seed.value_or(seed); }
  std::vector<std::string> effective_prompts() const;
  void validate() const;
};

// The ten bundled verification prompts.
const std::vector<std::string>& default_prompts();

std::string config_to_json(const RunConfig& cfg);
// Accepts a config document or a run manifest (its "config" member).
// Unknown fields are rejected.
RunConfig config_from_json(const std::string& text);

}  // namespace tvn
