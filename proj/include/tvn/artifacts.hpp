#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tvn/config.hpp"
#include "tvn/nsga2.hpp"
#include "tvn/simzoo.hpp"
#include "tvn/verify.hpp"

namespace tvn {

// All artifacts carry {"schema": kSchemaVersion, "kind": <kind>} and are
// rejected on any unknown field.

std::string zoo_to_json(const Zoo& zoo);
Zoo zoo_from_json(const std::string& text);

struct PromptResult {
  std::string base;
  std::string suffix;  // decoded suffix characters
  ObjectiveVector objectives;
  std::optional<double> target_drop;  // absent when no target scorer exists
  double no_attack_score = 0.0;
  double candidate_score = 0.0;
  double f2_floor_used = 0.0;
  std::size_t pool_size = 0;
  std::size_t survivors = 0;
  bool operator==(const PromptResult&) const = default;
};

struct PromptArtifact {
  std::string target;
  std::vector<std::string> substitutes;
  std::string reference;
  std::string alphabet;
  int suffix_length = 0;
  int generations_run = 0;
  bool unevolved = false;
  std::vector<PromptResult> prompts;
  std::size_t best = 0;

  const PromptResult& best_prompt() const { return prompts.at(best); }
  // base + " " + suffix for the best prompt.
  std::string adversarial_prompt() const;
  bool operator==(const PromptArtifact&) const = default;
};

std::string prompt_to_json(const PromptArtifact& a);
PromptArtifact prompt_from_json(const std::string& text);

struct BandArtifact {
  std::string target;
  std::string prompt;      // adversarial prompt fed to the generator
  std::string clean_text;  // text the images are scored against
  std::vector<double> scores;
  ThresholdBand band;
  bool operator==(const BandArtifact&) const = default;
};

std::string band_to_json(const BandArtifact& a);
BandArtifact band_from_json(const std::string& text);

struct DecisionArtifact {
  std::string claimed;  // the model the band was fitted for
  std::string model;    // the model actually queried
  std::string prompt;
  std::string clean_text;
  VerificationDecision decision;
  bool operator==(const DecisionArtifact&) const;
};

std::string decision_to_json(const DecisionArtifact& a);
DecisionArtifact decision_from_json(const std::string& text);

// Mean simulated drops measured with report_samples generations per model.
struct AttackRow {
  std::string target;
  std::string base;
  double no_attack = 0.0;          // clean target score
  double random_drop = 0.0;
  double greedy_drop = 0.0;
  double tvn_drop = 0.0;
  double greedy_off_target = 0.0;  // mean drop over the substitutes
  double tvn_off_target = 0.0;
  double tvn_held_out = 0.0;       // mean drop over the open-set models
  std::vector<double> tvn_substitute_drops;
  bool operator==(const AttackRow&) const = default;
};

struct VerificationRow {
  std::string target;
  std::string prompt;
  ThresholdBand band;
  std::map<int, MetricsReport> metrics;  // by shot count
  bool operator==(const VerificationRow&) const = default;
};

struct EvaluationArtifact {
  std::string setting;
  int trials = 0;
  std::vector<int> shots;
  std::vector<std::string> negatives;  // candidate impostors; a row's own target is skipped
  std::vector<VerificationRow> rows;
  // Percent metrics averaged over the rows; confusion counts are summed.
  std::map<int, MetricsReport> average;
  std::vector<AttackRow> attacks;
  bool operator==(const EvaluationArtifact&) const = default;
};

std::string evaluation_to_json(const EvaluationArtifact& a);
EvaluationArtifact evaluation_from_json(const std::string& text);

struct RunManifest {
  std::string command;
  std::string status = "running";  // running | complete | failed
  std::string error;
  std::uint64_t seed = 0;
  std::string config_json;  // config_to_json snapshot
  std::string zoo_json;     // empty for remote-only runs
  std::vector<std::string> endpoints;
  std::string started_at;
  std::string finished_at;
  std::map<std::string, std::string> artifacts;  // name -> path relative to the run dir
};

std::string manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const std::string& text);

// One trace.jsonl line (no trailing newline). NaN values become null.
std::string trace_line(std::size_t prompt_index, const GenerationTrace& t);

// Kind tag of an artifact document.
std::string artifact_kind(const std::string& text);

// Whole-file IO raising IoError.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

std::string utc_timestamp();

// Exclusive lock on an output directory, released on destruction.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& dir);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace tvn
