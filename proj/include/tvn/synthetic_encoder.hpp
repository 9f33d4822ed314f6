#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tvn/embedding.hpp"

namespace tvn {

// Parameters of one member of the synthetic encoder family.
//
// An encoding is normalize(alpha * S(text) + (1 - alpha) * P_seed(text)):
//   S       shared semantic map. Signed feature hashing of the character
//           trigrams of the normalized text with a fixed global seed, each
//           trigram weighted by its salience (in-vocabulary 10, otherwise 3).
//   P_seed  model-specific map. The same trigrams hashed with the spec seed.
//           A sparse, seed-chosen set of out-of-vocabulary, space-free
//           trigrams ("glitch trigrams") is amplified by trigger_gain; P_seed
//           is scaled by the norm of its un-amplified features, so it is a
//           unit vector unless a glitch trigram is present.
// The shared map has its own family-wide glitch set (shared_trigger_rate,
// shared_trigger_gain), inherited by every member including the reference.
// Accumulation is integer-only; floating point enters at normalization.
struct SyntheticEncoderSpec {
  std::uint64_t seed = 0;
  std::size_t dim = 256;
  double alpha = 0.7;
  double trigger_rate = 0.003;
  std::int64_t trigger_gain = 64;
  double shared_trigger_rate = 0.003;
  std::int64_t shared_trigger_gain = 16;

  // Shared-semantics-only encoder (alpha = 1) used as the reference encoder.
  static SyntheticEncoderSpec reference(std::size_t dim = 256);

  void validate() const;
  bool operator==(const SyntheticEncoderSpec&) const = default;
};

inline constexpr std::int64_t kInVocabularyWeight = 10;
inline constexpr std::int64_t kOutOfVocabularyWeight = 3;

// Lowercases ASCII, collapses whitespace runs, trims. Empty result for
// whitespace-only input.
std::string normalize_text(std::string_view text);

// Character trigrams of " " + normalize_text(text) + " ".
std::vector<std::string> trigrams(std::string_view text);

// Whether a (lowercase) trigram occurs in the bundled pretraining lexicon.
bool in_vocabulary(std::string_view trigram);

// Whether trigram is a model-specific glitch trigram of the given spec.
bool is_trigger(const SyntheticEncoderSpec& spec, std::string_view trigram);
// Whether trigram is a family-wide glitch trigram of the shared map.
bool is_shared_trigger(const SyntheticEncoderSpec& spec, std::string_view trigram);

Embedding synthetic_encode(const SyntheticEncoderSpec& spec, std::string_view text);

class SyntheticEncoder : public Encoder {
 public:
  SyntheticEncoder(std::string name, SyntheticEncoderSpec spec);

  const EncoderId& id() const override { return id_; }
  std::size_t dim() const override { return spec_.dim; }
  std::vector<Embedding> encode(std::span<const std::string> texts) const override;

  const SyntheticEncoderSpec& spec() const { return spec_; }

 private:
  EncoderId id_;
  SyntheticEncoderSpec spec_;
};

}  // namespace tvn
