#include "tvn/synthetic_encoder.hpp"

#include <cmath>
#include <unordered_set>

#include "tvn/error.hpp"
#include "tvn/lexicon.hpp"
#include "tvn/random.hpp"

namespace tvn {

namespace {

constexpr std::uint64_t kSharedSeed = 0x7f4a7c159e3779b9ULL;
constexpr std::uint64_t kTriggerTag = 0x74726967676572ULL;  // "trigger"
constexpr std::uint64_t kTriggerResolution = 1'000'000;

std::uint32_t pack(std::string_view tri) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(tri[0])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(tri[1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(tri[2])) << 16;
}

const std::unordered_set<std::uint32_t>& vocabulary() {
  static const std::unordered_set<std::uint32_t> kVocab = [] {
    std::unordered_set<std::uint32_t> vocab;
    for (auto text : lexicon_texts()) {
      for (const auto& tri : trigrams(text)) vocab.insert(pack(tri));
    }
    return vocab;
  }();
  return kVocab;
}

bool glitch_key(std::uint64_t seed, double rate, std::uint32_t key) {
  if ((key & 0xff) == ' ' || ((key >> 8) & 0xff) == ' ' || ((key >> 16) & 0xff) == ' ') {
    return false;
  }
  if (vocabulary().contains(key)) return false;
  const auto h = derive_seed(seed, {kTriggerTag, key});
  const auto threshold = static_cast<std::uint64_t>(
      std::llround(rate * static_cast<double>(kTriggerResolution)));
  return h % kTriggerResolution < threshold;
}

bool trigger_key(const SyntheticEncoderSpec& spec, std::uint32_t key) {
  return glitch_key(spec.seed, spec.trigger_rate, key);
}

bool shared_trigger_key(const SyntheticEncoderSpec& spec, std::uint32_t key) {
  return glitch_key(kSharedSeed, spec.shared_trigger_rate, key);
}

// Signed bucket hashing: bucket from the low bits, sign from the top bit.
struct Feature {
  std::size_t bucket;
  std::int64_t sign;
};

Feature hash_feature(std::uint64_t seed, std::uint32_t key, std::size_t dim) {
  const auto h = mix64(mix64(seed) ^ key);
  return {static_cast<std::size_t>(h % dim), (h >> 63) ? -1 : 1};
}

double l2(const std::vector<std::int64_t>& v) {
  double sq = 0.0;
  for (auto x : v) sq += static_cast<double>(x) * static_cast<double>(x);
  return std::sqrt(sq);
}

}  // namespace

SyntheticEncoderSpec SyntheticEncoderSpec::reference(std::size_t dim) {
  SyntheticEncoderSpec spec;
  spec.seed = kSharedSeed;
  spec.dim = dim;
  spec.alpha = 1.0;
  return spec;
}

void SyntheticEncoderSpec::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("synthetic alpha must lie in [0, 1]");
  if (dim < 8) throw ConfigError("synthetic encoder dim must be >= 8");
  if (!(trigger_rate >= 0.0 && trigger_rate <= 1.0)) {
    throw ConfigError("trigger_rate must lie in [0, 1]");
  }
  if (trigger_gain < 1) throw ConfigError("trigger_gain must be >= 1");
  if (!(shared_trigger_rate >= 0.0 && shared_trigger_rate <= 1.0)) {
    throw ConfigError("shared_trigger_rate must lie in [0, 1]");
  }
  if (shared_trigger_gain < 1) throw ConfigError("shared_trigger_gain must be >= 1");
}

std::string normalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
  }
  return out;
}

std::vector<std::string> trigrams(std::string_view text) {
  const std::string padded = " " + normalize_text(text) + " ";
  std::vector<std::string> out;
  if (padded.size() < 3) return out;
  out.reserve(padded.size() - 2);
  for (std::size_t i = 0; i + 3 <= padded.size(); ++i) out.push_back(padded.substr(i, 3));
  return out;
}

bool in_vocabulary(std::string_view trigram) {
  return trigram.size() == 3 && vocabulary().contains(pack(trigram));
}

bool is_trigger(const SyntheticEncoderSpec& spec, std::string_view trigram) {
  return trigram.size() == 3 && trigger_key(spec, pack(trigram));
}

bool is_shared_trigger(const SyntheticEncoderSpec& spec, std::string_view trigram) {
  return trigram.size() == 3 && shared_trigger_key(spec, pack(trigram));
}

Embedding synthetic_encode(const SyntheticEncoderSpec& spec, std::string_view text) {
  const std::string norm = normalize_text(text);
  if (norm.empty()) throw ConfigError("cannot encode an empty text");
  const std::string padded = " " + norm + " ";
  const auto& vocab = vocabulary();

  std::vector<std::int64_t> shared(spec.dim, 0);
  std::vector<std::int64_t> shared_base(spec.dim, 0);
  std::vector<std::int64_t> specific(spec.dim, 0);
  std::vector<std::int64_t> specific_base(spec.dim, 0);
  const bool mix_specific = spec.alpha < 1.0;
  for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
    const auto key = pack(std::string_view(padded).substr(i, 3));
    const bool known = vocab.contains(key);
    const std::int64_t weight = known ? kInVocabularyWeight : kOutOfVocabularyWeight;
    const auto s = hash_feature(kSharedSeed, key, spec.dim);
    const std::int64_t shared_gain =
        !known && shared_trigger_key(spec, key) ? spec.shared_trigger_gain : 1;
    shared[s.bucket] += s.sign * weight * shared_gain;
    shared_base[s.bucket] += s.sign * weight;
    if (!mix_specific) continue;
    const auto p = hash_feature(spec.seed, key, spec.dim);
    const std::int64_t gain = !known && trigger_key(spec, key) ? spec.trigger_gain : 1;
    specific[p.bucket] += p.sign * weight * gain;
    specific_base[p.bucket] += p.sign * weight;
  }

  const double shared_norm = l2(shared_base);
  const double specific_norm = mix_specific ? l2(specific_base) : 0.0;
  std::vector<double> mixed(spec.dim, 0.0);
  for (std::size_t b = 0; b < spec.dim; ++b) {
    double v = 0.0;
    if (shared_norm > 0.0) v += spec.alpha * (static_cast<double>(shared[b]) / shared_norm);
    if (specific_norm > 0.0) {
      v += (1.0 - spec.alpha) * (static_cast<double>(specific[b]) / specific_norm);
    }
    mixed[b] = v;
  }
  double sq = 0.0;
  for (double v : mixed) sq += v * v;
  if (!(sq > 0.0)) {
    // Every feature cancelled out; map to a fixed direction.
    mixed.assign(spec.dim, 0.0);
    mixed[0] = 1.0;
    return Embedding{std::move(mixed)};
  }
  return normalized(std::move(mixed));
}

SyntheticEncoder::SyntheticEncoder(std::string name, SyntheticEncoderSpec spec)
    : id_{std::move(name), EncoderKind::kSynthetic}, spec_(spec) {
  spec_.validate();
}

std::vector<Embedding> SyntheticEncoder::encode(std::span<const std::string> texts) const {
  check_encode_batch(texts);
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(synthetic_encode(spec_, t));
  return out;
}

}  // namespace tvn
