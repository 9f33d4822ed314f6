#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "tvn/embedding.hpp"
#include "tvn/random.hpp"
#include "tvn/synthetic_encoder.hpp"

namespace tvn {

// Affine map from image-text cosine to a CLIP-text style percentage.
struct ScoreModelConfig {
  double offset = 0.0;
  double scale = 33.0;
  double clamp_low = 0.0;
  double clamp_high = 100.0;

  void validate() const;
  bool operator==(const ScoreModelConfig&) const = default;
};

// A simulated text-to-image model: its text encoder plus per-model score noise.
struct SimModel {
  EncoderId id;
  SyntheticEncoderSpec encoder;
  double noise_sigma = 0.8;

  bool operator==(const SimModel&) const = default;
};

// Stand-in for a generated image: the generator's encoding of the prompt.
struct SimImage {
  Embedding latent;
  std::string model_id;
  std::string prompt;
};

SimImage generate(const SimModel& model, const std::string& prompt);

// clamp(offset + scale * cos(latent, reference(text)) + N(0, noise_sigma)).
double clip_text_score(const ScoreModelConfig& cfg, const SimImage& image, const std::string& text,
                       const Encoder& reference, double noise_sigma, Rng& rng);

// Black-box generator-plus-scorer as seen by the verifier: one call produces
// the score of one freshly generated image of `prompt` against `clean_text`.
class T2IModel {
 public:
  virtual ~T2IModel() = default;
  virtual const std::string& name() const = 0;
  virtual double score(const std::string& prompt, const std::string& clean_text, Rng& rng) const = 0;
};

using T2IModelPtr = std::shared_ptr<const T2IModel>;

class SimT2IModel : public T2IModel {
 public:
  SimT2IModel(SimModel model, EncoderPtr reference, ScoreModelConfig score);

  const std::string& name() const override { return model_.id.name; }
  double score(const std::string& prompt, const std::string& clean_text, Rng& rng) const override;

  const SimModel& model() const { return model_; }

 private:
  SimModel model_;
  EncoderPtr reference_;
  ScoreModelConfig score_;
};

struct ZooOptions {
  std::size_t dim = 256;
  double alpha = 0.7;
  double trigger_rate = 0.003;
  std::int64_t trigger_gain = 64;
  double shared_trigger_rate = 0.003;
  std::int64_t shared_trigger_gain = 16;
  double noise_low = 0.5;
  double noise_high = 2.5;
  ScoreModelConfig score;
};

struct Zoo {
  std::uint64_t seed = 0;
  std::vector<SimModel> closed;
  std::vector<SimModel> open;
  EncoderId reference_id{"clip-reference", EncoderKind::kSynthetic};
  SyntheticEncoderSpec reference = SyntheticEncoderSpec::reference();
  ScoreModelConfig score;

  const SimModel& model(const std::string& id) const;
  bool contains(const std::string& id) const;
  std::vector<std::string> closed_ids() const;
  std::vector<std::string> open_ids() const;

  EncoderPtr encoder(const std::string& id) const;  // model id or reference id
  EncoderPtr reference_encoder() const;
  T2IModelPtr t2i(const std::string& id) const;

  bool operator==(const Zoo& other) const;
};

const std::vector<std::string>& default_closed_ids();
const std::vector<std::string>& default_open_ids();

// Distinct encoder seeds and noise sigmas per model, a shared reference.
Zoo build_zoo(const std::vector<std::string>& closed_ids, const std::vector<std::string>& open_ids,
              std::uint64_t seed, const ZooOptions& options = {});
Zoo build_default_zoo(std::uint64_t seed, const ZooOptions& options = {});

}  // namespace tvn
