#include "tvn/simzoo.hpp"

#include <algorithm>
#include <set>

#include "tvn/error.hpp"

namespace tvn {

void ScoreModelConfig::validate() const {
  if (!(scale > 0.0)) throw ConfigError("score scale must be positive");
  if (!(clamp_low <= clamp_high)) throw ConfigError("score clamp range is empty");
}

SimImage generate(const SimModel& model, const std::string& prompt) {
  if (prompt.empty()) throw ConfigError("cannot generate from an empty prompt");
  return SimImage{synthetic_encode(model.encoder, prompt), model.id.name, prompt};
}

double clip_text_score(const ScoreModelConfig& cfg, const SimImage& image, const std::string& text,
                       const Encoder& reference, double noise_sigma, Rng& rng) {
  if (text.empty()) throw ConfigError("cannot score against an empty text");
  const double cos = cosine(image.latent, reference.encode_one(text));
  double s = cfg.offset + cfg.scale * cos;
  if (noise_sigma > 0.0) s += noise_sigma * rng.normal();
  return std::clamp(s, cfg.clamp_low, cfg.clamp_high);
}

SimT2IModel::SimT2IModel(SimModel model, EncoderPtr reference, ScoreModelConfig score)
    : model_(std::move(model)),
      reference_(std::move(reference)),
      score_(score) {
  if (model_.noise_sigma < 0.0) throw ConfigError("noise sigma must be >= 0");
  model_.encoder.validate();
  score_.validate();
}

double SimT2IModel::score(const std::string& prompt, const std::string& clean_text,
                          Rng& rng) const {
  return clip_text_score(score_, generate(model_, prompt), clean_text, *reference_,
                         model_.noise_sigma, rng);
}

const SimModel& Zoo::model(const std::string& id) const {
  for (const auto* group : {&closed, &open}) {
    for (const auto& m : *group) {
      if (m.id.name == id) return m;
    }
  }
  throw ConfigError("unknown zoo model '" + id + "'");
}

bool Zoo::contains(const std::string& id) const {
  auto has = [&](const std::vector<SimModel>& g) {
    return std::any_of(g.begin(), g.end(), [&](const SimModel& m) { return m.id.name == id; });
  };
  return has(closed) || has(open);
}

std::vector<std::string> Zoo::closed_ids() const {
  std::vector<std::string> ids;
  for (const auto& m : closed) ids.push_back(m.id.name);
  return ids;
}

std::vector<std::string> Zoo::open_ids() const {
  std::vector<std::string> ids;
  for (const auto& m : open) ids.push_back(m.id.name);
  return ids;
}

EncoderPtr Zoo::encoder(const std::string& id) const {
  if (id == reference_id.name) return reference_encoder();
  const auto& m = model(id);
  return std::make_shared<SyntheticEncoder>(m.id.name, m.encoder);
}

EncoderPtr Zoo::reference_encoder() const {
  return std::make_shared<SyntheticEncoder>(reference_id.name, reference);
}

T2IModelPtr Zoo::t2i(const std::string& id) const {
  return std::make_shared<SimT2IModel>(model(id), reference_encoder(), score);
}

bool Zoo::operator==(const Zoo& other) const {
  return seed == other.seed && closed == other.closed && open == other.open &&
         reference_id == other.reference_id && reference == other.reference &&
         score == other.score;
}

const std::vector<std::string>& default_closed_ids() {
  static const std::vector<std::string> kIds = {"sd-v1.4", "sd-v2.1", "hunyuan-dit-v1.2",
                                                "openjourney"};
  return kIds;
}

const std::vector<std::string>& default_open_ids() {
  static const std::vector<std::string> kIds = {"sdxl",          "flux.1",      "playground-v2.5",
                                                "playground-v2", "dall-e-mini", "sd-v3",
                                                "hyper-sd",      "awportrait-fl"};
  return kIds;
}

Zoo build_zoo(const std::vector<std::string>& closed_ids, const std::vector<std::string>& open_ids,
              std::uint64_t seed, const ZooOptions& options) {
  if (closed_ids.size() < 2) throw ConfigError("a zoo needs at least two closed-set models");
  if (!(options.noise_low >= 0.0 && options.noise_low <= options.noise_high)) {
    throw ConfigError("invalid noise sigma range");
  }
  options.score.validate();
  Zoo zoo;
  zoo.seed = seed;
  zoo.score = options.score;
  zoo.reference = SyntheticEncoderSpec::reference(options.dim);
  zoo.reference.shared_trigger_rate = options.shared_trigger_rate;
  zoo.reference.shared_trigger_gain = options.shared_trigger_gain;

  std::set<std::string> names{zoo.reference_id.name};
  std::set<std::uint64_t> seeds{zoo.reference.seed};
  Rng noise(derive_seed(seed, {hash_tag("noise")}));
  std::uint64_t index = 0;
  auto add = [&](const std::string& id, std::vector<SimModel>& group) {
    if (id.empty()) throw ConfigError("empty model id");
    if (!names.insert(id).second) throw ConfigError("duplicate model id '" + id + "'");
    SimModel m;
    m.id = EncoderId{id, EncoderKind::kSynthetic};
    m.encoder.dim = options.dim;
    m.encoder.alpha = options.alpha;
    m.encoder.trigger_rate = options.trigger_rate;
    m.encoder.trigger_gain = options.trigger_gain;
    m.encoder.shared_trigger_rate = options.shared_trigger_rate;
    m.encoder.shared_trigger_gain = options.shared_trigger_gain;
    std::uint64_t s = derive_seed(seed, {hash_tag("encoder"), index++});
    while (!seeds.insert(s).second) s = mix64(s);
    m.encoder.seed = s;
    m.encoder.validate();
    m.noise_sigma = noise.uniform(options.noise_low, options.noise_high);
    group.push_back(std::move(m));
  };
  for (const auto& id : closed_ids) add(id, zoo.closed);
  for (const auto& id : open_ids) add(id, zoo.open);
  return zoo;
}

Zoo build_default_zoo(std::uint64_t seed, const ZooOptions& options) {
  return build_zoo(default_closed_ids(), default_open_ids(), seed, options);
}

}  // namespace tvn
