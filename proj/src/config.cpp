#include "tvn/config.hpp"

#include "tvn/error.hpp"

#include "json_util.hpp"
#include "tvn/lexicon.hpp"

namespace tvn {

namespace {

using detail::json;
using detail::StrictReader;

std::string aggregation_name(SubstituteAggregation a) {
  return a == SubstituteAggregation::kMin ? "min" : "mean";
}

}  // namespace

const std::vector<std::string>& default_prompts() {
  static const std::vector<std::string> kPrompts = [] {
    const auto& texts = lexicon_texts();
    return std::vector<std::string>(texts.begin(), texts.begin() + 10);
  }();
  return kPrompts;
}

std::vector<std::string> RunConfig::effective_prompts() const {
  return prompts.empty() ? default_prompts() : prompts;
}

void RunConfig::validate() const {
  Alphabet::from_identifier(alphabet);
  Nsga2Config n = nsga2;
  n.validate();
  if (!(selection.relax_step > 0.0)) throw ConfigError("selection relax_step must be positive");
  if (pool.pool_size < 1) throw ConfigError("pool_size must be >= 1");
  if (!(pool.relax_step > 0.0)) throw ConfigError("pool relax_step must be positive");
  if (samples < 2) throw ConfigError("samples must be >= 2 to fit a threshold");
  if (report_samples < 2) throw ConfigError("report_samples must be >= 2");
  if (pool.no_attack_samples < 1) throw ConfigError("no_attack_samples must be >= 1");
  if (shots.empty()) throw ConfigError("at least one shot count is required");
  for (int k : shots) {
    if (k < 1) throw ConfigError("shot counts must be >= 1");
  }
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (setting != "closed" && setting != "open") {
    throw ConfigError("setting must be 'closed' or 'open'");
  }
  if (greedy_iterations < 1) throw ConfigError("greedy_iterations must be >= 1");
  for (const auto& p : prompts) {
    if (p.empty()) throw ConfigError("prompts must be non-empty");
  }
  if (target.empty()) throw ConfigError("a target is required");
}

std::string config_to_json(const RunConfig& c) {
  json j;
  j["schema"] = kSchemaVersion;
  j["kind"] = "config";
  j["seed"] = c.seed;
  j["zoo_seed"] = c.zoo_seed ? json(*c.zoo_seed) : json(nullptr);
  j["alphabet"] = c.alphabet;
  j["suffix_length"] = c.nsga2.suffix_length;
  j["nsga2"] = {{"population", c.nsga2.population},
                {"generations", c.nsga2.generations},
                {"mutation_rate", c.nsga2.mutation_rate},
                {"crossover_rate", c.nsga2.crossover_rate},
                {"tournament_size", c.nsga2.tournament_size}};
  j["selection"] = {{"tau2", c.selection.tau2},
                    {"tau3", c.selection.tau3},
                    {"relax_step", c.selection.relax_step}};
  j["pool"] = {{"pool_size", c.pool.pool_size},
               {"f2_floor", c.pool.f2_floor},
               {"relax_step", c.pool.relax_step},
               {"min_floor", c.pool.min_floor},
               {"mutation_rate", c.pool.mutation_rate},
               {"no_attack_samples", c.pool.no_attack_samples}};
  j["aggregation"] = aggregation_name(c.aggregation);
  j["zoo"] = {{"dim", c.zoo.dim},
              {"alpha", c.zoo.alpha},
              {"trigger_rate", c.zoo.trigger_rate},
              {"trigger_gain", c.zoo.trigger_gain},
              {"shared_trigger_rate", c.zoo.shared_trigger_rate},
              {"shared_trigger_gain", c.zoo.shared_trigger_gain},
              {"noise_low", c.zoo.noise_low},
              {"noise_high", c.zoo.noise_high},
              {"score_offset", c.zoo.score.offset},
              {"score_scale", c.zoo.score.scale}};
  j["target"] = c.target;
  j["substitutes"] = c.substitutes;
  j["reference"] = c.reference;
  j["endpoint"] = c.endpoint;
  j["prompts"] = c.prompts;
  j["samples"] = c.samples;
  j["report_samples"] = c.report_samples;
  j["shots"] = c.shots;
  j["trials"] = c.trials;
  j["setting"] = c.setting;
  j["greedy_iterations"] = c.greedy_iterations;
  return j.dump(2);
}

RunConfig config_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (doc.is_object() && doc.value("kind", "") == "manifest") {
    if (!doc.contains("config")) throw ConfigError("manifest has no config member");
    doc = doc.at("config");
  }
  RunConfig c;
  StrictReader r(doc, "config");
  if (r.has("schema")) {
    const auto schema = r.required<std::string>("schema");
    if (schema != kSchemaVersion) throw ConfigError("unsupported config schema '" + schema + "'");
  }
  if (r.has("kind")) {
    if (r.required<std::string>("kind") != "config") throw ConfigError("not a config document");
  }
  r.optional("seed", c.seed);
  if (r.has("zoo_seed")) {
    const auto& z = r.object("zoo_seed");
    if (!z.is_null()) c.zoo_seed = z.get<std::uint64_t>();
  }
  r.optional("alphabet", c.alphabet);
  r.optional("suffix_length", c.nsga2.suffix_length);
  if (r.has("nsga2")) {
    StrictReader n(r.object("nsga2"), "config.nsga2");
    n.optional("population", c.nsga2.population);
    n.optional("generations", c.nsga2.generations);
    n.optional("mutation_rate", c.nsga2.mutation_rate);
    n.optional("crossover_rate", c.nsga2.crossover_rate);
    n.optional("tournament_size", c.nsga2.tournament_size);
    n.finish();
  }
  if (r.has("selection")) {
    StrictReader s(r.object("selection"), "config.selection");
    s.optional("tau2", c.selection.tau2);
    s.optional("tau3", c.selection.tau3);
    s.optional("relax_step", c.selection.relax_step);
    s.finish();
  }
  if (r.has("pool")) {
    StrictReader p(r.object("pool"), "config.pool");
    p.optional("pool_size", c.pool.pool_size);
    p.optional("f2_floor", c.pool.f2_floor);
    p.optional("relax_step", c.pool.relax_step);
    p.optional("min_floor", c.pool.min_floor);
    p.optional("mutation_rate", c.pool.mutation_rate);
    p.optional("no_attack_samples", c.pool.no_attack_samples);
    p.finish();
  }
  if (r.has("aggregation")) {
    const auto a = r.required<std::string>("aggregation");
    if (a == "mean") {
      c.aggregation = SubstituteAggregation::kMean;
    } else if (a == "min") {
      c.aggregation = SubstituteAggregation::kMin;
    } else {
      throw ConfigError("aggregation must be 'mean' or 'min'");
    }
  }
  if (r.has("zoo")) {
    StrictReader z(r.object("zoo"), "config.zoo");
    z.optional("dim", c.zoo.dim);
    z.optional("alpha", c.zoo.alpha);
    z.optional("trigger_rate", c.zoo.trigger_rate);
    z.optional("trigger_gain", c.zoo.trigger_gain);
    z.optional("shared_trigger_rate", c.zoo.shared_trigger_rate);
    z.optional("shared_trigger_gain", c.zoo.shared_trigger_gain);
    z.optional("noise_low", c.zoo.noise_low);
    z.optional("noise_high", c.zoo.noise_high);
    z.optional("score_offset", c.zoo.score.offset);
    z.optional("score_scale", c.zoo.score.scale);
    z.finish();
  }
  r.optional("target", c.target);
  r.optional("substitutes", c.substitutes);
  r.optional("reference", c.reference);
  r.optional("endpoint", c.endpoint);
  r.optional("prompts", c.prompts);
  r.optional("samples", c.samples);
  r.optional("report_samples", c.report_samples);
  r.optional("shots", c.shots);
  r.optional("trials", c.trials);
  r.optional("setting", c.setting);
  r.optional("greedy_iterations", c.greedy_iterations);
  r.finish();
  c.validate();
  return c;
}

}  // namespace tvn
