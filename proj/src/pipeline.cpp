#include "tvn/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "tvn/baselines.hpp"
#include "tvn/error.hpp"
#include "tvn/remote.hpp"

namespace tvn {

namespace {

bool is_url(const std::string& ref) { return ref.rfind("http://", 0) == 0; }

double mean_score(const T2IModel& model, const std::string& prompt, const std::string& clean,
                  int n, std::uint64_t seed) {
  Rng rng(seed);
  const auto scores = sample_scores(model, prompt, clean, n, rng);
  return mean_of(scores);
}

MetricsReport average_metrics(const std::vector<MetricsReport>& rows) {
  MetricsReport avg;
  if (rows.empty()) return avg;
  for (const auto& m : rows) {
    avg.accuracy += m.accuracy;
    avg.precision += m.precision;
    avg.recall += m.recall;
    avg.f1_score += m.f1_score;
    avg.tp += m.tp;
    avg.fp += m.fp;
    avg.tn += m.tn;
    avg.fn += m.fn;
  }
  const double n = static_cast<double>(rows.size());
  avg.accuracy /= n;
  avg.precision /= n;
  avg.recall /= n;
  avg.f1_score /= n;
  return avg;
}

}  // namespace

Zoo zoo_for(const RunConfig& cfg) { return build_default_zoo(cfg.effective_zoo_seed(), cfg.zoo); }

EncoderPtr resolve_encoder(const Zoo& zoo, const std::string& ref) {
  if (is_url(ref)) return std::make_shared<RemoteEncoder>(ref, ref);
  if (ref == zoo.reference_id.name || zoo.contains(ref)) return zoo.encoder(ref);
  throw ConfigError("unknown encoder '" + ref + "' (not a zoo model and not an http:// URL)");
}

T2IModelPtr resolve_scorer(const RunConfig& cfg, const Zoo& zoo, const std::string& model) {
  if (!cfg.endpoint.empty()) return std::make_shared<RemoteScoringModel>(model, cfg.endpoint);
  if (zoo.contains(model)) return zoo.t2i(model);
  return nullptr;
}

std::vector<std::string> effective_substitutes(const RunConfig& cfg, const Zoo& zoo) {
  if (!cfg.substitutes.empty()) return cfg.substitutes;
  if (!zoo.contains(cfg.target)) {
    throw ConfigError("substitutes are required when the target is not a zoo model");
  }
  std::vector<std::string> out;
  for (const auto& id : zoo.closed_ids()) {
    if (id != cfg.target) out.push_back(id);
  }
  return out;
}

std::string effective_reference(const RunConfig& cfg, const Zoo& zoo) {
  return cfg.reference.empty() ? zoo.reference_id.name : cfg.reference;
}

PromptArtifact craft(const RunConfig& cfg, const Zoo& zoo, const CraftObserver& observer) {
  cfg.validate();
  const Alphabet alphabet = Alphabet::from_identifier(cfg.alphabet);
  PromptArtifact out;
  out.target = cfg.target;
  out.substitutes = effective_substitutes(cfg, zoo);
  out.reference = effective_reference(cfg, zoo);
  out.alphabet = alphabet.identifier();
  out.suffix_length = cfg.nsga2.suffix_length;
  out.unevolved = cfg.nsga2.generations == 0;

  const EncoderPtr target = resolve_encoder(zoo, out.target);
  std::vector<EncoderPtr> substitutes;
  for (const auto& s : out.substitutes) substitutes.push_back(resolve_encoder(zoo, s));
  const EncoderPtr reference = resolve_encoder(zoo, out.reference);
  const T2IModelPtr scorer = resolve_scorer(cfg, zoo, out.target);

  const auto prompts = cfg.effective_prompts();
  const std::uint64_t target_tag = hash_tag(out.target);
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    const ObjectiveContext ctx(prompts[i], target, substitutes, reference, alphabet,
                               cfg.aggregation);
    Nsga2Config ncfg = cfg.nsga2;
    ncfg.seed = derive_seed(cfg.seed, {hash_tag("craft"), target_tag, i});
    TraceObserver trace;
    if (observer) trace = [&observer, i](const GenerationTrace& t) { observer(i, t); };
    EvolveResult evolved;
    try {
      evolved = evolve(ctx, ncfg, trace);
    } catch (const PipelineError& e) {
      throw PipelineError("prompt " + std::to_string(i) + ": " + e.what());
    }
    out.generations_run = evolved.generations_run;

    PromptResult r;
    r.base = prompts[i];
    if (scorer) {
      std::vector<Suffix> pareto;
      for (const auto& ind : evolved.pareto_set) pareto.push_back(ind.suffix);
      Rng rng(derive_seed(cfg.seed, {hash_tag("select"), target_tag, i}));
      const SelectedPrompt sel = select_final_prompt(*scorer, ctx, pareto, cfg.pool, rng);
      r.suffix = decode(sel.prompt.suffix, alphabet);
      r.objectives = sel.objectives;
      r.target_drop = sel.drop;
      r.no_attack_score = sel.no_attack_score;
      r.candidate_score = sel.candidate_score;
      r.f2_floor_used = sel.f2_floor_used;
      r.pool_size = sel.pool_size;
      r.survivors = sel.survivors;
    } else {
      const Individual& best = final_selection(evolved.pareto_set, alphabet, cfg.selection);
      r.suffix = decode(best.suffix, alphabet);
      r.objectives = best.objectives;
      r.pool_size = evolved.pareto_set.size();
      r.survivors = evolved.pareto_set.size();
    }
    out.prompts.push_back(std::move(r));
  }

  out.best = 0;
  for (std::size_t i = 1; i < out.prompts.size(); ++i) {
    const auto& cand = out.prompts[i];
    const auto& inc = out.prompts[out.best];
    const bool better = scorer ? *cand.target_drop > *inc.target_drop
                               : cand.objectives.f1() < inc.objectives.f1();
    if (better) out.best = i;
  }
  return out;
}

BandArtifact fit(const PromptArtifact& prompt, const RunConfig& cfg, const T2IModel& model) {
  if (cfg.samples < 2) throw ConfigError("fitting a threshold needs at least 2 samples");
  BandArtifact out;
  out.target = prompt.target;
  out.prompt = prompt.adversarial_prompt();
  out.clean_text = prompt.best_prompt().base;
  Rng rng(derive_seed(cfg.seed, {hash_tag("fit"), hash_tag(prompt.target)}));
  out.scores = sample_scores(model, out.prompt, out.clean_text, cfg.samples, rng);
  out.band = fit_threshold(out.scores);
  return out;
}

DecisionArtifact verify(const BandArtifact& band, const T2IModel& model, int k,
                        std::uint64_t seed) {
  if (k < 1) throw ConfigError("shots must be >= 1");
  Rng rng(derive_seed(seed, {hash_tag("verify"), hash_tag(model.name()),
                             static_cast<std::uint64_t>(k)}));
  const auto scores = sample_scores(model, band.prompt, band.clean_text, k, rng);
  return verify_scores(band, scores, model.name());
}

DecisionArtifact verify_scores(const BandArtifact& band, const std::vector<double>& scores,
                               const std::string& model) {
  if (scores.empty()) throw ConfigError("at least one observed score is required");
  DecisionArtifact out;
  out.claimed = band.target;
  out.model = model;
  out.prompt = band.prompt;
  out.clean_text = band.clean_text;
  out.decision = decide(band.band, scores, static_cast<int>(scores.size()), band.target);
  return out;
}

std::vector<PromptArtifact> craft_closed_set(const RunConfig& cfg, const Zoo& zoo) {
  std::vector<PromptArtifact> out;
  for (const auto& id : zoo.closed_ids()) {
    RunConfig c = cfg;
    c.target = id;
    c.substitutes.clear();
    c.endpoint.clear();
    out.push_back(craft(c, zoo));
  }
  return out;
}

std::vector<AttackRow> attack_table(const RunConfig& cfg, const Zoo& zoo,
                                    const std::vector<PromptArtifact>& crafted) {
  const Alphabet alphabet = Alphabet::from_identifier(cfg.alphabet);
  const int n = cfg.report_samples;
  std::vector<AttackRow> rows;
  for (const auto& pa : crafted) {
    const auto& best = pa.best_prompt();
    const std::string& base = best.base;
    const std::string tvn_prompt = pa.adversarial_prompt();
    const std::uint64_t tt = hash_tag(pa.target);
    auto seed_for = [&](const char* what, const std::string& model, std::uint64_t extra = 0) {
      return derive_seed(cfg.seed, {hash_tag("attack"), tt, hash_tag(what), hash_tag(model), extra});
    };
    auto clean_mean = [&](const T2IModel& m) {
      return mean_score(m, base, base, n, seed_for("clean", m.name()));
    };

    AttackRow row;
    row.target = pa.target;
    row.base = base;
    const T2IModelPtr target = zoo.t2i(pa.target);
    row.no_attack = clean_mean(*target);
    row.tvn_drop = row.no_attack - mean_score(*target, tvn_prompt, base, n, seed_for("tvn", pa.target));

    std::vector<EncoderPtr> subs;
    for (const auto& s : pa.substitutes) subs.push_back(resolve_encoder(zoo, s));
    const ObjectiveContext ctx(base, resolve_encoder(zoo, pa.target), subs,
                               resolve_encoder(zoo, pa.reference), alphabet, cfg.aggregation);
    const GreedyResult greedy = greedy_attack(ctx, pa.suffix_length, cfg.greedy_iterations,
                                              seed_for("greedy-init", pa.target));
    const std::string greedy_prompt = compose(base, greedy.suffix, alphabet);
    row.greedy_drop =
        row.no_attack - mean_score(*target, greedy_prompt, base, n, seed_for("greedy", pa.target));

    double random_sum = 0.0;
    for (int d = 0; d < kRandomBaselineDraws; ++d) {
      const auto du = static_cast<std::uint64_t>(d);
      const Suffix s = random_attack(alphabet, pa.suffix_length, seed_for("random-init", pa.target, du));
      random_sum += row.no_attack - mean_score(*target, compose(base, s, alphabet), base, n,
                                               seed_for("random", pa.target, du));
    }
    row.random_drop = random_sum / kRandomBaselineDraws;

    double tvn_off = 0.0, greedy_off = 0.0;
    for (const auto& s : pa.substitutes) {
      const T2IModelPtr m = zoo.t2i(s);
      const double clean = clean_mean(*m);
      const double d = clean - mean_score(*m, tvn_prompt, base, n, seed_for("tvn", s));
      row.tvn_substitute_drops.push_back(d);
      tvn_off += d;
      greedy_off += clean - mean_score(*m, greedy_prompt, base, n, seed_for("greedy", s));
    }
    const double ns = static_cast<double>(pa.substitutes.size());
    row.tvn_off_target = tvn_off / ns;
    row.greedy_off_target = greedy_off / ns;

    double held = 0.0;
    const auto open = zoo.open_ids();
    for (const auto& o : open) {
      const T2IModelPtr m = zoo.t2i(o);
      held += clean_mean(*m) - mean_score(*m, tvn_prompt, base, n, seed_for("tvn", o));
    }
    row.tvn_held_out = open.empty() ? 0.0 : held / static_cast<double>(open.size());
    rows.push_back(std::move(row));
  }
  return rows;
}

EvaluationArtifact evaluate_crafted(const RunConfig& cfg, const Zoo& zoo,
                                    const std::vector<PromptArtifact>& crafted,
                                    const std::string& setting) {
  if (cfg.trials < 1) throw ConfigError("trials must be >= 1");
  if (setting != "closed" && setting != "open") {
    throw ConfigError("setting must be 'closed' or 'open'");
  }
  if (setting == "open" && zoo.open.empty()) throw ConfigError("the zoo has no held-out models");
  EvaluationArtifact out;
  out.setting = setting;
  out.trials = cfg.trials;
  out.shots = cfg.shots;
  out.negatives = setting == "open" ? zoo.open_ids() : zoo.closed_ids();

  std::map<int, std::vector<MetricsReport>> per_shot;
  for (const auto& pa : crafted) {
    const T2IModelPtr target = zoo.t2i(pa.target);
    const BandArtifact band = fit(pa, cfg, *target);
    std::vector<T2IModelPtr> negatives;
    for (const auto& id : out.negatives) {
      if (id != pa.target) negatives.push_back(zoo.t2i(id));
    }

    VerificationRow row;
    row.target = pa.target;
    row.prompt = band.prompt;
    row.band = band.band;
    for (int k : cfg.shots) {
      const Rng rng(derive_seed(cfg.seed, {hash_tag("evaluate"), hash_tag(setting),
                                           hash_tag(pa.target), static_cast<std::uint64_t>(k)}));
      const MetricsReport m =
          evaluate(*target, negatives, band.prompt, band.clean_text, band.band, cfg.trials, k, rng);
      row.metrics[k] = m;
      per_shot[k].push_back(m);
    }
    out.rows.push_back(std::move(row));
  }
  for (const auto& [k, ms] : per_shot) out.average[k] = average_metrics(ms);
  return out;
}

EvaluationArtifact evaluate_zoo(const RunConfig& cfg, const Zoo& zoo) {
  cfg.validate();
  const auto crafted = craft_closed_set(cfg, zoo);
  EvaluationArtifact out = evaluate_crafted(cfg, zoo, crafted, cfg.setting);
  out.attacks = attack_table(cfg, zoo, crafted);
  return out;
}

}  // namespace tvn
