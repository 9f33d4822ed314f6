#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "tvn/artifacts.hpp"
#include "tvn/config.hpp"
#include "tvn/error.hpp"
#include "tvn/pipeline.hpp"
#include "tvn/remote.hpp"
#include "tvn/report.hpp"

namespace tvn::cli {

namespace fs = std::filesystem;

namespace {

struct Flags {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string zoo;
  std::optional<std::string> target;
  std::optional<std::vector<std::string>> substitutes;
  std::optional<std::string> reference;
  std::optional<std::string> alphabet;
  std::optional<int> suffix_len;
  std::optional<int> population;
  std::optional<int> generations;
  std::optional<double> mutation_rate;
  std::optional<std::size_t> pool_size;
  std::optional<int> samples;
  std::optional<std::vector<int>> shots;
  std::optional<int> trials;
  std::optional<std::string> setting;
  std::optional<std::string> endpoint;
  std::string out;

  // Command inputs.
  std::string prompt_file;
  std::string band_file;
  std::string scores_file;
  std::string zoo_model;
  std::vector<std::string> report_files;
  std::string inspect_file;
};

struct Loaded {
  RunConfig cfg;
  Zoo zoo;
};

Loaded load(const Flags& f) {
  Loaded l;
  std::string manifest_zoo;
  if (!f.config.empty()) {
    const std::string text = read_file(f.config);
    l.cfg = config_from_json(text);
    if (artifact_kind(text) == "manifest") manifest_zoo = manifest_from_json(text).zoo_json;
  }
  RunConfig& c = l.cfg;
  if (f.seed) c.seed = *f.seed;
  if (f.target) c.target = *f.target;
  if (f.substitutes) c.substitutes = *f.substitutes;
  if (f.reference) c.reference = *f.reference;
  if (f.alphabet) c.alphabet = *f.alphabet;
  if (f.suffix_len) c.nsga2.suffix_length = *f.suffix_len;
  if (f.population) c.nsga2.population = *f.population;
  if (f.generations) c.nsga2.generations = *f.generations;
  if (f.mutation_rate) c.nsga2.mutation_rate = *f.mutation_rate;
  if (f.pool_size) c.pool.pool_size = *f.pool_size;
  if (f.samples) c.samples = *f.samples;
  if (f.shots) c.shots = *f.shots;
  if (f.trials) c.trials = *f.trials;
  if (f.setting) c.setting = *f.setting;
  if (f.endpoint) c.endpoint = *f.endpoint;
  c.validate();
  if (!f.zoo.empty()) {
    l.zoo = zoo_from_json(read_file(f.zoo));
  } else if (!manifest_zoo.empty()) {
    l.zoo = zoo_from_json(manifest_zoo);
  } else {
    l.zoo = zoo_for(c);
  }
  return l;
}

fs::path out_dir(const Flags& f) {
  if (!f.out.empty()) return f.out;
  if (const char* env = std::getenv("TVN_OUT_DIR"); env && *env) return env;
  return "tvn-out";
}

// Writes the manifest before any work, then records the outcome.
class Run {
 public:
  Run(const std::string& command, const Loaded& l, const fs::path& dir)
      : dir_(dir), lock_(dir), path_(dir / (command + ".manifest.json")) {
    m_.command = command;
    m_.seed = l.cfg.seed;
    m_.config_json = config_to_json(l.cfg);
    m_.zoo_json = zoo_to_json(l.zoo);
    if (!l.cfg.endpoint.empty()) m_.endpoints.push_back(l.cfg.endpoint);
    for (const auto* ref : {&l.cfg.target, &l.cfg.reference}) {
      if (ref->rfind("http://", 0) == 0) m_.endpoints.push_back(*ref);
    }
    for (const auto& s : l.cfg.substitutes) {
      if (s.rfind("http://", 0) == 0) m_.endpoints.push_back(s);
    }
    m_.started_at = utc_timestamp();
    flush();
  }

  void write(const std::string& name, const std::string& file, const std::string& contents) {
    write_file(dir_ / file, contents);
    m_.artifacts[name] = file;
  }

  void complete() {
    m_.status = "complete";
    m_.finished_at = utc_timestamp();
    flush();
  }

  void fail(const std::string& what) {
    m_.status = "failed";
    m_.error = what;
    m_.finished_at = utc_timestamp();
    try {
      flush();
    } catch (const std::exception&) {
    }
  }

  const fs::path& dir() const { return dir_; }

 private:
  void flush() { write_file(path_, manifest_to_json(m_)); }

  fs::path dir_;
  DirectoryLock lock_;
  fs::path path_;
  RunManifest m_;
};

template <typename Body>
void guarded(Run& run, Body&& body) {
  try {
    body();
  } catch (const std::exception& e) {
    run.fail(e.what());
    throw;
  }
  run.complete();
}

std::string input_path(const std::string& given, const fs::path& dir, const char* fallback) {
  return given.empty() ? (dir / fallback).string() : given;
}

void cmd_craft(const Flags& f, std::ostream& out) {
  const Loaded l = load(f);
  Run run("craft", l, out_dir(f));
  guarded(run, [&] {
    std::ofstream trace(run.dir() / "trace.jsonl", std::ios::trunc);
    if (!trace) throw IoError("cannot write " + (run.dir() / "trace.jsonl").string());
    const PromptArtifact a = craft(l.cfg, l.zoo, [&](std::size_t i, const GenerationTrace& t) {
      trace << trace_line(i, t) << "\n";
    });
    trace.close();
    if (!trace) throw IoError("failed writing trace.jsonl");
    run.write("trace", "trace.jsonl", read_file(run.dir() / "trace.jsonl"));
    run.write("prompt", "prompt.json", prompt_to_json(a));
    run.write("prompt_report", "prompt.md", render_prompt(a));
    const auto& b = a.best_prompt();
    out << "best prompt: " << a.adversarial_prompt() << "\n"
        << "f1 " << b.objectives.f1() << "  f2 " << b.objectives.f2() << "  f3 "
        << b.objectives.f3() << "  target drop "
        << (b.target_drop ? format2(*b.target_drop) : std::string("n/a")) << "\n";
  });
}

void cmd_fit(const Flags& f, std::ostream& out) {
  const Loaded l = load(f);
  const fs::path dir = out_dir(f);
  const PromptArtifact prompt =
      prompt_from_json(read_file(input_path(f.prompt_file, dir, "prompt.json")));
  Run run("fit", l, dir);
  guarded(run, [&] {
    const T2IModelPtr model = resolve_scorer(l.cfg, l.zoo, prompt.target);
    if (!model) {
      throw ConfigError("no scorer for target '" + prompt.target + "'; pass --endpoint");
    }
    const BandArtifact band = fit(prompt, l.cfg, *model);
    run.write("band", "band.json", band_to_json(band));
    run.write("band_report", "band.md", render_band(band, {}));
    out << "band " << format2(band.band.mu) << " +/- 3*" << format2(band.band.sigma) << " = ["
        << format2(band.band.low) << ", " << format2(band.band.high) << "]\n";
  });
}

void cmd_verify(const Flags& f, std::ostream& out) {
  const Loaded l = load(f);
  const fs::path dir = out_dir(f);
  const int sources = !f.zoo_model.empty() + !l.cfg.endpoint.empty() + !f.scores_file.empty();
  if (sources != 1) {
    throw ConfigError("verify needs exactly one of --zoo-model, --endpoint or --scores");
  }
  const BandArtifact band = band_from_json(read_file(input_path(f.band_file, dir, "band.json")));
  if (l.cfg.shots.size() != 1 && f.scores_file.empty()) {
    throw ConfigError("verify takes a single --shots value");
  }
  Run run("verify", l, dir);
  guarded(run, [&] {
    DecisionArtifact d;
    if (!f.scores_file.empty()) {
      std::vector<double> scores;
      try {
        scores = nlohmann::json::parse(read_file(f.scores_file)).get<std::vector<double>>();
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError("--scores must hold a JSON array of numbers: " + std::string(e.what()));
      }
      d = verify_scores(band, scores, f.scores_file);
    } else {
      T2IModelPtr model;
      if (!l.cfg.endpoint.empty()) {
        model = std::make_shared<RemoteScoringModel>(l.cfg.endpoint, l.cfg.endpoint);
      } else {
        model = l.zoo.t2i(f.zoo_model);
      }
      d = verify(band, *model, l.cfg.shots.front(), l.cfg.seed);
    }
    run.write("decision", "decision.json", decision_to_json(d));
    run.write("decision_report", "decision.md", render_band(band, {d}));
    out << render_decision(d);
  });
}

void cmd_evaluate(const Flags& f, std::ostream& out) {
  const Loaded l = load(f);
  Run run("evaluate", l, out_dir(f));
  guarded(run, [&] {
    const auto crafted = craft_closed_set(l.cfg, l.zoo);
    for (const auto& pa : crafted) {
      run.write("prompt:" + pa.target, "prompt-" + pa.target + ".json", prompt_to_json(pa));
    }
    EvaluationArtifact e = evaluate_crafted(l.cfg, l.zoo, crafted, l.cfg.setting);
    e.attacks = attack_table(l.cfg, l.zoo, crafted);
    run.write("evaluation", "evaluation.json", evaluation_to_json(e));
    const std::string md = render_evaluation(e);
    run.write("evaluation_report", "evaluation.md", md);
    out << md;
  });
}

void cmd_zoo_build(const Flags& f, std::ostream& out) {
  const Loaded l = load(f);
  Run run("zoo", l, out_dir(f));
  guarded(run, [&] {
    run.write("zoo", "zoo.json", zoo_to_json(l.zoo));
    out << render_artifact(zoo_to_json(l.zoo));
  });
}

void cmd_report(const Flags& f, std::ostream& out) {
  if (f.report_files.empty()) throw ConfigError("report needs at least one artifact file");
  std::vector<std::string> texts;
  for (const auto& p : f.report_files) texts.push_back(read_file(p));
  // band.json followed by decisions renders the combined threshold table.
  if (fs::path(f.report_files[0]).extension() != ".jsonl" &&
      artifact_kind(texts[0]) == "band" && texts.size() > 1) {
    std::vector<DecisionArtifact> ds;
    bool all_decisions = true;
    for (std::size_t i = 1; i < texts.size(); ++i) {
      if (artifact_kind(texts[i]) != "decision") {
        all_decisions = false;
        break;
      }
      ds.push_back(decision_from_json(texts[i]));
    }
    if (all_decisions) {
      out << render_band(band_from_json(texts[0]), ds);
      return;
    }
  }
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (i) out << "\n";
    if (fs::path(f.report_files[i]).extension() == ".jsonl") {
      out << render_trace(texts[i]);
    } else {
      out << render_artifact(texts[i]);
    }
  }
}

void add_common(CLI::App& app, Flags& f) {
  app.add_option("--seed", f.seed, "Run seed");
  app.add_option("--config", f.config, "JSON config or a run manifest to replay");
  app.add_option("--zoo", f.zoo, "Zoo manifest to use instead of building one");
  app.add_option("--target", f.target, "Target: zoo model id or http:// encoder URL");
  app.add_option("--substitutes", f.substitutes, "Substitute encoders")->delimiter(',');
  app.add_option("--reference", f.reference, "Reference encoder");
  app.add_option("--alphabet", f.alphabet, "Alphabet identifier (alnum62 or custom:<chars>)");
  app.add_option("--suffix-len", f.suffix_len, "Suffix length K");
  app.add_option("--population", f.population, "NSGA-II population size");
  app.add_option("--generations", f.generations, "NSGA-II generations");
  app.add_option("--mutation-rate", f.mutation_rate, "Per-gene mutation rate");
  app.add_option("--pool-size", f.pool_size, "Candidate pool size");
  app.add_option("--samples", f.samples, "Samples for threshold fitting");
  app.add_option("--shots", f.shots, "Shot counts k")->delimiter(',');
  app.add_option("--trials", f.trials, "Trials per target");
  app.add_option("--setting", f.setting, "closed or open");
  app.add_option("--endpoint", f.endpoint, "Remote scoring endpoint (http://)");
  app.add_option("--out", f.out, "Output directory (default $TVN_OUT_DIR or ./tvn-out)");
}

int code_for(const std::exception& e) {
  if (dynamic_cast<const InvalidGenomeError*>(&e)) return kInvalidGenome;
  if (dynamic_cast<const ConfigError*>(&e)) return kUsage;
  if (dynamic_cast<const IoError*>(&e)) return kIo;
  if (dynamic_cast<const TransportError*>(&e)) return kTransport;
  if (dynamic_cast<const ProtocolError*>(&e)) return kProtocol;
  if (dynamic_cast<const PipelineError*>(&e)) return kPipeline;
  return kUnexpected;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Flags f;
  CLI::App app{"Black-box text-to-image model verification with non-transferable suffixes",
               "tvn"};
  app.require_subcommand(1);
  app.fallthrough();
  add_common(app, f);

  auto* craft_cmd = app.add_subcommand("craft", "Craft an adversarial prompt for the target");
  auto* fit_cmd = app.add_subcommand("fit", "Fit the 3-sigma band on the target");
  fit_cmd->add_option("--prompt", f.prompt_file, "Prompt artifact (default <out>/prompt.json)");
  auto* verify_cmd = app.add_subcommand("verify", "Verify a model against a band");
  verify_cmd->add_option("--band", f.band_file, "Band artifact (default <out>/band.json)");
  verify_cmd->add_option("--zoo-model", f.zoo_model, "Zoo model to query");
  verify_cmd->add_option("--scores", f.scores_file, "JSON array of observed scores");
  auto* eval_cmd = app.add_subcommand("evaluate", "Closed- or open-set evaluation on the zoo");
  auto* zoo_cmd = app.add_subcommand("zoo", "Build or inspect a zoo manifest");
  zoo_cmd->require_subcommand(1);
  auto* zoo_build = zoo_cmd->add_subcommand("build", "Write zoo.json");
  auto* zoo_inspect = zoo_cmd->add_subcommand("inspect", "Print a zoo manifest");
  zoo_inspect->add_option("file", f.inspect_file, "Zoo manifest")->required();
  auto* report_cmd = app.add_subcommand("report", "Render artifacts as markdown");
  report_cmd->add_option("files", f.report_files, "Artifact files")->required();

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "tvn: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (craft_cmd->parsed()) {
      cmd_craft(f, out);
    } else if (fit_cmd->parsed()) {
      cmd_fit(f, out);
    } else if (verify_cmd->parsed()) {
      cmd_verify(f, out);
    } else if (eval_cmd->parsed()) {
      cmd_evaluate(f, out);
    } else if (zoo_build->parsed()) {
      cmd_zoo_build(f, out);
    } else if (zoo_inspect->parsed()) {
      out << render_artifact(read_file(f.inspect_file));
    } else if (report_cmd->parsed()) {
      cmd_report(f, out);
    }
  } catch (const std::exception& e) {
    err << "tvn: " << e.what() << "\n";
    return code_for(e);
  }
  return kOk;
}

}  // namespace tvn::cli
