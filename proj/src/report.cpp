#include "tvn/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "json_util.hpp"

namespace tvn {

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string drop_cell(const std::optional<double>& d) { return d ? format2(*d) : "n/a"; }

}  // namespace

std::string format2(double value) {
  const double t = truncate2(value);
  // Avoid printing "-0.00".
  return fmt("%.2f", t == 0.0 ? 0.0 : t);
}

std::string render_prompt(const PromptArtifact& a) {
  std::ostringstream o;
  o << "## Adversarial prompts for " << a.target << "\n\n";
  o << "Substitutes: " << (a.substitutes.empty() ? "none" : "");
  for (std::size_t i = 0; i < a.substitutes.size(); ++i) {
    o << (i ? ", " : "") << a.substitutes[i];
  }
  o << "  \nReference: " << a.reference << "  \nAlphabet: " << a.alphabet
    << ", suffix length " << a.suffix_length << ", generations " << a.generations_run
    << (a.unevolved ? " (unevolved)" : "") << "\n\n";
  o << "| # | Prompt | f1 | f2 | f3 | Target drop |\n|---|---|---|---|---|---|\n";
  for (std::size_t i = 0; i < a.prompts.size(); ++i) {
    const auto& p = a.prompts[i];
    o << "| " << i << (i == a.best ? "*" : "") << " | " << p.base << " " << p.suffix << " | "
      << fmt("%.4f", p.objectives.f1()) << " | " << fmt("%.4f", p.objectives.f2()) << " | "
      << fmt("%.4f", p.objectives.f3()) << " | " << drop_cell(p.target_drop) << " |\n";
  }
  o << "\nBest: `" << a.adversarial_prompt() << "`\n";
  return o.str();
}

std::string render_band(const BandArtifact& band, const std::vector<DecisionArtifact>& decisions) {
  std::ostringstream o;
  o << "| Model | Mean | SD | Threshold | k-shot | k-shot Mean | Verdict |\n"
    << "|---|---|---|---|---|---|---|\n";
  const auto head = [&] {
    return "| " + band.target + " | " + format2(band.band.mu) + " | " + format2(band.band.sigma) +
           " | " + format2(band.band.high) + " | ";
  };
  if (decisions.empty()) o << head() << "- | - | - |\n";
  for (const auto& d : decisions) {
    o << head() << d.decision.shot << " | " << format2(d.decision.mean) << " | "
      << (d.decision.verdict ? "True" : "False") << " |\n";
  }
  o << "\nBand: [" << format2(band.band.low) << ", " << format2(band.band.high) << "] from "
    << band.scores.size() << " samples of `" << band.prompt << "`\n";
  return o.str();
}

std::string render_decision(const DecisionArtifact& d) {
  std::ostringstream o;
  o << "Claimed " << d.claimed << ", queried " << d.model << ": " << d.decision.shot
    << "-shot mean " << format2(d.decision.mean) << " vs band [" << format2(d.decision.band.low)
    << ", " << format2(d.decision.band.high) << "] -> " << (d.decision.verdict ? "True" : "False")
    << "\n";
  return o.str();
}

std::string render_evaluation(const EvaluationArtifact& a) {
  std::ostringstream o;
  o << "## " << (a.setting == "open" ? "Open-set" : "Closed-set") << " verification ("
    << a.trials << " trials per target)\n\n";
  for (int k : a.shots) {
    o << "### " << k << "-shot\n\n| Model | Accuracy | Precision | Recall | F1 |\n"
      << "|---|---|---|---|---|\n";
    auto line = [&](const std::string& name, const MetricsReport& m) {
      o << "| " << name << " | " << format2(m.accuracy) << " | " << format2(m.precision) << " | "
        << format2(m.recall) << " | " << format2(m.f1_score) << " |\n";
    };
    for (const auto& row : a.rows) {
      const auto it = row.metrics.find(k);
      if (it != row.metrics.end()) line(row.target, it->second);
    }
    const auto avg = a.average.find(k);
    if (avg != a.average.end()) line("Average", avg->second);
    o << "\n";
  }
  if (!a.attacks.empty()) {
    o << "### Attack comparison (mean CLIP-text score drop)\n\n"
      << "| Model | No attack | Random | Greedy | TVN | Greedy off-target | TVN off-target | "
         "TVN held-out |\n|---|---|---|---|---|---|---|---|\n";
    for (const auto& r : a.attacks) {
      o << "| " << r.target << " | " << format2(r.no_attack) << " | " << format2(r.random_drop)
        << " | " << format2(r.greedy_drop) << " | " << format2(r.tvn_drop) << " | "
        << format2(r.greedy_off_target) << " | " << format2(r.tvn_off_target) << " | "
        << format2(r.tvn_held_out) << " |\n";
    }
    o << "\n";
  }
  return o.str();
}

std::string render_trace(const std::string& jsonl) {
  using detail::json;
  std::ostringstream o;
  o << "| Prompt | Generation | best f1 | f2 | f3 | Front sizes |\n|---|---|---|---|---|---|\n";
  std::istringstream in(jsonl);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
      const auto& b = j.at("best");
      std::string fronts;
      for (const auto& f : j.at("front_sizes")) {
        fronts += (fronts.empty() ? "" : " ") + std::to_string(f.get<std::size_t>());
      }
      o << "| " << j.at("prompt").get<std::size_t>() << " | " << j.at("generation").get<int>()
        << " | " << fmt("%.4f", b.at("f1").get<double>()) << " | "
        << fmt("%.4f", b.at("f2").get<double>()) << " | " << fmt("%.4f", b.at("f3").get<double>())
        << " | " << fronts << " |\n";
    } catch (const json::exception& e) {
      throw ConfigError("trace line " + std::to_string(n + 1) + ": " + e.what());
    }
    ++n;
  }
  return o.str();
}

std::string render_artifact(const std::string& text) {
  const std::string kind = artifact_kind(text);
  if (kind == "prompt") return render_prompt(prompt_from_json(text));
  if (kind == "band") return render_band(band_from_json(text), {});
  if (kind == "decision") return render_decision(decision_from_json(text));
  if (kind == "evaluation") return render_evaluation(evaluation_from_json(text));
  if (kind == "zoo") {
    const Zoo zoo = zoo_from_json(text);
    std::ostringstream o;
    o << "| Model | Set | Encoder seed | Noise SD |\n|---|---|---|---|\n";
    for (const auto* set : {&zoo.closed, &zoo.open}) {
      for (const auto& m : *set) {
        o << "| " << m.id.name << " | " << (set == &zoo.closed ? "closed" : "open") << " | "
          << m.encoder.seed << " | " << fmt("%.4f", m.noise_sigma) << " |\n";
      }
    }
    o << "| " << zoo.reference_id.name << " | reference | " << zoo.reference.seed << " | - |\n";
    return o.str();
  }
  if (kind == "manifest") {
    const RunManifest m = manifest_from_json(text);
    std::ostringstream o;
    o << "Run `" << m.command << "` (seed " << m.seed << "): " << m.status;
    if (!m.error.empty()) o << " - " << m.error;
    o << "\n\n";
    for (const auto& [name, path] : m.artifacts) o << "- " << name << ": " << path << "\n";
    return o.str();
  }
  throw ConfigError("cannot render artifact of kind '" + kind + "'");
}

}  // namespace tvn
