#include "tvn/artifacts.hpp"

#include <cerrno>
#include <cmath>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include <fcntl.h>
#include <unistd.h>

#include "json_util.hpp"

namespace tvn {

namespace {

using detail::json;
using detail::StrictReader;

json header(const char* kind) {
  json j;
  j["schema"] = kSchemaVersion;
  j["kind"] = kind;
  return j;
}

json parse(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(what + " is not valid JSON: " + e.what());
  }
}

void check_header(StrictReader& r, const std::string& kind) {
  const auto schema = r.required<std::string>("schema");
  if (schema != kSchemaVersion) {
    throw ConfigError(r.where() + ": unsupported schema '" + schema + "'");
  }
  const auto k = r.required<std::string>("kind");
  if (k != kind) throw ConfigError(r.where() + ": expected kind '" + kind + "', got '" + k + "'");
}

json spec_json(const SyntheticEncoderSpec& s) {
  return {{"seed", s.seed},
          {"dim", s.dim},
          {"alpha", s.alpha},
          {"trigger_rate", s.trigger_rate},
          {"trigger_gain", s.trigger_gain},
          {"shared_trigger_rate", s.shared_trigger_rate},
          {"shared_trigger_gain", s.shared_trigger_gain}};
}

SyntheticEncoderSpec spec_from(const json& j, const std::string& where) {
  StrictReader r(j, where);
  SyntheticEncoderSpec s;
  s.seed = r.required<std::uint64_t>("seed");
  s.dim = r.required<std::size_t>("dim");
  s.alpha = r.required<double>("alpha");
  s.trigger_rate = r.required<double>("trigger_rate");
  s.trigger_gain = r.required<std::int64_t>("trigger_gain");
  s.shared_trigger_rate = r.required<double>("shared_trigger_rate");
  s.shared_trigger_gain = r.required<std::int64_t>("shared_trigger_gain");
  r.finish();
  s.validate();
  return s;
}

json band_json(const ThresholdBand& b) {
  return {{"mu", b.mu}, {"sigma", b.sigma}, {"low", b.low}, {"high", b.high}};
}

ThresholdBand band_from(const json& j, const std::string& where) {
  StrictReader r(j, where);
  ThresholdBand b;
  b.mu = r.required<double>("mu");
  b.sigma = r.required<double>("sigma");
  b.low = r.required<double>("low");
  b.high = r.required<double>("high");
  r.finish();
  if (!b.consistent()) throw ConfigError(where + ": band is inconsistent");
  return b;
}

json objectives_json(const ObjectiveVector& o) {
  return {{"f1", o.f1()}, {"f2", o.f2()}, {"f3", o.f3()}};
}

json metrics_json(const MetricsReport& m) {
  return {{"accuracy", m.accuracy}, {"precision", m.precision}, {"recall", m.recall},
          {"f1", m.f1_score},       {"tp", m.tp},               {"fp", m.fp},
          {"tn", m.tn},             {"fn", m.fn}};
}

MetricsReport metrics_from(const json& j, const std::string& where) {
  StrictReader r(j, where);
  MetricsReport m;
  m.accuracy = r.required<double>("accuracy");
  m.precision = r.required<double>("precision");
  m.recall = r.required<double>("recall");
  m.f1_score = r.required<double>("f1");
  m.tp = r.required<std::int64_t>("tp");
  m.fp = r.required<std::int64_t>("fp");
  m.tn = r.required<std::int64_t>("tn");
  m.fn = r.required<std::int64_t>("fn");
  r.finish();
  return m;
}

json metrics_map_json(const std::map<int, MetricsReport>& m) {
  json j = json::object();
  for (const auto& [k, v] : m) j[std::to_string(k)] = metrics_json(v);
  return j;
}

std::map<int, MetricsReport> metrics_map_from(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  std::map<int, MetricsReport> out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    int k = 0;
    try {
      std::size_t used = 0;
      k = std::stoi(it.key(), &used);
      if (used != it.key().size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ConfigError(where + ": shot key '" + it.key() + "' is not an integer");
    }
    out[k] = metrics_from(it.value(), where + "." + it.key());
  }
  return out;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::string zoo_to_json(const Zoo& zoo) {
  json j = header("zoo");
  j["seed"] = zoo.seed;
  auto models = [](const std::vector<SimModel>& ms) {
    json arr = json::array();
    for (const auto& m : ms) {
      arr.push_back({{"id", m.id.name}, {"encoder", spec_json(m.encoder)},
                     {"noise_sigma", m.noise_sigma}});
    }
    return arr;
  };
  j["closed"] = models(zoo.closed);
  j["open"] = models(zoo.open);
  j["reference"] = {{"id", zoo.reference_id.name}, {"encoder", spec_json(zoo.reference)}};
  j["score"] = {{"offset", zoo.score.offset},
                {"scale", zoo.score.scale},
                {"clamp_low", zoo.score.clamp_low},
                {"clamp_high", zoo.score.clamp_high}};
  return dump(j);
}

Zoo zoo_from_json(const std::string& text) {
  const json doc = parse(text, "zoo manifest");
  StrictReader r(doc, "zoo");
  check_header(r, "zoo");
  Zoo zoo;
  zoo.seed = r.required<std::uint64_t>("seed");
  auto models = [](const json& arr, const std::string& where) {
    if (!arr.is_array()) throw ConfigError(where + ": expected an array");
    std::vector<SimModel> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string w = where + "[" + std::to_string(i) + "]";
      StrictReader m(arr[i], w);
      SimModel sm;
      sm.id = EncoderId{m.required<std::string>("id"), EncoderKind::kSynthetic};
      sm.encoder = spec_from(m.object("encoder"), w + ".encoder");
      sm.noise_sigma = m.required<double>("noise_sigma");
      m.finish();
      if (!(sm.noise_sigma >= 0.0)) throw ConfigError(w + ": noise_sigma must be >= 0");
      out.push_back(std::move(sm));
    }
    return out;
  };
  zoo.closed = models(r.object("closed"), "zoo.closed");
  zoo.open = models(r.object("open"), "zoo.open");
  {
    StrictReader ref(r.object("reference"), "zoo.reference");
    zoo.reference_id = EncoderId{ref.required<std::string>("id"), EncoderKind::kSynthetic};
    zoo.reference = spec_from(ref.object("encoder"), "zoo.reference.encoder");
    ref.finish();
  }
  {
    StrictReader s(r.object("score"), "zoo.score");
    zoo.score.offset = s.required<double>("offset");
    zoo.score.scale = s.required<double>("scale");
    zoo.score.clamp_low = s.required<double>("clamp_low");
    zoo.score.clamp_high = s.required<double>("clamp_high");
    s.finish();
    zoo.score.validate();
  }
  r.finish();
  if (zoo.closed.size() < 2) throw ConfigError("zoo: needs at least two closed-set models");
  std::set<std::string> ids{zoo.reference_id.name};
  for (const auto* set : {&zoo.closed, &zoo.open}) {
    for (const auto& m : *set) {
      if (!ids.insert(m.id.name).second) throw ConfigError("zoo: duplicate model id " + m.id.name);
    }
  }
  return zoo;
}

std::string PromptArtifact::adversarial_prompt() const {
  const auto& p = best_prompt();
  return p.base + " " + p.suffix;
}

std::string prompt_to_json(const PromptArtifact& a) {
  json j = header("prompt");
  j["target"] = a.target;
  j["substitutes"] = a.substitutes;
  j["reference"] = a.reference;
  j["alphabet"] = a.alphabet;
  j["suffix_length"] = a.suffix_length;
  j["generations_run"] = a.generations_run;
  j["unevolved"] = a.unevolved;
  json prompts = json::array();
  for (const auto& p : a.prompts) {
    json e = {{"base", p.base},
              {"suffix", p.suffix},
              {"no_attack_score", p.no_attack_score},
              {"candidate_score", p.candidate_score},
              {"f2_floor_used", p.f2_floor_used},
              {"pool_size", p.pool_size},
              {"survivors", p.survivors}};
    e.update(objectives_json(p.objectives));
    e["target_drop"] = p.target_drop ? json(*p.target_drop) : json(nullptr);
    prompts.push_back(std::move(e));
  }
  j["prompts"] = std::move(prompts);
  j["best"] = a.best;
  // Flattened copy of the best entry.
  if (!a.prompts.empty()) {
    const auto& b = a.best_prompt();
    j["base"] = b.base;
    j["suffix"] = b.suffix;
    j.update(objectives_json(b.objectives));
    j["target_drop"] = b.target_drop ? json(*b.target_drop) : json(nullptr);
  }
  return dump(j);
}

PromptArtifact prompt_from_json(const std::string& text) {
  const json doc = parse(text, "prompt artifact");
  StrictReader r(doc, "prompt");
  check_header(r, "prompt");
  PromptArtifact a;
  a.target = r.required<std::string>("target");
  a.substitutes = r.required<std::vector<std::string>>("substitutes");
  a.reference = r.required<std::string>("reference");
  a.alphabet = r.required<std::string>("alphabet");
  a.suffix_length = r.required<int>("suffix_length");
  a.generations_run = r.required<int>("generations_run");
  a.unevolved = r.required<bool>("unevolved");
  const json& prompts = r.object("prompts");
  if (!prompts.is_array() || prompts.empty()) {
    throw ConfigError("prompt: 'prompts' must be a non-empty array");
  }
  const Alphabet alphabet = Alphabet::from_identifier(a.alphabet);
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    const std::string w = "prompt.prompts[" + std::to_string(i) + "]";
    StrictReader e(prompts[i], w);
    PromptResult p;
    p.base = e.required<std::string>("base");
    p.suffix = e.required<std::string>("suffix");
    p.objectives.g1 = e.required<double>("f1");
    p.objectives.g2 = -e.required<double>("f2");
    p.objectives.g3 = -e.required<double>("f3");
    const json& drop = e.object("target_drop");
    if (!drop.is_null()) p.target_drop = drop.get<double>();
    p.no_attack_score = e.required<double>("no_attack_score");
    p.candidate_score = e.required<double>("candidate_score");
    p.f2_floor_used = e.required<double>("f2_floor_used");
    p.pool_size = e.required<std::size_t>("pool_size");
    p.survivors = e.required<std::size_t>("survivors");
    e.finish();
    if (static_cast<int>(p.suffix.size()) != a.suffix_length) {
      throw ConfigError(w + ": suffix length does not match suffix_length");
    }
    encode_suffix(p.suffix, alphabet);  // throws on foreign characters
    a.prompts.push_back(std::move(p));
  }
  a.best = r.required<std::size_t>("best");
  if (a.best >= a.prompts.size()) throw ConfigError("prompt: 'best' is out of range");
  // The flattened copy must agree with the indexed entry.
  const auto& b = a.best_prompt();
  if (r.required<std::string>("base") != b.base || r.required<std::string>("suffix") != b.suffix) {
    throw ConfigError("prompt: flattened best entry disagrees with prompts[best]");
  }
  r.skip("f1");
  r.skip("f2");
  r.skip("f3");
  r.skip("target_drop");
  r.finish();
  return a;
}

std::string band_to_json(const BandArtifact& a) {
  json j = header("band");
  j["target"] = a.target;
  j["prompt"] = a.prompt;
  j["clean_text"] = a.clean_text;
  j["samples"] = a.scores.size();
  j["scores"] = a.scores;
  j["band"] = band_json(a.band);
  return dump(j);
}

BandArtifact band_from_json(const std::string& text) {
  const json doc = parse(text, "band artifact");
  StrictReader r(doc, "band");
  check_header(r, "band");
  BandArtifact a;
  a.target = r.required<std::string>("target");
  a.prompt = r.required<std::string>("prompt");
  a.clean_text = r.required<std::string>("clean_text");
  const auto samples = r.required<std::size_t>("samples");
  a.scores = r.required<std::vector<double>>("scores");
  a.band = band_from(r.object("band"), "band.band");
  r.finish();
  if (samples != a.scores.size()) throw ConfigError("band: 'samples' does not match scores");
  return a;
}

bool DecisionArtifact::operator==(const DecisionArtifact& o) const {
  const auto& a = decision;
  const auto& b = o.decision;
  return claimed == o.claimed && model == o.model && prompt == o.prompt &&
         clean_text == o.clean_text && a.claimed == b.claimed &&
         a.observed_scores == b.observed_scores && a.shot == b.shot && a.mean == b.mean &&
         a.verdict == b.verdict && a.band == b.band;
}

std::string decision_to_json(const DecisionArtifact& a) {
  json j = header("decision");
  j["claimed"] = a.claimed;
  j["model"] = a.model;
  j["prompt"] = a.prompt;
  j["clean_text"] = a.clean_text;
  j["shot"] = a.decision.shot;
  j["scores"] = a.decision.observed_scores;
  j["mean"] = a.decision.mean;
  j["verdict"] = a.decision.verdict;
  j["band"] = band_json(a.decision.band);
  return dump(j);
}

DecisionArtifact decision_from_json(const std::string& text) {
  const json doc = parse(text, "decision artifact");
  StrictReader r(doc, "decision");
  check_header(r, "decision");
  DecisionArtifact a;
  a.claimed = r.required<std::string>("claimed");
  a.model = r.required<std::string>("model");
  a.prompt = r.required<std::string>("prompt");
  a.clean_text = r.required<std::string>("clean_text");
  a.decision.claimed = a.claimed;
  a.decision.shot = r.required<int>("shot");
  a.decision.observed_scores = r.required<std::vector<double>>("scores");
  a.decision.mean = r.required<double>("mean");
  a.decision.verdict = r.required<bool>("verdict");
  a.decision.band = band_from(r.object("band"), "decision.band");
  r.finish();
  if (static_cast<std::size_t>(a.decision.shot) != a.decision.observed_scores.size()) {
    throw ConfigError("decision: 'shot' does not match the number of scores");
  }
  return a;
}

std::string evaluation_to_json(const EvaluationArtifact& a) {
  json j = header("evaluation");
  j["setting"] = a.setting;
  j["trials"] = a.trials;
  j["shots"] = a.shots;
  j["negatives"] = a.negatives;
  json rows = json::array();
  for (const auto& row : a.rows) {
    rows.push_back({{"target", row.target},
                    {"prompt", row.prompt},
                    {"band", band_json(row.band)},
                    {"metrics", metrics_map_json(row.metrics)}});
  }
  j["rows"] = std::move(rows);
  j["average"] = metrics_map_json(a.average);
  json attacks = json::array();
  for (const auto& at : a.attacks) {
    attacks.push_back({{"target", at.target},
                       {"base", at.base},
                       {"no_attack", at.no_attack},
                       {"random_drop", at.random_drop},
                       {"greedy_drop", at.greedy_drop},
                       {"tvn_drop", at.tvn_drop},
                       {"greedy_off_target", at.greedy_off_target},
                       {"tvn_off_target", at.tvn_off_target},
                       {"tvn_held_out", at.tvn_held_out},
                       {"tvn_substitute_drops", at.tvn_substitute_drops}});
  }
  j["attacks"] = std::move(attacks);
  return dump(j);
}

EvaluationArtifact evaluation_from_json(const std::string& text) {
  const json doc = parse(text, "evaluation artifact");
  StrictReader r(doc, "evaluation");
  check_header(r, "evaluation");
  EvaluationArtifact a;
  a.setting = r.required<std::string>("setting");
  a.trials = r.required<int>("trials");
  a.shots = r.required<std::vector<int>>("shots");
  a.negatives = r.required<std::vector<std::string>>("negatives");
  const json& rows = r.object("rows");
  if (!rows.is_array()) throw ConfigError("evaluation: 'rows' must be an array");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string w = "evaluation.rows[" + std::to_string(i) + "]";
    StrictReader e(rows[i], w);
    VerificationRow row;
    row.target = e.required<std::string>("target");
    row.prompt = e.required<std::string>("prompt");
    row.band = band_from(e.object("band"), w + ".band");
    row.metrics = metrics_map_from(e.object("metrics"), w + ".metrics");
    e.finish();
    a.rows.push_back(std::move(row));
  }
  a.average = metrics_map_from(r.object("average"), "evaluation.average");
  const json& attacks = r.object("attacks");
  if (!attacks.is_array()) throw ConfigError("evaluation: 'attacks' must be an array");
  for (std::size_t i = 0; i < attacks.size(); ++i) {
    StrictReader e(attacks[i], "evaluation.attacks[" + std::to_string(i) + "]");
    AttackRow at;
    at.target = e.required<std::string>("target");
    at.base = e.required<std::string>("base");
    at.no_attack = e.required<double>("no_attack");
    at.random_drop = e.required<double>("random_drop");
    at.greedy_drop = e.required<double>("greedy_drop");
    at.tvn_drop = e.required<double>("tvn_drop");
    at.greedy_off_target = e.required<double>("greedy_off_target");
    at.tvn_off_target = e.required<double>("tvn_off_target");
    at.tvn_held_out = e.required<double>("tvn_held_out");
    at.tvn_substitute_drops = e.required<std::vector<double>>("tvn_substitute_drops");
    e.finish();
    a.attacks.push_back(std::move(at));
  }
  r.finish();
  return a;
}

std::string manifest_to_json(const RunManifest& m) {
  json j = header("manifest");
  j["command"] = m.command;
  j["status"] = m.status;
  j["error"] = m.error;
  j["seed"] = m.seed;
  j["config"] = json::parse(m.config_json);
  j["zoo"] = m.zoo_json.empty() ? json(nullptr) : json::parse(m.zoo_json);
  j["endpoints"] = m.endpoints;
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  j["artifacts"] = m.artifacts;
  return dump(j);
}

RunManifest manifest_from_json(const std::string& text) {
  const json doc = parse(text, "run manifest");
  StrictReader r(doc, "manifest");
  check_header(r, "manifest");
  RunManifest m;
  m.command = r.required<std::string>("command");
  m.status = r.required<std::string>("status");
  if (m.status != "running" && m.status != "complete" && m.status != "failed") {
    throw ConfigError("manifest: unknown status '" + m.status + "'");
  }
  m.error = r.required<std::string>("error");
  m.seed = r.required<std::uint64_t>("seed");
  m.config_json = r.object("config").dump(2);
  config_from_json(m.config_json);  // validates the snapshot
  const json& zoo = r.object("zoo");
  if (!zoo.is_null()) {
    m.zoo_json = zoo.dump(2) + "\n";
    zoo_from_json(m.zoo_json);
  }
  m.endpoints = r.required<std::vector<std::string>>("endpoints");
  m.started_at = r.required<std::string>("started_at");
  m.finished_at = r.required<std::string>("finished_at");
  m.artifacts = r.required<std::map<std::string, std::string>>("artifacts");
  r.finish();
  return m;
}

std::string trace_line(std::size_t prompt_index, const GenerationTrace& t) {
  json j;
  j["prompt"] = prompt_index;
  j["generation"] = t.generation;
  j["best"] = objectives_json(t.best);
  j["front_sizes"] = t.front_sizes;
  j["best_f1_transfer_safe"] =
      std::isnan(t.best_f1_transfer_safe) ? json(nullptr) : json(t.best_f1_transfer_safe);
  return j.dump();
}

std::string artifact_kind(const std::string& text) {
  const json doc = parse(text, "artifact");
  if (!doc.is_object() || !doc.contains("kind") || !doc.at("kind").is_string()) {
    throw ConfigError("artifact has no 'kind' field");
  }
  return doc.at("kind").get<std::string>();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + path.string());
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  // Write-then-rename so readers never see a torn file.
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

DirectoryLock::DirectoryLock(const std::filesystem::path& dir) : path_(dir / ".tvn.lock") {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    if (errno == EEXIST) {
      throw IoError("output directory " + dir.string() + " is locked by another run (" +
                    path_.string() + ")");
    }
    throw IoError("cannot create lock " + path_.string() + ": " + std::strerror(errno));
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

DirectoryLock::~DirectoryLock() {
  std::error_code ec;
  std::filesystem::remove(path_, ec);
}

}  // namespace tvn
