#include "tvn/remote.hpp"

#include <cmath>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "tvn/error.hpp"

namespace tvn {

namespace {

using nlohmann::json;

bool retryable(int status) { return status == 429 || status >= 500; }

std::string error_message(const std::string& body) {
  try {
    const auto j = json::parse(body);
    if (j.is_object() && j.contains("error") && j["error"].is_string()) {
      return j["error"].get<std::string>();
    }
  } catch (const json::exception&) {
  }
  return body.substr(0, 200);
}

json parse_reply(const std::string& body, const std::string& label) {
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw ProtocolError(label + ": malformed JSON reply: " + e.what());
  }
}

}  // namespace

HttpEndpoint::HttpEndpoint(std::string url, std::string label, RetryPolicy retry)
    : url_(std::move(url)), label_(std::move(label)), retry_(retry) {
  const auto scheme_end = url_.find("://");
  if (scheme_end == std::string::npos || url_.substr(0, scheme_end) != "http") {
    throw ConfigError("endpoint '" + url_ + "' must be an http:// URL");
  }
  const auto path_start = url_.find('/', scheme_end + 3);
  origin_ = url_.substr(0, path_start);
  prefix_ = path_start == std::string::npos ? "" : url_.substr(path_start);
  while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  if (origin_.size() <= scheme_end + 3) throw ConfigError("endpoint '" + url_ + "' has no host");
  if (retry_.max_attempts < 1) throw ConfigError("retry policy needs at least one attempt");
}

std::string HttpEndpoint::get(const std::string& path) const { return request("GET", path, nullptr); }

std::string HttpEndpoint::post(const std::string& path, const std::string& json_body) const {
  return request("POST", path, &json_body);
}

std::string HttpEndpoint::request(const std::string& method, const std::string& path,
                                  const std::string* body) const {
  const std::string full = prefix_ + path;
  auto backoff = retry_.initial_backoff;
  std::string last_error;
  for (int attempt = 1; attempt <= retry_.max_attempts; ++attempt) {
    httplib::Client client(origin_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(retry_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(retry_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    auto res = body ? client.Post(full, *body, "application/json") : client.Get(full);
    if (!res) {
      last_error = httplib::to_string(res.error());
    } else if (res->status >= 200 && res->status < 300) {
      return res->body;
    } else {
      last_error = "HTTP " + std::to_string(res->status) + ": " + error_message(res->body);
      if (!retryable(res->status)) break;
    }
    if (attempt < retry_.max_attempts) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  throw TransportError(label_ + ": " + method + " " + url_ + path + " failed: " + last_error);
}

RemoteEncoder::RemoteEncoder(std::string name, std::string url, std::size_t max_in_flight,
                             RetryPolicy retry)
    : id_{name, EncoderKind::kRemote},
      http_(std::move(url), "encoder '" + name + "'", retry),
      max_in_flight_(max_in_flight) {
  if (max_in_flight_ < 1) throw ConfigError("max_in_flight must be >= 1");
  const auto reply = parse_reply(http_.get("/health"), http_.label());
  if (!reply.is_object() || reply.value("status", "") != "ok" || !reply.contains("dim") ||
      !reply["dim"].is_number_integer() || reply["dim"].get<long long>() < 1) {
    throw ProtocolError(http_.label() + ": /health reply lacks status \"ok\" or a positive dim");
  }
  dim_ = reply["dim"].get<std::size_t>();
  if (reply.contains("model") && reply["model"].is_string()) model_ = reply["model"];
}

std::vector<Embedding> RemoteEncoder::encode(std::span<const std::string> texts) const {
  check_encode_batch(texts);
  {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return in_flight_ < max_in_flight_; });
    ++in_flight_;
  }
  struct Release {
    const RemoteEncoder* self;
    ~Release() {
      {
        std::lock_guard lock(self->mu_);
        --self->in_flight_;
      }
      self->cv_.notify_one();
    }
  } release{this};

  const json request = {{"texts", std::vector<std::string>(texts.begin(), texts.end())}};
  const auto reply = parse_reply(http_.post("/encode", request.dump()), http_.label());
  if (!reply.is_object() || !reply.contains("embeddings") || !reply["embeddings"].is_array()) {
    throw ProtocolError(http_.label() + ": /encode reply lacks an embeddings array");
  }
  const auto& rows = reply["embeddings"];
  if (rows.size() != texts.size()) {
    throw ProtocolError(http_.label() + ": /encode returned " + std::to_string(rows.size()) +
                        " embeddings for " + std::to_string(texts.size()) + " texts");
  }
  std::vector<Embedding> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    if (!row.is_array() || row.size() != dim_) {
      throw ProtocolError(http_.label() + ": embedding dimension " +
                          std::to_string(row.is_array() ? row.size() : 0) +
                          " does not match declared dim " + std::to_string(dim_));
    }
    std::vector<double> v;
    v.reserve(dim_);
    double sq = 0.0;
    for (const auto& x : row) {
      if (!x.is_number()) throw ProtocolError(http_.label() + ": non-numeric embedding entry");
      const double d = x.get<double>();
      if (!std::isfinite(d)) throw ProtocolError(http_.label() + ": non-finite embedding entry");
      sq += d * d;
      v.push_back(d);
    }
    if (std::abs(std::sqrt(sq) - 1.0) > 1e-3) {
      throw ProtocolError(http_.label() + ": embedding is not unit-norm (norm " +
                          std::to_string(std::sqrt(sq)) + ")");
    }
    out.push_back(normalized(std::move(v)));
  }
  return out;
}

RemoteScoringModel::RemoteScoringModel(std::string name, std::string url, RetryPolicy retry)
    : name_(name), http_(std::move(url), "scorer '" + name + "'", retry) {}

double RemoteScoringModel::score(const std::string& prompt, const std::string& clean_text,
                                 Rng& /*rng*/) const {
  const json request = {{"prompt", prompt}, {"text", clean_text}};
  const auto reply = parse_reply(http_.post("/score", request.dump()), http_.label());
  if (!reply.is_object() || !reply.contains("score") || !reply["score"].is_number()) {
    throw ProtocolError(http_.label() + ": /score reply lacks a numeric score");
  }
  const double s = reply["score"].get<double>();
  if (!std::isfinite(s)) throw ProtocolError(http_.label() + ": non-finite score");
  return s;
}

}  // namespace tvn
