#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <memory>
#include <mutex>
#include <string>

#include "tvn/embedding.hpp"
#include "tvn/simzoo.hpp"


namespace tvn {

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{100};
  std::chrono::milliseconds timeout{10000};
};

// JSON-over-HTTP endpoint with bounded retries on transient failures
// (connection errors, timeouts, 429 and 5xx). Non-retryable statuses and
// exhausted retries raise TransportError naming `label`.
class HttpEndpoint {
 public:
  HttpEndpoint(std::string url, std::string label, RetryPolicy retry = {});

  std::string get(const std::string& path) const;
  std::string post(const std::string& path, const std::string& json_body) const;

  const std::string& url() const { return url_; }
  const std::string& label() const { return label_; }

 private:
  std::string request(const std::string& method, const std::string& path,
                      const std::string* body) const;

  std::string url_;
  std::string origin_;  // scheme://host:port
  std::string prefix_;  // path prefix without trailing slash
  std::string label_;
  RetryPolicy retry_;
};

// Encoder served over the wire protocol:
//   GET  /health -> {"status":"ok","dim":<int>,"model":"<string>"}
//   POST /encode {"texts":[...]} -> {"embeddings":[[...],...]}
// The handshake runs at construction. At most max_in_flight batches are
// outstanding at once; extra callers block.
class RemoteEncoder : public Encoder {
 public:
  RemoteEncoder(std::string name, std::string url, std::size_t max_in_flight = 4,
                RetryPolicy retry = {});

  const EncoderId& id() const override { return id_; }
  std::size_t dim() const override { return dim_; }
  std::vector<Embedding> encode(std::span<const std::string> texts) const override;

  const std::string& model_name() const { return model_; }
  const std::string& url() const { return http_.url(); }

 private:
  EncoderId id_;
  HttpEndpoint http_;
  std::size_t dim_ = 0;
  std::string model_;
  std::size_t max_in_flight_;
  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  mutable std::size_t in_flight_ = 0;
};

// Remote generator-plus-scorer:
//   POST /score {"prompt":"...","text":"..."} -> {"score":<percent>}
class RemoteScoringModel : public T2IModel {
 public:
  RemoteScoringModel(std::string name, std::string url, RetryPolicy retry = {});

  const std::string& name() const override { return name_; }
  double score(const std::string& prompt, const std::string& clean_text, Rng& rng) const override;

 private:
  std::string name_;
  HttpEndpoint http_;
};

}  // namespace tvn
