#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <mutex>
#include <string>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "tvn/simzoo.hpp"
#include "tvn/synthetic_encoder.hpp"

namespace tvn::testing {

struct FakeSidecarOptions {
  std::size_t dim = 512;
  std::size_t max_batch = 64;
  int fail_first = 0;          // answer 503 to this many requests first
  bool bad_norm = false;       // scale embeddings by 2
  bool drop_one = false;       // return one embedding too few
  bool wrong_dim = false;      // truncate the embedding
  bool bad_health = false;     // omit dim from /health
  std::chrono::milliseconds delay{0};
};

// In-process stand-in for the encoder/scoring sidecar.
class FakeSidecar {
 public:
  using Options = FakeSidecarOptions;


  explicit FakeSidecar(Options opt = Options{}) : opt_(opt), enc_("sidecar", spec(opt.dim)) {
    using nlohmann::json;
    server_.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
      if (fail(res)) return;
      json j = {{"status", "ok"}, {"model", "fake-clip"}};
      if (!opt_.bad_health) j["dim"] = opt_.dim;
      res.set_content(j.dump(), "application/json");
    });
    server_.Post("/encode", [this](const httplib::Request& req, httplib::Response& res) {
      if (fail(res)) return;
      const int now = ++in_flight_;
      {
        std::lock_guard lock(mu_);
        max_in_flight_ = std::max(max_in_flight_, now);
      }
      if (opt_.delay.count() > 0) std::this_thread::sleep_for(opt_.delay);
      reply_encode(req, res);
      --in_flight_;
    });
    server_.Post("/score", [this](const httplib::Request& req, httplib::Response& res) {
      if (fail(res)) return;
      json body = json::parse(req.body, nullptr, false);
      if (!body.is_object() || !body.contains("prompt") || !body.contains("text")) {
        res.status = 400;
        res.set_content(json{{"error", "prompt and text are required"}}.dump(), "application/json");
        return;
      }
      const auto p = enc_.encode_one(body["prompt"].get<std::string>());
      const auto t = enc_.encode_one(body["text"].get<std::string>());
      res.set_content(json{{"score", std::max(0.0, 33.0 * cosine(p, t))}}.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~FakeSidecar() {
    server_.stop();
    thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  int requests() const { return requests_.load(); }
  int max_in_flight() const {
    std::lock_guard lock(mu_);
    return max_in_flight_;
  }
  const SyntheticEncoder& encoder() const { return enc_; }

 private:
  static SyntheticEncoderSpec spec(std::size_t dim) {
    SyntheticEncoderSpec s;
    s.seed = 0x5eed;
    s.dim = dim;
    return s;
  }

  bool fail(httplib::Response& res) {
    if (++requests_ <= opt_.fail_first) {
      res.status = 503;
      res.set_content(R"({"error":"warming up"})", "application/json");
      return true;
    }
    return false;
  }

  void reply_encode(const httplib::Request& req, httplib::Response& res) {
    using nlohmann::json;
    json body = json::parse(req.body, nullptr, false);
    if (!body.is_object() || !body.contains("texts") || !body["texts"].is_array()) {
      res.status = 400;
      res.set_content(json{{"error", "texts must be an array"}}.dump(), "application/json");
      return;
    }
    const auto texts = body["texts"].get<std::vector<std::string>>();
    if (texts.size() > opt_.max_batch) {
      res.status = 413;
      res.set_content(json{{"error", "batch too large"}}.dump(), "application/json");
      return;
    }
    for (const auto& t : texts) {
      if (t.empty()) {
        res.status = 400;
        res.set_content(json{{"error", "empty text"}}.dump(), "application/json");
        return;
      }
    }
    json rows = json::array();
    for (const auto& e : enc_.encode(texts)) {
      std::vector<double> v = e.values;
      if (opt_.bad_norm) {
        for (auto& x : v) x *= 2.0;
      }
      if (opt_.wrong_dim) v.pop_back();
      rows.push_back(v);
    }
    if (opt_.drop_one && !rows.empty()) rows.erase(rows.end() - 1);
    res.set_content(json{{"embeddings", rows}}.dump(), "application/json");
  }

  Options opt_;
  SyntheticEncoder enc_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> requests_{0};
  std::atomic<int> in_flight_{0};
  mutable std::mutex mu_;
  int max_in_flight_ = 0;
};

}  // namespace tvn::testing
