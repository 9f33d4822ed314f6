#include "tvn/embedding.hpp"

#include <algorithm>
#include <cmath>

#include "tvn/error.hpp"

namespace tvn {

std::string_view to_string(EncoderKind kind) {
  return kind == EncoderKind::kSynthetic ? "synthetic" : "remote";
}

Embedding Encoder::encode_one(const std::string& text) const {
  auto out = encode(std::span<const std::string>(&text, 1));
  return std::move(out.front());
}

double cosine(const Embedding& a, const Embedding& b) {
  if (a.dim() != b.dim()) {
    throw ConfigError("cosine of embeddings with dimensions " + std::to_string(a.dim()) +
                      " and " + std::to_string(b.dim()));
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) dot += a.values[i] * b.values[i];
  return std::clamp(dot, -1.0, 1.0);
}

Embedding normalized(std::vector<double> v) {
  double sq = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) throw ProtocolError("embedding has non-finite entries");
    sq += x * x;
  }
  if (!(sq > 0.0)) throw ProtocolError("embedding has zero norm");
  const double norm = std::sqrt(sq);
  for (double& x : v) x /= norm;
  return Embedding{std::move(v)};
}

void check_encode_batch(std::span<const std::string> texts) {
  if (texts.empty()) throw ConfigError("encode called with an empty batch");
  for (const auto& t : texts) {
    if (t.empty()) throw ConfigError("encode called with an empty text");
  }
}

}  // namespace tvn
