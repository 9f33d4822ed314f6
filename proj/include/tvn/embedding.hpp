#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tvn {

// Unit-norm text encoding.
struct Embedding {
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
  bool operator==(const Embedding&) const = default;
};

enum class EncoderKind { kSynthetic, kRemote };

struct EncoderId {
  std::string name;
  EncoderKind kind = EncoderKind::kSynthetic;

  bool operator==(const EncoderId&) const = default;
};

std::string_view to_string(EncoderKind kind);

// Text-encoder provider: maps texts to unit vectors, one per text, in order.
// Implementations must be safe to call concurrently.
class Encoder {
 public:
  virtual ~Encoder() = default;

  virtual const EncoderId& id() const = 0;
  virtual std::size_t dim() const = 0;
  virtual std::vector<Embedding> encode(std::span<const std::string> texts) const = 0;

  Embedding encode_one(const std::string& text) const;
};

using EncoderPtr = std::shared_ptr<const Encoder>;

// Dot product of unit vectors clamped to [-1, 1]. Throws on dimension mismatch.
double cosine(const Embedding& a, const Embedding& b);

// Scales v to unit L2 norm. Throws ProtocolError for zero or non-finite input.
Embedding normalized(std::vector<double> v);

// Rejects empty batches and empty texts with ConfigError.
void check_encode_batch(std::span<const std::string> texts);

}  // namespace tvn
