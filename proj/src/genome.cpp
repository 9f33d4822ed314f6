#include "tvn/genome.hpp"

#include <array>

#include "tvn/error.hpp"

namespace tvn {

namespace {

constexpr std::string_view kAlnum =
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";

}  // namespace

Alphabet::Alphabet(std::string chars) : chars_(std::move(chars)) {
  if (chars_.empty()) throw ConfigError("alphabet must not be empty");
  if (chars_.size() > 65535) throw ConfigError("alphabet too large");
  std::array<bool, 256> seen{};
  for (unsigned char c : chars_) {
    if (c <= 0x20 || c >= 0x7f) {
      throw ConfigError("alphabet characters must be printable, non-space ASCII");
    }
    if (seen[c]) throw ConfigError(std::string("duplicate alphabet character '") +
                                   static_cast<char>(c) + "'");
    seen[c] = true;
  }
}

const Alphabet& Alphabet::alphanumeric() {
  static const Alphabet kDefault{std::string(kAlnum)};
  return kDefault;
}

std::size_t Alphabet::index_of(char c) const {
  const auto pos = chars_.find(c);
  return pos == std::string::npos ? chars_.size() : pos;
}

std::string Alphabet::identifier() const {
  if (chars_ == kAlnum) return "alnum62";
  return "custom:" + chars_;
}

Alphabet Alphabet::from_identifier(std::string_view id) {
  if (id == "alnum62") return alphanumeric();
  constexpr std::string_view kPrefix = "custom:";
  if (id.substr(0, kPrefix.size()) == kPrefix) {
    return Alphabet(std::string(id.substr(kPrefix.size())));
  }
  throw ConfigError("unknown alphabet identifier: " + std::string(id));
}

void validate(const Suffix& suffix, const Alphabet& alphabet) {
  for (std::size_t i = 0; i < suffix.genes.size(); ++i) {
    if (suffix.genes[i] >= alphabet.size()) {
      throw InvalidGenomeError("gene " + std::to_string(i) + " = " +
                               std::to_string(suffix.genes[i]) +
                               " outside alphabet of size " +
                               std::to_string(alphabet.size()));
    }
  }
}

std::string decode(const Suffix& suffix, const Alphabet& alphabet) {
  validate(suffix, alphabet);
  std::string out;
  out.reserve(suffix.genes.size());
  for (auto g : suffix.genes) out.push_back(alphabet.char_at(g));
  return out;
}

Suffix encode_suffix(std::string_view text, const Alphabet& alphabet) {
  Suffix s;
  s.genes.reserve(text.size());
  for (char c : text) {
    const auto idx = alphabet.index_of(c);
    if (idx == alphabet.size()) {
      throw InvalidGenomeError(std::string("character '") + c + "' not in alphabet");
    }
    s.genes.push_back(static_cast<std::uint16_t>(idx));
  }
  return s;
}

std::string compose(std::string_view base, const Suffix& suffix, const Alphabet& alphabet) {
  std::string out(base);
  out.push_back(' ');
  out += decode(suffix, alphabet);
  return out;
}

Suffix random_suffix(Rng& rng, const Alphabet& alphabet, int length) {
  if (length < 0) throw ConfigError("suffix length must be non-negative");
  Suffix s;
  s.genes.resize(static_cast<std::size_t>(length));
  for (auto& g : s.genes) g = static_cast<std::uint16_t>(rng.uniform_index(alphabet.size()));
  return s;
}

Suffix random_suffix(std::uint64_t seed, const Alphabet& alphabet, int length) {
  Rng rng(seed);
  return random_suffix(rng, alphabet, length);
}

std::pair<Suffix, Suffix> crossover(const Suffix& a, const Suffix& b, Rng& rng) {
  if (a.length() != b.length()) {
    throw InvalidGenomeError("crossover of suffixes with different lengths");
  }
  Suffix c = a;
  Suffix d = b;
  for (std::size_t i = 0; i < a.length(); ++i) {
    if (rng.bernoulli(0.5)) std::swap(c.genes[i], d.genes[i]);
  }
  return {std::move(c), std::move(d)};
}

Suffix mutate(const Suffix& s, double rate, const Alphabet& alphabet, Rng& rng) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw ConfigError("mutation rate must lie in [0, 1]");
  Suffix out = s;
  for (auto& g : out.genes) {
    if (rng.bernoulli(rate)) g = static_cast<std::uint16_t>(rng.uniform_index(alphabet.size()));
  }
  return out;
}

}  // namespace tvn
