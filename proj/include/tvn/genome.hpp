#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tvn/random.hpp"

namespace tvn {

// Ordered set of characters a suffix may draw from. Printable ASCII only,
// no whitespace, no duplicates.
class Alphabet {
 public:
  explicit Alphabet(std::string chars);

  // [a-zA-Z0-9]
  static const Alphabet& alphanumeric();

  std::size_t size() const { return chars_.size(); }
  char char_at(std::size_t i) const { return chars_.at(i); }
  const std::string& chars() const { return chars_; }
  // Index of c, or size() when c is not in the alphabet.
  std::size_t index_of(char c) const;

  // "alnum62" for the default alphabet, otherwise "custom:<chars>".
  std::string identifier() const;
  static Alphabet from_identifier(std::string_view id);

  bool operator==(const Alphabet& other) const { return chars_ == other.chars_; }

 private:
  std::string chars_;
};

// The perturbation: a fixed-length sequence of alphabet indices.
struct Suffix {
  std::vector<std::uint16_t> genes;

  std::size_t length() const { return genes.size(); }
  bool operator==(const Suffix&) const = default;
  auto operator<=>(const Suffix&) const = default;
};

// Throws InvalidGenomeError if any gene is outside the alphabet.
void validate(const Suffix& suffix, const Alphabet& alphabet);

std::string decode(const Suffix& suffix, const Alphabet& alphabet);
Suffix encode_suffix(std::string_view text, const Alphabet& alphabet);

// base + " " + decoded suffix.
std::string compose(std::string_view base, const Suffix& suffix, const Alphabet& alphabet);

struct AdversarialPrompt {
  std::string base;
  Suffix suffix;

  std::string render(const Alphabet& alphabet) const { return compose(base, suffix, alphabet); }
};

// Independent uniform gene draws. length may be 0 (degenerate, no perturbation).
Suffix random_suffix(Rng& rng, const Alphabet& alphabet, int length);
Suffix random_suffix(std::uint64_t seed, const Alphabet& alphabet, int length);

// Uniform crossover: each position swaps between the children with p = 0.5.
std::pair<Suffix, Suffix> crossover(const Suffix& a, const Suffix& b, Rng& rng);

// Each position is resampled uniformly from the alphabet with probability rate.
Suffix mutate(const Suffix& s, double rate, const Alphabet& alphabet, Rng& rng);

}  // namespace tvn
