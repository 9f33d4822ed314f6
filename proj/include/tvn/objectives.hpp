#pragma once

#include <span>
#include <string>
#include <vector>

#include "tvn/embedding.hpp"
#include "tvn/genome.hpp"

namespace tvn {

enum class SubstituteAggregation { kMean, kMin };

// Minimization vector (f1, -f2, -f3).
struct ObjectiveVector {
  double g1 = 0.0;
  double g2 = 0.0;
  double g3 = 0.0;

  double f1() const { return g1; }
  double f2() const { return -g2; }
  double f3() const { return -g3; }
  bool operator==(const ObjectiveVector&) const = default;
};

// Immutable evaluation context for one base prompt. Base encodings are
// computed once at construction.
class ObjectiveContext {
 public:
  ObjectiveContext(std::string base_prompt, EncoderPtr target, std::vector<EncoderPtr> substitutes,
                   EncoderPtr reference, Alphabet alphabet = Alphabet::alphanumeric(),
                   SubstituteAggregation aggregation = SubstituteAggregation::kMean);

  const std::string& base_prompt() const { return base_prompt_; }
  const Encoder& target() const { return *target_; }
  const EncoderPtr& target_ptr() const { return target_; }
  const std::vector<EncoderPtr>& substitutes() const { return substitutes_; }
  const Encoder& reference() const { return *reference_; }
  const Alphabet& alphabet() const { return alphabet_; }
  SubstituteAggregation aggregation() const { return aggregation_; }
  // True when the reference encoder is also one of the substitutes.
  bool reference_is_substitute() const { return reference_is_substitute_; }

  const Embedding& base_target() const { return base_target_; }
  const std::vector<Embedding>& base_substitutes() const { return base_substitutes_; }
  const Embedding& base_reference() const { return base_reference_; }

 private:
  std::string base_prompt_;
  EncoderPtr target_;
  std::vector<EncoderPtr> substitutes_;
  EncoderPtr reference_;
  Alphabet alphabet_;
  SubstituteAggregation aggregation_;
  bool reference_is_substitute_ = false;
  Embedding base_target_;
  std::vector<Embedding> base_substitutes_;
  Embedding base_reference_;
};

double eval_f1(const ObjectiveContext& ctx, const Suffix& suffix);
double eval_f2(const ObjectiveContext& ctx, const Suffix& suffix);
double eval_f3(const ObjectiveContext& ctx, const Suffix& suffix);
ObjectiveVector eval_vector(const ObjectiveContext& ctx, const Suffix& suffix);

// Per-substitute cosines between perturbed and base encodings.
std::vector<double> substitute_cosines(const ObjectiveContext& ctx, const Suffix& suffix);

// Evaluates many suffixes with exactly one encode call per encoder. Encoders
// run concurrently; results are positional and independent of completion order.
std::vector<ObjectiveVector> eval_batch(const ObjectiveContext& ctx,
                                        std::span<const Suffix> suffixes);

// f1 only, one encode call on the target.
std::vector<double> eval_f1_batch(const ObjectiveContext& ctx, std::span<const Suffix> suffixes);

}  // namespace tvn
