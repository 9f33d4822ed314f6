#include "tvn/objectives.hpp"

#include <algorithm>
#include <future>

#include "tvn/error.hpp"

namespace tvn {

namespace {

std::vector<std::string> render_all(const ObjectiveContext& ctx, std::span<const Suffix> suffixes) {
  std::vector<std::string> texts;
  texts.reserve(suffixes.size());
  for (const auto& s : suffixes) texts.push_back(compose(ctx.base_prompt(), s, ctx.alphabet()));
  return texts;
}

std::vector<double> cosines_to(const Encoder& enc, const std::vector<std::string>& texts,
                               const Embedding& base) {
  const auto embs = enc.encode(texts);
  if (embs.size() != texts.size()) {
    throw ProtocolError("encoder '" + enc.id().name + "' returned " +
                        std::to_string(embs.size()) + " embeddings for " +
                        std::to_string(texts.size()) + " texts");
  }
  std::vector<double> out;
  out.reserve(embs.size());
  for (const auto& e : embs) out.push_back(cosine(e, base));
  return out;
}

double aggregate(SubstituteAggregation mode, const std::vector<double>& values) {
  if (mode == SubstituteAggregation::kMin) return *std::min_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace

ObjectiveContext::ObjectiveContext(std::string base_prompt, EncoderPtr target,
                                   std::vector<EncoderPtr> substitutes, EncoderPtr reference,
                                   Alphabet alphabet, SubstituteAggregation aggregation)
    : base_prompt_(std::move(base_prompt)),
      target_(std::move(target)),
      substitutes_(std::move(substitutes)),
      reference_(std::move(reference)),
      alphabet_(std::move(alphabet)),
      aggregation_(aggregation) {
  if (base_prompt_.empty()) throw ConfigError("base prompt must not be empty");
  if (!target_ || !reference_) throw ConfigError("target and reference encoders are required");
  if (substitutes_.empty()) throw ConfigError("at least one substitute encoder is required");
  for (const auto& s : substitutes_) {
    if (!s) throw ConfigError("null substitute encoder");
    if (s->id().name == target_->id().name) {
      throw ConfigError("target '" + target_->id().name + "' listed among substitutes");
    }
    if (s->id().name == reference_->id().name) reference_is_substitute_ = true;
  }
  base_target_ = target_->encode_one(base_prompt_);
  for (const auto& s : substitutes_) base_substitutes_.push_back(s->encode_one(base_prompt_));
  base_reference_ = reference_->encode_one(base_prompt_);
}

double eval_f1(const ObjectiveContext& ctx, const Suffix& suffix) {
  return cosine(ctx.target().encode_one(compose(ctx.base_prompt(), suffix, ctx.alphabet())),
                ctx.base_target());
}

std::vector<double> substitute_cosines(const ObjectiveContext& ctx, const Suffix& suffix) {
  const std::string text = compose(ctx.base_prompt(), suffix, ctx.alphabet());
  std::vector<double> out;
  for (std::size_t i = 0; i < ctx.substitutes().size(); ++i) {
    out.push_back(cosine(ctx.substitutes()[i]->encode_one(text), ctx.base_substitutes()[i]));
  }
  return out;
}

double eval_f2(const ObjectiveContext& ctx, const Suffix& suffix) {
  return aggregate(ctx.aggregation(), substitute_cosines(ctx, suffix));
}

double eval_f3(const ObjectiveContext& ctx, const Suffix& suffix) {
  return cosine(ctx.reference().encode_one(compose(ctx.base_prompt(), suffix, ctx.alphabet())),
                ctx.base_reference());
}

ObjectiveVector eval_vector(const ObjectiveContext& ctx, const Suffix& suffix) {
  return eval_batch(ctx, std::span<const Suffix>(&suffix, 1)).front();
}

std::vector<double> eval_f1_batch(const ObjectiveContext& ctx, std::span<const Suffix> suffixes) {
  if (suffixes.empty()) return {};
  return cosines_to(ctx.target(), render_all(ctx, suffixes), ctx.base_target());
}

std::vector<ObjectiveVector> eval_batch(const ObjectiveContext& ctx,
                                        std::span<const Suffix> suffixes) {
  if (suffixes.empty()) return {};
  const auto texts = render_all(ctx, suffixes);
  const std::size_t n_sub = ctx.substitutes().size();

  using Column = std::vector<double>;
  auto f1_job = std::async(std::launch::async, [&] {
    return cosines_to(ctx.target(), texts, ctx.base_target());
  });
  auto f3_job = std::async(std::launch::async, [&] {
    return cosines_to(ctx.reference(), texts, ctx.base_reference());
  });
  std::vector<std::future<Column>> sub_jobs;
  sub_jobs.reserve(n_sub);
  for (std::size_t j = 0; j < n_sub; ++j) {
    sub_jobs.push_back(std::async(std::launch::async, [&, j] {
      return cosines_to(*ctx.substitutes()[j], texts, ctx.base_substitutes()[j]);
    }));
  }
  // get() in a fixed order; the first failure propagates after all joins.
  std::vector<Column> subs;
  subs.reserve(n_sub);
  std::exception_ptr failure;
  auto collect = [&](std::future<Column>& f) -> Column {
    try {
      return f.get();
    } catch (...) {
      if (!failure) failure = std::current_exception();
      return {};
    }
  };
  Column f1 = collect(f1_job);
  Column f3 = collect(f3_job);
  for (auto& job : sub_jobs) subs.push_back(collect(job));
  if (failure) std::rethrow_exception(failure);

  std::vector<ObjectiveVector> out(suffixes.size());
  Column per(n_sub);
  for (std::size_t i = 0; i < suffixes.size(); ++i) {
    for (std::size_t j = 0; j < n_sub; ++j) per[j] = subs[j][i];
    out[i] = ObjectiveVector{f1[i], -aggregate(ctx.aggregation(), per), -f3[i]};
  }
  return out;
}

}  // namespace tvn
