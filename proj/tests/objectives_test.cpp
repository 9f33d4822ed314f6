#include "tvn/objectives.hpp"

#include <atomic>
#include <cmath>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "tvn/error.hpp"
#include "tvn/nsga2.hpp"
#include "tvn/simzoo.hpp"

namespace tvn {
namespace {

const Alphabet& A() { return Alphabet::alphanumeric(); }

// Fixed component encoder for crafting exact cosines.
class TableEncoder : public Encoder {
 public:
  TableEncoder(std::string name, std::function<Embedding(const std::string&)> f)
      : id_{std::move(name), EncoderKind::kSynthetic}, f_(std::move(f)) {}
  const EncoderId& id() const override { return id_; }
  std::size_t dim() const override { return 2; }
  std::vector<Embedding> encode(std::span<const std::string> texts) const override {
    calls.fetch_add(1);
    std::vector<Embedding> out;
    for (const auto& t : texts) out.push_back(f_(t));
    return out;
  }
  mutable std::atomic<int> calls{0};

 private:
  EncoderId id_;
  std::function<Embedding(const std::string&)> f_;
};

// Unit vector at cosine c from e_0 when the text carries a suffix.
std::shared_ptr<TableEncoder> at_cosine(const std::string& name, double c) {
  return std::make_shared<TableEncoder>(name, [c](const std::string& t) {
    if (t.find(' ') == std::string::npos || t.back() == ' ' || t.rfind("base", 0) != 0 ||
        t == "base") {
      return Embedding{{1.0, 0.0}};
    }
    return Embedding{{c, std::sqrt(1.0 - c * c)}};
  });
}

struct ZooCtx {
  Zoo zoo = build_default_zoo(0);
  ObjectiveContext make(const std::string& prompt = "A photo of a cat.") const {
    std::vector<EncoderPtr> subs;
    for (const auto& id : zoo.closed_ids()) {
      if (id != "sd-v1.4") subs.push_back(zoo.encoder(id));
    }
    return ObjectiveContext(prompt, zoo.encoder("sd-v1.4"), subs, zoo.reference_encoder());
  }
};

TEST(ObjectivesTest, EmptySuffixGivesUnitObjectives) {
  const ZooCtx z;
  const auto ctx = z.make();
  const ObjectiveVector v = eval_vector(ctx, Suffix{});
  EXPECT_DOUBLE_EQ(v.f1(), 1.0);
  EXPECT_DOUBLE_EQ(v.f2(), 1.0);
  EXPECT_DOUBLE_EQ(v.f3(), 1.0);
  EXPECT_DOUBLE_EQ(v.g2, -1.0);
  EXPECT_DOUBLE_EQ(v.g3, -1.0);
}

TEST(ObjectivesTest, ValuesInCosineRange) {
  const ZooCtx z;
  const auto ctx = z.make();
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const auto v = eval_vector(ctx, random_suffix(rng, A(), 5));
    for (double f : {v.f1(), v.f2(), v.f3()}) {
      EXPECT_GE(f, -1.0);
      EXPECT_LE(f, 1.0);
    }
  }
}

TEST(ObjectivesTest, SingleSubstituteIsItsCosine) {
  auto target = at_cosine("t", 0.5), sub = at_cosine("s", 0.9), ref = at_cosine("r", 0.8);
  const ObjectiveContext ctx("base", target, {sub}, ref, Alphabet("ab"));
  const Suffix s{{0, 1}};
  EXPECT_DOUBLE_EQ(eval_f1(ctx, s), 0.5);
  EXPECT_NEAR(eval_f2(ctx, s), 0.9, 1e-15);
  EXPECT_NEAR(eval_f3(ctx, s), 0.8, 1e-15);
}

TEST(ObjectivesTest, MeanAndMinAggregation) {
  auto target = at_cosine("t", 0.5), s1 = at_cosine("s1", 0.9), s2 = at_cosine("s2", 0.7);
  auto ref = at_cosine("r", 1.0);
  const Suffix s{{0}};
  const ObjectiveContext mean("base", target, {s1, s2}, ref, Alphabet("ab"));
  const auto per = substitute_cosines(mean, s);
  ASSERT_EQ(per.size(), 2u);
  EXPECT_NEAR((per[0] + per[1]) / 2.0, 0.8, 1e-15);
  EXPECT_NEAR(eval_f2(mean, s), 0.8, 1e-15);
  const ObjectiveContext mn("base", target, {s1, s2}, ref, Alphabet("ab"),
                            SubstituteAggregation::kMin);
  EXPECT_NEAR(eval_f2(mn, s), 0.7, 1e-15);
}

TEST(ObjectivesTest, ReferenceEqualToTargetMirrorsF1) {
  const Zoo zoo = build_default_zoo(0);
  const auto t = zoo.encoder("sd-v1.4");
  const ObjectiveContext ctx("A photo of a cat.", t, {zoo.encoder("sd-v2.1")}, t);
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const Suffix s = random_suffix(rng, A(), 5);
    EXPECT_DOUBLE_EQ(eval_f1(ctx, s), eval_f3(ctx, s));
  }
}

TEST(ObjectivesTest, MatchesStandaloneRecomputation) {
  const ZooCtx z;
  const auto ctx = z.make();
  const Suffix s = encode_suffix("q7Zk2", A());
  const std::string p = compose(ctx.base_prompt(), s, A());
  const auto& t = z.zoo.model("sd-v1.4").encoder;
  const double f1 = cosine(synthetic_encode(t, p), synthetic_encode(t, ctx.base_prompt()));
  EXPECT_NEAR(eval_f1(ctx, s), f1, 1e-12);
  double f2 = 0.0;
  const auto ids = std::vector<std::string>{"sd-v2.1", "hunyuan-dit-v1.2", "openjourney"};
  for (const auto& id : ids) {
    const auto& e = z.zoo.model(id).encoder;
    f2 += cosine(synthetic_encode(e, p), synthetic_encode(e, ctx.base_prompt()));
  }
  EXPECT_NEAR(eval_f2(ctx, s), f2 / 3.0, 1e-12);
  const auto& r = z.zoo.reference;
  EXPECT_NEAR(eval_f3(ctx, s),
              cosine(synthetic_encode(r, p), synthetic_encode(r, ctx.base_prompt())), 1e-12);
}

TEST(ObjectivesTest, BatchMatchesScalarAndVector) {
  const ZooCtx z;
  const auto ctx = z.make();
  Rng rng(5);
  std::vector<Suffix> ss;
  for (int i = 0; i < 100; ++i) ss.push_back(random_suffix(rng, A(), 5));
  const auto batch = eval_batch(ctx, ss);
  const auto f1s = eval_f1_batch(ctx, ss);
  for (std::size_t i = 0; i < ss.size(); ++i) {
    const auto v = eval_vector(ctx, ss[i]);
    EXPECT_EQ(batch[i], v);
    EXPECT_DOUBLE_EQ(v.f1(), eval_f1(ctx, ss[i]));
    EXPECT_DOUBLE_EQ(v.f2(), eval_f2(ctx, ss[i]));
    EXPECT_DOUBLE_EQ(v.f3(), eval_f3(ctx, ss[i]));
    EXPECT_DOUBLE_EQ(f1s[i], v.f1());
  }
}

TEST(ObjectivesTest, BatchCallsEachEncoderOnce) {
  auto target = at_cosine("t", 0.5), s1 = at_cosine("s1", 0.9), s2 = at_cosine("s2", 0.7);
  auto ref = at_cosine("r", 1.0);
  const ObjectiveContext ctx("base", target, {s1, s2}, ref, Alphabet("ab"));
  const int before = target->calls + s1->calls + s2->calls + ref->calls;
  std::vector<Suffix> ss(10, Suffix{{0, 1}});
  eval_batch(ctx, ss);
  EXPECT_EQ(target->calls + s1->calls + s2->calls + ref->calls - before, 4);
}

TEST(ObjectivesTest, CachedBaseEncodingsAreTransparent) {
  const ZooCtx z;
  const auto ctx = z.make();
  EXPECT_EQ(ctx.base_target(), z.zoo.encoder("sd-v1.4")->encode_one(ctx.base_prompt()));
  EXPECT_EQ(ctx.base_reference(), z.zoo.reference_encoder()->encode_one(ctx.base_prompt()));
  ASSERT_EQ(ctx.base_substitutes().size(), 3u);
}

TEST(ObjectivesTest, ContextValidation) {
  const Zoo zoo = build_default_zoo(0);
  const auto t = zoo.encoder("sd-v1.4");
  EXPECT_THROW(ObjectiveContext("p", t, {}, zoo.reference_encoder()), ConfigError);
  EXPECT_THROW(ObjectiveContext("", t, {zoo.encoder("sd-v2.1")}, zoo.reference_encoder()),
               ConfigError);
  EXPECT_THROW(ObjectiveContext("p", t, {zoo.encoder("sd-v1.4")}, zoo.reference_encoder()),
               ConfigError);
  const ObjectiveContext ok("p", t, {zoo.reference_encoder()}, zoo.reference_encoder());
  EXPECT_TRUE(ok.reference_is_substitute());
}

TEST(ObjectivesTest, WeakImprovementImpliesDominance) {
  ObjectiveVector a{0.3, -0.9, -0.9}, b{0.3, -0.8, -0.9};
  EXPECT_TRUE(dominates(a, b));
  EXPECT_FALSE(dominates(b, a));
}

TEST(ObjectivesTest, RandomSearchFloor) {
  // 1000 random K=5 suffixes on the default zoo (seed 0, target sd-v1.4,
  // "A photo of a cat."): minimum f1 measured at 0.494623. Regression guard.
  const ZooCtx z;
  const auto ctx = z.make();
  Rng rng(12345);
  std::vector<Suffix> ss;
  for (int i = 0; i < 1000; ++i) ss.push_back(random_suffix(rng, A(), 5));
  const auto f1 = eval_f1_batch(ctx, ss);
  EXPECT_NEAR(*std::min_element(f1.begin(), f1.end()), 0.494623, 1e-6);
}

}  // namespace
}  // namespace tvn
