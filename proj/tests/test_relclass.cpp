#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "slotcnn/crf/chain_crf.hpp"
#include "slotcnn/error.hpp"
#include "slotcnn/nn/ops.hpp"
#include "slotcnn/rel/checks.hpp"
#include "slotcnn/rel/example.hpp"
#include "slotcnn/rel/model.hpp"
#include "slotcnn/rel/schema.hpp"
#include "slotcnn/rel/serialize.hpp"
#include "slotcnn/train/config.hpp"
#include "slotcnn/train/trainer.hpp"

using namespace slotcnn;
using data::kFillerTagId;
using data::kNameTagId;
using data::kPadId;
using nn::Index;
using nn::Matrix;
using nn::Vec;

namespace {

const SlotSchema& schema() { return SlotSchema::standard(); }

Vec one_hot(std::initializer_list<EntityType> types) {
  Vec v = Vec::Zero(kNumEntityTypes);
  for (EntityType t : types) v(static_cast<int>(t)) = 1.0;
  return v;
}

std::vector<std::string> split(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

data::Vocabulary vocab_of(const std::string& words) {
  data::Vocabulary v;
  for (const auto& w : split(words)) v.add(w);
  return v;
}

int count(const std::vector<int>& ids, int id) {
  return static_cast<int>(std::count(ids.begin(), ids.end(), id));
}

std::vector<int> strip_pads(std::vector<int> ids) {
  std::erase(ids, kPadId);
  return ids;
}

const Variant kAllVariants[] = {Variant::binary, Variant::multiclass, Variant::pipeline,
                                Variant::joint, Variant::structured};

Model small_model(Variant v, std::uint64_t seed = 3) {
  return Model(v, small_dims(), numbered_vocabulary(12), seed,
               v == Variant::binary ? "per:age" : "");
}

std::vector<EncodedExample> random_examples(const Model& model, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<EncodedExample> out;
  for (int i = 0; i < n; ++i)
    out.push_back(random_example(model.vocab().size(), model.min_context_length(),
                                 schema().num_labels(), rng));
  return out;
}

void zero_all(Model& model) {
  for (auto& p : model.params()) p.value.setZero();
}

}  // namespace

// ---- schema ---------------------------------------------------------------

TEST(Schema, MergeExamples) {
  EXPECT_EQ(schema().merge_slot("per:parents"), "per:children");
  EXPECT_EQ(schema().merge_slot("per:city_of_birth"), "per:location_of_birth");
  EXPECT_EQ(schema().merge_slot("org:subsidiaries"), "org:parents");
  EXPECT_TRUE(schema().mapping("per:parents").inverse);
  EXPECT_FALSE(schema().mapping("per:children").inverse);
  EXPECT_TRUE(schema().mapping("gpe:births_in_stateorprovince").inverse);
}

TEST(Schema, UncoveredSlotThrows) {
  EXPECT_THROW(schema().merge_slot("per:charges"), UncoveredSlotError);
  EXPECT_THROW(schema().slot_type_vectors("per:charges"), UncoveredSlotError);
  EXPECT_FALSE(schema().covers("per:religion"));
}

TEST(Schema, LabelSetShape) {
  EXPECT_EQ(schema().num_slots(), 22);
  EXPECT_EQ(schema().num_labels(), 23);
  EXPECT_EQ(schema().label_name(schema().negative_label()), "N");
  EXPECT_EQ(schema().label_index("N"), schema().negative_label());
}

TEST(Schema, EveryOriginalMapsToExactlyOneMergedLabel) {
  const auto originals = schema().original_slots();
  EXPECT_EQ(originals.size(), 54u);
  std::set<std::string> unique(originals.begin(), originals.end());
  EXPECT_EQ(unique.size(), originals.size());
  std::set<int> hit;
  for (const auto& s : originals) {
    const int merged = schema().mapping(s).merged;
    ASSERT_GE(merged, 0);
    ASSERT_LT(merged, schema().num_slots());
    hit.insert(merged);
  }
  EXPECT_EQ(static_cast<int>(hit.size()), schema().num_slots());
}

TEST(Schema, InverseMapIsAnInvolution) {
  int pairs = 0;
  for (const auto& s : schema().original_slots()) {
    const auto inv = schema().inverse_slot(s);
    if (!inv) continue;
    ++pairs;
    const auto back = schema().inverse_slot(*inv);
    ASSERT_TRUE(back.has_value()) << s;
    EXPECT_EQ(*back, s);
  }
  EXPECT_GT(pairs, 0);
  EXPECT_EQ(*schema().inverse_slot("per:spouse"), "per:spouse");
  EXPECT_EQ(*schema().inverse_slot("per:parents"), "per:children");
}

TEST(Schema, TypeVectorExamples) {
  using enum EntityType;
  auto [a1, a2] = schema().slot_type_vectors("per:employee_or_member_of");
  EXPECT_EQ(a1, one_hot({person}));
  EXPECT_EQ(a2, one_hot({organization, location}));
  auto [b1, b2] = schema().slot_type_vectors("per:date_of_birth");
  EXPECT_EQ(b1, one_hot({person}));
  EXPECT_EQ(b2, one_hot({date}));
  auto [c1, c2] = schema().slot_type_vectors("org:founded_by");
  EXPECT_EQ(c1, one_hot({organization}));
  EXPECT_EQ(c2, one_hot({person, organization, location}));
}

TEST(Schema, InverseOriginalGetsSwappedTypeVectors) {
  using enum EntityType;
  auto [t1, t2] = schema().slot_type_vectors("org:employees_or_members");
  EXPECT_EQ(t1, one_hot({organization, location}));
  EXPECT_EQ(t2, one_hot({person}));
}

// ---- encoding -------------------------------------------------------------

TEST(Encode, SteveJobsStartedApple) {
  const auto vocab = vocab_of("started");
  const auto ex = encode(split("Steve Jobs started Apple"), {3, 4}, {0, 2}, vocab, 5);
  EXPECT_EQ(strip_pads(ex.middle), (std::vector<int>{kFillerTagId, vocab.id("started"), kNameTagId}));
  EXPECT_EQ(ex.order_flag, 0);
  EXPECT_EQ(strip_pads(ex.left), std::vector<int>{kFillerTagId});
  EXPECT_EQ(strip_pads(ex.right), std::vector<int>{kNameTagId});
  EXPECT_EQ(ex.left.size(), 5u);
  EXPECT_EQ(ex.middle.size(), 5u);
}

TEST(Encode, AdjacentArgumentsLeaveOnlyTagsInMiddle) {
  const auto vocab = vocab_of("a b c");
  const auto ex = encode(split("a b c d"), {1, 2}, {2, 3}, vocab, 5);
  EXPECT_EQ(strip_pads(ex.middle), (std::vector<int>{kNameTagId, kFillerTagId}));
  EXPECT_EQ(ex.order_flag, 1);
}

TEST(Encode, ArgumentsAtSentenceEdges) {
  const auto vocab = vocab_of("x y");
  const auto ex = encode(split("Obama x y Hawaii"), {0, 1}, {3, 4}, vocab, 5);
  EXPECT_EQ(strip_pads(ex.left), std::vector<int>{kNameTagId});
  EXPECT_EQ(strip_pads(ex.right), std::vector<int>{kFillerTagId});
  EXPECT_EQ(ex.left.size(), 5u);
  EXPECT_EQ(ex.right.size(), 5u);
}

TEST(Encode, InvalidSpansThrow) {
  const auto vocab = vocab_of("a");
  const auto tokens = split("a b c d");
  EXPECT_THROW(encode(tokens, {0, 2}, {1, 3}, vocab, 5), SpanError);
  EXPECT_THROW(encode(tokens, {1, 1}, {2, 3}, vocab, 5), SpanError);
  EXPECT_THROW(encode(tokens, {0, 1}, {3, 5}, vocab, 5), SpanError);
}

TEST(Encode, UnknownTokensMapToReservedId) {
  const auto vocab = vocab_of("known");
  const auto ex = encode(split("A known mystery B"), {0, 1}, {3, 4}, vocab, 5);
  EXPECT_EQ(strip_pads(ex.middle),
            (std::vector<int>{kNameTagId, vocab.id("known"), data::kUnknownId, kFillerTagId}));
}

TEST(Encode, TagsOccurOncePerBorderingContext) {
  std::mt19937_64 rng(11);
  const auto vocab = numbered_vocabulary(20);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = std::uniform_int_distribution<int>(2, 12)(rng);
    std::vector<std::string> tokens;
    for (int i = 0; i < n; ++i) tokens.push_back("w" + std::to_string(rng() % 25));
    int a = static_cast<int>(rng() % n), b = static_cast<int>(rng() % n);
    while (a == b) b = static_cast<int>(rng() % n);
    const auto ex = encode(tokens, {a, a + 1}, {b, b + 1}, vocab, 5);
    const int first = a < b ? kNameTagId : kFillerTagId;
    const int second = a < b ? kFillerTagId : kNameTagId;
    EXPECT_EQ(count(ex.left, first), 1);
    EXPECT_EQ(count(ex.left, second), 0);
    EXPECT_EQ(count(ex.middle, first), 1);
    EXPECT_EQ(count(ex.middle, second), 1);
    EXPECT_EQ(count(ex.right, first), 0);
    EXPECT_EQ(count(ex.right, second), 1);
    EXPECT_EQ(ex.left.back() == kPadId ? strip_pads(ex.left).back() : ex.left.back(), first);
    EXPECT_EQ(ex.middle.front(), first);
    EXPECT_EQ(ex.right.front(), second);
    for (const auto* ctx : {&ex.left, &ex.middle, &ex.right}) EXPECT_GE(ctx->size(), 5u);
    EXPECT_EQ(ex.order_flag, a < b ? 1 : 0);
  }
}

TEST(Reverse, IsAnInvolutionAndFlipsTheFlag) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const auto ex = random_example(30, 5, schema().num_labels(), rng);
    const auto rev = reverse_arguments(ex);
    EXPECT_EQ(reverse_arguments(rev), ex);
    EXPECT_EQ(rev.order_flag, 1 - ex.order_flag);
    EXPECT_EQ(rev.type1, ex.type2);
    EXPECT_EQ(rev.type2, ex.type1);
    EXPECT_EQ(count(rev.middle, kNameTagId), count(ex.middle, kFillerTagId));
  }
}

TEST(Reverse, FlagOneBecomesZeroWithSwappedTags) {
  const auto vocab = vocab_of("married");
  const auto ex = encode(split("Ann married Bob"), {0, 1}, {2, 3}, vocab, 5);
  ASSERT_EQ(ex.order_flag, 1);
  const auto rev = reverse_arguments(ex);
  EXPECT_EQ(rev.order_flag, 0);
  EXPECT_EQ(strip_pads(rev.middle),
            (std::vector<int>{kFillerTagId, vocab.id("married"), kNameTagId}));
}

TEST(Reverse, ParentsExampleBecomesChildrenExample) {
  data::RawExample raw;
  raw.id = "p1";
  raw.slot = "per:parents";
  raw.tokens = split("Bob is the son of Ann");
  raw.name = {0, 1};
  raw.filler = {5, 6};
  raw.type1 = raw.type2 = static_cast<int>(EntityType::person);
  const auto vocab = vocab_of("is the son of");
  const auto ex = encode_example(raw, vocab, schema(), 5);
  EXPECT_EQ(ex.gold, schema().label_index("per:children"));
  EXPECT_EQ(ex.order_flag, 0);
  EXPECT_EQ(ex.middle.front(), kFillerTagId);
}

// ---- model ----------------------------------------------------------------

TEST(Model, OutputDimensionMatchesVariant) {
  EXPECT_EQ(small_model(Variant::binary).num_outputs(), 1);
  for (Variant v : {Variant::multiclass, Variant::pipeline, Variant::joint, Variant::structured})
    EXPECT_EQ(small_model(v).num_outputs(), 23);
  EXPECT_TRUE(small_model(Variant::pipeline).params().contains("type.V"));
  EXPECT_TRUE(small_model(Variant::joint).params().contains("rel.W_type2"));
  EXPECT_FALSE(small_model(Variant::multiclass).params().contains("type.V"));
}

TEST(Model, PadEmbeddingStartsAtZero) {
  const Model m = small_model(Variant::multiclass);
  EXPECT_TRUE(m.params().at("emb").value.row(kPadId).isZero(0.0));
}

TEST(Model, ZeroModelIsUniform) {
  Model m = small_model(Variant::multiclass);
  zero_all(m);
  const auto ex = random_examples(m, 1, 1)[0];
  const Vec p = forward_multiclass(m, ex);
  ASSERT_EQ(p.size(), 23);
  for (Index i = 0; i < p.size(); ++i) EXPECT_NEAR(p(i), 1.0 / 23.0, 1e-15);
}

TEST(Model, BinaryZeroModelIsOneHalf) {
  Model m = small_model(Variant::binary);
  zero_all(m);
  EXPECT_DOUBLE_EQ(forward_binary(m, random_examples(m, 1, 2)[0]), 0.5);
}

TEST(Model, OutputsAreValidProbabilities) {
  for (Variant v : kAllVariants) {
    const Model m = small_model(v);
    for (const auto& ex : random_examples(m, 30, 9)) {
      const Vec p = v == Variant::pipeline
                        ? forward_pipeline(m, ex, pipeline_type_vectors(ex).name,
                                           pipeline_type_vectors(ex).filler)
                        : label_probabilities(m, ex);
      if (v == Variant::binary) {
        const double b = forward_binary(m, ex);
        EXPECT_GT(b, 0.0);
        EXPECT_LT(b, 1.0);
        continue;
      }
      EXPECT_NEAR(p.sum(), 1.0, 1e-12) << variant_name(v);
      EXPECT_GE(p.minCoeff(), 0.0);
    }
  }
}

TEST(Model, VariantMismatchThrows) {
  const Model bin = small_model(Variant::binary);
  const Model multi = small_model(Variant::multiclass);
  const auto ex = random_examples(multi, 1, 4)[0];
  EXPECT_THROW(forward_multiclass(bin, ex), VariantError);
  EXPECT_THROW(forward_binary(multi, ex), VariantError);
  EXPECT_THROW(forward_joint(multi, ex), VariantError);
  EXPECT_THROW(forward_structured(multi, ex), VariantError);
  EXPECT_THROW(forward_pipeline(multi, ex, Vec::Zero(6), Vec::Zero(6)), VariantError);
  EXPECT_THROW(parse_variant("multiclass+x"), ConfigError);
}

TEST(Model, PipelineTypeVectorShapeIsChecked) {
  const Model m = small_model(Variant::pipeline);
  const auto ex = random_examples(m, 1, 4)[0];
  EXPECT_THROW(forward_pipeline(m, ex, Vec::Zero(5), Vec::Zero(6)), ShapeError);
}

TEST(Model, PipelineWithZeroTypeEmbeddingIgnoresTypeVectors) {
  Model m = small_model(Variant::pipeline);
  m.params().at("type.V").value.setZero();
  m.params().at("type.c").value.setZero();
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& ex : random_examples(m, 10, 3)) {
    const Vec base = forward_pipeline(m, ex, Vec::Zero(6), Vec::Zero(6));
    Vec t1(6), t2(6);
    for (int i = 0; i < 6; ++i) t1(i) = u(rng), t2(i) = u(rng);
    EXPECT_EQ(forward_pipeline(m, ex, t1, t2), base);
  }
}

TEST(Model, PipelineIsSensitiveToTypeVectors) {
  const Model m = small_model(Variant::pipeline);
  const auto ex = random_examples(m, 1, 3)[0];
  const Vec zeros = forward_pipeline(m, ex, Vec::Zero(6), Vec::Zero(6));
  const Vec ones = forward_pipeline(m, ex, Vec::Ones(6), Vec::Ones(6));
  EXPECT_GT((zeros - ones).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Model, PipelineUnknownTypeFallsBackToSlotTypes) {
  EncodedExample ex;
  ex.type1 = static_cast<int>(EntityType::person);
  ex.type2 = kUnknownType;
  const int dob = schema().label_index("per:date_of_birth");
  const auto t = pipeline_type_vectors(ex, dob);
  EXPECT_EQ(t.name, one_hot({EntityType::person}));
  EXPECT_EQ(t.filler, one_hot({EntityType::date}));
  EXPECT_TRUE(pipeline_type_vectors(ex).filler.isZero(0.0));
}

TEST(Model, JointTypeScoresLieInOpenUnitInterval) {
  const Model m = small_model(Variant::joint);
  for (const auto& ex : random_examples(m, 30, 12)) {
    const auto out = forward_joint(m, ex);
    EXPECT_NEAR(out.relation.sum(), 1.0, 1e-12);
    for (const Vec* s : {&out.name_types, &out.filler_types}) {
      ASSERT_EQ(s->size(), 6);
      EXPECT_GT(s->minCoeff(), 0.0);
      EXPECT_LT(s->maxCoeff(), 1.0);
    }
  }
}

TEST(JointLoss, Examples) {
  EXPECT_DOUBLE_EQ(joint_loss(2.0, 1.0, 3.0, 0.0), 2.0);
  EXPECT_DOUBLE_EQ(joint_loss(2.0, 1.0, 3.0, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(joint_loss(5.0, 1.0, 3.0, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(joint_loss(7.0, 1.0, 3.0, 0.0), 7.0);
  EXPECT_DOUBLE_EQ(joint_loss(2.0, 1.0, 3.0, 0.5), 2.0);
  EXPECT_THROW(joint_loss(1, 1, 1, -0.1), ConfigError);
  EXPECT_THROW(joint_loss(1, 1, 1, 1.1), ConfigError);
}

namespace {

std::map<std::string, Matrix> joint_gradients(Model& m, const EncodedExample& ex, double alpha) {
  m.params().zero_grad();
  nn::Tape tape;
  nn::Var loss = example_loss(tape, m, ex, alpha);
  tape.backward(loss);
  std::map<std::string, Matrix> out;
  for (const auto& p : m.params()) out.emplace(p.name, p.grad);
  return out;
}

}  // namespace

// The loss is linear in alpha, so its gradient at alpha = 1/2 is the mean of
// the gradients at 0 and 1. At alpha = 0 the typing losses therefore add
// nothing, and the typing-only gradient (alpha = 1) reaches no relation
// output parameter.
TEST(Model, JointLossWeightsTypingGradientsByAlpha) {
  Model m = small_model(Variant::joint);
  const auto ex = random_examples(m, 1, 21)[0];
  const auto g0 = joint_gradients(m, ex, 0.0);
  const auto g1 = joint_gradients(m, ex, 1.0);
  const auto gh = joint_gradients(m, ex, 0.5);
  for (const auto& [name, g] : gh)
    EXPECT_LT((g - 0.5 * (g0.at(name) + g1.at(name))).cwiseAbs().maxCoeff(), 1e-12) << name;
  EXPECT_TRUE(g1.at("out.W").isZero(0.0));
  EXPECT_TRUE(g1.at("rel.d").isZero(0.0));
  EXPECT_TRUE(g1.at("ent1.out.W").cwiseAbs().maxCoeff() > 0.0);

  nn::Tape tape;
  const double rel_only = example_loss(tape, m, ex, 0.0)->value()(0, 0);
  EXPECT_NEAR(rel_only, -std::log(forward_joint(m, ex).relation(ex.gold)), 1e-12);
}

TEST(Model, StructuredZeroModelHasUniformMarginals) {
  Model m = small_model(Variant::structured);
  zero_all(m);
  const auto ex = random_examples(m, 1, 5)[0];
  const auto em = forward_structured(m, ex);
  EXPECT_TRUE(em.e1.isZero(0.0));
  EXPECT_TRUE(em.rel.isZero(0.0));
  EXPECT_TRUE(em.e2.isZero(0.0));
  const Vec p = label_probabilities(m, ex);
  for (Index i = 0; i < p.size(); ++i) EXPECT_NEAR(p(i), 1.0 / 23.0, 1e-12);
}

TEST(Model, OrderFlagChangesStructuredRelationEmissions) {
  Model m = small_model(Variant::structured);
  ASSERT_GT(m.params().at("rel.W_flag").value.cwiseAbs().maxCoeff(), 0.0);
  auto ex = random_examples(m, 1, 6)[0];
  ex.order_flag = 1;
  const Vec with = forward_structured(m, ex).rel;
  ex.order_flag = 0;
  const Vec without = forward_structured(m, ex).rel;
  EXPECT_GT((with - without).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Model, AllVariantsPassGradientCheck) {
  for (Variant v : kAllVariants) {
    Model m = small_model(v, 17);
    const auto examples = random_examples(m, 3, 23);
    const auto r = check_model_gradients(m, examples, 0.5);
    EXPECT_LT(r.max_rel_error, 1e-4) << variant_name(v) << " worst " << r.worst_param;
    EXPECT_GT(r.entries_checked, 0);
  }
}

TEST(Predict, InverseSlotReadsCanonicalLabelOnReversedExample) {
  for (Variant v : {Variant::multiclass, Variant::pipeline, Variant::joint, Variant::structured}) {
    const Model m = small_model(v);
    for (const auto& ex : random_examples(m, 20, 31)) {
      const auto rev = reverse_arguments(ex);
      EXPECT_EQ(predict_slot_probability(m, ex, "per:parents"),
                predict_slot_probability(m, rev, "per:children"));
      EXPECT_EQ(predict_slot_probability(m, ex, "org:subsidiaries"),
                predict_slot_probability(m, rev, "org:parents"));
    }
  }
}

TEST(Predict, BinaryReturnsItsSigmoid) {
  const Model m = small_model(Variant::binary);
  for (const auto& ex : random_examples(m, 5, 3))
    EXPECT_EQ(predict_slot_probability(m, ex, "per:age"), forward_binary(m, ex));
  EXPECT_THROW(predict_slot_probability(m, random_examples(m, 1, 3)[0], "per:title"),
               VariantError);
}

TEST(Predict, UncoveredSlotThrows) {
  const Model m = small_model(Variant::multiclass);
  EXPECT_THROW(predict_slot_probability(m, random_examples(m, 1, 3)[0], "per:charges"),
               UncoveredSlotError);
}

namespace {

// Independent forward pass: per-token embedding lookup, explicit window
// sums, sort-based 3-max, contexts visited right, middle, left.
Vec naive_multiclass(const Model& m, const EncodedExample& ex) {
  const auto& P = m.params();
  const Matrix& emb = P.at("emb").value;
  const Matrix& H = P.at("conv.H").value;
  const Matrix& cb = P.at("conv.b").value;
  const int D = m.dims().emb_dim, w = m.dims().filter_width, nf = m.dims().num_filters;

  auto pool = [&](const std::vector<int>& ctx) {
    std::vector<double> out;
    for (int f = 0; f < nf; ++f) {
      std::vector<std::pair<double, int>> col;
      for (int t = 0; t + w <= static_cast<int>(ctx.size()); ++t) {
        double s = cb(f, 0);
        for (int j = 0; j < w; ++j)
          for (int k = 0; k < D; ++k) s += H(f, j * D + k) * emb(ctx[t + j], k);
        col.emplace_back(std::tanh(s), t);
      }
      std::stable_sort(col.begin(), col.end(),
                       [](const auto& a, const auto& b) { return a.first > b.first; });
      col.resize(3);
      std::sort(col.begin(), col.end(),
                [](const auto& a, const auto& b) { return a.second < b.second; });
      for (const auto& c : col) out.push_back(c.first);
    }
    return out;
  };

  const auto pr = pool(ex.right);
  const auto pm = pool(ex.middle);
  const auto pl = pool(ex.left);
  const int h = m.dims().hidden_rel;
  std::vector<double> hidden(h);
  for (int i = 0; i < h; ++i) {
    double s = P.at("rel.d").value(i, 0) + P.at("rel.W_flag").value(i, 0) * ex.order_flag;
    for (size_t j = 0; j < pl.size(); ++j) {
      s += P.at("rel.W_left").value(i, j) * pl[j];
      s += P.at("rel.W_middle").value(i, j) * pm[j];
      s += P.at("rel.W_right").value(i, j) * pr[j];
    }
    hidden[i] = std::tanh(s);
  }
  const Matrix& W = P.at("out.W").value;
  Vec z(W.rows());
  for (Index r = 0; r < W.rows(); ++r) {
    z(r) = P.at("out.b").value(r, 0);
    for (int i = 0; i < h; ++i) z(r) += W(r, i) * hidden[i];
  }
  const double mx = z.maxCoeff();
  Vec e = (z.array() - mx).exp();
  return e / e.sum();
}

}  // namespace

TEST(Model, SharedFiltersGiveContextOrderIndependentOutput) {
  const Model m = small_model(Variant::multiclass, 29);
  for (const auto& ex : random_examples(m, 25, 41)) {
    const Vec fast = forward_multiclass(m, ex);
    const Vec oracle = naive_multiclass(m, ex);
    EXPECT_LT((fast - oracle).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Model, PermutingPadOnlyColumnsLeavesPoolingUnchanged) {
  const Model m = small_model(Variant::multiclass, 2);
  const Matrix& emb = m.params().at("emb").value;
  std::vector<int> ctx = {4, 7, 5};
  ctx.resize(9, kPadId);
  Matrix input(static_cast<Index>(ctx.size()), emb.cols());
  for (size_t t = 0; t < ctx.size(); ++t) input.row(static_cast<Index>(t)) = emb.row(ctx[t]);
  const nn::ConvLayer<double> layer{m.params().at("conv.H").value,
                                    Vec(m.params().at("conv.b").value.col(0)),
                                    m.dims().filter_width};
  const Matrix c = nn::conv_forward(input, layer);
  const Index first_pad_column = 3;
  Matrix permuted = c;
  std::vector<Index> cols;
  for (Index t = first_pad_column; t < c.cols(); ++t) cols.push_back(t);
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    std::shuffle(cols.begin(), cols.end(), rng);
    for (size_t i = 0; i < cols.size(); ++i)
      permuted.col(first_pad_column + static_cast<Index>(i)) = c.col(cols[i]);
    EXPECT_EQ(nn::kmax_pool(permuted, 3).values, nn::kmax_pool(c, 3).values);
  }
}

// Self-inverse slots hold in both directions. After training on data that
// contains every spouse example in both orientations the classifier reads
// the same probability for an example and its reversal.
TEST(Predict, SelfInverseSlotIsSymmetricAfterSymmetrizedTraining) {
  auto vocab = numbered_vocabulary(30);
  Model m(Variant::multiclass, small_dims(), vocab, 5);
  std::mt19937_64 rng(13);
  const int spouse = schema().label_index("per:spouse");
  const int age = schema().label_index("per:age");
  std::vector<EncodedExample> train;
  for (int i = 0; i < 60; ++i) {
    auto ex = random_example(vocab.size(), m.min_context_length(), 1, rng, 0.0);
    ex.gold = i % 2 ? spouse : age;
    train.push_back(ex);
    if (ex.gold == spouse) train.push_back(reverse_arguments(ex));
  }
  train::Hyperparams hp;
  hp.epochs = 5;
  hp.patience = 5;
  hp.batch = 4;
  hp.embedding_dim = small_dims().emb_dim;
  const Model trained = train::train_model(m, train, train, hp).model;
  for (const auto& ex : random_examples(trained, 50, 77)) {
    const double a = predict_slot_probability(trained, ex, "per:spouse");
    const double b = predict_slot_probability(trained, reverse_arguments(ex), "per:spouse");
    EXPECT_NEAR(a, b, 1e-6);
  }
}

// ---- serialization --------------------------------------------------------

TEST(Serialize, RoundTripIsExact) {
  for (Variant v : kAllVariants) {
    const Model m = small_model(v, 99);
    std::stringstream buf;
    save_model(m, buf);
    const std::string first = buf.str();
    const Model back = load_model(buf, "buffer");
    EXPECT_TRUE(back == m) << variant_name(v);
    std::stringstream again;
    save_model(back, again);
    EXPECT_EQ(again.str(), first);
    const auto ex = random_examples(m, 1, 8)[0];
    EXPECT_EQ(label_probabilities(back, ex), label_probabilities(m, ex));
  }
}

TEST(Serialize, CorruptInputThrowsParseError) {
  std::stringstream bad("slotcnn-model 2 variant=multiclass\n");
  EXPECT_THROW(load_model(bad, "bad"), ParseError);
  const Model m = small_model(Variant::multiclass);
  std::stringstream buf;
  save_model(m, buf);
  std::string text = buf.str();
  text.resize(text.size() / 2);
  std::stringstream truncated(text);
  EXPECT_THROW(load_model(truncated, "truncated"), ParseError);
}
