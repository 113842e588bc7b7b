#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "slotcnn/data/cleaning.hpp"
#include "slotcnn/data/dataset.hpp"
#include "slotcnn/data/selection.hpp"
#include "slotcnn/data/synthetic.hpp"
#include "slotcnn/data/triggers.hpp"
#include "slotcnn/data/vocab.hpp"
#include "slotcnn/error.hpp"
#include "slotcnn/rel/checks.hpp"
#include "selection_fixture.hpp"
#include "test_util.hpp"

using namespace slotcnn;
using namespace slotcnn::data;
using slotcnn::testing::read_file;
using slotcnn::testing::SelectionFixture;
using slotcnn::testing::TempDir;
using slotcnn::testing::write_file;

namespace {

std::vector<std::string> split(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

RawExample raw(const std::string& id, const std::string& slot, const std::string& text,
               Span name = {0, 1}, Span filler = {1, 2}) {
  RawExample r;
  r.id = id;
  r.slot = slot;
  r.tokens = split(text);
  r.name = name;
  r.filler = filler;
  r.name_first = name.begin < filler.begin;
  return r;
}

std::vector<RawExample> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_dataset(in, "inline.tsv");
}

TriggerList triggers_of(const std::string& text) {
  std::istringstream in(text);
  return parse_triggers(in, "inline-triggers.tsv");
}

std::vector<std::string> ids(const std::vector<RawExample>& v) {
  std::vector<std::string> out;
  for (const auto& r : v) out.push_back(r.id);
  return out;
}

}  // namespace

// ---- dataset files --------------------------------------------------------

TEST(Dataset, EmptyFileIsEmptyDataset) { EXPECT_TRUE(parse("").empty()); }

TEST(Dataset, OneWellFormedLine) {
  const auto v = parse("e1\tper:spouse\tPERSON\t-\t0:1\t2:3\tNAME_FIRST\tAnn married Bob\n");
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].id, "e1");
  EXPECT_EQ(v[0].slot, "per:spouse");
  EXPECT_EQ(v[0].type1, static_cast<int>(EntityType::person));
  EXPECT_EQ(v[0].type2, kUnknownType);
  EXPECT_EQ(v[0].name, (Span{0, 1}));
  EXPECT_EQ(v[0].filler, (Span{2, 3}));
  EXPECT_TRUE(v[0].name_first);
  EXPECT_EQ(v[0].tokens, split("Ann married Bob"));
}

TEST(Dataset, SevenFieldsIsParseErrorNamingTheLine) {
  const std::string text =
      "# header\n"
      "e1\tper:spouse\tPERSON\tPERSON\t0:1\t2:3\tNAME_FIRST\tAnn married Bob\n"
      "e2\tper:spouse\tPERSON\tPERSON\t0:1\t2:3\tAnn married Bob\n";
  try {
    parse(text);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
    EXPECT_NE(std::string(e.what()).find("inline.tsv:3"), std::string::npos);
  }
}

TEST(Dataset, OverlappingSpansAreSpanErrors) {
  EXPECT_THROW(parse("e\tN\t-\t-\t0:2\t1:3\tNAME_FIRST\ta b c\n"), SpanError);
  EXPECT_THROW(parse("e\tN\t-\t-\t0:1\t2:4\tNAME_FIRST\ta b c\n"), SpanError);
}

TEST(Dataset, MalformedFieldsAreParseErrors) {
  EXPECT_THROW(parse("e\tN\tPERSONS\t-\t0:1\t2:3\tNAME_FIRST\ta b c\n"), ParseError);
  EXPECT_THROW(parse("e\tN\t-\t-\t0-1\t2:3\tNAME_FIRST\ta b c\n"), ParseError);
  EXPECT_THROW(parse("e\tN\t-\t-\t0:1\t2:3\tSIDEWAYS\ta b c\n"), ParseError);
}

TEST(Dataset, WriteThenParseRoundTrips) {
  std::vector<RawExample> v = {raw("a", "per:age", "Tom is 42", {0, 1}, {2, 3}),
                               raw("b", "NEG:per:age", "42 people saw Tom", {3, 4}, {0, 1})};
  v[0].type1 = 0;
  v[0].type2 = 4;
  std::ostringstream out;
  write_dataset(out, v);
  const auto back = parse(out.str());
  ASSERT_EQ(back.size(), 2u);
  for (size_t i = 0; i < v.size(); ++i) {
    EXPECT_EQ(back[i].id, v[i].id);
    EXPECT_EQ(back[i].slot, v[i].slot);
    EXPECT_EQ(back[i].type1, v[i].type1);
    EXPECT_EQ(back[i].name, v[i].name);
    EXPECT_EQ(back[i].filler, v[i].filler);
    EXPECT_EQ(back[i].name_first, v[i].name_first);
    EXPECT_EQ(back[i].tokens, v[i].tokens);
  }
}

TEST(Dataset, NegativeSlotNames) {
  EXPECT_TRUE(is_negative_slot("N"));
  EXPECT_TRUE(is_negative_slot("NEG"));
  EXPECT_TRUE(is_negative_slot("NEG:per:age"));
  EXPECT_FALSE(is_negative_slot("per:age"));
  EXPECT_EQ(negative_target("NEG:per:age"), "per:age");
  EXPECT_EQ(negative_target("NEG"), "");
}

// ---- vocabulary and embeddings -------------------------------------------

TEST(Vocabulary, ReservedIdsComeFirst) {
  Vocabulary v;
  EXPECT_EQ(v.size(), 4);
  EXPECT_EQ(v.id(kPadToken), kPadId);
  EXPECT_EQ(v.id(kUnknownToken), kUnknownId);
  EXPECT_EQ(v.id(kNameTag), kNameTagId);
  EXPECT_EQ(v.id(kFillerTag), kFillerTagId);
  EXPECT_EQ(v.id("never-seen"), kUnknownId);
  EXPECT_EQ(v.add("x"), 4);
  EXPECT_EQ(v.add("x"), 4);
}

TEST(Vocabulary, BuiltFromTokensOutsideArgumentSpans) {
  const std::vector<RawExample> v = {raw("a", "per:spouse", "Ann married Bob", {0, 1}, {2, 3}),
                                     raw("b", "N", "Bob met Carl today", {0, 1}, {2, 3})};
  const Vocabulary vocab = build_vocabulary(v);
  EXPECT_EQ(vocab.tokens(), (std::vector<std::string>{"<pad>", "<unk>", "<name>", "<filler>",
                                                       "married", "met", "today"}));
}

TEST(Embeddings, LoadsHeaderAndVectors) {
  TempDir dir;
  write_file(dir.file("emb.txt"), "2 3\nhello 1 2 3\nworld 0.5 -1 0\n");
  const auto table = load_embeddings(dir.file("emb.txt"));
  EXPECT_EQ(table.dim(), 3);
  EXPECT_EQ(table.tokens, (std::vector<std::string>{"hello", "world"}));
  EXPECT_DOUBLE_EQ(table.vectors(1, 1), -1.0);
}

TEST(Embeddings, BadFilesThrow) {
  TempDir dir;
  write_file(dir.file("short.txt"), "2 3\nhello 1 2 3\nworld 0.5 -1\n");
  EXPECT_THROW(load_embeddings(dir.file("short.txt")), ParseError);
  write_file(dir.file("count.txt"), "3 3\nhello 1 2 3\n");
  EXPECT_THROW(load_embeddings(dir.file("count.txt")), ParseError);
  EXPECT_THROW(load_embeddings(dir.file("missing.txt")), IoError);
}

// ---- triggers and cleaning -----------------------------------------------

namespace {

// Substring search on a space-delimited rendering; independent of the
// token-window scan in the library.
bool naive_contains(const std::vector<std::string>& tokens, const Pattern& pattern) {
  std::string hay = " ", needle = " ";
  for (const auto& t : tokens) hay += case_fold(t) + " ";
  for (const auto& t : pattern) needle += case_fold(t) + " ";
  return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST(Triggers, MatchesNaiveScan) {
  std::mt19937_64 rng(3);
  const std::vector<std::string> alphabet = {"a", "B", "c", "A", "b"};
  auto word = [&] { return alphabet[rng() % alphabet.size()]; };
  int hits = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<std::string> tokens(rng() % 8);
    for (auto& t : tokens) t = word();
    Pattern p(1 + rng() % 3);
    for (auto& t : p) t = word();
    const bool expected = naive_contains(tokens, p);
    hits += expected;
    EXPECT_EQ(contains_pattern(tokens, p), expected);
  }
  EXPECT_GT(hits, 100);
}

TEST(Triggers, CaseFoldedContiguousMatch) {
  const auto t = triggers_of("per:date_of_birth\tborn in\n# comment\norg:founded_by\tfounded\n");
  EXPECT_TRUE(t.matches("per:date_of_birth", split("Obama was Born IN Hawaii")));
  EXPECT_FALSE(t.matches("per:date_of_birth", split("born , in Hawaii")));
  EXPECT_TRUE(t.matches_any(split("they FOUNDED it")));
  EXPECT_FALSE(t.matches("per:spouse", split("born in")));
}

TEST(Cleaning, MulticlassDropsTriggeredNegativesAndRelabels) {
  const auto t = triggers_of("per:date_of_birth\tborn in\nper:spouse\tmarried\n");
  const std::vector<RawExample> in = {
      raw("neg1", "NEG", "Obama was born in Hawaii", {0, 1}, {4, 5}),
      raw("neg2", "NEG:per:spouse", "Obama visited Hawaii", {0, 1}, {2, 3}),
      raw("pos1", "per:date_of_birth", "Obama 1961", {0, 1}, {1, 2}),
      raw("pos2", "per:spouse", "Ann married Bob", {0, 1}, {2, 3}),
  };
  const auto out = clean_negatives(in, t, CleaningMode::multiclass);
  ASSERT_EQ(ids(out), (std::vector<std::string>{"neg2", "pos1", "pos2"}));
  EXPECT_EQ(out[0].slot, "N");
  EXPECT_EQ(out[1].slot, "per:date_of_birth");
  EXPECT_EQ(out[2].slot, "per:spouse");
}

TEST(Cleaning, BinaryChecksOnlyTheTargetSlot) {
  const auto t = triggers_of("per:date_of_birth\tborn in\nper:spouse\tmarried\n");
  const std::vector<RawExample> in = {
      raw("a", "NEG:per:spouse", "Obama was born in Hawaii", {0, 1}, {4, 5}),
      raw("b", "NEG:per:date_of_birth", "Obama was born in Hawaii", {0, 1}, {4, 5}),
      raw("c", "NEG", "Ann married Bob", {0, 1}, {2, 3}),
  };
  const auto out = clean_negatives(in, t, CleaningMode::binary);
  EXPECT_EQ(ids(out), std::vector<std::string>{"a"});
  EXPECT_EQ(out[0].slot, "NEG:per:spouse");
}

TEST(Cleaning, PositiveWithoutTriggersIsConfigError) {
  const auto t = triggers_of("per:spouse\tmarried\n");
  EXPECT_THROW(clean_negatives({raw("p", "per:age", "Tom 42")}, t, CleaningMode::multiclass),
               ConfigError);
}

TEST(Cleaning, PositivesPassThroughUntouched) {
  std::mt19937_64 rng(9);
  const auto t = triggers_of("per:spouse\tmarried\nper:age\tage\nper:title\tthe\n");
  const std::vector<std::string> slots = {"per:spouse", "per:age", "per:title", "NEG", "N"};
  const std::vector<std::string> words = {"married", "age", "the", "x", "y", "z"};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<RawExample> in;
    for (int i = 0; i < 20; ++i) {
      std::string text = "A B";
      for (int w = 0; w < 4; ++w) text += " " + words[rng() % words.size()];
      in.push_back(raw("e" + std::to_string(i), slots[rng() % slots.size()], text));
    }
    for (auto mode : {CleaningMode::binary, CleaningMode::multiclass}) {
      const auto out = clean_negatives(in, t, mode);
      std::vector<RawExample> pos_in, pos_out;
      for (const auto& r : in)
        if (!is_negative_slot(r.slot)) pos_in.push_back(r);
      for (const auto& r : out)
        if (!is_negative_slot(r.slot)) pos_out.push_back(r);
      ASSERT_EQ(pos_in.size(), pos_out.size());
      for (size_t i = 0; i < pos_in.size(); ++i) {
        EXPECT_EQ(pos_out[i].id, pos_in[i].id);
        EXPECT_EQ(pos_out[i].slot, pos_in[i].slot);
        EXPECT_EQ(pos_out[i].tokens, pos_in[i].tokens);
      }
      for (const auto& r : out)
        if (is_negative_slot(r.slot)) EXPECT_FALSE(t.matches_any(r.tokens) && mode == CleaningMode::multiclass);
    }
  }
}

// ---- subsampling ----------------------------------------------------------

namespace {

std::vector<RawExample> mixed(int positives, int negatives) {
  std::vector<RawExample> v;
  for (int i = 0; i < positives + negatives; ++i)
    v.push_back(raw("e" + std::to_string(i), i % (positives + negatives) < positives ? "per:age" : "N",
                    "a b"));
  std::mt19937_64 rng(2);
  std::shuffle(v.begin(), v.end(), rng);
  return v;
}

size_t count_negatives(const std::vector<RawExample>& v) {
  return static_cast<size_t>(
      std::count_if(v.begin(), v.end(), [](const auto& r) { return is_negative_slot(r.slot); }));
}

}  // namespace

TEST(Subsample, KeepsAsManyNegativesAsPositives) {
  const auto in = mixed(100, 500);
  const auto out = subsample_negatives(in, 7);
  EXPECT_EQ(out.size(), 200u);
  EXPECT_EQ(count_negatives(out), 100u);
  auto pos = [](const std::vector<RawExample>& v) {
    std::vector<std::string> p;
    for (const auto& r : v)
      if (!is_negative_slot(r.slot)) p.push_back(r.id);
    return p;
  };
  EXPECT_EQ(pos(out), pos(in));
  // Relative order is kept: the output is a subsequence of the input.
  size_t j = 0;
  for (const auto& r : in)
    if (j < out.size() && out[j].id == r.id) ++j;
  EXPECT_EQ(j, out.size());
}

TEST(Subsample, FewerNegativesIsUnchanged) {
  const auto in = mixed(100, 50);
  EXPECT_EQ(ids(subsample_negatives(in, 7)), ids(in));
}

TEST(Subsample, DeterministicPerSeed) {
  const auto in = mixed(30, 300);
  EXPECT_EQ(ids(subsample_negatives(in, 11)), ids(subsample_negatives(in, 11)));
  EXPECT_NE(ids(subsample_negatives(in, 11)), ids(subsample_negatives(in, 12)));
}

// ---- training data selection ---------------------------------------------

namespace {

// Predicts the distant label with a fixed confidence.
class EchoScorer : public ConfidenceScorer {
 public:
  explicit EchoScorer(double confidence) : confidence_(confidence) {}
  void train(const std::vector<EncodedExample>&) override { ++trainings; }
  std::pair<int, double> predict(const EncodedExample& ex) const override {
    return {ex.gold, confidence_};
  }
  int trainings = 0;

 private:
  double confidence_;
};

}  // namespace

TEST(Selection, UnreachableConfidenceSelectsNothing) {
  SelectionFixture fx(1, 0.1);
  EchoScorer scorer(1.0);
  const auto result = select_training_data(split_batches(fx.candidates, 5), fx.seed_set, scorer, 1.01);
  EXPECT_EQ(result.num_selected(), 0u);
  EXPECT_EQ(result.training.size(), fx.seed_set.size());
}

TEST(Selection, ZeroThresholdWithAgreeingScorerSelectsAll) {
  SelectionFixture fx(1, 0.1);
  EchoScorer scorer(0.3);
  const auto result = select_training_data(split_batches(fx.candidates, 5), fx.seed_set, scorer, 0.0);
  EXPECT_EQ(result.num_selected(), fx.candidates.size());
  EXPECT_EQ(result.num_seed, fx.seed_set.size());
  EXPECT_EQ(result.kept_per_batch, (std::vector<size_t>{100, 100, 100, 100, 100}));
  EXPECT_EQ(scorer.trainings, 6);
}

TEST(Selection, EmptySeedSetIsConfigError) {
  EchoScorer scorer(1.0);
  EXPECT_THROW(select_training_data({{}}, {}, scorer, 0.5), ConfigError);
}

TEST(Selection, NoisyLabelsAreFilteredOut) {
  SelectionFixture fx(4, 0.1);
  BagOfEmbeddingsScorer scorer(fx.embeddings, 2);
  const auto result = select_training_data(split_batches(fx.candidates, 5), fx.seed_set, scorer, 0.9);
  ASSERT_GT(result.num_selected(), 100u);
  size_t clean = 0;
  for (size_t i = result.num_seed; i < result.training.size(); ++i)
    clean += fx.flipped.count(result.training[i].id) == 0;
  EXPECT_GE(static_cast<double>(clean) / static_cast<double>(result.num_selected()), 0.95);
}

TEST(Selection, RaisingTheThresholdNeverAddsExamples) {
  for (std::uint64_t seed : {2u, 5u, 8u}) {
    SelectionFixture fx(seed, 0.2);
    size_t previous = std::numeric_limits<size_t>::max();
    for (double tau : {0.0, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99, 1.0}) {
      BagOfEmbeddingsScorer scorer(fx.embeddings, 2);
      const size_t n =
          select_training_data(split_batches(fx.candidates, 5), fx.seed_set, scorer, tau)
              .num_selected();
      EXPECT_LE(n, previous) << "tau " << tau << " seed " << seed;
      previous = n;
    }
  }
}

TEST(Selection, SplitBatchesIsContiguousAndBalanced) {
  SelectionFixture fx(1, 0.0);
  std::vector<EncodedExample> seven(fx.candidates.begin(), fx.candidates.begin() + 7);
  const auto batches = split_batches(seven, 3);
  ASSERT_EQ(batches.size(), 3u);
  std::vector<std::string> flat;
  for (const auto& b : batches) {
    EXPECT_GE(b.size(), 2u);
    EXPECT_LE(b.size(), 3u);
    for (const auto& ex : b) flat.push_back(ex.id);
  }
  std::vector<std::string> expected;
  for (const auto& ex : seven) expected.push_back(ex.id);
  EXPECT_EQ(flat, expected);
  EXPECT_THROW(split_batches(seven, 0), ConfigError);
}

// ---- synthetic corpora ----------------------------------------------------

namespace {

SyntheticSpec ambiguous_spec() {
  return load_synthetic_spec(slotcnn::testing::source_path("data/synthetic/ambiguous.json"));
}

// Middle context as strings with the arguments replaced by tags.
std::vector<std::string> middle_tokens(const RawExample& r) {
  const bool name_first = r.name.begin < r.filler.begin;
  const Span& a = name_first ? r.name : r.filler;
  const Span& b = name_first ? r.filler : r.name;
  std::vector<std::string> out = {name_first ? "<name>" : "<filler>"};
  for (int i = a.end; i < b.begin; ++i) out.push_back(r.tokens[static_cast<size_t>(i)]);
  out.push_back(name_first ? "<filler>" : "<name>");
  return out;
}

}  // namespace

TEST(Synthetic, ZeroCountsWriteHeaderOnlyFiles) {
  auto spec = ambiguous_spec();
  spec.train = spec.dev = spec.test = 0;
  TempDir dir;
  write_synthetic(generate_synthetic(spec, 1), dir.path().string());
  for (const char* name : {"train.tsv", "dev.tsv", "test.tsv"}) {
    const std::string text = read_file(dir.file(name));
    ASSERT_FALSE(text.empty());
    EXPECT_EQ(text.front(), '#');
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1) << name;
    EXPECT_TRUE(load_dataset(dir.file(name)).empty());
  }
}

TEST(Synthetic, SameSeedGivesByteIdenticalFiles) {
  const auto spec = ambiguous_spec();
  TempDir dir;
  write_synthetic(generate_synthetic(spec, 42), (dir.path() / "a").string());
  write_synthetic(generate_synthetic(spec, 42), (dir.path() / "b").string());
  write_synthetic(generate_synthetic(spec, 43), (dir.path() / "c").string());
  for (const char* name : {"train.tsv", "dev.tsv", "test.tsv", "triggers.tsv"}) {
    const auto a = read_file((dir.path() / "a" / name).string());
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, read_file((dir.path() / "b" / name).string())) << name;
  }
  EXPECT_NE(read_file((dir.path() / "a" / "train.tsv").string()),
            read_file((dir.path() / "c" / "train.tsv").string()));
}

TEST(Synthetic, CountsAndLabels) {
  const auto spec = ambiguous_spec();
  const auto corpus = generate_synthetic(spec, 5);
  EXPECT_EQ(static_cast<int>(corpus.train.size()), spec.train);
  EXPECT_EQ(static_cast<int>(corpus.dev.size()), spec.dev);
  EXPECT_EQ(static_cast<int>(corpus.test.size()), spec.test);
  std::set<std::string> allowed = {"NEG"};
  for (const auto& s : spec.slots) allowed.insert(s.slot);
  for (const auto& r : corpus.train) {
    EXPECT_TRUE(allowed.count(r.slot)) << r.slot;
    EXPECT_NO_THROW(validate_spans(r.name, r.filler, static_cast<int>(r.tokens.size())));
  }
  for (const auto& s : spec.slots) EXPECT_TRUE(corpus.triggers.has_slot(s.slot)) << s.slot;
}

TEST(Synthetic, AmbiguousPairsShareMiddleContextMultisets) {
  const auto spec = ambiguous_spec();
  ASSERT_FALSE(spec.ambiguous_pairs.empty());
  const auto corpus = generate_synthetic(spec, 9);
  for (const auto& [first, second] : spec.ambiguous_pairs) {
    for (const auto* split : {&corpus.train, &corpus.dev, &corpus.test}) {
      std::multiset<std::string> a, b;
      for (const auto& r : *split) {
        if (r.slot != first && r.slot != second) continue;
        auto& bag = r.slot == first ? a : b;
        for (const auto& t : middle_tokens(r)) bag.insert(t);
      }
      EXPECT_FALSE(a.empty());
      EXPECT_EQ(a, b);
    }
  }
}

TEST(Synthetic, TriggersAreConsistentWithTemplates) {
  const auto spec = ambiguous_spec();
  const auto corpus = generate_synthetic(spec, 3);
  for (const auto& r : corpus.train)
    if (!is_negative_slot(r.slot)) EXPECT_TRUE(corpus.triggers.matches(r.slot, r.tokens)) << r.id;
}

TEST(Synthetic, InvalidAmbiguousSpecsAreConfigErrors) {
  auto same_types = ambiguous_spec();
  same_types.ambiguous_pairs = {{"per:date_of_birth", "per:spouse"}};
  same_types.slots[3].filler_type = same_types.slots[0].filler_type;
  EXPECT_THROW(generate_synthetic(same_types, 1), ConfigError);

  auto unknown = ambiguous_spec();
  unknown.ambiguous_pairs = {{"per:date_of_birth", "per:age"}};
  EXPECT_THROW(generate_synthetic(unknown, 1), ConfigError);

  auto self = ambiguous_spec();
  self.ambiguous_pairs = {{"per:date_of_birth", "per:date_of_birth"}};
  EXPECT_THROW(generate_synthetic(self, 1), ConfigError);

  auto bad_template = ambiguous_spec();
  bad_template.slots[2].templates = {"{name} founded {name} ."};
  EXPECT_THROW(generate_synthetic(bad_template, 1), ConfigError);

  EXPECT_THROW(parse_synthetic_spec("{ not json"), ConfigError);
  EXPECT_THROW(parse_synthetic_spec("{}"), ConfigError);
}
