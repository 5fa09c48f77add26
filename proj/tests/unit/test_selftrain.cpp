#include <gtest/gtest.h>

#include <random>

#include "conceptforge/selftrain.hpp"
#include "fixtures.hpp"

using namespace conceptforge;

namespace {

const Tag O = Tag::O, B = Tag::B, I = Tag::I;

// Sentences whose concept span directly follows the cue token "about".
std::vector<TaggedSequence> about_set(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uint64_t state = seed * 31 + 1;
  const std::vector<std::vector<std::string>> frames{
      {"tell", "me", "about"}, {"news", "about"}, {"i", "read", "about"}, {"what", "about"}};
  const std::vector<std::string> tails{"today", "please", "now", "again"};
  std::vector<TaggedSequence> out;
  for (std::size_t k = 0; k < n; ++k) {
    TaggedSequence s;
    s.tokens = frames[rng() % frames.size()];
    s.labels.assign(s.tokens.size(), O);
    auto len = 1 + rng() % 3;
    for (std::size_t i = 0; i < len; ++i) {
      s.tokens.push_back(fixture::random_word(state));
      s.labels.push_back(i == 0 ? B : I);
    }
    s.tokens.push_back(tails[rng() % tails.size()]);
    s.labels.push_back(O);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<TaggedSequence> disorder_set() {
  std::vector<TaggedSequence> out;
  for (std::string a : {"what", "about", "types", "rare", "signs"}) {
    out.push_back({{a, "is", "rare", "mental", "disorder", "here"}, {O, O, B, I, I, O}});
    out.push_back({{a, "is", "hello", "world"}, {O, O, O, O}});
  }
  return out;
}

}  // namespace

TEST(Bio, ValidityRepairSpans) {
  std::vector<Tag> ok{B, I, O, B}, bad{I, O, I};
  EXPECT_TRUE(is_valid_bio(ok));
  EXPECT_FALSE(is_valid_bio(bad));
  EXPECT_EQ(repair_bio(bad), (std::vector<Tag>{B, O, B}));
  EXPECT_EQ(spans_of(ok), (std::vector<Span>{{0, 2}, {3, 4}}));
  std::vector<Span> sp{{0, 2}, {3, 4}};
  EXPECT_EQ(tags_from_spans(4, sp), ok);
}

TEST(Conll, RoundTrip) {
  std::vector<TaggedSequence> s{{{"rare", "disorder"}, {B, I}}, {{"hello"}, {O}}};
  EXPECT_EQ(parse_conll(to_conll(s)), s);
  EXPECT_THROW(parse_conll("a\tX\n"), Error);
}

TEST(Dict, LongestMatch) {
  std::vector<std::vector<std::string>> lex{{"rare", "mental", "disorder"}, {"mental", "disorder"}};
  auto d = DictTagger::build(lex);
  std::vector<std::string> t{"rare", "mental", "disorder", "symptoms"};
  EXPECT_EQ(d.tag(t), (std::vector<Tag>{B, I, I, O}));
  std::vector<std::string> none{"hello", "world"};
  EXPECT_EQ(d.tag(none), (std::vector<Tag>{O, O}));
}

TEST(Dict, LeftmostLongestOverlap) {
  std::vector<std::vector<std::string>> lex{{"a", "b"}, {"b", "c"}};
  auto d = DictTagger::build(lex);
  std::vector<std::string> t{"a", "b", "c"};
  EXPECT_EQ(d.tag(t), (std::vector<Tag>{B, I, O}));
}

TEST(Chain, AboutCueHeldOut) {
  auto data = about_set(50, 11);
  std::vector<TaggedSequence> train(data.begin(), data.begin() + 35), test(data.begin() + 35, data.end());
  auto extra = about_set(20, 12);
  test.insert(test.end(), extra.begin(), extra.end());
  auto chain = ChainTagger::train(train, {});
  EXPECT_GE(evaluate_tagger(chain, test).f1, 0.9);
  EXPECT_EQ(evaluate_tagger(chain, train).f1, 1.0);
  EXPECT_TRUE(chain.tag(std::vector<std::string>{}).empty());
}

TEST(Chain, OutputIsValidBio) {
  auto chain = ChainTagger::train(about_set(30, 2), {});
  for (const auto& s : about_set(30, 9)) EXPECT_TRUE(is_valid_bio(chain.tag(s.tokens)));
}

TEST(Window, SeparableSigmaZero) {
  auto data = disorder_set();
  auto w = train_window_tagger(data, {}, 0.0, 60);
  std::size_t ok = 0, n = 0;
  for (const auto& s : data) {
    auto t = w.tag(s.tokens);
    for (std::size_t i = 0; i < t.size(); ++i, ++n) ok += t[i] == s.labels[i];
  }
  EXPECT_EQ(ok, n);
  auto again = train_window_tagger(data, {}, 0.0, 60);
  EXPECT_EQ(again.params(), w.params());
}

TEST(Window, NegativeSigmaRejected) {
  EXPECT_THROW(train_window_tagger(disorder_set(), {}, -0.1), Error);
}

TEST(Window, ProbabilitiesNormalized) {
  auto w = WindowTagger::init({});
  std::vector<std::string> t{"a", "b", "c"};
  for (const auto& p : w.token_probs(t)) EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-12);
}

TEST(Window, JsonRoundTrip) {
  auto w = train_window_tagger(disorder_set(), {}, 0.01, 3);
  auto back = WindowTagger::from_json(w.to_json());
  EXPECT_EQ(back.params(), w.params());
}

TEST(Window, FeatureTemplates) {
  std::vector<std::string> t{"rare", "mental", "disorder"};
  auto f = WindowTagger::feature_strings(t, 0);
  auto has = [&](const std::string& s) { return std::find(f.begin(), f.end(), s) != f.end(); };
  EXPECT_TRUE(has("t0=rare"));
  EXPECT_TRUE(has("t+1=mental"));
  EXPECT_TRUE(has("t+2=disorder"));
  EXPECT_TRUE(has("t-1=<s>"));
  EXPECT_TRUE(has("c=<r"));
}

class ConsensusTest : public ::testing::Test {
 protected:
  void SetUp() override {
    data = disorder_set();
    chain = std::make_unique<ChainTagger>(ChainTagger::train(data, {}));
    window = std::make_unique<WindowTagger>(train_window_tagger(data, {}, 0.0, 60));
  }
  std::vector<TaggedSequence> data;
  std::unique_ptr<ChainTagger> chain;
  std::unique_ptr<WindowTagger> window;
};

TEST_F(ConsensusTest, UnanimousSpan) {
  std::vector<std::vector<std::string>> lex{{"rare", "mental", "disorder"}};
  auto dict = DictTagger::build(lex);
  std::vector<std::string> t{"what", "is", "rare", "mental", "disorder", "here"};
  auto c = ensemble_consensus(t, dict, *chain, *window);
  ASSERT_TRUE(c);
  EXPECT_EQ(spans_of(c->labels), (std::vector<Span>{{2, 5}}));
}

TEST_F(ConsensusTest, OneDissentRejects) {
  auto dict = DictTagger::build(std::vector<std::vector<std::string>>{{"hello", "world"}});
  std::vector<std::string> t{"what", "is", "rare", "mental", "disorder", "here"};
  EXPECT_FALSE(ensemble_consensus(t, dict, *chain, *window));
}

TEST_F(ConsensusTest, AllEmptyIsNegativeExample) {
  auto dict = DictTagger::build(std::vector<std::vector<std::string>>{{"zzz"}});
  std::vector<std::string> t{"what", "is", "hello", "world"};
  auto c = ensemble_consensus(t, dict, *chain, *window);
  ASSERT_TRUE(c);
  EXPECT_EQ(c->labels, (std::vector<Tag>{O, O, O, O}));
}

namespace {

struct Task {
  std::vector<TaggedSequence> seeds, heldout;
  std::vector<std::vector<std::string>> unlabeled, lexicon;
};

const Task& task() {
  static Task t = [] {
    Task t;
    t.seeds = load_conll(fixture::data_path("selftrain/seeds.conll"));
    t.heldout = load_conll(fixture::data_path("selftrain/heldout.conll"));
    t.unlabeled = load_sentences(fixture::data_path("selftrain/unlabeled.txt"), TokenizerMode::whitespace);
    t.lexicon = load_sentences(fixture::data_path("selftrain/lexicon.txt"), TokenizerMode::whitespace);
    return t;
  }();
  return t;
}

}  // namespace

TEST(SelfTrain, TaskShape) {
  EXPECT_EQ(task().seeds.size(), 10u);
  EXPECT_EQ(task().unlabeled.size(), 500u);
}

TEST(SelfTrain, ItersZeroIsRoundZeroModel) {
  SelfTrainConfig cfg;
  cfg.iters = 0;
  auto r0 = self_train(task().seeds, task().unlabeled, task().lexicon, cfg);
  ASSERT_EQ(r0.rounds.size(), 1u);
  for (const auto& e : r0.pool) EXPECT_NE(e.provenance, Provenance::consensus);
  cfg.iters = 1;
  auto r1 = self_train(task().seeds, task().unlabeled, task().lexicon, cfg);
  EXPECT_EQ(r0.window.params(), r1.window_at_round.at(1).params());
  EXPECT_NE(r0.window.params(), WindowTagger::init(cfg.window).params());
}

TEST(SelfTrain, EmptySubsetLeavesPool) {
  SelfTrainConfig cfg;
  cfg.iters = 2;
  cfg.sample_frac = 0.001;
  auto r = self_train(task().seeds, task().unlabeled, task().lexicon, cfg);
  EXPECT_EQ(r.pool.size(), task().seeds.size());
  for (const auto& rep : r.rounds) EXPECT_EQ(rep.pool_size, task().seeds.size());
  EXPECT_TRUE(r.rounds.back().warning_no_consensus);
}

TEST(SelfTrain, BadConfig) {
  SelfTrainConfig cfg;
  cfg.sigma = -1;
  EXPECT_THROW(self_train(task().seeds, task().unlabeled, task().lexicon, cfg), Error);
  cfg.sigma = 0.01;
  cfg.sample_frac = 0;
  EXPECT_THROW(self_train(task().seeds, task().unlabeled, task().lexicon, cfg), Error);
  EXPECT_THROW(self_train({}, task().unlabeled, task().lexicon, {}), Error);
}

TEST(SelfTrain, DeterministicAndReplayable) {
  SelfTrainConfig cfg;
  auto a = self_train(task().seeds, task().unlabeled, task().lexicon, cfg, task().heldout);
  auto b = self_train(task().seeds, task().unlabeled, task().lexicon, cfg, task().heldout);
  EXPECT_EQ(a.window.to_json(), b.window.to_json());
  EXPECT_EQ(self_train_report_json(a, cfg), self_train_report_json(b, cfg));
  ASSERT_EQ(a.window_at_round.size(), cfg.iters + 1);
  for (const auto& e : a.pool) {
    if (e.provenance != Provenance::consensus) continue;
    auto again = ensemble_consensus(e.sample.tokens, a.dict, a.chain, a.window_at_round[e.round]);
    ASSERT_TRUE(again);
    EXPECT_EQ(*again, e.sample);
  }
  for (const auto& rep : a.rounds) EXPECT_TRUE(rep.heldout_f1.has_value());
}

TEST(SpanF1, Micro) {
  std::vector<TaggedSequence> gold{{{"a", "b", "c"}, {B, I, O}}, {{"d", "e"}, {B, O}}};
  std::vector<std::vector<Tag>> pred{{B, I, O}, {O, B}};
  auto s = span_f1(gold, pred);
  EXPECT_DOUBLE_EQ(s.precision, 0.5);
  EXPECT_DOUBLE_EQ(s.recall, 0.5);
  EXPECT_DOUBLE_EQ(s.f1, 0.5);
}
