#include <gtest/gtest.h>

#include <random>

#include "conceptforge/bootstrap.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace conceptforge;

namespace {

const auto WS = TokenizerMode::whitespace;

std::vector<std::string> toks(const std::string& s) { return to_tokens(s, WS); }

QueryLogRecord rec(const std::string& q, std::vector<ClickedDoc> docs = {}) {
  return {q, std::move(docs), std::nullopt, Date::parse("2019-07-01")};
}

}  // namespace

TEST(Template, Examples) {
  auto p = Pattern::make(toks("top 10"), {});
  auto c = extract_by_template(toks("top 10 mobile games"), p, WS);
  ASSERT_TRUE(c);
  EXPECT_EQ(c->text, "top 10 mobile games");
  EXPECT_FALSE(extract_by_template(toks("mobile games"), p, WS));
  EXPECT_FALSE(extract_by_template(toks("top 10"), p, WS));
}

TEST(Template, PatternText) {
  EXPECT_EQ(Pattern::make(toks("top 10"), {}).str(), "top 10 |||");
  EXPECT_EQ(Pattern::make({}, toks("ranking")).str(), "||| ranking");
  auto parsed = parse_patterns("# comment\n\ntop 10 |||\n||| ranking\nbest ||| 2019\n", WS);
  ASSERT_EQ(parsed.size(), 3u);
  EXPECT_EQ(parsed[2], Pattern::make(toks("best"), toks("2019")));
}

TEST(Alignment, CoronavirusExample) {
  auto q = toks("symptoms of coronavirus pneumonia");
  std::vector<ClickedDoc> docs{{"what are symptoms of coronavirus pneumonia", 3},
                               {"coronavirus pneumonia symptoms list", 1}};
  auto titles = tokenize_titles(docs, WS);
  AlignmentConfig cfg{2, 2};
  auto c = extract_by_alignment(q, titles, cfg, WS);
  ASSERT_TRUE(c);
  EXPECT_EQ(c->text, "coronavirus pneumonia");
}

TEST(Alignment, NoTitlesOrNoOverlap) {
  AlignmentConfig cfg{2, 2};
  EXPECT_FALSE(extract_by_alignment(toks("a b c"), {}, cfg, WS));
  auto titles = tokenize_titles({{"x y z", 4}, {"y z w", 2}}, WS);
  EXPECT_FALSE(extract_by_alignment(toks("a b c"), titles, cfg, WS));
}

TEST(Alignment, ZeroClickTitlesIgnored) {
  AlignmentConfig cfg{2, 2};
  auto titles = tokenize_titles({{"a b guide", 4}, {"about a b", 0}}, WS);
  EXPECT_FALSE(extract_by_alignment(toks("a b"), titles, cfg, WS));
}

TEST(Alignment, MatchesBruteForceOnRandomInputs) {
  std::mt19937_64 rng(3);
  const std::vector<std::string> vocab{"a", "b", "c", "d", "e"};
  auto words = [&](std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + vocab[rng() % vocab.size()];
    return s;
  };
  for (int k = 0; k < 300; ++k) {
    std::vector<ClickedDoc> docs;
    for (std::size_t i = 0, n = 1 + rng() % 4; i < n; ++i)
      docs.push_back({words(2 + rng() % 5), static_cast<std::int64_t>(rng() % 4)});
    auto q = toks(words(2 + rng() % 5));
    auto got = extract_by_alignment(q, tokenize_titles(docs, WS), {2, 2}, WS);
    auto want = oracle::align(q, docs, 2, 2);
    ASSERT_EQ(got.has_value(), want.has_value());
    if (got) EXPECT_EQ(got->tokens, *want);
  }
}

TEST(Filter, Examples) {
  FilterThresholds t;
  EXPECT_TRUE(filter_pattern({3, 4}, t).keep);
  EXPECT_FALSE(filter_pattern({2, 3}, t).keep);
  EXPECT_FALSE(filter_pattern({9, 10}, t).keep);
  EXPECT_FALSE(filter_pattern({5, 0}, t).keep);
  EXPECT_FALSE(filter_pattern({3, 5}, t).keep);
  EXPECT_FALSE(filter_pattern({4, 5}, t).keep);
}

TEST(GenPatterns, Examples) {
  std::vector<std::vector<std::string>> none;
  std::vector<Pattern> pool;
  std::vector<std::vector<std::string>> s1{toks("top 10 mobile games")}, q1{toks("top 10 mobile games")};
  EXPECT_TRUE(gen_patterns(s1, q1, pool).empty());

  std::vector<std::vector<std::string>> s2{toks("mobile games")}, q2{toks("best mobile games 2019")};
  auto p = gen_patterns(s2, q2, pool);
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p[0], Pattern::make({"best"}, {"2019"}));

  std::vector<std::vector<std::string>> q3{toks("weather today")};
  EXPECT_TRUE(gen_patterns(s2, q3, pool).empty());

  std::vector<Pattern> have{Pattern::make({"best"}, {"2019"})};
  EXPECT_TRUE(gen_patterns(s2, q2, have).empty());
}

TEST(RunBootstrap, AcceptanceNeedsAlignmentCoverage) {
  std::vector<QueryLogRecord> logs{
      // aligned span shorter than the phrase: rejected
      rec("top 10 cameras", {{"cameras guide", 3}, {"cameras reviewed", 2}}),
      // aligned span of length 4 covers the 3-token phrase: accepted
      rec("top 10 phones", {{"top 10 phones guide", 3}, {"see top 10 phones", 2}}),
      // no titles: rejected
      rec("top 10 tablets"),
  };
  std::vector<Pattern> seeds{Pattern::make(toks("top 10"), {})};
  auto r = run_bootstrap(logs, seeds, {});
  ASSERT_EQ(r.concepts.size(), 1u);
  EXPECT_EQ(r.concepts[0].text, "top 10 phones");
  EXPECT_EQ(r.concepts[0].alignment_witness, "top 10 phones");
  EXPECT_EQ(r.concepts[0].pattern_id, seeds[0].id);
}

TEST(RunBootstrap, FivePlantedQueriesAfterOneIteration) {
  std::vector<QueryLogRecord> logs;
  for (std::string x : {"phones", "laptops", "cameras", "tablets", "headphones"})
    logs.push_back(rec("top 10 " + x, {{"top 10 " + x + " guide", 5}, {"the top 10 " + x, 2}}));
  logs.push_back(rec("weather today"));
  BootstrapConfig cfg;
  cfg.iters = 1;
  auto r = run_bootstrap(logs, std::vector<Pattern>{Pattern::make(toks("top 10"), {})}, cfg);
  EXPECT_EQ(r.concepts.size(), 5u);
  EXPECT_EQ(r.rounds.at(0).concepts_added, 5u);
}

TEST(RunBootstrap, EmptyLogEarlyExit) {
  auto r = run_bootstrap({}, std::vector<Pattern>{Pattern::make(toks("top 10"), {})}, {});
  EXPECT_TRUE(r.concepts.empty());
  EXPECT_TRUE(r.early_exit);
}

TEST(RunBootstrap, MatchesReferenceOnToyCorpus) {
  auto log = load_query_log(fixture::data_path("bootstrap/toy_log.jsonl"));
  auto lines = read_lines(fixture::data_path("bootstrap/seed_patterns.txt"));
  auto seeds = parse_patterns(read_file(fixture::data_path("bootstrap/seed_patterns.txt")), WS);
  for (std::size_t iters : {1u, 2u, 5u}) {
    BootstrapConfig cfg;
    cfg.iters = iters;
    auto r = run_bootstrap(log.records, seeds, cfg);
    auto ref = oracle::bootstrap(log.records, lines, 0.6, 0.8, 2, iters, 2, 2);
    ASSERT_EQ(r.concepts.size(), ref.concepts.size());
    for (std::size_t i = 0; i < ref.concepts.size(); ++i) EXPECT_EQ(r.concepts[i].text, ref.concepts[i].text);
    ASSERT_EQ(r.patterns.size(), ref.patterns.size());
    EXPECT_EQ(r.early_exit, ref.early_exit);
  }
}

TEST(RunBootstrap, Deterministic) {
  auto log = load_query_log(fixture::data_path("bootstrap/toy_log.jsonl"));
  auto seeds = load_patterns(fixture::data_path("bootstrap/seed_patterns.txt"), WS);
  EXPECT_EQ(bootstrap_result_to_json(run_bootstrap(log.records, seeds, {})),
            bootstrap_result_to_json(run_bootstrap(log.records, seeds, {})));
}

TEST(Featurize, Counts) {
  std::vector<QueryLogRecord> logs;
  for (int i = 0; i < 7; ++i) logs.push_back(rec("top 10 games"));
  logs.push_back(rec("top 10 games 2019"));
  auto stats = CorpusStats::build(logs, WS);
  ConceptCandidate c;
  c.text = "top 10 games";
  c.tokens = toks(c.text);
  auto f = featurize_candidate(c, stats);
  EXPECT_TRUE(f.appeared_as_query);
  EXPECT_EQ(f.search_count, 7);
  EXPECT_EQ(f.token_len, 3u);
  EXPECT_TRUE(f.contains_digit);
  c.text = "mobile games";
  c.tokens = toks(c.text);
  f = featurize_candidate(c, stats);
  EXPECT_FALSE(f.appeared_as_query);
  EXPECT_EQ(f.search_count, 0);
  EXPECT_EQ(f.as_vector().size(), CandidateFeatures::kDim);
}

TEST(Discriminator, SeparableHeldOut) {
  std::mt19937_64 rng(5);
  std::vector<std::vector<double>> X, Xh;
  std::vector<int> y, yh;
  for (int i = 0; i < 200; ++i) {
    int label = i % 2;
    CandidateFeatures f;
    f.appeared_as_query = label == 1;
    f.search_count = static_cast<std::int64_t>(rng() % 50);
    f.token_len = 1 + rng() % 5;
    f.head_token_idf = static_cast<double>(rng() % 100) / 10.0;
    (i < 150 ? X : Xh).push_back(f.as_vector());
    (i < 150 ? y : yh).push_back(label);
  }
  auto m = DiscriminatorModel::train(X, y, {});
  std::size_t ok = 0;
  for (std::size_t i = 0; i < Xh.size(); ++i) {
    auto d = discriminate_concept(
        CandidateFeatures{Xh[i][0] > 0.5, static_cast<std::int64_t>(Xh[i][1]), static_cast<std::size_t>(Xh[i][2]),
                          static_cast<std::size_t>(Xh[i][3]), Xh[i][4] > 0.5, Xh[i][5]},
        m);
    ok += (d.verdict == Verdict::concept_phrase) == (yh[i] == 1);
  }
  EXPECT_EQ(ok, Xh.size());
  EXPECT_EQ(m.score(Xh[0]), m.score(Xh[0]));
  EXPECT_EQ(DiscriminatorModel::from_json(m.to_json()).to_json(), m.to_json());
}

TEST(Discriminator, HalfIsConcept) {
  auto m = DiscriminatorModel::from_json(
      R"({"format":"conceptforge-discriminator","version":1,"trained":true,"base":0.0,"learning_rate":0.3,"stumps":[]})");
  auto d = discriminate_concept({}, m);
  EXPECT_DOUBLE_EQ(d.score, 0.5);
  EXPECT_EQ(d.verdict, Verdict::concept_phrase);
  EXPECT_THROW(DiscriminatorModel().score(std::vector<double>(CandidateFeatures::kDim)), Error);
}

TEST(Link, FourOfTen) {
  std::vector<QueryLogRecord> logs;
  for (int i = 0; i < 4; ++i) logs.push_back(rec("wuhan tourism guide"));
  for (int i = 0; i < 6; ++i) logs.push_back(rec("wuhan weather"));
  std::vector<std::string> inst{"wuhan"}, conc{"tourism city"};
  auto edges = link_instances(inst, conc, logs, {});
  ASSERT_EQ(edges.size(), 1u);
  EXPECT_DOUBLE_EQ(edges[0].prior, 0.4);
  EXPECT_EQ(edges[0].child, "wuhan");
  EXPECT_EQ(edges[0].parent, "tourism city");

  std::vector<std::string> other{"coronavirus city"};
  EXPECT_TRUE(link_instances(inst, other, logs, {}).empty());
}

TEST(Link, ClassifierLinksAlwaysProduceEdges) {
  std::vector<std::string> inst{"wuhan"}, conc{"coronavirus city"};
  auto edges = link_instances(inst, conc, {}, {}, {{"wuhan", "coronavirus city"}});
  ASSERT_EQ(edges.size(), 1u);
  EXPECT_TRUE(edges[0].sources.count(EdgeSource::phrasemine));
}

TEST(Link, MedicalCorpusPlantedEdge) {
  auto log = load_query_log(fixture::data_path("medical/log.jsonl"));
  std::vector<std::string> inst{"body integrity identity disorder"};
  std::vector<std::string> conc{"rare mental disorder", "endocrine disorder"};
  auto edges = link_instances(inst, conc, log.records, {});
  bool found = false;
  for (const auto& e : edges)
    if (e.child == inst[0] && e.parent == "rare mental disorder") found = true;
  EXPECT_TRUE(found);
}
