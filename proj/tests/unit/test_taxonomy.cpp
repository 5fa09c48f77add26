#include <gtest/gtest.h>

#include <cmath>

#include "conceptforge/evalsim.hpp"
#include "conceptforge/taxonomy.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace conceptforge;

namespace {

QueryLogRecord search(const std::string& q, const std::string& day) { return {q, {}, std::nullopt, Date::parse(day)}; }

TaxonomySnapshot small_snapshot() {
  InitInput in;
  in.date = Date::parse("2024-05-01");
  in.concepts = {{"fruit", Level::level3, false, false, "juice"}, {"tech company", Level::level3, false, false, "stock"}};
  in.edges = {{"apple", "fruit", 0.5, {}, {EdgeSource::bootstrap}},
              {"apple", "tech company", 0.5, {}, {EdgeSource::bootstrap}}};
  return assemble_snapshot(in, TokenizerMode::whitespace);
}

}  // namespace

TEST(Heat, Normalized) {
  std::vector<QueryLogRecord> logs;
  for (int i = 0; i < 100; ++i) logs.push_back(search("e1 news", "2024-05-01"));
  for (int i = 0; i < 300; ++i) logs.push_back(search("about e2", "2024-05-01"));
  auto h = estimate_heat(logs, {"e1", "e2", "e3"});
  EXPECT_DOUBLE_EQ(h.heat_of("e1"), 0.25);
  EXPECT_DOUBLE_EQ(h.heat_of("e2"), 0.75);
  EXPECT_EQ(h.raw_of("e2"), 300);
  EXPECT_FALSE(h.heat.count("e3"));

  std::vector<QueryLogRecord> one{search("e1", "2024-05-01")};
  EXPECT_DOUBLE_EQ(estimate_heat(one, {"e1"}).heat_of("e1"), 1.0);
  EXPECT_TRUE(estimate_heat(one, {"zz"}).empty());
}

TEST(Heat, LongestEntityWins) {
  std::vector<QueryLogRecord> logs{search("novel coronavirus pneumonia cases", "2024-05-01")};
  auto h = estimate_heat(logs, {"coronavirus", "novel coronavirus pneumonia"});
  EXPECT_EQ(h.raw_of("novel coronavirus pneumonia"), 1);
  EXPECT_EQ(h.raw_of("coronavirus"), 0);
}

TEST(Implicit, Examples) {
  std::vector<double> h{2, 6};
  EXPECT_DOUBLE_EQ(implicit_score(0, h), 0.25);
  std::vector<double> one{3};
  EXPECT_DOUBLE_EQ(implicit_score(0, one), 1.0);
  std::vector<double> z{0, 5};
  EXPECT_EQ(implicit_score(0, z), 0.0);
  std::vector<double> none{0, 0};
  EXPECT_THROW(implicit_scores(none), Error);
}

TEST(Explicit, Examples) {
  std::vector<std::int64_t> c{30, 10};
  auto e = explicit_scores(c);
  EXPECT_DOUBLE_EQ(e.scores[0], 0.75);
  EXPECT_FALSE(e.no_evidence);
  std::vector<std::int64_t> zero{0, 0};
  auto z = explicit_scores(zero);
  EXPECT_TRUE(z.no_evidence);
  EXPECT_EQ(z.scores, (std::vector<double>{0, 0}));
}

TEST(Combined, Examples) {
  std::vector<DailyScore> a{{0.25, 0.35}};
  EXPECT_NEAR(combined_score(a, false).value, 0.6, 1e-15);
  std::vector<DailyScore> b{{0.5, 0.5}};
  EXPECT_NEAR(combined_score(b, true).value, 2.5 * std::log(0.5), 1e-15);
  EXPECT_NEAR(combined_score(b, true).value, -1.7329, 1e-4);
  std::vector<DailyScore> c{{0.3, 0.3}, {0.2, 0.2}};
  EXPECT_NEAR(combined_score(c, false).value, 1.0, 1e-15);
  std::vector<DailyScore> d{{0.0, 0.5}};
  auto r = combined_score(d, true);
  EXPECT_TRUE(r.clamped);
  EXPECT_NEAR(r.value, 1.5 * std::log(1e-6) + std::log(0.5), 1e-12);
}

TEST(Reweight, Examples) {
  auto r = reweight_unambiguous(0.6, std::exp(1.0), true);
  EXPECT_NEAR(r.value, 11.7, 1e-12);
  EXPECT_TRUE(r.applied);
  EXPECT_EQ(reweight_unambiguous(0.6, 100, false).value, 0.6);
  EXPECT_EQ(reweight_unambiguous(0.6, 1, true).value, 0.0);
  auto s = reweight_unambiguous(0.6, 0.5, true);
  EXPECT_TRUE(s.skipped);
  EXPECT_EQ(s.value, 0.6);
}

TEST(Inference, Examples) {
  std::map<std::string, std::set<std::string>> m;
  for (int i = 0; i < 10; ++i) m["i" + std::to_string(i)].insert("c");
  for (int i = 0; i < 4; ++i) m["i" + std::to_string(i)].insert("p");
  for (int i = 0; i < 3; ++i) m["i" + std::to_string(i)].insert("q");
  for (int i = 0; i < 10; ++i) m["i" + std::to_string(i)].insert("all");
  auto r = infer_isa_levels({"c", "empty"}, {"p", "q", "all"}, m, 0.3);
  ASSERT_EQ(r.edges.size(), 2u);
  EXPECT_EQ(r.edges[0], (InferredEdge{"c", "all", 1.0}));
  EXPECT_EQ(r.edges[1], (InferredEdge{"c", "p", 0.4}));
  EXPECT_EQ(r.skipped, std::vector<std::string>{"empty"});
}

TEST(Inference, MatchesOracleOnRandomGraphs) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto m = fixture::random_membership(1000, 10, 4, seed);
    auto got = infer_isa_levels(m.level3, m.level2, m.of, 0.3);
    EXPECT_EQ(got.edges, oracle::inference(m.level3, m.level2, m.of, 0.3));
  }
}

TEST(Synonyms, MergeAndIdempotent) {
  TaxonomySnapshot s;
  s.version = 1;
  for (std::string id : {"ncp", "novel coronavirus pneumonia", "disease", "wuhan"})
    s.nodes[id] = {id, id, id == "wuhan" ? Level::instance : Level::level3, false, false, std::nullopt};
  s.edges[{"ncp", "disease"}] = {"ncp", "disease", 0.4, {}, {EdgeSource::bootstrap}};
  s.edges[{"novel coronavirus pneumonia", "disease"}] = {"novel coronavirus pneumonia", "disease", 0.7, {},
                                                         {EdgeSource::tagger}};
  s.edges[{"wuhan", "ncp"}] = {"wuhan", "ncp", 0.2, {}, {EdgeSource::bootstrap}};
  auto syn = SynonymDict::load(fixture::data_path("taxonomy/synonyms.tsv"));
  auto r = align_synonyms(s, syn);
  EXPECT_FALSE(r.snapshot.nodes.count("ncp"));
  EXPECT_TRUE(r.snapshot.nodes.count("novel coronavirus pneumonia"));
  EXPECT_EQ(r.snapshot.edges.size(), 2u);
  EXPECT_TRUE(r.snapshot.edges.count({"wuhan", "novel coronavirus pneumonia"}));
  EXPECT_EQ(r.snapshot.edges.at({"novel coronavirus pneumonia", "disease"}).sources.size(), 2u);
  EXPECT_EQ(align_synonyms(r.snapshot, syn).snapshot, r.snapshot);
  EXPECT_EQ(align_synonyms(s, SynonymDict()).snapshot, s);
}

TEST(Synonyms, JoiningClassesThrows) {
  SynonymDict d;
  d.add("a", "x");
  d.add("b", "y");
  EXPECT_THROW(d.add("x", "y"), Error);
}

TEST(Config, Parse) {
  auto c = load_taxonomy_config(fixture::data_path("taxonomy/config.json"));
  EXPECT_EQ(c.window, 7u);
  EXPECT_DOUBLE_EQ(c.delta_t, 0.3);
  EXPECT_DOUBLE_EQ(c.reweight_factor, 19.5);
  EXPECT_EQ(c.explicit_window_days, 30u);
  ASSERT_EQ(c.expert_rules.size(), 1u);
  EXPECT_TRUE(c.excluded_concepts.count("things"));
}

TEST(DailyUpdate, TwoUpdatesTwoEntries) {
  auto s0 = small_snapshot();
  TaxonomyConfig cfg;
  std::vector<QueryLogRecord> d1{search("apple juice", "2024-05-02"), search("apple stock", "2024-05-02")};
  auto u1 = daily_update(s0, Date::parse("2024-05-02"), d1, cfg);
  auto u2 = daily_update(u1.snapshot, Date::parse("2024-05-03"), {}, cfg);
  for (const auto& [k, e] : u2.snapshot.edges) EXPECT_EQ(e.history.size(), s0.edges.at(k).history.size() + 2);
  EXPECT_EQ(u2.snapshot.version, s0.version + 2);
  EXPECT_EQ(*u2.snapshot.date, Date::parse("2024-05-03"));
}

TEST(DailyUpdate, EmptyDayFlagsAndNoStructuralChange) {
  auto s0 = small_snapshot();
  auto u = daily_update(s0, Date::parse("2024-05-02"), {}, {});
  EXPECT_EQ(u.snapshot.nodes, s0.nodes);
  ASSERT_EQ(u.snapshot.edges.size(), s0.edges.size());
  for (const auto& [k, e] : u.snapshot.edges) {
    EXPECT_TRUE(e.history.back().flags & score_flags::no_explicit);
    EXPECT_TRUE(e.history.back().flags & score_flags::no_implicit);
  }
}

TEST(DailyUpdate, RejectsStaleDayAndMisdatedRecords) {
  auto s0 = small_snapshot();
  EXPECT_THROW(daily_update(s0, Date::parse("2024-05-01"), {}, {}), Error);
  std::vector<QueryLogRecord> wrong{search("apple", "2024-05-05")};
  EXPECT_THROW(daily_update(s0, Date::parse("2024-05-02"), wrong, {}), Error);
}

TEST(DailyUpdate, InputUnchanged) {
  auto s0 = small_snapshot();
  auto before = snapshot_to_json(s0);
  std::vector<QueryLogRecord> d1{search("apple juice", "2024-05-02")};
  (void)daily_update(s0, Date::parse("2024-05-02"), d1, {});
  EXPECT_EQ(snapshot_to_json(s0), before);
}

TEST(DailyUpdate, ClickMajorityHasMaxExplicit) {
  auto s0 = small_snapshot();
  std::vector<QueryLogRecord> d1;
  for (int i = 0; i < 8; ++i) d1.push_back({"apple", {{"apple pie", 1}}, "fruit", Date::parse("2024-05-02")});
  for (int i = 0; i < 2; ++i) d1.push_back({"apple", {{"apple inc", 1}}, "tech company", Date::parse("2024-05-02")});
  auto u = daily_update(s0, Date::parse("2024-05-02"), d1, {});
  EXPECT_DOUBLE_EQ(u.snapshot.edges.at({"apple", "fruit"}).history.back().s_explicit, 0.8);
  EXPECT_DOUBLE_EQ(u.snapshot.edges.at({"apple", "tech company"}).history.back().s_explicit, 0.2);
}

TEST(DailyUpdate, ScoresSumToOnePerInstanceDay) {
  auto sc = fixture::three_way_scenario(6);
  auto snap = replay_days(scenario_snapshot(sc), generate_synthetic_logs(sc, 3), {});
  std::map<std::pair<std::string, Date>, double> imp, exp;
  for (const auto& [k, e] : snap.edges)
    for (const auto& p : e.history) {
      if (p.flags & score_flags::structural) continue;
      imp[{e.child, p.date}] += p.s_implicit;
      if (!(p.flags & score_flags::no_explicit)) exp[{e.child, p.date}] += p.s_explicit;
    }
  EXPECT_FALSE(imp.empty());
  for (const auto& [k, v] : imp) EXPECT_NEAR(v, 1.0, 1e-9);
  for (const auto& [k, v] : exp) EXPECT_NEAR(v, 1.0, 1e-9);
}

TEST(Export, RowsAndCsvRoundTrip) {
  auto s = small_snapshot();
  TaxonomyConfig cfg;
  for (int d = 2; d <= 4; ++d) {
    auto day = "2024-05-0" + std::to_string(d);
    std::vector<QueryLogRecord> logs{search("apple juice", day), search("apple stock", day)};
    s = daily_update(s, Date::parse(day), logs, cfg).snapshot;
  }
  auto rows = export_timeseries(s, "apple");
  EXPECT_EQ(rows.size(), 6u);
  for (std::size_t i = 1; i < rows.size(); ++i)
    EXPECT_TRUE(std::tie(rows[i - 1].date, rows[i - 1].parent) < std::tie(rows[i].date, rows[i].parent));
  auto back = series_from_csv(series_to_csv("apple", rows));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back.at("fruit"), s.edges.at({"apple", "fruit"}).history);
  EXPECT_THROW(export_timeseries(s, "banana"), Error);
}

TEST(Export, FreshInstanceOneDay) {
  auto s = daily_update(small_snapshot(), Date::parse("2024-05-02"), {}, {}).snapshot;
  EXPECT_EQ(export_timeseries(s, "apple").size(), 2u);
}

TEST(Snapshot, JsonRoundTrip) {
  auto sc = fixture::three_way_scenario(3);
  auto snap = replay_days(scenario_snapshot(sc), generate_synthetic_logs(sc, 1), {});
  EXPECT_EQ(snapshot_from_json(snapshot_to_json(snap)), snap);
}

TEST(Assemble, KeyEntityFromRecords) {
  InitInput in;
  in.concepts = {{"coronavirus city", Level::level3, false, false, std::nullopt}};
  in.edges = {{"wuhan", "coronavirus city", 0.5, {}, {EdgeSource::bootstrap}}};
  std::vector<QueryLogRecord> logs{{"wuhan virus", {}, "coronavirus city", Date::parse("2020-01-01")},
                                   {"wuhan virus cases", {}, "coronavirus city", Date::parse("2020-01-01")},
                                   {"wuhan food", {}, std::nullopt, Date::parse("2020-01-01")}};
  auto s = assemble_snapshot(in, TokenizerMode::whitespace, logs, {"virus", "food"});
  EXPECT_EQ(s.version, 1u);
  EXPECT_EQ(s.nodes.at("wuhan").level, Level::instance);
  EXPECT_EQ(s.nodes.at("coronavirus city").key_entity, std::optional<std::string>("virus"));
}
