#include <gtest/gtest.h>

#include <cmath>

#include "conceptforge/evalsim.hpp"
#include "fixtures.hpp"

using namespace conceptforge;

TEST(ExactMatch, Examples) {
  EXPECT_EQ(exact_match("rare mental disorder", "rare mental disorder"), 1);
  EXPECT_EQ(exact_match("mental disorder", "rare mental disorder"), 0);
  EXPECT_EQ(exact_match("", ""), 1);
}

TEST(TokenF1, Examples) {
  EXPECT_NEAR(token_f1("mental disorder", "rare mental disorder"), 0.8, 1e-12);
  EXPECT_EQ(token_f1("a b", "a b"), 1.0);
  EXPECT_EQ(token_f1("a b", "c d"), 0.0);
  EXPECT_EQ(token_f1("", ""), 1.0);
  EXPECT_EQ(token_f1("a", ""), 0.0);
  EXPECT_NEAR(token_f1("a a b", "a b b"), 2.0 / 3.0, 1e-12);
}

TEST(EvaluatePhrases, BestGoldAndMissing) {
  auto gold = load_gold_tsv(fixture::data_path("medical/gold.tsv"));
  ASSERT_EQ(gold.size(), 3u);
  std::map<std::string, std::string> pred;
  for (const auto& g : gold) pred[g.text] = g.gold.back();
  auto e = evaluate_phrases(gold, pred);
  EXPECT_EQ(e.exact_match, 1.0);
  EXPECT_EQ(e.f1, 1.0);
  pred.erase(gold[0].text);
  auto m = evaluate_phrases(gold, pred);
  EXPECT_EQ(m.missing_predictions, 1u);
  EXPECT_NEAR(m.exact_match, 2.0 / 3.0, 1e-12);
}

TEST(IsAPrecision, PlantedJudgments) {
  auto sc = load_scenario(fixture::data_path("sim/changepoint.json"));
  auto snap = scenario_snapshot(sc);
  Judgments j;
  for (const auto& [k, e] : snap.edges) j[k] = true;
  auto r = eval_isa_precision(snap, 1000, 1, j);
  EXPECT_EQ(r.sampled, snap.edges.size());
  EXPECT_EQ(r.precision, 1.0);
  j.begin()->second = false;
  auto r2 = eval_isa_precision(snap, 1000, 1, j);
  EXPECT_NEAR(r2.precision, 1.0 - 1.0 / static_cast<double>(snap.edges.size()), 1e-12);
  auto r3 = eval_isa_precision(snap, 1000, 1, {});
  EXPECT_EQ(r3.judged, 0u);
  EXPECT_EQ(r3.unjudged, snap.edges.size());
}

TEST(Scenario, JsonRoundTripAndValidation) {
  auto sc = load_scenario(fixture::data_path("sim/burst.json"));
  EXPECT_EQ(scenario_to_json(parse_scenario(scenario_to_json(sc))), scenario_to_json(sc));
  auto bad = sc;
  bad.instances[0].click_dist["chinese aircraft carrier"] = 0.5;
  EXPECT_THROW(validate_scenario(bad), Error);
}

TEST(Scenario, DegenerateClickMass) {
  auto sc = fixture::three_way_scenario(3);
  sc.instances[1].click_dist = {{"fruit", 1.0}};
  for (const auto& r : generate_synthetic_logs(sc, 4))
    if (r.query == "blackberry" && r.clicked_concept_tag) EXPECT_EQ(*r.clicked_concept_tag, "fruit");
}

TEST(Scenario, SameSeedSameLogs) {
  auto sc = load_scenario(fixture::data_path("sim/changepoint.json"));
  EXPECT_EQ(generate_synthetic_logs(sc, 7), generate_synthetic_logs(sc, 7));
  EXPECT_NE(generate_synthetic_logs(sc, 7), generate_synthetic_logs(sc, 8));
}

TEST(Scenario, ChangepointFrequenciesPassChiSquare) {
  auto sc = load_scenario(fixture::data_path("sim/changepoint.json"));
  const auto& cp = sc.changepoints.at(0);
  auto logs = generate_synthetic_logs(sc, 7);
  auto cp_date = sc.start_date.plus_days(static_cast<std::int64_t>(cp.day) - 1);
  std::map<std::string, double> before, after;
  double nb = 0, na = 0;
  for (const auto& r : logs) {
    if (!r.clicked_concept_tag) continue;
    if (r.date < cp_date) {
      before[*r.clicked_concept_tag] += 1;
      nb += 1;
    } else {
      after[*r.clicked_concept_tag] += 1;
      na += 1;
    }
  }
  auto chi2 = [](const std::map<std::string, double>& obs, double n, const Distribution& d) {
    double x = 0;
    for (const auto& [c, p] : d) {
      double e = n * p;
      double o = obs.count(c) ? obs.at(c) : 0.0;
      x += (o - e) * (o - e) / e;
    }
    return x;
  };
  // one degree of freedom, p = 0.001
  EXPECT_LT(chi2(before, nb, sc.instances[0].click_dist), 10.83);
  EXPECT_LT(chi2(after, na, *cp.click_dist), 10.83);
  EXPECT_GT(chi2(after, na, sc.instances[0].click_dist), 10.83);
}

TEST(Scenario, DistributionsOnDay) {
  auto sc = load_scenario(fixture::data_path("sim/burst.json"));
  const auto& inst = sc.instances[0];
  EXPECT_EQ(distributions_on(sc, inst, 9).second, inst.click_dist);
  EXPECT_EQ(distributions_on(sc, inst, 10).second, *sc.changepoints[0].click_dist);
  EXPECT_EQ(distributions_on(sc, inst, 13).second, inst.click_dist);
}

TEST(Scenario, SnapshotDatedBeforeStart) {
  auto sc = load_scenario(fixture::data_path("sim/changepoint.json"));
  auto s = scenario_snapshot(sc);
  EXPECT_EQ(s.version, 1u);
  EXPECT_EQ(*s.date, sc.start_date.plus_days(-1));
  EXPECT_EQ(s.edges.size(), 2u);
}

TEST(Draw, InverseCdf) {
  Distribution d{{"a", 0.25}, {"b", 0.75}};
  EXPECT_EQ(draw(d, 0), "a");
  EXPECT_EQ(draw(d, ~0ULL), "b");
}
