#pragma once
// Phrase metrics, isA precision sampling, and the synthetic behavior-log generator.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "conceptforge/corpus.hpp"
#include "conceptforge/graph.hpp"

namespace conceptforge {

int exact_match(std::string_view pred, std::string_view gold);
/// Token-multiset F1; 1 when both are empty, 0 when exactly one is.
double token_f1(std::string_view pred, std::string_view gold, TokenizerMode mode = TokenizerMode::whitespace);

struct GoldItem {
  std::string text;
  std::vector<std::string> gold;  // normalized
};

/// TSV `text<TAB>gold[;gold...]`.
std::vector<GoldItem> load_gold_tsv(const std::string& path);
std::vector<GoldItem> parse_gold_tsv(std::string_view contents);

struct PhraseEval {
  std::size_t n = 0;
  std::size_t missing_predictions = 0;
  double exact_match = 0.0;  // mean over items of the best score against any gold phrase
  double f1 = 0.0;
};

/// predictions: text -> predicted phrase. Missing predictions score 0.
PhraseEval evaluate_phrases(const std::vector<GoldItem>& gold, const std::map<std::string, std::string>& predictions,
                            TokenizerMode mode = TokenizerMode::whitespace);
/// TSV `text<TAB>predicted`.
std::map<std::string, std::string> load_predictions_tsv(const std::string& path);

using Judgments = std::map<EdgeKey, bool>;
/// TSV `child<TAB>parent<TAB>{1|0}`.
Judgments parse_judgments_tsv(std::string_view contents);
Judgments load_judgments(const std::string& path);

struct IsAPrecision {
  std::size_t sampled = 0;
  std::size_t judged = 0;
  std::size_t correct = 0;
  std::size_t unjudged = 0;
  double precision = 0.0;  // correct / judged
  double mean_instances_per_concept = 0.0;
  std::size_t max_instances_per_concept = 0;
  std::map<std::string, std::size_t> instances_per_concept;
};

/// Uniform sample (seeded) of min(sample_n, |edges|) edges.
IsAPrecision eval_isa_precision(const TaxonomySnapshot& snap, std::size_t sample_n, std::uint64_t seed,
                                const Judgments& judgments);

// ---------------------------------------------------------------------------
// Synthetic scenario

using Distribution = std::map<std::string, double>;  // concept id -> mass

struct SimConcept {
  std::string id;
  std::string text;
  std::string key_entity;
  int level = 3;
  bool in_M = false;
};

struct SimInstance {
  std::string id;
  std::string text;
  std::vector<std::string> concepts;  // planted isA parents
  std::size_t searches_per_day = 0;
  std::size_t clicks_per_day = 0;
  Distribution search_dist;
  Distribution click_dist;
};

struct Changepoint {
  std::size_t day = 1;  // 1-based; in effect from this day on
  std::string instance;
  std::optional<Distribution> search_dist;
  std::optional<Distribution> click_dist;
};

struct SimScenario {
  Date start_date;
  std::size_t days = 1;
  std::vector<SimConcept> concepts;
  std::vector<SimInstance> instances;
  std::vector<Changepoint> changepoints;
};

SimScenario parse_scenario(std::string_view json_text);
SimScenario load_scenario(const std::string& path);
std::string scenario_to_json(const SimScenario& sc);
/// Throws Error naming the first offending instance-day.
void validate_scenario(const SimScenario& sc);

/// Distributions in effect for an instance on a 1-based day.
std::pair<Distribution, Distribution> distributions_on(const SimScenario& sc, const SimInstance& inst, std::size_t day);

/// Per day and instance: search records (query = instance + key entity of a
/// drawn concept) and tagged click records (query = instance, tag = drawn concept).
std::vector<QueryLogRecord> generate_synthetic_logs(const SimScenario& sc, std::uint64_t seed);

/// Concepts, instances and planted edges as a version-1 snapshot dated the day before the scenario.
TaxonomySnapshot scenario_snapshot(const SimScenario& sc);

/// Draws from a distribution using a portable inverse-CDF over mt19937_64 output.
std::string draw(const Distribution& d, std::uint64_t raw);

}  // namespace conceptforge
