#pragma once
// Evolving taxonomy: synonym alignment, entity heat, implicit/explicit
// confidence, windowed combination, re-weighting, level inference and the
// daily snapshot update.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "conceptforge/corpus.hpp"
#include "conceptforge/graph.hpp"

namespace conceptforge {

// ---------------------------------------------------------------------------
// Synonyms

class SynonymDict {
 public:
  /// Adds `surface` to the class of `canonical`. Throws when this would join two classes.
  void add(const std::string& surface, const std::string& canonical);
  /// Canonical form of a surface string, or the string itself.
  const std::string& canonical(const std::string& surface) const;
  bool empty() const { return to_canonical_.empty(); }
  std::size_t size() const { return to_canonical_.size(); }

  /// TSV `surface<TAB>canonical`, normalized on load.
  static SynonymDict parse_tsv(std::string_view contents);
  static SynonymDict load(const std::string& path);

 private:
  std::map<std::string, std::string> to_canonical_;
};

struct MergeLogEntry {
  std::string from;
  std::string into;
  std::string note;
};

struct AlignResult {
  TaxonomySnapshot snapshot;
  std::vector<MergeLogEntry> log;
};

/// Node ids and edge endpoints are mapped through the dictionary. Histories of
/// merged edges are combined by date (higher combined score kept on a clash).
/// Self-edges produced by a merge are dropped and logged.
AlignResult align_synonyms(const TaxonomySnapshot& snap, const SynonymDict& syn);

// ---------------------------------------------------------------------------
// Heat

struct HeatRow {
  std::map<std::string, std::int64_t> raw;  // entity -> matched search events
  std::map<std::string, double> heat;       // sum-normalized over entities with nonzero count

  bool empty() const { return heat.empty(); }
  double heat_of(const std::string& e) const {
    auto it = heat.find(e);
    return it == heat.end() ? 0.0 : it->second;
  }
  std::int64_t raw_of(const std::string& e) const {
    auto it = raw.find(e);
    return it == raw.end() ? 0 : it->second;
  }
};

/// Maximum forward matching of the entity lexicon against every query.
HeatRow estimate_heat(std::span<const QueryLogRecord> logs, const std::set<std::string>& entity_lexicon,
                      TokenizerMode mode = TokenizerMode::whitespace);

/// Chooses the entity with the largest TF-IDF over the concept's supporting
/// queries; ties go to the smallest entity string.
std::optional<std::string> select_key_entity(std::span<const std::vector<std::string>> supporting_queries,
                                             std::span<const std::vector<std::string>> all_queries,
                                             const std::set<std::string>& entity_lexicon, TokenizerMode mode);

// ---------------------------------------------------------------------------
// Scores

/// heats[c] / sum(heats). Throws Error("no implicit evidence") when the sum is 0.
std::vector<double> implicit_scores(std::span<const double> heats);
double implicit_score(std::size_t index, std::span<const double> heats);

struct ExplicitScores {
  std::vector<double> scores;
  bool no_evidence = false;
};

/// counts normalized over the concept set; all zeros with the flag when empty.
ExplicitScores explicit_scores(std::span<const std::int64_t> counts);

struct DailyScore {
  double s_implicit = 0.0;
  double s_explicit = 0.0;
};

struct CombineParams {
  double implicit_weight_in_M = 1.5;
  double log_floor = 1e-6;
};

struct CombinedScore {
  double value = 0.0;
  bool clamped = false;
};

/// Sum over the window. Outside M: s_imp + s_exp. Inside M: w*ln(s_imp) + ln(s_exp),
/// with each argument floored at `log_floor`.
CombinedScore combined_score(std::span<const DailyScore> window, bool in_M, const CombineParams& p = {});

struct ReweightResult {
  double value = 0.0;
  bool applied = false;
  bool skipped = false;  // unambiguous but raw heat < 1
};

ReweightResult reweight_unambiguous(double s, double raw_heat, bool unambiguous, double factor = 19.5);

// ---------------------------------------------------------------------------
// Level inference

struct InferredEdge {
  std::string child;   // level-3 concept
  std::string parent;  // level-2 concept
  double p = 0.0;      // n_p^c / n^c
  bool operator==(const InferredEdge&) const = default;
};

struct InferenceResult {
  std::vector<InferredEdge> edges;    // sorted by (child, parent)
  std::vector<std::string> skipped;  // level-3 concepts with no instances
};

/// membership: instance -> concepts it belongs to. Emits (c, p) iff n_p^c / n^c > delta_t.
InferenceResult infer_isa_levels(const std::set<std::string>& level3, const std::set<std::string>& level2,
                                 const std::map<std::string, std::set<std::string>>& membership, double delta_t);

// ---------------------------------------------------------------------------
// Daily update

struct ExpertRule {
  std::string child;   // level-2 concept
  std::string parent;  // level-1 concept
};

struct TaxonomyConfig {
  std::size_t window = 7;
  double delta_t = 0.3;
  double reweight_factor = 19.5;
  std::size_t explicit_window_days = 30;
  CombineParams combine;
  TokenizerMode tokenizer = TokenizerMode::whitespace;
  std::set<std::string> excluded_concepts;  // stop/common words, matched on id or normalized text
  std::vector<ExpertRule> expert_rules;
  std::vector<EdgeKey> pinned_edges;
};

/// JSON config: window, delta_t, reweight_factor, explicit_window_days,
/// excluded_concepts, expert_rules [[child, parent]], pinned_edges [[child, parent]].
TaxonomyConfig parse_taxonomy_config(std::string_view json_text);
TaxonomyConfig load_taxonomy_config(const std::string& path);

struct UpdateLog {
  std::vector<std::string> messages;
  std::size_t scored_edges = 0;
  std::size_t structural_edges = 0;
  std::size_t unknown_tags = 0;
};

struct UpdateResult {
  TaxonomySnapshot snapshot;
  HeatRow heat;
  UpdateLog log;
};

/// Produces the next snapshot for `day`. The input is never modified.
/// Throws Error when `day` is not after the snapshot date or a record is dated otherwise.
UpdateResult daily_update(const TaxonomySnapshot& snap, const Date& day, std::span<const QueryLogRecord> day_logs,
                          const TaxonomyConfig& cfg);

/// Groups records by date and applies daily_update for each day in order; days
/// without records between the first and last date still get an update.
TaxonomySnapshot replay_days(TaxonomySnapshot snap, std::span<const QueryLogRecord> records,
                             const TaxonomyConfig& cfg, std::vector<UpdateLog>* logs = nullptr);

// ---------------------------------------------------------------------------
// Series export

struct SeriesRow {
  Date date;
  std::string parent;
  double s_combined = 0.0;
  double s_implicit = 0.0;
  double s_explicit = 0.0;
  std::uint32_t flags = 0;
  bool operator==(const SeriesRow&) const = default;
};

/// Rows sorted by date then parent id. Throws Error for an unknown instance.
std::vector<SeriesRow> export_timeseries(const TaxonomySnapshot& snap, const std::string& instance);
std::string series_to_csv(const std::string& instance, std::span<const SeriesRow> rows);
/// Inverse of series_to_csv: parent -> history.
std::map<std::string, std::vector<ScorePoint>> series_from_csv(std::string_view csv);

// ---------------------------------------------------------------------------
// Initial snapshot assembly

struct ConceptSpec {
  std::string text;
  Level level = Level::level3;
  bool in_M = false;
  bool unambiguous = false;
  std::optional<std::string> key_entity;
};

struct InitInput {
  std::vector<ConceptSpec> concepts;
  std::vector<IsAEdge> edges;  // children not declared as concepts become instances
  std::optional<Date> date;
};

/// JSON: {"date": ..., "concepts": [{text, level, in_M, unambiguous, key_entity}],
///        "edges": [{child, parent, prior, source}]}
InitInput parse_init_input(std::string_view json_text, TokenizerMode mode);

/// Builds version-1 snapshot; ids are the normalized token-joined texts. Concepts
/// without a key entity get one from `records` when an entity lexicon is given.
TaxonomySnapshot assemble_snapshot(const InitInput& in, TokenizerMode mode,
                                   std::span<const QueryLogRecord> records = {},
                                   const std::set<std::string>& entity_lexicon = {});

}  // namespace conceptforge
