#pragma once
// Pattern bootstrapping with query-title alignment consensus, concept/instance
// discrimination, and instance-to-concept linking.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "conceptforge/corpus.hpp"
#include "conceptforge/graph.hpp"

namespace conceptforge {

/// Single-slot query template: prefix SLOT suffix.
struct Pattern {
  std::vector<std::string> prefix;
  std::vector<std::string> suffix;
  std::uint64_t id = 0;

  static Pattern make(std::vector<std::string> prefix, std::vector<std::string> suffix);
  bool empty() const { return prefix.empty() && suffix.empty(); }
  std::string str() const;  // "prefix ||| suffix"
  bool operator==(const Pattern& o) const { return id == o.id && prefix == o.prefix && suffix == o.suffix; }
};

/// Parses `prefix ||| suffix` lines (either side may be empty); blank lines and `#` comments skipped.
std::vector<Pattern> parse_patterns(std::string_view contents, TokenizerMode mode);
std::vector<Pattern> load_patterns(const std::string& path, TokenizerMode mode);

struct PatternStats {
  std::size_t n_s = 0;  // existing seed concepts the pattern re-extracts
  std::size_t n_e = 0;  // new concepts it extracts
};

struct FilterVerdict {
  bool keep = false;
  std::string reason;
};

struct FilterThresholds {
  double alpha = 0.6;
  double beta = 0.8;
  std::size_t delta = 2;
};

/// Keeps p iff alpha < n_s/n_e < beta and n_s > delta (all strict).
FilterVerdict filter_pattern(const PatternStats& stats, const FilterThresholds& t);

enum class CandidateSource { template_match, alignment, phrasemine, tagger };
enum class Verdict { concept_phrase, instance };

std::string_view candidate_source_name(CandidateSource s);

struct CandidateFeatures {
  bool appeared_as_query = false;
  std::int64_t search_count = 0;
  std::size_t token_len = 0;
  std::size_t pattern_support = 0;
  bool contains_digit = false;
  double head_token_idf = 0.0;

  static constexpr std::size_t kDim = 6;
  std::vector<double> as_vector() const;
};

struct ConceptCandidate {
  std::string text;
  std::vector<std::string> tokens;
  CandidateSource source = CandidateSource::template_match;
  CandidateFeatures features;
  std::optional<Verdict> verdict;
  // Provenance of template acceptance.
  std::uint64_t pattern_id = 0;
  std::string alignment_witness;
  std::size_t pattern_support = 0;
};

struct AlignmentConfig {
  std::size_t min_align_len = 2;
  std::size_t min_title_hits = 2;
};

struct TokenizedTitle {
  std::vector<std::string> tokens;
  std::int64_t clicks = 0;
};

std::vector<TokenizedTitle> tokenize_titles(const std::vector<ClickedDoc>& docs, TokenizerMode mode);

/// Full query phrase when q = prefix + non-empty span + suffix.
std::optional<ConceptCandidate> extract_by_template(const std::vector<std::string>& q, const Pattern& p,
                                                    TokenizerMode mode);

/// Longest query subspan of at least min_align_len tokens found in at least
/// min_title_hits distinct clicked titles (clicks > 0). Ties: higher
/// click-weighted occurrence count, then leftmost.
std::optional<ConceptCandidate> extract_by_alignment(const std::vector<std::string>& q,
                                                     std::span<const TokenizedTitle> titles,
                                                     const AlignmentConfig& cfg, TokenizerMode mode);

/// Patterns (before, after) around every seed occurrence in the queries, minus
/// empty patterns and those already in `pool`. Sorted by id.
std::vector<Pattern> gen_patterns(std::span<const std::vector<std::string>> seeds,
                                  std::span<const std::vector<std::string>> queries,
                                  std::span<const Pattern> pool);

struct BootstrapConfig {
  TokenizerMode tokenizer = TokenizerMode::whitespace;
  FilterThresholds filter;
  AlignmentConfig alignment;
  std::size_t iters = 3;
};

struct AdmittedPattern {
  Pattern pattern;
  std::size_t round = 0;  // 0 = seed pattern
  PatternStats stats;
};

struct BootstrapRound {
  std::size_t round = 0;
  std::size_t concepts_added = 0;
  std::vector<AdmittedPattern> admitted;
  std::vector<std::pair<Pattern, FilterVerdict>> rejected;
  std::vector<PatternStats> rejected_stats;
};

struct BootstrapResult {
  std::vector<ConceptCandidate> concepts;  // acceptance order
  std::vector<AdmittedPattern> patterns;   // sorted by pattern id
  std::vector<BootstrapRound> rounds;
  bool early_exit = false;
};

BootstrapResult run_bootstrap(std::span<const QueryLogRecord> records, std::span<const Pattern> seed_patterns,
                              const BootstrapConfig& cfg);

std::string bootstrap_result_to_json(const BootstrapResult& r);

/// Corpus-level counts used by featurization and linking.
struct CorpusStats {
  std::size_t num_records = 0;
  std::unordered_map<std::string, std::int64_t> query_freq;  // normalized query text -> count
  std::unordered_map<std::string, std::int64_t> token_df;    // token -> #queries containing it

  static CorpusStats build(std::span<const QueryLogRecord> records, TokenizerMode mode);
  double idf(const std::string& token) const;
};

CandidateFeatures featurize_candidate(const ConceptCandidate& c, const CorpusStats& stats);

/// Gradient-boosted depth-1 trees with logistic loss.
class DiscriminatorModel {
 public:
  struct Config {
    std::size_t rounds = 50;
    double learning_rate = 0.3;
    double l2 = 1e-6;
  };
  struct Stump {
    std::size_t feature = 0;
    double threshold = 0.0;  // x <= threshold -> left
    double left = 0.0;
    double right = 0.0;
  };

  DiscriminatorModel() = default;

  static DiscriminatorModel train(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                                  const Config& cfg);

  bool trained() const { return trained_; }
  /// Positive-class (concept) probability; throws Error when untrained.
  double score(const std::vector<double>& x) const;
  const std::vector<Stump>& stumps() const { return stumps_; }

  std::string to_json() const;
  static DiscriminatorModel from_json(std::string_view text);

 private:
  bool trained_ = false;
  double base_ = 0.0;
  double learning_rate_ = 0.0;
  std::vector<Stump> stumps_;
};

struct Discrimination {
  Verdict verdict = Verdict::instance;
  double score = 0.0;
};

/// Verdict is concept iff score >= 0.5.
Discrimination discriminate_concept(const CandidateFeatures& f, const DiscriminatorModel& model);

struct LabeledPhrase {
  std::string phrase;
  Verdict label = Verdict::instance;
};

/// Reads `phrase<TAB>concept|instance`.
std::vector<LabeledPhrase> load_discriminator_tsv(const std::string& path);

struct LinkConfig {
  double theta_link = 0.3;
  TokenizerMode tokenizer = TokenizerMode::whitespace;
};

/// Classifier-assigned (instance, concept) pairs that always produce an edge.
using ClassifierLinks = std::vector<std::pair<std::string, std::string>>;

/// Co-occurrence linking: score = n(i,c)/n(i) where n(i,c) counts records
/// mentioning i whose query or clicked titles also carry every modifier token of c
/// (c minus its head token; the head itself for one-token concepts).
std::vector<IsAEdge> link_instances(std::span<const std::string> instances, std::span<const std::string> concepts,
                                    std::span<const QueryLogRecord> records, const LinkConfig& cfg,
                                    const ClassifierLinks& classifier_links = {});

}  // namespace conceptforge
