#pragma once
// Long-tail phrase mining: n-gram candidates, weakly supervised quality
// scoring, the length-rewarding final score, and a character n-gram concept
// classifier that links mined phrases to a fixed concept label set.

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "conceptforge/corpus.hpp"

namespace conceptforge {

struct PhraseCandidate {
  std::vector<std::string> tokens;
  std::int64_t freq = 0;
  std::vector<double> quality_scores;  // one p_score per token
  double final_score = 0.0;

};

/// Occurrence counts of every n-gram up to a maximum length.
class NgramCounts {
 public:
  static NgramCounts build(std::span<const std::vector<std::string>> docs, std::size_t max_len);

  std::int64_t count(std::span<const std::string> gram) const;
  /// Largest count among one-token left/right extensions of `gram`.
  std::int64_t max_extension_count(std::span<const std::string> gram) const;
  std::int64_t total_tokens() const { return total_tokens_; }
  std::size_t max_len() const { return max_len_; }

 private:
  static std::string key(std::span<const std::string> gram);
  std::unordered_map<std::string, std::int64_t> counts_;
  std::unordered_map<std::string, std::int64_t> max_ext_;
  std::int64_t total_tokens_ = 0;
  std::size_t max_len_ = 0;
};

/// Contiguous n-grams (n <= max_len) with frequency >= min_support that neither
/// start nor end with a stopword. Sorted by (descending freq, text).
std::vector<PhraseCandidate> generate_candidates(std::span<const std::vector<std::string>> docs,
                                                 const StopwordList& stopwords, std::size_t max_len,
                                                 std::size_t min_support);

enum class NegativeRule { none, negation_token, negation_and_shuffle };

NegativeRule parse_negative_rule(std::string_view name);
std::string_view negative_rule_name(NegativeRule r);

/// Synthetic negatives from positives: append the negation token, and (for
/// negation_and_shuffle) a seeded token-order shuffle of multi-token phrases.
/// Never returns a phrase that is itself positive.
std::vector<std::string> generate_negatives(const std::set<std::string>& positives, NegativeRule rule,
                                            const std::string& negation_token, std::uint64_t seed);

struct WeakLabelPool {
  std::set<std::string> positives;
  std::set<std::string> negatives;

  static WeakLabelPool build(const std::set<std::string>& positives, NegativeRule rule,
                             const std::string& negation_token, std::uint64_t seed);
  bool empty() const { return positives.empty() && negatives.empty(); }
  /// 1 for positives, 0 for negatives, 0.5 otherwise.
  double label_prior(const std::string& phrase) const;
};

struct QualityComponents {
  double collocation = 0.0;   // NPMI of the split halves, clamped to [0,1]
  double completeness = 0.0;  // 1 - max(super-phrase freq)/freq
  double label_prior = 0.5;
};

QualityComponents quality_components(std::span<const std::string> tokens, const NgramCounts& counts,
                                     const WeakLabelPool& pool, TokenizerMode mode = TokenizerMode::whitespace);

/// Per-token quality scores in [0,1]: the mean of the three components.
std::vector<double> score_quality(const PhraseCandidate& c, const NgramCounts& counts, const WeakLabelPool& pool,
                                  TokenizerMode mode = TokenizerMode::whitespace);

/// mean(scores) + ln(length).
double phrase_score(std::span<const double> scores, std::size_t length);
double final_phrase_score(PhraseCandidate& c);

struct ClassifierConfig {
  std::size_t epochs = 300;
  double learning_rate = 1.0;
  double l2 = 1e-4;
  std::uint64_t seed = 7;
  double holdout_frac = 0.0;
  NegativeRule negative_rule = NegativeRule::negation_token;
  std::string negation_token = "not";
  std::size_t max_labels = 200;
};

inline constexpr std::string_view kRejectLabel = "__none__";

/// Multinomial logistic model over within-token character 1-3 grams, no bias terms.
class ConceptClassifierModel {
 public:
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t num_features() const { return vocab_.size(); }

  /// Probability per label (same order as labels()); sums to 1.
  std::vector<double> posterior(std::string_view phrase) const;
  std::vector<double> logits(std::string_view phrase) const;
  void scale_weights(double factor);

  std::string to_json() const;
  static ConceptClassifierModel from_json(std::string_view text);

  static std::vector<std::string> features_of(std::string_view phrase);

 private:
  friend struct ClassifierTrainer;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> vocab_;
  std::vector<std::string> vocab_order_;
  std::vector<std::vector<double>> weights_;  // [label][feature]
  ClassifierConfig config_;
};

struct LabeledConcept {
  std::string phrase;
  std::string concept_id;
  bool operator<(const LabeledConcept& o) const {
    return std::tie(phrase, concept_id) < std::tie(o.phrase, o.concept_id);
  }
  bool operator==(const LabeledConcept&) const = default;
};

std::vector<LabeledConcept> load_kg_tsv(const std::string& path);

struct TrainedClassifier {
  ConceptClassifierModel model;
  double training_accuracy = 0.0;
  std::optional<double> heldout_accuracy;
};

/// Duplicate pairs are collapsed first. Throws Error with fewer than two labels.
TrainedClassifier train_concept_classifier(const std::vector<LabeledConcept>& labeled, const ClassifierConfig& cfg);

struct Classification {
  std::string concept_id;
  double prob = 0.0;
};

/// Argmax label when its probability >= theta; ties go to the smallest id. The
/// reject label never classifies.
std::optional<Classification> classify_concept(const ConceptClassifierModel& m, std::string_view phrase,
                                               double theta);

struct PhraseMineConfig {
  TokenizerMode tokenizer = TokenizerMode::whitespace;
  std::size_t max_len = 6;
  std::size_t min_support = 2;
  double theta_cls = 0.5;
  ClassifierConfig classifier;
};

struct MinedPhrase {
  std::string text;
  PhraseCandidate candidate;
  QualityComponents components;
  std::optional<Classification> concept_label;
};

struct PhraseMineResult {
  std::vector<MinedPhrase> phrases;  // by descending final score, then text
  TrainedClassifier classifier;
};

PhraseMineResult run_phrasemine(std::span<const QueryLogRecord> records, const std::vector<LabeledConcept>& kg,
                                const StopwordList& stopwords, const PhraseMineConfig& cfg);
std::string phrasemine_result_to_json(const PhraseMineResult& r);

}  // namespace conceptforge
