#pragma once
// Low-resource concept tagging by self-training with a three-way ensemble
// consensus: a dictionary tagger, a linear-chain CRF, and a window tagger.

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "conceptforge/corpus.hpp"
#include "conceptforge/trie.hpp"

namespace conceptforge {

enum class Tag : std::uint8_t { O = 0, B = 1, I = 2 };
inline constexpr std::size_t kNumTags = 3;

std::string_view tag_name(Tag t);
Tag parse_tag(std::string_view s);

struct TaggedSequence {
  std::vector<std::string> tokens;
  std::vector<Tag> labels;

  bool operator==(const TaggedSequence&) const = default;
};

/// |labels| == |tokens| is checked separately; this checks I never follows O or the start.
bool is_valid_bio(std::span<const Tag> labels);
/// Turns stray I tags into B.
std::vector<Tag> repair_bio(std::vector<Tag> labels);
std::vector<Span> spans_of(std::span<const Tag> labels);
std::vector<Tag> tags_from_spans(std::size_t n, std::span<const Span> spans);

/// CoNLL-style `token<TAB>tag` lines, blank line between sentences.
std::vector<TaggedSequence> parse_conll(std::string_view contents);
std::vector<TaggedSequence> load_conll(const std::string& path);
std::string to_conll(std::span<const TaggedSequence> seqs);
/// One sentence per line, tokenized with the given mode.
std::vector<std::vector<std::string>> load_sentences(const std::string& path, TokenizerMode mode);

/// Maximum forward matching over a phrase lexicon.
class DictTagger {
 public:
  static DictTagger build(std::span<const std::vector<std::string>> lexicon);
  std::vector<Tag> tag(std::span<const std::string> tokens) const;
  std::size_t size() const { return trie_->size(); }

 private:
  std::shared_ptr<const TokenTrie<bool>> trie_;
};

struct ChainConfig {
  std::size_t epochs = 30;
  double learning_rate = 0.2;  // AdaGrad step
  double l2 = 1e-4;
  std::uint64_t seed = 7;
};

/// Linear-chain CRF over current/±1 token identity, token shape and tag
/// transitions; exact max-sum decoding restricted to valid BIO.
class ChainTagger {
 public:
  static ChainTagger train(std::span<const TaggedSequence> samples, const ChainConfig& cfg);
  std::vector<Tag> tag(std::span<const std::string> tokens) const;

  /// Negative log-likelihood of one labelled sequence (no regulariser).
  double nll(const TaggedSequence& s) const;
  std::size_t num_features() const { return feature_ids_.size(); }
  std::string to_json() const;

 private:
  std::vector<std::vector<std::size_t>> featurize(std::span<const std::string> tokens) const;
  std::vector<std::array<double, kNumTags>> emissions(const std::vector<std::vector<std::size_t>>& feats) const;

  std::vector<std::pair<std::string, std::size_t>> feature_ids_sorted() const;
  std::unordered_map<std::string, std::size_t> feature_ids_;
  std::vector<double> emission_;  // [feature * kNumTags + tag]
  std::array<double, kNumTags * kNumTags> transition_{};
  std::array<double, kNumTags> start_{};
  ChainConfig config_;
};

struct WindowConfig {
  std::size_t hash_bits = 16;
  double init_scale = 0.01;
  double learning_rate = 0.5;
  std::size_t batch_size = 16;
  std::uint64_t seed = 7;
};

/// Per-token multinomial logistic tagger over hashed features: tokens at
/// offsets -2..+2 plus boundary-marked character 1-3 grams of the current token.
class WindowTagger {
 public:
  /// Parameters drawn from N(0, init_scale^2) with the configured seed.
  static WindowTagger init(const WindowConfig& cfg);

  std::vector<Tag> tag(std::span<const std::string> tokens) const;
  std::vector<std::array<double, kNumTags>> token_probs(std::span<const std::string> tokens) const;

  /// Mean over sequences of the summed per-token cross-entropy.
  double loss(std::span<const TaggedSequence> batch) const;
  std::vector<double> gradient(std::span<const TaggedSequence> batch) const;

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  const WindowConfig& config() const { return config_; }

  /// theta += N(0, sigma^2) elementwise, then theta -= lr * grad(batch).
  void perturbed_step(std::span<const TaggedSequence> batch, double sigma, std::mt19937_64& rng);

  std::string to_json() const;
  static WindowTagger from_json(std::string_view text);

  static std::vector<std::string> feature_strings(std::span<const std::string> tokens, std::size_t i);

 private:
  std::vector<std::vector<std::size_t>> hashed_features(std::span<const std::string> tokens) const;
  WindowConfig config_;
  std::vector<double> params_;  // [bucket * kNumTags + tag]
};

/// Trains a fresh window tagger with `epochs` passes of perturbed minibatch steps.
WindowTagger train_window_tagger(std::span<const TaggedSequence> samples, const WindowConfig& cfg, double sigma,
                                 std::size_t epochs = 1);

/// One pass of |samples|/batch perturbed minibatch steps on an existing tagger.
void window_training_pass(WindowTagger& model, std::span<const TaggedSequence> samples, double sigma,
                          std::mt19937_64& rng);

enum class ConsensusMode { sentence, span };

/// Sentence mode: the common labelling iff all three span sets are identical.
/// Span mode: the spans shared by all three taggers, when at least one tagger
/// emitted a span (or all three emitted none).
std::optional<TaggedSequence> ensemble_consensus(std::span<const std::string> tokens, const DictTagger& dict,
                                                 const ChainTagger& chain, const WindowTagger& window,
                                                 ConsensusMode mode = ConsensusMode::sentence);

enum class Provenance { gold, seed_model, consensus };
std::string_view provenance_name(Provenance p);

struct PoolEntry {
  TaggedSequence sample;
  Provenance provenance = Provenance::gold;
  std::size_t round = 0;
  std::optional<std::size_t> unlabeled_index;
};

struct SelfTrainConfig {
  std::size_t iters = 3;
  double sample_frac = 0.5;
  double sigma = 0.01;
  std::uint64_t rng_seed = 7;
  std::size_t passes_per_round = 5;
  ConsensusMode consensus = ConsensusMode::sentence;
  ChainConfig chain;
  WindowConfig window;
};

struct RoundReport {
  std::size_t round = 0;
  std::size_t sampled = 0;
  std::size_t admitted = 0;
  std::size_t pool_size = 0;
  double acceptance_rate = 0.0;
  std::optional<double> heldout_f1;
  bool warning_no_consensus = false;
};

struct SelfTrainResult {
  WindowTagger window;
  ChainTagger chain;
  DictTagger dict;
  std::vector<PoolEntry> pool;
  std::vector<RoundReport> rounds;
  std::vector<WindowTagger> window_at_round;  // window tagger used for consensus in round r (index r)
};

SelfTrainResult self_train(std::span<const TaggedSequence> seeds, std::span<const std::vector<std::string>> unlabeled,
                           std::span<const std::vector<std::string>> lexicon, const SelfTrainConfig& cfg,
                           std::span<const TaggedSequence> heldout = {});

std::string self_train_report_json(const SelfTrainResult& r, const SelfTrainConfig& cfg);

struct SpanScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Micro-averaged exact-span precision/recall/F1.
SpanScore span_f1(std::span<const TaggedSequence> gold, std::span<const std::vector<Tag>> predicted);

template <typename Tagger>
SpanScore evaluate_tagger(const Tagger& t, std::span<const TaggedSequence> gold) {
  std::vector<std::vector<Tag>> pred;
  pred.reserve(gold.size());
  for (const auto& g : gold) pred.push_back(t.tag(g.tokens));
  return span_f1(gold, pred);
}

}  // namespace conceptforge
