#include "conceptforge/phrasemine.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <map>
#include <numeric>
#include <random>

namespace conceptforge {

using nlohmann::json;

std::string NgramCounts::key(std::span<const std::string> gram) {
  std::string k;
  for (const auto& t : gram) {
    k += t;
    k += '\x1f';
  }
  return k;
}

NgramCounts NgramCounts::build(std::span<const std::vector<std::string>> docs, std::size_t max_len) {
  NgramCounts c;
  c.max_len_ = max_len;
  // One token longer than max_len so every candidate's extensions are counted.
  for (const auto& doc : docs) {
    c.total_tokens_ += static_cast<std::int64_t>(doc.size());
    for (std::size_t b = 0; b < doc.size(); ++b)
      for (std::size_t n = 1; n <= max_len + 1 && b + n <= doc.size(); ++n)
        ++c.counts_[key(std::span(doc).subspan(b, n))];
  }
  for (const auto& doc : docs) {
    for (std::size_t b = 0; b < doc.size(); ++b) {
      for (std::size_t n = 2; n <= max_len + 1 && b + n <= doc.size(); ++n) {
        auto gram = std::span(doc).subspan(b, n);
        auto cnt = c.counts_.at(key(gram));
        auto& left = c.max_ext_[key(gram.subspan(1))];
        left = std::max(left, cnt);
        auto& right = c.max_ext_[key(gram.first(n - 1))];
        right = std::max(right, cnt);
      }
    }
  }
  return c;
}

std::int64_t NgramCounts::count(std::span<const std::string> gram) const {
  auto it = counts_.find(key(gram));
  return it == counts_.end() ? 0 : it->second;
}

std::int64_t NgramCounts::max_extension_count(std::span<const std::string> gram) const {
  auto it = max_ext_.find(key(gram));
  return it == max_ext_.end() ? 0 : it->second;
}

std::vector<PhraseCandidate> generate_candidates(std::span<const std::vector<std::string>> docs,
                                                 const StopwordList& stopwords, std::size_t max_len,
                                                 std::size_t min_support) {
  std::map<std::vector<std::string>, std::int64_t> counts;
  for (const auto& doc : docs) {
    std::vector<bool> stop(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) stop[i] = stopwords.contains(doc[i]);
    for (std::size_t b = 0; b < doc.size(); ++b) {
      if (stop[b]) continue;
      for (std::size_t n = 1; n <= max_len && b + n <= doc.size(); ++n) {
        if (stop[b + n - 1]) continue;
        ++counts[std::vector<std::string>(doc.begin() + static_cast<std::ptrdiff_t>(b),
                                          doc.begin() + static_cast<std::ptrdiff_t>(b + n))];
      }
    }
  }
  std::vector<PhraseCandidate> out;
  for (auto& [tokens, freq] : counts) {
    if (freq < static_cast<std::int64_t>(min_support)) continue;
    PhraseCandidate c;
    c.tokens = tokens;
    c.freq = freq;
    out.push_back(std::move(c));
  }
  std::stable_sort(out.begin(), out.end(), [](const PhraseCandidate& a, const PhraseCandidate& b) {
    return a.freq > b.freq;
  });
  return out;
}

NegativeRule parse_negative_rule(std::string_view name) {
  if (name == "none") return NegativeRule::none;
  if (name == "negation") return NegativeRule::negation_token;
  if (name == "negation+shuffle") return NegativeRule::negation_and_shuffle;
  throw Error("unknown negative rule '" + std::string(name) + "'");
}

std::string_view negative_rule_name(NegativeRule r) {
  switch (r) {
    case NegativeRule::none: return "none";
    case NegativeRule::negation_token: return "negation";
    case NegativeRule::negation_and_shuffle: return "negation+shuffle";
  }
  return "none";
}

std::vector<std::string> generate_negatives(const std::set<std::string>& positives, NegativeRule rule,
                                            const std::string& negation_token, std::uint64_t seed) {
  std::set<std::string> out;
  if (rule == NegativeRule::none) return {};
  std::mt19937_64 rng(seed);
  for (const auto& p : positives) {
    auto neg = p + " " + negation_token;
    if (!positives.count(neg)) out.insert(neg);
    if (rule != NegativeRule::negation_and_shuffle) continue;
    auto toks = split(p, ' ');
    if (toks.size() < 2) continue;
    auto shuffled = toks;
    for (int attempt = 0; attempt < 4 && shuffled == toks; ++attempt) std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto s = join(shuffled, " ");
    if (shuffled != toks && !positives.count(s)) out.insert(s);
  }
  return {out.begin(), out.end()};
}

WeakLabelPool WeakLabelPool::build(const std::set<std::string>& positives, NegativeRule rule,
                                   const std::string& negation_token, std::uint64_t seed) {
  WeakLabelPool pool;
  pool.positives = positives;
  for (auto& n : generate_negatives(positives, rule, negation_token, seed)) pool.negatives.insert(std::move(n));
  return pool;
}

double WeakLabelPool::label_prior(const std::string& phrase) const {
  if (positives.count(phrase)) return 1.0;
  if (negatives.count(phrase)) return 0.0;
  return 0.5;
}

QualityComponents quality_components(std::span<const std::string> tokens, const NgramCounts& counts,
                                     const WeakLabelPool& pool, TokenizerMode mode) {
  QualityComponents q;
  q.label_prior = pool.label_prior(join_tokens({tokens.begin(), tokens.end()}, mode));

  const double total = static_cast<double>(counts.total_tokens());
  const double freq = static_cast<double>(counts.count(tokens));
  if (tokens.size() < 2) {
    q.collocation = 0.5;  // no halves to measure
  } else if (freq > 0 && total > 0) {
    auto half = tokens.size() / 2;
    double pxy = freq / total;
    double px = static_cast<double>(counts.count(tokens.first(half))) / total;
    double py = static_cast<double>(counts.count(tokens.subspan(half))) / total;
    double npmi = pxy >= 1.0 ? 1.0 : std::log(pxy / (px * py)) / -std::log(pxy);
    q.collocation = std::clamp(npmi, 0.0, 1.0);
  }
  if (freq > 0) {
    double sup = static_cast<double>(counts.max_extension_count(tokens));
    q.completeness = std::clamp(1.0 - sup / freq, 0.0, 1.0);
  }
  return q;
}

std::vector<double> score_quality(const PhraseCandidate& c, const NgramCounts& counts, const WeakLabelPool& pool,
                                  TokenizerMode mode) {
  if (pool.empty()) throw Error("score_quality: weak label pool is empty");
  auto q = quality_components(c.tokens, counts, pool, mode);
  double s = std::clamp((q.collocation + q.completeness + q.label_prior) / 3.0, 0.0, 1.0);
  return std::vector<double>(c.tokens.size(), s);
}

double phrase_score(std::span<const double> scores, std::size_t length) {
  if (scores.empty()) throw Error("phrase_score: no quality scores");
  if (length < 1) throw Error("phrase_score: phrase length must be >= 1");
  double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
  return mean + std::log(static_cast<double>(length));
}

double final_phrase_score(PhraseCandidate& c) {
  c.final_score = phrase_score(c.quality_scores, c.tokens.size());
  return c.final_score;
}

// ---------------------------------------------------------------------------
// Concept classifier

std::vector<std::string> ConceptClassifierModel::features_of(std::string_view phrase) {
  std::set<std::string> grams;
  auto norm = normalize_text(phrase);
  for (const auto& tok : tokenize(norm, TokenizerMode::whitespace).tokens) {
    auto b = utf8_boundaries(tok);
    std::size_t chars = b.size() - 1;
    for (std::size_t n = 1; n <= 3; ++n)
      for (std::size_t i = 0; i + n <= chars; ++i) grams.insert(tok.substr(b[i], b[i + n] - b[i]));
  }
  return {grams.begin(), grams.end()};
}

namespace {

void softmax_inplace(std::vector<double>& z) {
  double mx = *std::max_element(z.begin(), z.end());
  double sum = 0;
  for (auto& v : z) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (auto& v : z) v /= sum;
}

struct SparseRow {
  std::vector<std::size_t> idx;
  double value = 0.0;  // every active feature has this weight (L2-normalised indicator)
};

}  // namespace

std::vector<double> ConceptClassifierModel::logits(std::string_view phrase) const {
  std::vector<double> z(labels_.size(), 0.0);
  std::vector<std::size_t> idx;
  auto grams = features_of(phrase);
  for (const auto& g : grams) {
    auto it = vocab_.find(g);
    if (it != vocab_.end()) idx.push_back(it->second);
  }
  if (idx.empty()) return z;
  double v = 1.0 / std::sqrt(static_cast<double>(grams.size()));
  for (std::size_t l = 0; l < labels_.size(); ++l)
    for (auto f : idx) z[l] += weights_[l][f] * v;
  return z;
}

std::vector<double> ConceptClassifierModel::posterior(std::string_view phrase) const {
  auto z = logits(phrase);
  if (z.empty()) return z;
  softmax_inplace(z);
  return z;
}

void ConceptClassifierModel::scale_weights(double factor) {
  for (auto& row : weights_)
    for (auto& w : row) w *= factor;
}

std::string ConceptClassifierModel::to_json() const {
  json cfg = {{"epochs", config_.epochs},
              {"learning_rate", config_.learning_rate},
              {"l2", config_.l2},
              {"seed", config_.seed},
              {"holdout_frac", config_.holdout_frac},
              {"negative_rule", negative_rule_name(config_.negative_rule)},
              {"negation_token", config_.negation_token},
              {"max_labels", config_.max_labels}};
  return json{{"format", "conceptforge-concept-classifier"},
              {"version", 1},
              {"config", std::move(cfg)},
              {"labels", labels_},
              {"features", vocab_order_},
              {"weights", weights_}}
      .dump();
}

ConceptClassifierModel ConceptClassifierModel::from_json(std::string_view text) {
  auto j = json::parse(text);
  if (j.value("format", "") != "conceptforge-concept-classifier") throw Error("not a concept classifier model");
  ConceptClassifierModel m;
  const auto& c = j.at("config");
  m.config_.epochs = c.at("epochs").get<std::size_t>();
  m.config_.learning_rate = c.at("learning_rate").get<double>();
  m.config_.l2 = c.at("l2").get<double>();
  m.config_.seed = c.at("seed").get<std::uint64_t>();
  m.config_.holdout_frac = c.at("holdout_frac").get<double>();
  m.config_.negative_rule = parse_negative_rule(c.at("negative_rule").get<std::string>());
  m.config_.negation_token = c.at("negation_token").get<std::string>();
  m.config_.max_labels = c.at("max_labels").get<std::size_t>();
  m.labels_ = j.at("labels").get<std::vector<std::string>>();
  m.vocab_order_ = j.at("features").get<std::vector<std::string>>();
  for (std::size_t i = 0; i < m.vocab_order_.size(); ++i) m.vocab_[m.vocab_order_[i]] = i;
  m.weights_ = j.at("weights").get<std::vector<std::vector<double>>>();
  if (m.weights_.size() != m.labels_.size()) throw Error("classifier: weight rows do not match labels");
  for (const auto& row : m.weights_)
    if (row.size() != m.vocab_order_.size()) throw Error("classifier: weight row width mismatch");
  return m;
}

std::vector<LabeledConcept> load_kg_tsv(const std::string& path) {
  std::vector<LabeledConcept> out;
  std::size_t line_no = 0;
  for (const auto& line : read_lines(path)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cols = split(line, '\t');
    if (cols.size() != 2) throw Error(path + ":" + std::to_string(line_no) + ": expected phrase<TAB>concept_id");
    auto phrase = normalize_text(cols[0]);
    auto concept_id = normalize_text(cols[1]);
    if (phrase.empty() || concept_id.empty()) throw Error(path + ":" + std::to_string(line_no) + ": empty field");
    out.push_back({std::move(phrase), std::move(concept_id)});
  }
  return out;
}

struct ClassifierTrainer {
  static TrainedClassifier train(const std::vector<LabeledConcept>& labeled, const ClassifierConfig& cfg) {
    std::set<LabeledConcept> uniq;
    for (const auto& l : labeled) uniq.insert({normalize_text(l.phrase), l.concept_id});
    std::set<std::string> label_set;
    for (const auto& l : uniq) label_set.insert(l.concept_id);
    if (label_set.size() < 2) throw Error("train_concept_classifier: need at least two concept labels");
    if (label_set.size() > cfg.max_labels)
      throw Error("train_concept_classifier: more than " + std::to_string(cfg.max_labels) + " labels");
    if (label_set.count(std::string(kRejectLabel))) throw Error("train_concept_classifier: reserved label used");

    std::vector<LabeledConcept> examples(uniq.begin(), uniq.end());
    std::set<std::string> positives;
    for (const auto& e : examples) positives.insert(e.phrase);
    auto negatives = generate_negatives(positives, cfg.negative_rule, cfg.negation_token, cfg.seed);
    if (!negatives.empty()) label_set.insert(std::string(kRejectLabel));
    for (auto& n : negatives) examples.push_back({std::move(n), std::string(kRejectLabel)});

    // Seeded holdout split.
    std::vector<std::size_t> order(examples.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(cfg.seed);
    std::size_t n_hold = static_cast<std::size_t>(std::floor(cfg.holdout_frac * static_cast<double>(examples.size())));
    if (n_hold > 0) std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::size_t> train_idx(order.begin(), order.end() - static_cast<std::ptrdiff_t>(n_hold));
    std::vector<std::size_t> hold_idx(order.end() - static_cast<std::ptrdiff_t>(n_hold), order.end());
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(hold_idx.begin(), hold_idx.end());

    ConceptClassifierModel m;
    m.config_ = cfg;
    m.labels_.assign(label_set.begin(), label_set.end());
    std::map<std::string, std::size_t> label_index;
    for (std::size_t i = 0; i < m.labels_.size(); ++i) label_index[m.labels_[i]] = i;

    std::set<std::string> vocab;
    for (auto i : train_idx)
      for (auto& g : ConceptClassifierModel::features_of(examples[i].phrase)) vocab.insert(g);
    m.vocab_order_.assign(vocab.begin(), vocab.end());
    for (std::size_t i = 0; i < m.vocab_order_.size(); ++i) m.vocab_[m.vocab_order_[i]] = i;

    std::vector<SparseRow> rows;
    std::vector<std::size_t> targets;
    for (auto i : train_idx) {
      SparseRow r;
      for (auto& g : ConceptClassifierModel::features_of(examples[i].phrase)) r.idx.push_back(m.vocab_.at(g));
      r.value = r.idx.empty() ? 0.0 : 1.0 / std::sqrt(static_cast<double>(r.idx.size()));
      rows.push_back(std::move(r));
      targets.push_back(label_index.at(examples[i].concept_id));
    }

    const std::size_t L = m.labels_.size(), F = m.vocab_order_.size();
    m.weights_.assign(L, std::vector<double>(F, 0.0));
    std::vector<std::vector<double>> grad(L, std::vector<double>(F, 0.0));
    const double inv_n = 1.0 / static_cast<double>(rows.size());
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
      for (auto& g : grad) std::fill(g.begin(), g.end(), 0.0);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        std::vector<double> z(L, 0.0);
        for (std::size_t l = 0; l < L; ++l)
          for (auto f : rows[r].idx) z[l] += m.weights_[l][f] * rows[r].value;
        softmax_inplace(z);
        z[targets[r]] -= 1.0;
        for (std::size_t l = 0; l < L; ++l)
          for (auto f : rows[r].idx) grad[l][f] += z[l] * rows[r].value * inv_n;
      }
      for (std::size_t l = 0; l < L; ++l)
        for (std::size_t f = 0; f < F; ++f)
          m.weights_[l][f] -= cfg.learning_rate * (grad[l][f] + cfg.l2 * m.weights_[l][f]);
    }

    auto accuracy = [&](const std::vector<std::size_t>& idx) {
      if (idx.empty()) return 0.0;
      std::size_t ok = 0;
      for (auto i : idx) {
        auto p = m.posterior(examples[i].phrase);
        auto best = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
        if (m.labels_[best] == examples[i].concept_id) ++ok;
      }
      return static_cast<double>(ok) / static_cast<double>(idx.size());
    };
    TrainedClassifier out{{}, accuracy(train_idx), std::nullopt};
    if (!hold_idx.empty()) out.heldout_accuracy = accuracy(hold_idx);
    out.model = std::move(m);
    return out;
  }
};

TrainedClassifier train_concept_classifier(const std::vector<LabeledConcept>& labeled, const ClassifierConfig& cfg) {
  return ClassifierTrainer::train(labeled, cfg);
}

std::optional<Classification> classify_concept(const ConceptClassifierModel& m, std::string_view phrase,
                                               double theta) {
  auto p = m.posterior(phrase);
  if (p.empty()) return std::nullopt;
  std::size_t best = 0;
  for (std::size_t i = 1; i < p.size(); ++i)
    if (p[i] > p[best]) best = i;  // labels are sorted, so ties keep the smallest id
  if (m.labels()[best] == kRejectLabel || p[best] < theta) return std::nullopt;
  return Classification{m.labels()[best], p[best]};
}

PhraseMineResult run_phrasemine(std::span<const QueryLogRecord> records, const std::vector<LabeledConcept>& kg,
                                const StopwordList& stopwords, const PhraseMineConfig& cfg) {
  std::vector<std::vector<std::string>> docs;
  for (const auto& r : records) {
    docs.push_back(to_tokens(r.query, cfg.tokenizer));
    for (const auto& d : r.clicked_docs) docs.push_back(to_tokens(d.title, cfg.tokenizer));
  }
  auto counts = NgramCounts::build(docs, cfg.max_len);
  std::set<std::string> positives;
  for (const auto& k : kg) positives.insert(k.phrase);
  auto pool = WeakLabelPool::build(positives, cfg.classifier.negative_rule, cfg.classifier.negation_token,
                                   cfg.classifier.seed);

  PhraseMineResult result;
  result.classifier = train_concept_classifier(kg, cfg.classifier);
  for (auto& cand : generate_candidates(docs, stopwords, cfg.max_len, cfg.min_support)) {
    MinedPhrase mp;
    mp.components = quality_components(cand.tokens, counts, pool, cfg.tokenizer);
    cand.quality_scores = score_quality(cand, counts, pool, cfg.tokenizer);
    final_phrase_score(cand);
    mp.concept_label = classify_concept(result.classifier.model, join_tokens(cand.tokens, cfg.tokenizer),
                                        cfg.theta_cls);
    mp.text = join_tokens(cand.tokens, cfg.tokenizer);
    mp.candidate = std::move(cand);
    result.phrases.push_back(std::move(mp));
  }
  std::stable_sort(result.phrases.begin(), result.phrases.end(), [](const MinedPhrase& a, const MinedPhrase& b) {
    if (a.candidate.final_score != b.candidate.final_score) return a.candidate.final_score > b.candidate.final_score;
    return a.candidate.tokens < b.candidate.tokens;
  });
  return result;
}

std::string phrasemine_result_to_json(const PhraseMineResult& r) {
  json phrases = json::array();
  for (const auto& p : r.phrases) {
    json label = p.concept_label ? json{{"concept", p.concept_label->concept_id}, {"prob", p.concept_label->prob}}
                                 : json(nullptr);
    phrases.push_back({{"phrase", p.text},
                       {"freq", p.candidate.freq},
                       {"collocation", p.components.collocation},
                       {"completeness", p.components.completeness},
                       {"label_prior", p.components.label_prior},
                       {"final_score", p.candidate.final_score},
                       {"concept", std::move(label)}});
  }
  json out = {{"phrases", std::move(phrases)}, {"classifier_training_accuracy", r.classifier.training_accuracy}};
  if (r.classifier.heldout_accuracy) out["classifier_heldout_accuracy"] = *r.classifier.heldout_accuracy;
  return out.dump(1);
}

}  // namespace conceptforge
