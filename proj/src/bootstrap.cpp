#include "conceptforge/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <set>
#include <unordered_set>

namespace conceptforge {

using nlohmann::json;

namespace {

bool starts_with(const std::vector<std::string>& q, const std::vector<std::string>& prefix) {
  return prefix.size() <= q.size() && std::equal(prefix.begin(), prefix.end(), q.begin());
}

bool ends_with(const std::vector<std::string>& q, const std::vector<std::string>& suffix) {
  return suffix.size() <= q.size() && std::equal(suffix.rbegin(), suffix.rend(), q.rbegin());
}

bool pattern_matches(const std::vector<std::string>& q, const Pattern& p) {
  return q.size() > p.prefix.size() + p.suffix.size() && starts_with(q, p.prefix) && ends_with(q, p.suffix);
}

}  // namespace

Pattern Pattern::make(std::vector<std::string> prefix, std::vector<std::string> suffix) {
  Pattern p;
  p.prefix = std::move(prefix);
  p.suffix = std::move(suffix);
  std::string key;
  for (const auto& t : p.prefix) key += t + '\x1f';
  key += "\x1e|||\x1e";
  for (const auto& t : p.suffix) key += t + '\x1f';
  p.id = fnv1a64(key);
  return p;
}

std::string Pattern::str() const {
  std::string s = join(prefix, " ");
  s += s.empty() ? "|||" : " |||";
  if (!suffix.empty()) s += " " + join(suffix, " ");
  return s;
}

std::vector<Pattern> parse_patterns(std::string_view contents, TokenizerMode mode) {
  std::vector<Pattern> out;
  std::size_t line_no = 0;
  for (const auto& raw : split(contents, '\n')) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto sep = line.find("|||");
    if (sep == std::string_view::npos)
      throw Error("pattern line " + std::to_string(line_no) + ": missing '|||' separator");
    auto p = Pattern::make(to_tokens(line.substr(0, sep), mode), to_tokens(line.substr(sep + 3), mode));
    if (p.empty()) throw Error("pattern line " + std::to_string(line_no) + ": both sides empty");
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Pattern> load_patterns(const std::string& path, TokenizerMode mode) {
  return parse_patterns(read_file(path), mode);
}

FilterVerdict filter_pattern(const PatternStats& stats, const FilterThresholds& t) {
  if (stats.n_e == 0) return {false, "no new extractions"};
  double ratio = static_cast<double>(stats.n_s) / static_cast<double>(stats.n_e);
  if (!(ratio > t.alpha)) return {false, "n_s/n_e not above alpha"};
  if (!(ratio < t.beta)) return {false, "n_s/n_e not below beta"};
  if (!(stats.n_s > t.delta)) return {false, "n_s not above delta"};
  return {true, "kept"};
}

std::string_view candidate_source_name(CandidateSource s) {
  switch (s) {
    case CandidateSource::template_match: return "template";
    case CandidateSource::alignment: return "alignment";
    case CandidateSource::phrasemine: return "phrasemine";
    case CandidateSource::tagger: return "tagger";
  }
  return "unknown";
}

std::vector<double> CandidateFeatures::as_vector() const {
  return {appeared_as_query ? 1.0 : 0.0,
          static_cast<double>(search_count),
          static_cast<double>(token_len),
          static_cast<double>(pattern_support),
          contains_digit ? 1.0 : 0.0,
          head_token_idf};
}

std::vector<TokenizedTitle> tokenize_titles(const std::vector<ClickedDoc>& docs, TokenizerMode mode) {
  std::vector<TokenizedTitle> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back({to_tokens(d.title, mode), d.clicks});
  return out;
}

std::optional<ConceptCandidate> extract_by_template(const std::vector<std::string>& q, const Pattern& p,
                                                    TokenizerMode mode) {
  if (!pattern_matches(q, p)) return std::nullopt;
  ConceptCandidate c;
  c.tokens = q;
  c.text = join_tokens(q, mode);
  c.source = CandidateSource::template_match;
  c.pattern_id = p.id;
  return c;
}

std::optional<ConceptCandidate> extract_by_alignment(const std::vector<std::string>& q,
                                                     std::span<const TokenizedTitle> titles,
                                                     const AlignmentConfig& cfg, TokenizerMode mode) {
  // Distinct clicked titles; repeated titles pool their clicks.
  std::map<std::vector<std::string>, std::int64_t> clicked;
  for (const auto& t : titles)
    if (t.clicks > 0 && !t.tokens.empty()) clicked[t.tokens] += t.clicks;
  if (clicked.empty() || q.empty()) return std::nullopt;

  std::size_t min_len = std::max<std::size_t>(cfg.min_align_len, 1);
  for (std::size_t len = q.size(); len >= min_len && len > 0; --len) {
    std::optional<std::size_t> best_start;
    std::int64_t best_weight = -1;
    for (std::size_t b = 0; b + len <= q.size(); ++b) {
      std::vector<std::string> span(q.begin() + static_cast<std::ptrdiff_t>(b),
                                    q.begin() + static_cast<std::ptrdiff_t>(b + len));
      std::size_t hits = 0;
      std::int64_t weight = 0;
      for (const auto& [title, clicks] : clicked) {
        auto n = count_span(title, span);
        if (n == 0) continue;
        ++hits;
        weight += clicks * static_cast<std::int64_t>(n);
      }
      if (hits >= cfg.min_title_hits && weight > best_weight) {
        best_weight = weight;
        best_start = b;
      }
    }
    if (best_start) {
      ConceptCandidate c;
      c.tokens.assign(q.begin() + static_cast<std::ptrdiff_t>(*best_start),
                      q.begin() + static_cast<std::ptrdiff_t>(*best_start + len));
      c.text = join_tokens(c.tokens, mode);
      c.source = CandidateSource::alignment;
      return c;
    }
  }
  return std::nullopt;
}

std::vector<Pattern> gen_patterns(std::span<const std::vector<std::string>> seeds,
                                  std::span<const std::vector<std::string>> queries,
                                  std::span<const Pattern> pool) {
  std::unordered_set<std::uint64_t> seen;
  for (const auto& p : pool) seen.insert(p.id);
  std::vector<Pattern> out;
  for (const auto& q : queries) {
    for (const auto& seed : seeds) {
      if (seed.empty() || seed.size() > q.size()) continue;
      for (std::size_t b = 0; b + seed.size() <= q.size(); ++b) {
        if (!std::equal(seed.begin(), seed.end(), q.begin() + static_cast<std::ptrdiff_t>(b))) continue;
        auto p = Pattern::make({q.begin(), q.begin() + static_cast<std::ptrdiff_t>(b)},
                               {q.begin() + static_cast<std::ptrdiff_t>(b + seed.size()), q.end()});
        if (p.empty() || !seen.insert(p.id).second) continue;
        out.push_back(std::move(p));
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const Pattern& a, const Pattern& b) { return a.id < b.id; });
  return out;
}

BootstrapResult run_bootstrap(std::span<const QueryLogRecord> records, std::span<const Pattern> seed_patterns,
                              const BootstrapConfig& cfg) {
  if (cfg.iters < 1) throw Error("run_bootstrap: iters must be >= 1");
  if (seed_patterns.empty()) throw Error("run_bootstrap: no seed patterns");

  // Per-record work that does not depend on the pattern.
  struct Prepared {
    std::vector<std::string> query;
    std::optional<ConceptCandidate> aligned;
  };
  std::vector<Prepared> prepared;
  prepared.reserve(records.size());
  for (const auto& r : records) {
    Prepared p;
    p.query = to_tokens(r.query, cfg.tokenizer);
    auto titles = tokenize_titles(r.clicked_docs, cfg.tokenizer);
    p.aligned = extract_by_alignment(p.query, titles, cfg.alignment, cfg.tokenizer);
    prepared.push_back(std::move(p));
  }
  // Distinct queries in first-seen order, for pattern generation and statistics.
  std::vector<std::vector<std::string>> distinct_queries;
  {
    std::set<std::vector<std::string>> seen;
    for (const auto& p : prepared)
      if (seen.insert(p.query).second) distinct_queries.push_back(p.query);
  }

  BootstrapResult result;
  std::vector<AdmittedPattern> pool;
  for (const auto& p : seed_patterns) {
    if (std::none_of(pool.begin(), pool.end(), [&](const AdmittedPattern& a) { return a.pattern.id == p.id; }))
      pool.push_back({p, 0, {}});
  }
  std::sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) { return a.pattern.id < b.pattern.id; });

  std::unordered_map<std::string, std::size_t> concept_index;  // text -> index in result.concepts

  for (std::size_t iter = 1; iter <= cfg.iters; ++iter) {
    BootstrapRound round;
    round.round = iter;
    for (const auto& admitted : pool) {
      for (const auto& rec : prepared) {
        auto cp = extract_by_template(rec.query, admitted.pattern, cfg.tokenizer);
        if (!cp || !rec.aligned) continue;
        if (cp->tokens.size() > rec.aligned->tokens.size()) continue;
        auto [it, inserted] = concept_index.emplace(cp->text, result.concepts.size());
        if (inserted) {
          cp->alignment_witness = rec.aligned->text;
          cp->pattern_support = 1;
          result.concepts.push_back(std::move(*cp));
          ++round.concepts_added;
        }
      }
    }

    std::vector<std::vector<std::string>> seed_tokens;
    seed_tokens.reserve(result.concepts.size());
    for (const auto& c : result.concepts) seed_tokens.push_back(c.tokens);
    std::vector<Pattern> pool_patterns;
    for (const auto& a : pool) pool_patterns.push_back(a.pattern);
    auto candidates = gen_patterns(seed_tokens, distinct_queries, pool_patterns);

    for (auto& cand : candidates) {
      PatternStats stats;
      for (const auto& q : distinct_queries) {
        if (!pattern_matches(q, cand)) continue;
        if (concept_index.count(join_tokens(q, cfg.tokenizer))) ++stats.n_s;
        else ++stats.n_e;
      }
      auto verdict = filter_pattern(stats, cfg.filter);
      if (verdict.keep) round.admitted.push_back({cand, iter, stats});
      else {
        round.rejected.emplace_back(cand, verdict);
        round.rejected_stats.push_back(stats);
      }
    }
    for (const auto& a : round.admitted) pool.push_back(a);
    std::sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) { return a.pattern.id < b.pattern.id; });

    bool fixpoint = round.concepts_added == 0 && round.admitted.empty();
    result.rounds.push_back(std::move(round));
    if (fixpoint) {
      result.early_exit = true;
      break;
    }
  }

  // Pattern support: number of pool patterns whose template extracts the concept.
  for (auto& c : result.concepts) {
    c.pattern_support = static_cast<std::size_t>(std::count_if(
        pool.begin(), pool.end(), [&](const AdmittedPattern& a) { return pattern_matches(c.tokens, a.pattern); }));
  }
  result.patterns = std::move(pool);
  return result;
}

std::string bootstrap_result_to_json(const BootstrapResult& r) {
  json concepts = json::array();
  for (const auto& c : r.concepts)
    concepts.push_back({{"text", c.text},
                        {"source", candidate_source_name(c.source)},
                        {"pattern_id", c.pattern_id},
                        {"alignment_witness", c.alignment_witness},
                        {"pattern_support", c.pattern_support}});
  json patterns = json::array();
  for (const auto& p : r.patterns)
    patterns.push_back({{"pattern", p.pattern.str()},
                        {"id", p.pattern.id},
                        {"round", p.round},
                        {"n_s", p.stats.n_s},
                        {"n_e", p.stats.n_e}});
  json rounds = json::array();
  for (const auto& rd : r.rounds) {
    json rejected = json::array();
    for (std::size_t i = 0; i < rd.rejected.size(); ++i)
      rejected.push_back({{"pattern", rd.rejected[i].first.str()},
                          {"reason", rd.rejected[i].second.reason},
                          {"n_s", rd.rejected_stats[i].n_s},
                          {"n_e", rd.rejected_stats[i].n_e}});
    rounds.push_back({{"round", rd.round},
                      {"concepts_added", rd.concepts_added},
                      {"patterns_admitted", rd.admitted.size()},
                      {"rejected", std::move(rejected)}});
  }
  return json{{"concepts", std::move(concepts)},
              {"patterns", std::move(patterns)},
              {"rounds", std::move(rounds)},
              {"early_exit", r.early_exit}}
      .dump(1);
}

CorpusStats CorpusStats::build(std::span<const QueryLogRecord> records, TokenizerMode mode) {
  CorpusStats s;
  s.num_records = records.size();
  for (const auto& r : records) {
    auto toks = to_tokens(r.query, mode);
    ++s.query_freq[join_tokens(toks, mode)];
    std::set<std::string> uniq(toks.begin(), toks.end());
    for (const auto& t : uniq) ++s.token_df[t];
  }
  return s;
}

double CorpusStats::idf(const std::string& token) const {
  auto it = token_df.find(token);
  double df = it == token_df.end() ? 0.0 : static_cast<double>(it->second);
  return std::log((1.0 + static_cast<double>(num_records)) / (1.0 + df));
}

CandidateFeatures featurize_candidate(const ConceptCandidate& c, const CorpusStats& stats) {
  CandidateFeatures f;
  auto it = stats.query_freq.find(c.text);
  f.search_count = it == stats.query_freq.end() ? 0 : it->second;
  f.appeared_as_query = f.search_count > 0;
  f.token_len = c.tokens.size();
  f.pattern_support = c.pattern_support;
  f.contains_digit = std::any_of(c.text.begin(), c.text.end(), [](unsigned char ch) { return ch >= '0' && ch <= '9'; });
  f.head_token_idf = c.tokens.empty() ? 0.0 : stats.idf(c.tokens.back());
  return f;
}

std::vector<LabeledPhrase> load_discriminator_tsv(const std::string& path) {
  std::vector<LabeledPhrase> out;
  std::size_t line_no = 0;
  for (const auto& line : read_lines(path)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cols = split(line, '\t');
    if (cols.size() != 2) throw Error(path + ":" + std::to_string(line_no) + ": expected phrase<TAB>label");
    auto label = trim(cols[1]);
    LabeledPhrase lp;
    lp.phrase = normalize_text(cols[0]);
    if (label == "concept") lp.label = Verdict::concept_phrase;
    else if (label == "instance") lp.label = Verdict::instance;
    else throw Error(path + ":" + std::to_string(line_no) + ": label must be concept or instance");
    out.push_back(std::move(lp));
  }
  return out;
}

Discrimination discriminate_concept(const CandidateFeatures& f, const DiscriminatorModel& model) {
  Discrimination d;
  d.score = model.score(f.as_vector());
  d.verdict = d.score >= 0.5 ? Verdict::concept_phrase : Verdict::instance;
  return d;
}

std::vector<IsAEdge> link_instances(std::span<const std::string> instances, std::span<const std::string> concepts,
                                    std::span<const QueryLogRecord> records, const LinkConfig& cfg,
                                    const ClassifierLinks& classifier_links) {
  struct RecordTokens {
    std::vector<std::vector<std::string>> texts;  // query then titles
    std::set<std::string> vocab;
  };
  std::vector<RecordTokens> prepared;
  prepared.reserve(records.size());
  for (const auto& r : records) {
    RecordTokens rt;
    rt.texts.push_back(to_tokens(r.query, cfg.tokenizer));
    for (const auto& d : r.clicked_docs) rt.texts.push_back(to_tokens(d.title, cfg.tokenizer));
    for (const auto& t : rt.texts) rt.vocab.insert(t.begin(), t.end());
    prepared.push_back(std::move(rt));
  }

  std::map<EdgeKey, IsAEdge> edges;
  for (const auto& inst_text : instances) {
    auto inst = to_tokens(inst_text, cfg.tokenizer);
    auto inst_id = join_tokens(inst, cfg.tokenizer);
    std::vector<std::size_t> mentions;
    for (std::size_t r = 0; r < prepared.size(); ++r) {
      const auto& texts = prepared[r].texts;
      if (std::any_of(texts.begin(), texts.end(), [&](const auto& t) { return contains_span(t, inst); }))
        mentions.push_back(r);
    }
    if (mentions.empty()) continue;
    for (const auto& concept_text : concepts) {
      auto ctoks = to_tokens(concept_text, cfg.tokenizer);
      if (ctoks.empty()) continue;
      auto concept_id = join_tokens(ctoks, cfg.tokenizer);
      if (concept_id == inst_id) continue;
      std::vector<std::string> modifiers(ctoks.begin(), ctoks.end() - 1);
      if (modifiers.empty()) modifiers = ctoks;
      std::size_t together = 0;
      for (auto r : mentions) {
        const auto& vocab = prepared[r].vocab;
        if (std::all_of(modifiers.begin(), modifiers.end(), [&](const auto& m) { return vocab.count(m) > 0; }))
          ++together;
      }
      double score = static_cast<double>(together) / static_cast<double>(mentions.size());
      if (score > cfg.theta_link) {
        IsAEdge e;
        e.child = inst_id;
        e.parent = concept_id;
        e.prior = score;
        e.sources.insert(EdgeSource::bootstrap);
        edges.emplace(EdgeKey{inst_id, concept_id}, std::move(e));
      }
    }
  }
  for (const auto& [inst_text, concept_text] : classifier_links) {
    auto inst_id = join_tokens(to_tokens(inst_text, cfg.tokenizer), cfg.tokenizer);
    auto concept_id = join_tokens(to_tokens(concept_text, cfg.tokenizer), cfg.tokenizer);
    auto [it, inserted] = edges.try_emplace(EdgeKey{inst_id, concept_id});
    if (inserted) {
      it->second.child = inst_id;
      it->second.parent = concept_id;
    }
    it->second.sources.insert(EdgeSource::phrasemine);
  }
  std::vector<IsAEdge> out;
  out.reserve(edges.size());
  for (auto& [k, e] : edges) out.push_back(std::move(e));
  return out;
}

}  // namespace conceptforge
