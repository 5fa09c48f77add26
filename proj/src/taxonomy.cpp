#include "conceptforge/taxonomy.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <tuple>

#include "conceptforge/trie.hpp"

namespace conceptforge {

using nlohmann::json;

namespace {

std::string canon_id(std::string_view text, TokenizerMode mode) { return join_tokens(to_tokens(text, mode), mode); }

void merge_histories(std::vector<ScorePoint>& into, const std::vector<ScorePoint>& from) {
  std::map<Date, ScorePoint> by_date;
  for (const auto& p : into) by_date[p.date] = p;
  for (const auto& p : from) {
    auto [it, inserted] = by_date.emplace(p.date, p);
    if (!inserted && p.s_combined > it->second.s_combined) it->second = p;
  }
  into.clear();
  for (auto& [d, p] : by_date) into.push_back(p);
}

void merge_edge(IsAEdge& into, const IsAEdge& from) {
  into.prior = std::max(into.prior, from.prior);
  into.sources.insert(from.sources.begin(), from.sources.end());
  merge_histories(into.history, from.history);
}

}  // namespace

// ---------------------------------------------------------------------------
// Synonyms

void SynonymDict::add(const std::string& surface, const std::string& canonical) {
  if (surface.empty() || canonical.empty()) throw Error("synonym dictionary: empty entry");
  auto c = to_canonical_.find(canonical);
  if (c != to_canonical_.end() && c->second != canonical)
    throw Error("synonym dictionary: canonical '" + canonical + "' is already a member of class '" + c->second + "'");
  auto s = to_canonical_.find(surface);
  if (s != to_canonical_.end() && s->second != canonical)
    throw Error("synonym dictionary: '" + surface + "' is already in class '" + s->second + "'");
  if (surface != canonical) {
    for (const auto& [k, v] : to_canonical_)
      if (v == surface && k != surface)
        throw Error("synonym dictionary: '" + surface + "' is the canonical form of another class");
  }
  to_canonical_[canonical] = canonical;
  to_canonical_[surface] = canonical;
}

const std::string& SynonymDict::canonical(const std::string& surface) const {
  auto it = to_canonical_.find(surface);
  return it == to_canonical_.end() ? surface : it->second;
}

SynonymDict SynonymDict::parse_tsv(std::string_view contents) {
  SynonymDict d;
  std::size_t line_no = 0;
  for (const auto& raw : split(contents, '\n')) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 2) throw Error("synonym TSV line " + std::to_string(line_no) + ": expected surface<TAB>canonical");
    d.add(normalize_text(cols[0]), normalize_text(cols[1]));
  }
  return d;
}

SynonymDict SynonymDict::load(const std::string& path) { return parse_tsv(read_file(path)); }

AlignResult align_synonyms(const TaxonomySnapshot& snap, const SynonymDict& syn) {
  AlignResult r;
  r.snapshot = snap;
  if (syn.empty()) return r;
  auto& out = r.snapshot;

  out.nodes.clear();
  for (const auto& [id, node] : snap.nodes) {
    const auto& c = syn.canonical(id);
    if (c == id) {
      // Canonical node wins over a renamed surface node that got there first.
      out.nodes[id] = node;
      continue;
    }
    if (snap.nodes.count(c) || out.nodes.count(c)) {
      r.log.push_back({id, c, "merged node"});
      continue;
    }
    auto renamed = node;
    renamed.id = c;
    renamed.text = c;
    out.nodes.emplace(c, std::move(renamed));
    r.log.push_back({id, c, "renamed node"});
  }

  out.edges.clear();
  for (const auto& [key, edge] : snap.edges) {
    auto e = edge;
    e.child = syn.canonical(edge.child);
    e.parent = syn.canonical(edge.parent);
    if (e.child == e.parent) {
      r.log.push_back({edge.child + " -> " + edge.parent, e.child, "dropped self-edge"});
      continue;
    }
    EdgeKey k{e.child, e.parent};
    auto it = out.edges.find(k);
    if (it == out.edges.end()) {
      out.edges.emplace(k, std::move(e));
    } else {
      merge_edge(it->second, e);
      r.log.push_back({edge.child + " -> " + edge.parent, k.first + " -> " + k.second, "merged edge"});
    }
  }

  std::map<std::tuple<Date, std::string, std::string>, std::int64_t> clicks;
  for (const auto& c : snap.recent_clicks) clicks[{c.date, syn.canonical(c.instance), syn.canonical(c.concept_id)}] += c.count;
  out.recent_clicks.clear();
  for (const auto& [k, n] : clicks) out.recent_clicks.push_back({std::get<0>(k), std::get<1>(k), std::get<2>(k), n});
  return r;
}

// ---------------------------------------------------------------------------
// Heat

namespace {

TokenTrie<std::string> build_trie(const std::set<std::string>& phrases, TokenizerMode mode) {
  TokenTrie<std::string> trie;
  for (const auto& p : phrases) {
    auto toks = to_tokens(p, mode);
    if (!toks.empty()) trie.insert(toks, p);
  }
  return trie;
}

}  // namespace

HeatRow estimate_heat(std::span<const QueryLogRecord> logs, const std::set<std::string>& entity_lexicon,
                      TokenizerMode mode) {
  if (entity_lexicon.empty()) throw Error("estimate_heat: entity lexicon is empty");
  auto trie = build_trie(entity_lexicon, mode);
  HeatRow row;
  std::int64_t total = 0;
  for (const auto& rec : logs) {
    auto toks = to_tokens(rec.query, mode);
    for (const auto& m : trie.forward_max_match(toks)) {
      ++row.raw[m.payload];
      ++total;
    }
  }
  if (total == 0) return row;
  for (const auto& [e, n] : row.raw) row.heat[e] = static_cast<double>(n) / static_cast<double>(total);
  return row;
}

std::optional<std::string> select_key_entity(std::span<const std::vector<std::string>> supporting_queries,
                                             std::span<const std::vector<std::string>> all_queries,
                                             const std::set<std::string>& entity_lexicon, TokenizerMode mode) {
  if (entity_lexicon.empty()) return std::nullopt;
  auto trie = build_trie(entity_lexicon, mode);
  std::map<std::string, std::int64_t> tf, df;
  for (const auto& q : supporting_queries)
    for (const auto& m : trie.forward_max_match(q)) ++tf[m.payload];
  if (tf.empty()) return std::nullopt;
  for (const auto& q : all_queries) {
    std::set<std::string> seen;
    for (const auto& m : trie.forward_max_match(q)) seen.insert(m.payload);
    for (const auto& e : seen) ++df[e];
  }
  const double n = static_cast<double>(all_queries.size());
  std::optional<std::string> best;
  double best_score = -1.0;
  for (const auto& [e, count] : tf) {
    double idf = std::log((1.0 + n) / (1.0 + static_cast<double>(df[e]))) + 1.0;
    double s = static_cast<double>(count) * idf;
    if (s > best_score) {
      best_score = s;
      best = e;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Scores

std::vector<double> implicit_scores(std::span<const double> heats) {
  double sum = 0;
  for (double h : heats) {
    if (h < 0 || !std::isfinite(h)) throw Error("implicit_score: heat values must be finite and non-negative");
    sum += h;
  }
  if (sum <= 0) throw Error("no implicit evidence");
  std::vector<double> out;
  out.reserve(heats.size());
  for (double h : heats) out.push_back(h / sum);
  return out;
}

double implicit_score(std::size_t index, std::span<const double> heats) {
  if (index >= heats.size()) throw Error("implicit_score: index out of range");
  return implicit_scores(heats)[index];
}

ExplicitScores explicit_scores(std::span<const std::int64_t> counts) {
  ExplicitScores r;
  std::int64_t sum = 0;
  for (auto c : counts) {
    if (c < 0) throw Error("explicit_score: negative click count");
    sum += c;
  }
  r.scores.assign(counts.size(), 0.0);
  if (sum == 0) {
    r.no_evidence = true;
    return r;
  }
  for (std::size_t i = 0; i < counts.size(); ++i)
    r.scores[i] = static_cast<double>(counts[i]) / static_cast<double>(sum);
  return r;
}

CombinedScore combined_score(std::span<const DailyScore> window, bool in_M, const CombineParams& p) {
  if (window.empty()) throw Error("combined_score: window must hold at least one day");
  CombinedScore r;
  for (const auto& d : window) {
    if (!in_M) {
      r.value += d.s_implicit + d.s_explicit;
      continue;
    }
    double si = d.s_implicit, se = d.s_explicit;
    if (si < p.log_floor) {
      si = p.log_floor;
      r.clamped = true;
    }
    if (se < p.log_floor) {
      se = p.log_floor;
      r.clamped = true;
    }
    r.value += p.implicit_weight_in_M * std::log(si) + std::log(se);
  }
  return r;
}

ReweightResult reweight_unambiguous(double s, double raw_heat, bool unambiguous, double factor) {
  if (!unambiguous) return {s, false, false};
  if (raw_heat < 1.0) return {s, false, true};
  return {factor * std::log(raw_heat) * s, true, false};
}

// ---------------------------------------------------------------------------
// Level inference

InferenceResult infer_isa_levels(const std::set<std::string>& level3, const std::set<std::string>& level2,
                                 const std::map<std::string, std::set<std::string>>& membership, double delta_t) {
  std::map<std::string, std::set<std::string>> instances_of;
  for (const auto& [inst, concepts] : membership)
    for (const auto& c : concepts)
      if (level3.count(c) || level2.count(c)) instances_of[c].insert(inst);

  InferenceResult r;
  for (const auto& c : level3) {
    auto it = instances_of.find(c);
    if (it == instances_of.end() || it->second.empty()) {
      r.skipped.push_back(c);
      continue;
    }
    const auto& ic = it->second;
    const double nc = static_cast<double>(ic.size());
    // Count co-memberships by walking the instances of c once.
    std::map<std::string, std::size_t> shared;
    for (const auto& inst : ic)
      for (const auto& p : membership.at(inst))
        if (level2.count(p) && p != c) ++shared[p];
    for (const auto& [p, n] : shared) {
      double prob = static_cast<double>(n) / nc;
      if (prob > delta_t) r.edges.push_back({c, p, prob});
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Config

TaxonomyConfig parse_taxonomy_config(std::string_view json_text) {
  TaxonomyConfig cfg;
  auto j = json::parse(json_text);
  cfg.window = j.value("window", cfg.window);
  cfg.delta_t = j.value("delta_t", cfg.delta_t);
  cfg.reweight_factor = j.value("reweight_factor", cfg.reweight_factor);
  cfg.explicit_window_days = j.value("explicit_window_days", cfg.explicit_window_days);
  cfg.combine.implicit_weight_in_M = j.value("implicit_weight_in_M", cfg.combine.implicit_weight_in_M);
  cfg.combine.log_floor = j.value("log_floor", cfg.combine.log_floor);
  if (j.contains("tokenizer")) cfg.tokenizer = parse_tokenizer_mode(j.at("tokenizer").get<std::string>());
  for (const auto& e : j.value("excluded_concepts", json::array())) cfg.excluded_concepts.insert(e.get<std::string>());
  for (const auto& r : j.value("expert_rules", json::array()))
    cfg.expert_rules.push_back({r.at(0).get<std::string>(), r.at(1).get<std::string>()});
  for (const auto& r : j.value("pinned_edges", json::array()))
    cfg.pinned_edges.emplace_back(r.at(0).get<std::string>(), r.at(1).get<std::string>());
  if (cfg.window == 0) throw Error("taxonomy config: window must be >= 1");
  if (cfg.explicit_window_days == 0) throw Error("taxonomy config: explicit_window_days must be >= 1");
  return cfg;
}

TaxonomyConfig load_taxonomy_config(const std::string& path) { return parse_taxonomy_config(read_file(path)); }

// ---------------------------------------------------------------------------
// Daily update

namespace {

bool is_instance_edge(const TaxonomySnapshot& s, const IsAEdge& e) {
  const auto* c = s.node(e.child);
  const auto* p = s.node(e.parent);
  return (c == nullptr || !c->is_concept()) && p != nullptr && p->is_concept();
}

void apply_exclusions(TaxonomySnapshot& s, const TaxonomyConfig& cfg, UpdateLog& log) {
  if (cfg.excluded_concepts.empty()) return;
  std::set<std::string> excluded_keys;
  for (const auto& e : cfg.excluded_concepts) excluded_keys.insert(canon_id(e, cfg.tokenizer));
  std::set<std::string> drop;
  for (const auto& [id, n] : s.nodes)
    if (n.is_concept() && (excluded_keys.count(id) || excluded_keys.count(canon_id(n.text, cfg.tokenizer))))
      drop.insert(id);
  for (const auto& id : drop) {
    s.nodes.erase(id);
    log.messages.push_back("excluded concept '" + id + "'");
  }
  std::erase_if(s.edges, [&](const auto& kv) { return drop.count(kv.first.first) || drop.count(kv.first.second); });
  std::erase_if(s.recent_clicks, [&](const ClickAggregate& c) { return drop.count(c.concept_id) > 0; });
}

void add_config_edge(TaxonomySnapshot& s, const std::string& child, const std::string& parent, EdgeSource src,
                     UpdateLog& log) {
  if (!s.node(child) || !s.node(parent)) {
    log.messages.push_back(std::string(edge_source_name(src)) + " edge '" + child + "' -> '" + parent +
                           "' skipped: unknown node");
    return;
  }
  if (child == parent) return;
  auto& e = s.edges[{child, parent}];
  if (e.child.empty()) {
    e.child = child;
    e.parent = parent;
    e.prior = 1.0;
  }
  e.sources.insert(src);
}

}  // namespace

UpdateResult daily_update(const TaxonomySnapshot& snap, const Date& day, std::span<const QueryLogRecord> day_logs,
                          const TaxonomyConfig& cfg) {
  if (snap.date && !(*snap.date < day))
    throw Error("daily_update: date regression (snapshot " + snap.date->str() + ", logs " + day.str() + ")");
  for (const auto& rec : day_logs)
    if (rec.date != day) throw Error("daily_update: record dated " + rec.date.str() + " in logs for " + day.str());
  if (cfg.window == 0) throw Error("daily_update: window must be >= 1");

  UpdateResult r;
  auto& out = r.snapshot;
  out = snap;
  out.version = snap.version + 1;
  out.date = day;

  apply_exclusions(out, cfg, r.log);
  for (const auto& rule : cfg.expert_rules) {
    auto c = canon_id(rule.child, cfg.tokenizer), p = canon_id(rule.parent, cfg.tokenizer);
    const auto* cn = out.node(c);
    const auto* pn = out.node(p);
    if (cn && pn && (cn->level != Level::level2 || pn->level != Level::level1)) {
      r.log.messages.push_back("expert rule '" + c + "' -> '" + p + "' skipped: expects level-2 -> level-1");
      continue;
    }
    add_config_edge(out, c, p, EdgeSource::expert_rule, r.log);
  }
  for (const auto& [child, parent] : cfg.pinned_edges)
    add_config_edge(out, canon_id(child, cfg.tokenizer), canon_id(parent, cfg.tokenizer), EdgeSource::pinned, r.log);

  // Heat over the key-entity lexicon.
  std::set<std::string> lexicon;
  for (const auto& [id, n] : out.nodes)
    if (n.is_concept() && n.key_entity) lexicon.insert(*n.key_entity);
  if (!lexicon.empty()) r.heat = estimate_heat(day_logs, lexicon, cfg.tokenizer);

  // Today's tagged clicks per live (instance, concept) edge; an instance counts
  // wherever it occurs inside the query.
  std::set<std::string> instances;
  std::map<std::string, std::vector<std::string>> parents;
  for (const auto& [key, e] : out.edges) {
    if (!is_instance_edge(out, e)) continue;
    instances.insert(e.child);
    parents[e.child].push_back(e.parent);
  }
  std::map<std::string, std::string> concept_by_text;
  for (const auto& [id, n] : out.nodes)
    if (n.is_concept()) concept_by_text.emplace(canon_id(n.text, cfg.tokenizer), id);

  std::map<EdgeKey, std::int64_t> today;
  if (!instances.empty()) {
    auto trie = build_trie(instances, cfg.tokenizer);
    for (const auto& rec : day_logs) {
      if (!rec.clicked_concept_tag) continue;
      auto tag = canon_id(*rec.clicked_concept_tag, cfg.tokenizer);
      auto cit = concept_by_text.find(tag);
      if (cit == concept_by_text.end()) {
        auto* n = out.node(tag);
        if (!n || !n->is_concept()) {
          ++r.log.unknown_tags;
          continue;
        }
        cit = concept_by_text.emplace(tag, tag).first;
      }
      auto toks = to_tokens(rec.query, cfg.tokenizer);
      std::set<std::string> hit;
      for (std::size_t pos = 0; pos < toks.size(); ++pos) {
        // All matches starting here, not only the longest.
        for (std::size_t end = pos + 1; end <= toks.size(); ++end) {
          std::span<const std::string> piece(toks.data() + pos, end - pos);
          if (const auto* inst = trie.find(piece)) hit.insert(*inst);
        }
      }
      for (const auto& inst : hit)
        if (out.edges.count({inst, cit->second})) ++today[{inst, cit->second}];
    }
  }

  const Date window_start = day.plus_days(-static_cast<std::int64_t>(cfg.explicit_window_days) + 1);
  std::erase_if(out.recent_clicks, [&](const ClickAggregate& c) {
    return c.date < window_start || !out.edges.count({c.instance, c.concept_id});
  });
  for (const auto& [k, n] : today) out.recent_clicks.push_back({day, k.first, k.second, n});
  std::map<EdgeKey, std::int64_t> window_clicks;
  for (const auto& c : out.recent_clicks) window_clicks[{c.instance, c.concept_id}] += c.count;

  const Date score_start = day.plus_days(-static_cast<std::int64_t>(cfg.window) + 1);
  for (const auto& [inst, ps] : parents) {
    std::vector<double> heats;
    std::vector<std::int64_t> counts;
    for (const auto& p : ps) {
      const auto* pn = out.node(p);
      heats.push_back(pn->key_entity ? r.heat.heat_of(*pn->key_entity) : 0.0);
      auto it = window_clicks.find({inst, p});
      counts.push_back(it == window_clicks.end() ? 0 : it->second);
    }
    std::vector<double> imp(ps.size(), 0.0);
    bool no_implicit = std::all_of(heats.begin(), heats.end(), [](double h) { return h <= 0.0; });
    if (!no_implicit) imp = implicit_scores(heats);
    auto exp = explicit_scores(counts);

    for (std::size_t k = 0; k < ps.size(); ++k) {
      auto& edge = out.edges.at({inst, ps[k]});
      const auto* pn = out.node(ps[k]);
      std::vector<DailyScore> window;
      for (const auto& h : edge.history)
        if (h.date >= score_start && !(h.flags & score_flags::structural)) window.push_back({h.s_implicit, h.s_explicit});
      window.push_back({imp[k], exp.scores[k]});
      auto comb = combined_score(window, pn->in_M, cfg.combine);

      ScorePoint pt{day, imp[k], exp.scores[k], comb.value, 0};
      if (no_implicit) pt.flags |= score_flags::no_implicit;
      if (exp.no_evidence) pt.flags |= score_flags::no_explicit;
      if (comb.clamped) pt.flags |= score_flags::log_clamped;
      double raw = pn->key_entity ? static_cast<double>(r.heat.raw_of(*pn->key_entity)) : 0.0;
      auto rw = reweight_unambiguous(comb.value, raw, pn->unambiguous, cfg.reweight_factor);
      pt.s_combined = rw.value;
      if (rw.applied) pt.flags |= score_flags::reweighted;
      if (rw.skipped) {
        pt.flags |= score_flags::reweight_skipped;
        r.log.messages.push_back("re-weight skipped for '" + inst + "' -> '" + ps[k] + "': raw heat < 1");
      }
      edge.history.push_back(pt);
      ++r.log.scored_edges;
    }
  }

  // Level-2 <-> level-3 links from instance co-membership.
  std::set<std::string> l3, l2;
  for (const auto& [id, n] : out.nodes) {
    if (n.level == Level::level3) l3.insert(id);
    if (n.level == Level::level2) l2.insert(id);
  }
  std::map<std::string, std::set<std::string>> membership;
  for (const auto& [key, e] : out.edges)
    if (is_instance_edge(out, e)) membership[e.child].insert(e.parent);
  auto inferred = infer_isa_levels(l3, l2, membership, cfg.delta_t);
  for (const auto& c : inferred.skipped) r.log.messages.push_back("concept '" + c + "' has no instances; inference skipped");

  std::map<EdgeKey, double> fresh;
  for (const auto& e : inferred.edges) fresh[{e.child, e.parent}] = e.p;
  for (auto it = out.edges.begin(); it != out.edges.end();) {
    auto& e = it->second;
    if (e.sources.count(EdgeSource::inference) && !fresh.count(it->first)) {
      e.sources.erase(EdgeSource::inference);
      if (e.sources.empty()) {
        r.log.messages.push_back("inference edge '" + e.child + "' -> '" + e.parent + "' retracted");
        it = out.edges.erase(it);
        continue;
      }
    }
    ++it;
  }
  for (const auto& [key, p] : fresh) {
    auto& e = out.edges[key];
    if (e.child.empty()) {
      e.child = key.first;
      e.parent = key.second;
    }
    e.sources.insert(EdgeSource::inference);
    e.prior = p;
  }

  for (auto& [key, e] : out.edges) {
    if (is_instance_edge(out, e)) continue;
    auto f = fresh.find(key);
    e.history.push_back({day, 0.0, 0.0, f == fresh.end() ? 1.0 : f->second, score_flags::structural});
    ++r.log.structural_edges;
  }
  return r;
}

TaxonomySnapshot replay_days(TaxonomySnapshot snap, std::span<const QueryLogRecord> records, const TaxonomyConfig& cfg,
                             std::vector<UpdateLog>* logs) {
  if (records.empty()) return snap;
  std::map<Date, std::vector<QueryLogRecord>> by_day;
  for (const auto& r : records) by_day[r.date].push_back(r);
  Date first = by_day.begin()->first;
  Date last = by_day.rbegin()->first;
  if (snap.date && *snap.date >= first)
    throw Error("replay: logs start " + first.str() + " but snapshot is dated " + snap.date->str());
  for (Date d = first; d <= last; d = d.plus_days(1)) {
    auto it = by_day.find(d);
    std::span<const QueryLogRecord> day_logs;
    if (it != by_day.end()) day_logs = it->second;
    auto res = daily_update(snap, d, day_logs, cfg);
    snap = std::move(res.snapshot);
    if (logs) logs->push_back(std::move(res.log));
  }
  return snap;
}

// ---------------------------------------------------------------------------
// Series export

std::vector<SeriesRow> export_timeseries(const TaxonomySnapshot& snap, const std::string& instance) {
  const auto* n = snap.node(instance);
  if (!n || n->is_concept()) throw Error("export_timeseries: unknown instance '" + instance + "'");
  std::vector<SeriesRow> rows;
  for (const auto* e : snap.parents_of(instance))
    for (const auto& p : e->history) rows.push_back({p.date, e->parent, p.s_combined, p.s_implicit, p.s_explicit, p.flags});
  std::stable_sort(rows.begin(), rows.end(),
                   [](const SeriesRow& a, const SeriesRow& b) { return std::tie(a.date, a.parent) < std::tie(b.date, b.parent); });
  return rows;
}

namespace {

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> csv_split(std::string_view line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  return out;
}

}  // namespace

std::string series_to_csv(const std::string& instance, std::span<const SeriesRow> rows) {
  std::string out = "instance,date,parent,s_combined,s_implicit,s_explicit,flags\n";
  for (const auto& r : rows) {
    out += csv_field(instance) + ',' + r.date.str() + ',' + csv_field(r.parent) + ',' + format_double(r.s_combined) +
           ',' + format_double(r.s_implicit) + ',' + format_double(r.s_explicit) + ',' + std::to_string(r.flags) + '\n';
  }
  return out;
}

std::map<std::string, std::vector<ScorePoint>> series_from_csv(std::string_view csv) {
  std::map<std::string, std::vector<ScorePoint>> out;
  bool header = true;
  std::size_t line_no = 0;
  for (const auto& raw : split(csv, '\n')) {
    ++line_no;
    if (trim(raw).empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    auto f = csv_split(raw);
    if (f.size() != 7) throw Error("series CSV line " + std::to_string(line_no) + ": expected 7 fields");
    ScorePoint p;
    p.date = Date::parse(f[1]);
    p.s_combined = std::stod(f[3]);
    p.s_implicit = std::stod(f[4]);
    p.s_explicit = std::stod(f[5]);
    p.flags = static_cast<std::uint32_t>(std::stoul(f[6]));
    out[f[2]].push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Initial snapshot assembly

InitInput parse_init_input(std::string_view json_text, TokenizerMode mode) {
  (void)mode;
  auto j = json::parse(json_text);
  InitInput in;
  if (j.contains("date") && !j.at("date").is_null()) in.date = Date::parse(j.at("date").get<std::string>());
  for (const auto& c : j.value("concepts", json::array())) {
    ConceptSpec s;
    s.text = c.at("text").get<std::string>();
    int level = c.value("level", 3);
    if (level < 1 || level > 3) throw Error("init: concept level must be 1, 2 or 3");
    s.level = static_cast<Level>(level);
    s.in_M = c.value("in_M", false);
    s.unambiguous = c.value("unambiguous", false);
    if (c.contains("key_entity") && !c.at("key_entity").is_null()) s.key_entity = c.at("key_entity").get<std::string>();
    in.concepts.push_back(std::move(s));
  }
  for (const auto& e : j.value("edges", json::array())) {
    IsAEdge edge;
    edge.child = e.at("child").get<std::string>();
    edge.parent = e.at("parent").get<std::string>();
    edge.prior = e.value("prior", 0.0);
    edge.sources.insert(parse_edge_source(e.value("source", std::string("bootstrap"))));
    in.edges.push_back(std::move(edge));
  }
  return in;
}

TaxonomySnapshot assemble_snapshot(const InitInput& in, TokenizerMode mode, std::span<const QueryLogRecord> records,
                                   const std::set<std::string>& entity_lexicon) {
  TaxonomySnapshot s;
  s.version = 1;
  s.date = in.date;
  for (const auto& c : in.concepts) {
    TaxonomyNode n;
    n.id = canon_id(c.text, mode);
    if (n.id.empty()) throw Error("init: empty concept text");
    n.text = n.id;
    n.level = c.level;
    n.in_M = c.in_M;
    n.unambiguous = c.unambiguous;
    if (c.key_entity) n.key_entity = canon_id(*c.key_entity, mode);
    if (!s.nodes.emplace(n.id, n).second) throw Error("init: duplicate concept '" + n.id + "'");
  }
  for (const auto& e : in.edges) {
    IsAEdge edge = e;
    edge.child = canon_id(e.child, mode);
    edge.parent = canon_id(e.parent, mode);
    if (edge.child.empty() || edge.parent.empty()) throw Error("init: edge with empty endpoint");
    if (edge.child == edge.parent) continue;
    const auto* p = s.node(edge.parent);
    if (!p) throw Error("init: edge parent '" + edge.parent + "' is not a declared concept");
    if (!s.node(edge.child)) s.nodes.emplace(edge.child, TaxonomyNode{edge.child, edge.child, Level::instance, false, false, {}});
    auto [it, inserted] = s.edges.emplace(EdgeKey{edge.child, edge.parent}, edge);
    if (!inserted) merge_edge(it->second, edge);
  }

  if (!entity_lexicon.empty() && !records.empty()) {
    std::set<std::string> lex;
    for (const auto& e : entity_lexicon) lex.insert(canon_id(e, mode));
    std::vector<std::vector<std::string>> all;
    for (const auto& r : records) all.push_back(to_tokens(r.query, mode));
    for (auto& [id, n] : s.nodes) {
      if (!n.is_concept() || n.key_entity) continue;
      auto ctoks = to_tokens(n.text, mode);
      std::vector<std::vector<std::string>> support;
      for (std::size_t i = 0; i < records.size(); ++i) {
        bool tagged = records[i].clicked_concept_tag && canon_id(*records[i].clicked_concept_tag, mode) == id;
        if (tagged || contains_span(all[i], ctoks)) support.push_back(all[i]);
      }
      n.key_entity = select_key_entity(support, all, lex, mode);
    }
  }
  return s;
}

}  // namespace conceptforge
