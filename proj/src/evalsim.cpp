#include "conceptforge/evalsim.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numeric>
#include <random>

namespace conceptforge {

using nlohmann::json;

int exact_match(std::string_view pred, std::string_view gold) { return pred == gold ? 1 : 0; }

double token_f1(std::string_view pred, std::string_view gold, TokenizerMode mode) {
  auto p = to_tokens(pred, mode);
  auto g = to_tokens(gold, mode);
  if (p.empty() && g.empty()) return 1.0;
  if (p.empty() || g.empty()) return 0.0;
  std::map<std::string, std::size_t> gc;
  for (const auto& t : g) ++gc[t];
  std::size_t overlap = 0;
  for (const auto& t : p) {
    auto it = gc.find(t);
    if (it != gc.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  if (overlap == 0) return 0.0;
  double precision = static_cast<double>(overlap) / static_cast<double>(p.size());
  double recall = static_cast<double>(overlap) / static_cast<double>(g.size());
  return 2 * precision * recall / (precision + recall);
}

std::vector<GoldItem> parse_gold_tsv(std::string_view contents) {
  std::vector<GoldItem> out;
  std::size_t line_no = 0;
  for (const auto& raw : split(contents, '\n')) {
    ++line_no;
    if (trim(raw).empty()) continue;
    auto cols = split(raw, '\t');
    if (cols.size() != 2) throw Error("gold TSV line " + std::to_string(line_no) + ": expected text<TAB>gold");
    GoldItem item{normalize_text(cols[0]), {}};
    for (const auto& g : split(cols[1], ';')) item.gold.push_back(normalize_text(g));
    out.push_back(std::move(item));
  }
  return out;
}

std::vector<GoldItem> load_gold_tsv(const std::string& path) { return parse_gold_tsv(read_file(path)); }

std::map<std::string, std::string> load_predictions_tsv(const std::string& path) {
  std::map<std::string, std::string> out;
  std::size_t line_no = 0;
  for (const auto& raw : read_lines(path)) {
    ++line_no;
    if (trim(raw).empty()) continue;
    auto cols = split(raw, '\t');
    if (cols.size() != 2) throw Error("prediction TSV line " + std::to_string(line_no) + ": expected text<TAB>phrase");
    out[normalize_text(cols[0])] = normalize_text(cols[1]);
  }
  return out;
}

PhraseEval evaluate_phrases(const std::vector<GoldItem>& gold, const std::map<std::string, std::string>& predictions,
                            TokenizerMode mode) {
  PhraseEval r;
  r.n = gold.size();
  if (gold.empty()) return r;
  double em = 0, f1 = 0;
  for (const auto& item : gold) {
    auto it = predictions.find(item.text);
    if (it == predictions.end()) {
      ++r.missing_predictions;
      continue;
    }
    double best_em = 0, best_f1 = 0;
    for (const auto& g : item.gold) {
      best_em = std::max(best_em, static_cast<double>(exact_match(it->second, g)));
      best_f1 = std::max(best_f1, token_f1(it->second, g, mode));
    }
    em += best_em;
    f1 += best_f1;
  }
  r.exact_match = em / static_cast<double>(gold.size());
  r.f1 = f1 / static_cast<double>(gold.size());
  return r;
}

Judgments parse_judgments_tsv(std::string_view contents) {
  Judgments out;
  std::size_t line_no = 0;
  for (const auto& raw : split(contents, '\n')) {
    ++line_no;
    if (trim(raw).empty()) continue;
    auto cols = split(raw, '\t');
    if (cols.size() != 3) throw Error("judgments line " + std::to_string(line_no) + ": expected child<TAB>parent<TAB>label");
    auto label = trim(cols[2]);
    if (label != "1" && label != "0") throw Error("judgments line " + std::to_string(line_no) + ": label must be 1 or 0");
    out[{normalize_text(cols[0]), normalize_text(cols[1])}] = label == "1";
  }
  return out;
}

Judgments load_judgments(const std::string& path) { return parse_judgments_tsv(read_file(path)); }

IsAPrecision eval_isa_precision(const TaxonomySnapshot& snap, std::size_t sample_n, std::uint64_t seed,
                                const Judgments& judgments) {
  IsAPrecision r;
  std::vector<const IsAEdge*> edges;
  for (const auto& [k, e] : snap.edges) {
    edges.push_back(&e);
    const auto* c = snap.node(e.child);
    if (!c || !c->is_concept()) ++r.instances_per_concept[e.parent];
  }
  std::mt19937_64 rng(seed);
  const std::size_t n = std::min(sample_n, edges.size());
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, edges.size() - 1);
    std::swap(edges[i], edges[pick(rng)]);
  }
  r.sampled = n;
  for (std::size_t i = 0; i < n; ++i) {
    auto it = judgments.find({edges[i]->child, edges[i]->parent});
    if (it == judgments.end()) {
      ++r.unjudged;
      continue;
    }
    ++r.judged;
    if (it->second) ++r.correct;
  }
  r.precision = r.judged ? static_cast<double>(r.correct) / static_cast<double>(r.judged) : 0.0;
  std::size_t total = 0;
  for (const auto& [c, k] : r.instances_per_concept) {
    total += k;
    r.max_instances_per_concept = std::max(r.max_instances_per_concept, k);
  }
  if (!r.instances_per_concept.empty())
    r.mean_instances_per_concept = static_cast<double>(total) / static_cast<double>(r.instances_per_concept.size());
  return r;
}

// ---------------------------------------------------------------------------
// Scenario

namespace {

Distribution parse_dist(const json& j) {
  Distribution d;
  for (const auto& [k, v] : j.items()) d[k] = v.get<double>();
  return d;
}

void check_dist(const Distribution& d, const std::set<std::string>& allowed, const std::string& where) {
  if (d.empty()) throw Error("malformed distribution for " + where + ": empty");
  double sum = 0;
  for (const auto& [c, p] : d) {
    if (!allowed.count(c)) throw Error("malformed distribution for " + where + ": '" + c + "' is not a parent of the instance");
    if (!(p >= 0.0) || !std::isfinite(p)) throw Error("malformed distribution for " + where + ": negative or non-finite mass");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error("malformed distribution for " + where + ": masses sum to " + format_double(sum));
}

}  // namespace

SimScenario parse_scenario(std::string_view json_text) {
  auto j = json::parse(json_text);
  SimScenario sc;
  sc.start_date = Date::parse(j.at("start_date").get<std::string>());
  sc.days = j.at("days").get<std::size_t>();
  for (const auto& c : j.at("concepts")) {
    SimConcept sc_c;
    sc_c.text = normalize_text(c.at("text").get<std::string>());
    sc_c.id = c.contains("id") ? normalize_text(c.at("id").get<std::string>()) : sc_c.text;
    sc_c.key_entity = normalize_text(c.value("key_entity", sc_c.text));
    sc_c.level = c.value("level", 3);
    sc_c.in_M = c.value("in_M", false);
    sc.concepts.push_back(std::move(sc_c));
  }
  for (const auto& i : j.at("instances")) {
    SimInstance in;
    in.text = normalize_text(i.at("text").get<std::string>());
    in.id = i.contains("id") ? normalize_text(i.at("id").get<std::string>()) : in.text;
    for (const auto& c : i.at("concepts")) in.concepts.push_back(normalize_text(c.get<std::string>()));
    in.searches_per_day = i.value("searches_per_day", std::size_t{0});
    in.clicks_per_day = i.value("clicks_per_day", std::size_t{0});
    in.search_dist = parse_dist(i.at("search_dist"));
    in.click_dist = parse_dist(i.at("click_dist"));
    sc.instances.push_back(std::move(in));
  }
  for (const auto& c : j.value("changepoints", json::array())) {
    Changepoint cp;
    cp.day = c.at("day").get<std::size_t>();
    cp.instance = normalize_text(c.at("instance").get<std::string>());
    if (c.contains("search_dist")) cp.search_dist = parse_dist(c.at("search_dist"));
    if (c.contains("click_dist")) cp.click_dist = parse_dist(c.at("click_dist"));
    sc.changepoints.push_back(std::move(cp));
  }
  validate_scenario(sc);
  return sc;
}

SimScenario load_scenario(const std::string& path) { return parse_scenario(read_file(path)); }

std::string scenario_to_json(const SimScenario& sc) {
  json j;
  j["start_date"] = sc.start_date.str();
  j["days"] = sc.days;
  j["concepts"] = json::array();
  for (const auto& c : sc.concepts)
    j["concepts"].push_back(
        {{"id", c.id}, {"text", c.text}, {"key_entity", c.key_entity}, {"level", c.level}, {"in_M", c.in_M}});
  j["instances"] = json::array();
  for (const auto& i : sc.instances)
    j["instances"].push_back({{"id", i.id},
                              {"text", i.text},
                              {"concepts", i.concepts},
                              {"searches_per_day", i.searches_per_day},
                              {"clicks_per_day", i.clicks_per_day},
                              {"search_dist", i.search_dist},
                              {"click_dist", i.click_dist}});
  j["changepoints"] = json::array();
  for (const auto& c : sc.changepoints) {
    json cp = {{"day", c.day}, {"instance", c.instance}};
    if (c.search_dist) cp["search_dist"] = *c.search_dist;
    if (c.click_dist) cp["click_dist"] = *c.click_dist;
    j["changepoints"].push_back(std::move(cp));
  }
  return j.dump(1);
}

void validate_scenario(const SimScenario& sc) {
  if (sc.days == 0) throw Error("scenario: days must be >= 1");
  std::set<std::string> concept_ids;
  for (const auto& c : sc.concepts)
    if (!concept_ids.insert(c.id).second) throw Error("scenario: duplicate concept '" + c.id + "'");
  std::set<std::string> instance_ids;
  for (const auto& in : sc.instances) {
    if (!instance_ids.insert(in.id).second) throw Error("scenario: duplicate instance '" + in.id + "'");
    for (const auto& c : in.concepts)
      if (!concept_ids.count(c)) throw Error("scenario: instance '" + in.id + "' names unknown concept '" + c + "'");
  }
  for (const auto& cp : sc.changepoints) {
    if (!instance_ids.count(cp.instance)) throw Error("scenario: changepoint for unknown instance '" + cp.instance + "'");
    if (cp.day < 1 || cp.day > sc.days) throw Error("scenario: changepoint day out of range for '" + cp.instance + "'");
  }
  for (const auto& in : sc.instances) {
    std::set<std::string> allowed(in.concepts.begin(), in.concepts.end());
    for (std::size_t day = 1; day <= sc.days; ++day) {
      auto [s, c] = distributions_on(sc, in, day);
      auto where = "instance '" + in.id + "' day " + std::to_string(day);
      if (in.searches_per_day > 0) check_dist(s, allowed, where + " (search)");
      if (in.clicks_per_day > 0) check_dist(c, allowed, where + " (click)");
    }
  }
}

std::pair<Distribution, Distribution> distributions_on(const SimScenario& sc, const SimInstance& inst, std::size_t day) {
  Distribution s = inst.search_dist, c = inst.click_dist;
  std::size_t s_day = 0, c_day = 0;
  for (const auto& cp : sc.changepoints) {
    if (cp.instance != inst.id || cp.day > day) continue;
    // Latest changepoint wins; ties resolve to the later entry.
    if (cp.search_dist && cp.day >= s_day) {
      s = *cp.search_dist;
      s_day = cp.day;
    }
    if (cp.click_dist && cp.day >= c_day) {
      c = *cp.click_dist;
      c_day = cp.day;
    }
  }
  return {s, c};
}

std::string draw(const Distribution& d, std::uint64_t raw) {
  const double u = static_cast<double>(raw >> 11) * 0x1.0p-53;
  double acc = 0;
  const std::string* last = nullptr;
  for (const auto& [k, p] : d) {
    if (p <= 0) continue;
    acc += p;
    last = &k;
    if (u < acc) return k;
  }
  if (!last) throw Error("draw: distribution has no mass");
  return *last;
}

std::vector<QueryLogRecord> generate_synthetic_logs(const SimScenario& sc, std::uint64_t seed) {
  validate_scenario(sc);
  std::map<std::string, const SimConcept*> concepts;
  for (const auto& c : sc.concepts) concepts[c.id] = &c;
  std::mt19937_64 rng(seed);
  std::vector<QueryLogRecord> out;
  for (std::size_t day = 1; day <= sc.days; ++day) {
    const Date date = sc.start_date.plus_days(static_cast<std::int64_t>(day) - 1);
    for (const auto& in : sc.instances) {
      auto [sd, cd] = distributions_on(sc, in, day);
      for (std::size_t k = 0; k < in.searches_per_day; ++k) {
        const auto* c = concepts.at(draw(sd, rng()));
        QueryLogRecord r;
        r.query = in.text + " " + c->key_entity;
        r.date = date;
        out.push_back(std::move(r));
      }
      for (std::size_t k = 0; k < in.clicks_per_day; ++k) {
        const auto* c = concepts.at(draw(cd, rng()));
        QueryLogRecord r;
        r.query = in.text;
        r.clicked_docs.push_back({in.text + " " + c->text, 1});
        r.clicked_concept_tag = c->text;
        r.date = date;
        out.push_back(std::move(r));
      }
    }
  }
  return out;
}

TaxonomySnapshot scenario_snapshot(const SimScenario& sc) {
  TaxonomySnapshot s;
  s.version = 1;
  s.date = sc.start_date.plus_days(-1);
  for (const auto& c : sc.concepts) {
    if (c.level < 1 || c.level > 3) throw Error("scenario: concept level must be 1, 2 or 3");
    s.nodes[c.id] = TaxonomyNode{c.id, c.text, static_cast<Level>(c.level), c.in_M, false, c.key_entity};
  }
  for (const auto& in : sc.instances) {
    s.nodes[in.id] = TaxonomyNode{in.id, in.text, Level::instance, false, false, std::nullopt};
    for (const auto& c : in.concepts) {
      IsAEdge e;
      e.child = in.id;
      e.parent = c;
      e.sources.insert(EdgeSource::bootstrap);
      s.edges[{in.id, c}] = std::move(e);
    }
  }
  return s;
}

}  // namespace conceptforge
