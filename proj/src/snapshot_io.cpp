#include <json.hpp>

#include "conceptforge/graph.hpp"

namespace conceptforge {

using nlohmann::json;

namespace {

constexpr std::string_view kFormat = "conceptforge-snapshot";
constexpr int kFormatVersion = 1;

constexpr std::pair<EdgeSource, std::string_view> kSourceNames[] = {
    {EdgeSource::bootstrap, "bootstrap"},     {EdgeSource::phrasemine, "phrasemine"},
    {EdgeSource::tagger, "tagger"},           {EdgeSource::expert_rule, "expert-rule"},
    {EdgeSource::inference, "inference"},     {EdgeSource::pinned, "pinned"},
};

}  // namespace

std::string_view edge_source_name(EdgeSource s) {
  for (auto [src, name] : kSourceNames)
    if (src == s) return name;
  return "unknown";
}

EdgeSource parse_edge_source(std::string_view name) {
  for (auto [src, n] : kSourceNames)
    if (n == name) return src;
  throw Error("unknown edge source '" + std::string(name) + "'");
}

std::vector<const IsAEdge*> TaxonomySnapshot::parents_of(const std::string& child) const {
  std::vector<const IsAEdge*> out;
  for (auto it = edges.lower_bound({child, std::string()}); it != edges.end() && it->first.first == child; ++it)
    out.push_back(&it->second);
  return out;
}

std::string snapshot_to_json(const TaxonomySnapshot& snap) {
  json j = json::object();
  j["format"] = kFormat;
  j["format_version"] = kFormatVersion;
  j["version"] = snap.version;
  j["date"] = snap.date ? json(snap.date->str()) : json(nullptr);

  json nodes = json::array();
  for (const auto& [id, n] : snap.nodes) {
    nodes.push_back({{"id", n.id},
                     {"text", n.text},
                     {"level", static_cast<int>(n.level)},
                     {"in_M", n.in_M},
                     {"unambiguous", n.unambiguous},
                     {"key_entity", n.key_entity ? json(*n.key_entity) : json(nullptr)}});
  }
  j["nodes"] = std::move(nodes);

  json edges = json::array();
  for (const auto& [key, e] : snap.edges) {
    json sources = json::array();
    for (auto s : e.sources) sources.push_back(edge_source_name(s));
    json history = json::array();
    for (const auto& p : e.history)
      history.push_back({p.date.str(), p.s_implicit, p.s_explicit, p.s_combined, p.flags});
    edges.push_back({{"child", e.child},
                     {"parent", e.parent},
                     {"prior", e.prior},
                     {"sources", std::move(sources)},
                     {"history", std::move(history)}});
  }
  j["edges"] = std::move(edges);

  json clicks = json::array();
  for (const auto& c : snap.recent_clicks) clicks.push_back({c.date.str(), c.instance, c.concept_id, c.count});
  j["recent_clicks"] = std::move(clicks);
  return j.dump(1);
}

TaxonomySnapshot snapshot_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("snapshot: invalid JSON: ") + e.what());
  }
  if (j.value("format", "") != kFormat) throw Error("snapshot: not a conceptforge snapshot");
  if (j.value("format_version", 0) != kFormatVersion)
    throw Error("snapshot: unsupported format_version");

  TaxonomySnapshot snap;
  try {
    snap.version = j.at("version").get<std::uint64_t>();
    if (!j.at("date").is_null()) snap.date = Date::parse(j.at("date").get<std::string>());
    for (const auto& n : j.at("nodes")) {
      TaxonomyNode node;
      node.id = n.at("id").get<std::string>();
      node.text = n.at("text").get<std::string>();
      int level = n.at("level").get<int>();
      if (level < 0 || level > 3) throw Error("snapshot: node level out of range for '" + node.id + "'");
      node.level = static_cast<Level>(level);
      node.in_M = n.value("in_M", false);
      node.unambiguous = n.value("unambiguous", false);
      if (n.contains("key_entity") && !n.at("key_entity").is_null())
        node.key_entity = n.at("key_entity").get<std::string>();
      auto id = node.id;
      if (!snap.nodes.emplace(id, std::move(node)).second) throw Error("snapshot: duplicate node '" + id + "'");
    }
    for (const auto& e : j.at("edges")) {
      IsAEdge edge;
      edge.child = e.at("child").get<std::string>();
      edge.parent = e.at("parent").get<std::string>();
      edge.prior = e.value("prior", 0.0);
      for (const auto& s : e.at("sources")) edge.sources.insert(parse_edge_source(s.get<std::string>()));
      for (const auto& h : e.at("history")) {
        ScorePoint p;
        p.date = Date::parse(h.at(0).get<std::string>());
        p.s_implicit = h.at(1).get<double>();
        p.s_explicit = h.at(2).get<double>();
        p.s_combined = h.at(3).get<double>();
        p.flags = h.at(4).get<std::uint32_t>();
        if (!edge.history.empty() && !(edge.history.back().date < p.date))
          throw Error("snapshot: edge history dates not strictly increasing for " + edge.child + " -> " + edge.parent);
        edge.history.push_back(p);
      }
      EdgeKey key{edge.child, edge.parent};
      if (!snap.edges.emplace(key, std::move(edge)).second)
        throw Error("snapshot: duplicate edge " + key.first + " -> " + key.second);
    }
    if (j.contains("recent_clicks")) {
      for (const auto& c : j.at("recent_clicks"))
        snap.recent_clicks.push_back({Date::parse(c.at(0).get<std::string>()), c.at(1).get<std::string>(),
                                      c.at(2).get<std::string>(), c.at(3).get<std::int64_t>()});
    }
  } catch (const json::exception& e) {
    throw Error(std::string("snapshot: malformed field: ") + e.what());
  }
  return snap;
}

TaxonomySnapshot load_snapshot(const std::string& path) { return snapshot_from_json(read_file(path)); }

void save_snapshot(const std::string& path, const TaxonomySnapshot& snap) {
  write_file(path, snapshot_to_json(snap) + "\n");
}

}  // namespace conceptforge
