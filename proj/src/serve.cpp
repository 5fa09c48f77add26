#include "conceptforge/serve.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <set>

namespace conceptforge {

MatchTrie MatchTrie::build(const TaxonomySnapshot& snap, TokenizerMode mode) {
  MatchTrie m;
  m.mode_ = mode;
  m.snapshot_version_ = snap.version;
  for (const auto& [id, node] : snap.nodes) {
    auto toks = to_tokens(node.text.empty() ? id : node.text, mode);
    if (!toks.empty()) m.trie_.insert(toks, id);
  }
  return m;
}

std::vector<QueryMatch> tag_tokens(const std::vector<std::string>& tokens, const MatchTrie& trie) {
  std::vector<QueryMatch> out;
  for (auto& m : trie.trie().forward_max_match(tokens)) out.push_back({m.span, std::move(m.payload)});
  return out;
}

std::vector<QueryMatch> tag_query(std::string_view q, const MatchTrie& trie) {
  return tag_tokens(to_tokens(q, trie.mode()), trie);
}

const IsAEdge* best_parent(const TaxonomySnapshot& snap, const std::string& child) {
  const IsAEdge* best = nullptr;
  for (const auto* e : snap.parents_of(child)) {
    const auto* p = snap.node(e->parent);
    if (!p || !p->is_concept()) continue;
    // parents_of is ordered by parent id, so strict > keeps the smallest id on ties.
    if (!best || e->current_score() > best->current_score()) best = e;
  }
  return best;
}

std::string rewrite_text(std::string_view s, const TaxonomySnapshot& snap, const MatchTrie& trie, bool all_concepts) {
  std::vector<const IsAEdge*> picks;
  for (const auto& m : tag_query(s, trie)) {
    const auto* n = snap.node(m.node_id);
    if (!n || n->is_concept()) continue;
    if (const auto* e = best_parent(snap, m.node_id)) picks.push_back(e);
  }
  if (picks.empty()) return std::string(s);
  std::string out(s);
  if (!all_concepts) {
    const IsAEdge* best = picks.front();
    for (const auto* e : picks)
      if (e->current_score() > best->current_score() ||
          (e->current_score() == best->current_score() && e->parent < best->parent))
        best = e;
    return out + " " + snap.node(best->parent)->text;
  }
  std::set<std::string> used;
  for (const auto* e : picks)
    if (used.insert(e->parent).second) out += " " + snap.node(e->parent)->text;
  return out;
}

ReverseIndex build_reverse_index(const TaxonomySnapshot& snap) {
  ReverseIndex idx;
  idx.snapshot_version = snap.version;
  for (const auto& [key, e] : snap.edges) {
    const auto* c = snap.node(e.child);
    const auto* p = snap.node(e.parent);
    if ((c && c->is_concept()) || !p || !p->is_concept()) continue;
    idx.entries[e.parent].push_back({e.child, e.current_score()});
  }
  for (auto& [concept_id, list] : idx.entries)
    std::sort(list.begin(), list.end(), [](const IndexEntry& a, const IndexEntry& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.instance < b.instance;
    });
  return idx;
}

LookupResult lookup_instances(const ReverseIndex& index, const std::string& concept_id, std::size_t k) {
  if (k < 1) throw Error("lookup_instances: k must be >= 1");
  LookupResult r;
  auto it = index.entries.find(concept_id);
  if (it == index.entries.end()) return r;
  r.found = true;
  for (std::size_t i = 0; i < std::min(k, it->second.size()); ++i) r.instances.push_back(it->second[i].instance);
  return r;
}

namespace {

constexpr char kMagic[5] = {'C', 'F', 'I', 'D', 'X'};
constexpr std::uint32_t kIndexFormat = 1;

template <typename T>
void put(std::string& out, T v) {
  auto u = std::bit_cast<std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>>(v);
  for (std::size_t i = 0; i < sizeof(T); ++i) out += static_cast<char>((u >> (8 * i)) & 0xFF);
}

void put_str(std::string& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out += s;
}

struct Reader {
  std::string_view data;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > data.size()) throw Error("index file truncated");
  }
  template <typename T>
  T get() {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    need(sizeof(T));
    U u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<U>(static_cast<unsigned char>(data[pos + i])) << (8 * i);
    pos += sizeof(T);
    return std::bit_cast<T>(u);
  }
  std::string get_str() {
    auto n = get<std::uint32_t>();
    need(n);
    std::string s(data.substr(pos, n));
    pos += n;
    return s;
  }
};

}  // namespace

std::string serialize_index(const ReverseIndex& index) {
  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kIndexFormat);
  put<std::uint64_t>(out, index.snapshot_version);
  put<std::uint64_t>(out, index.entries.size());
  for (const auto& [concept_id, list] : index.entries) {
    put_str(out, concept_id);
    put<std::uint64_t>(out, list.size());
    for (const auto& e : list) {
      put_str(out, e.instance);
      put<double>(out, e.score);
    }
  }
  return out;
}

ReverseIndex deserialize_index(std::string_view bytes) {
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
    throw Error("not a conceptforge index file");
  Reader r{bytes, sizeof(kMagic)};
  if (auto v = r.get<std::uint32_t>(); v != kIndexFormat)
    throw Error("unsupported index format version " + std::to_string(v));
  ReverseIndex idx;
  idx.snapshot_version = r.get<std::uint64_t>();
  auto n = r.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < n; ++i) {
    auto concept_id = r.get_str();
    auto m = r.get<std::uint64_t>();
    auto& list = idx.entries[concept_id];
    for (std::uint64_t j = 0; j < m; ++j) {
      auto inst = r.get_str();
      list.push_back({std::move(inst), r.get<double>()});
    }
  }
  if (r.pos != bytes.size()) throw Error("index file has trailing bytes");
  return idx;
}

void save_index(const std::string& path, const ReverseIndex& index) { write_file(path, serialize_index(index)); }

ReverseIndex load_index(const std::string& path) { return deserialize_index(read_file(path)); }

}  // namespace conceptforge
