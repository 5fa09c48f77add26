#pragma once
// Serving-side helpers over a snapshot: dictionary tagging, text rewriting and
// the concept -> instance reverse index.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "conceptforge/corpus.hpp"
#include "conceptforge/graph.hpp"
#include "conceptforge/trie.hpp"

namespace conceptforge {

class MatchTrie {
 public:
  /// Every node surface form once; on a token-level collision the smallest id is kept.
  static MatchTrie build(const TaxonomySnapshot& snap, TokenizerMode mode = TokenizerMode::whitespace);

  const TokenTrie<std::string>& trie() const { return trie_; }
  TokenizerMode mode() const { return mode_; }
  std::size_t size() const { return trie_.size(); }
  std::uint64_t snapshot_version() const { return snapshot_version_; }

 private:
  TokenTrie<std::string> trie_;
  TokenizerMode mode_ = TokenizerMode::whitespace;
  std::uint64_t snapshot_version_ = 0;
};

struct QueryMatch {
  Span span;  // token indices
  std::string node_id;
  bool operator==(const QueryMatch&) const = default;
};

/// Greedy left-to-right longest match; spans are disjoint and sorted.
std::vector<QueryMatch> tag_query(std::string_view q, const MatchTrie& trie);
std::vector<QueryMatch> tag_tokens(const std::vector<std::string>& tokens, const MatchTrie& trie);

/// Best live parent of a node: highest current score, ties to the smallest id.
const IsAEdge* best_parent(const TaxonomySnapshot& snap, const std::string& child);

/// "s c" with c the best parent over all matched instances; s unchanged when
/// none has a parent. all_concepts appends each matched instance's best parent
/// once, in match order.
std::string rewrite_text(std::string_view s, const TaxonomySnapshot& snap, const MatchTrie& trie,
                         bool all_concepts = false);

struct IndexEntry {
  std::string instance;
  double score = 0.0;
  bool operator==(const IndexEntry&) const = default;
};

struct ReverseIndex {
  std::uint64_t snapshot_version = 0;
  std::map<std::string, std::vector<IndexEntry>> entries;  // by descending score, then id
  bool operator==(const ReverseIndex&) const = default;
};

ReverseIndex build_reverse_index(const TaxonomySnapshot& snap);

struct LookupResult {
  std::vector<std::string> instances;
  bool found = false;
};

/// Top-k prefix of the entry. Throws Error when k < 1.
LookupResult lookup_instances(const ReverseIndex& index, const std::string& concept_id, std::size_t k);

/// Little-endian binary: magic "CFIDX", format version, snapshot version, entries.
std::string serialize_index(const ReverseIndex& index);
ReverseIndex deserialize_index(std::string_view bytes);
void save_index(const std::string& path, const ReverseIndex& index);
ReverseIndex load_index(const std::string& path);

}  // namespace conceptforge
