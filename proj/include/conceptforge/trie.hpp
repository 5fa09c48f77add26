#pragma once
// Token-level prefix trie with greedy left-to-right longest matching.

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "conceptforge/corpus.hpp"

namespace conceptforge {

template <typename Payload>
class TokenTrie {
 public:
  struct Match {
    Span span;  // token indices [begin, end)
    Payload payload;
  };

  /// Returns false (and keeps the existing payload) when the key is already present.
  bool insert(std::span<const std::string> key, Payload payload) {
    if (key.empty()) return false;
    Node* node = &root_;
    for (const auto& tok : key) {
      auto& child = node->children[tok];
      if (!child) child = std::make_unique<Node>();
      node = child.get();
    }
    if (node->payload) return false;
    node->payload = std::move(payload);
    ++size_;
    return true;
  }

  const Payload* find(std::span<const std::string> key) const {
    const Node* node = &root_;
    for (const auto& tok : key) {
      auto it = node->children.find(tok);
      if (it == node->children.end()) return nullptr;
      node = it->second.get();
    }
    return node->payload ? &*node->payload : nullptr;
  }

  /// Longest key starting at `pos`; length 0 when nothing matches.
  std::optional<Match> longest_at(std::span<const std::string> tokens, std::size_t pos) const {
    const Node* node = &root_;
    std::optional<Match> best;
    for (std::size_t i = pos; i < tokens.size(); ++i) {
      auto it = node->children.find(tokens[i]);
      if (it == node->children.end()) break;
      node = it->second.get();
      if (node->payload) best = Match{{pos, i + 1}, *node->payload};
    }
    return best;
  }

  /// Maximum forward matching: non-overlapping, sorted by start.
  std::vector<Match> forward_max_match(std::span<const std::string> tokens) const {
    std::vector<Match> out;
    std::size_t pos = 0;
    while (pos < tokens.size()) {
      if (auto m = longest_at(tokens, pos)) {
        pos = m->span.end;
        out.push_back(std::move(*m));
      } else {
        ++pos;
      }
    }
    return out;
  }

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

 private:
  struct Node {
    std::map<std::string, std::unique_ptr<Node>, std::less<>> children;
    std::optional<Payload> payload;
  };
  Node root_;
  std::size_t size_ = 0;
};

}  // namespace conceptforge
