#pragma once
// Four-level instance/concept graph: node and edge types plus the snapshot value.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "conceptforge/common.hpp"

namespace conceptforge {

enum class Level : int { instance = 0, level1 = 1, level2 = 2, level3 = 3 };

struct TaxonomyNode {
  std::string id;
  std::string text;
  Level level = Level::instance;
  bool in_M = false;         // member of the special-behavior domain subset
  bool unambiguous = false;  // eligible for heat re-weighting
  std::optional<std::string> key_entity;

  bool is_concept() const { return level != Level::instance; }
  bool operator==(const TaxonomyNode&) const = default;
};

enum class EdgeSource { bootstrap, phrasemine, tagger, expert_rule, inference, pinned };

std::string_view edge_source_name(EdgeSource s);
EdgeSource parse_edge_source(std::string_view name);

namespace score_flags {
inline constexpr std::uint32_t no_implicit = 1u << 0;
inline constexpr std::uint32_t no_explicit = 1u << 1;
inline constexpr std::uint32_t log_clamped = 1u << 2;
inline constexpr std::uint32_t reweighted = 1u << 3;
inline constexpr std::uint32_t reweight_skipped = 1u << 4;
inline constexpr std::uint32_t structural = 1u << 5;
}  // namespace score_flags

struct ScorePoint {
  Date date;
  double s_implicit = 0.0;
  double s_explicit = 0.0;
  double s_combined = 0.0;
  std::uint32_t flags = 0;

  bool operator==(const ScorePoint&) const = default;
};

struct IsAEdge {
  std::string child;
  std::string parent;
  double prior = 0.0;  // mining-time confidence, used until the first daily score exists
  std::vector<ScorePoint> history;
  std::set<EdgeSource> sources;

  double current_score() const { return history.empty() ? prior : history.back().s_combined; }
  bool operator==(const IsAEdge&) const = default;
};

using EdgeKey = std::pair<std::string, std::string>;  // (child, parent)

struct ClickAggregate {
  Date date;
  std::string instance;
  std::string concept_id;
  std::int64_t count = 0;

  bool operator==(const ClickAggregate&) const = default;
};

/// Immutable-by-convention dated state of the taxonomy. Updates produce new values.
struct TaxonomySnapshot {
  std::uint64_t version = 0;
  std::optional<Date> date;
  std::map<std::string, TaxonomyNode> nodes;
  std::map<EdgeKey, IsAEdge> edges;
  std::vector<ClickAggregate> recent_clicks;  // trailing explicit-evidence window

  bool operator==(const TaxonomySnapshot&) const = default;

  const TaxonomyNode* node(const std::string& id) const {
    auto it = nodes.find(id);
    return it == nodes.end() ? nullptr : &it->second;
  }
  /// Parent edges of a child, ordered by parent id.
  std::vector<const IsAEdge*> parents_of(const std::string& child) const;
};

std::string snapshot_to_json(const TaxonomySnapshot& snap);
TaxonomySnapshot snapshot_from_json(std::string_view text);
TaxonomySnapshot load_snapshot(const std::string& path);
void save_snapshot(const std::string& path, const TaxonomySnapshot& snap);

}  // namespace conceptforge
