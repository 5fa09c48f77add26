#pragma once
// Shared generators for tests and the acceptance runner.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "conceptforge/evalsim.hpp"
#include "conceptforge/graph.hpp"

namespace fixture {

std::string data_path(const std::string& rel);

/// Pronounceable random word of 2-4 syllables.
std::string random_word(std::uint64_t& state);

/// Version-1 snapshot with `num_concepts` concepts and `num_edges` instance edges,
/// every node text unique. Edge priors are distinct so parent order is strict.
conceptforge::TaxonomySnapshot synthetic_snapshot(std::size_t num_edges, std::size_t num_concepts, std::uint64_t seed);

struct Membership {
  std::set<std::string> level3, level2;
  std::map<std::string, std::set<std::string>> of;  // instance -> concepts
};

/// Random instance -> concept membership; some level-3 concepts are left empty.
Membership random_membership(std::size_t num_instances, std::size_t n3, std::size_t n2, std::uint64_t seed);

/// Three concepts, four instances, stable distributions; for invariant checks.
conceptforge::SimScenario three_way_scenario(std::size_t days);

}  // namespace fixture
