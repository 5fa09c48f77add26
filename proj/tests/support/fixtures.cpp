#include "fixtures.hpp"

#include <random>

#include "conceptforge/taxonomy.hpp"

namespace fixture {

namespace cf = conceptforge;

std::string data_path(const std::string& rel) { return std::string(CONCEPTFORGE_DATA_DIR) + "/" + rel; }

std::string random_word(std::uint64_t& state) {
  static const char* onset[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "sh", "tr"};
  static const char* vowel[] = {"a", "e", "i", "o", "u", "ai", "ou"};
  std::mt19937_64 rng(state);
  state = rng();
  std::string w;
  auto syll = 2 + rng() % 3;
  for (std::size_t i = 0; i < syll; ++i) {
    w += onset[rng() % std::size(onset)];
    w += vowel[rng() % std::size(vowel)];
  }
  return w;
}

cf::TaxonomySnapshot synthetic_snapshot(std::size_t num_edges, std::size_t num_concepts, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uint64_t state = seed ^ 0x9e3779b97f4a7c15ULL;
  std::set<std::string> used;
  auto fresh = [&](std::size_t words) {
    for (;;) {
      std::string t;
      for (std::size_t i = 0; i < words; ++i) t += (i ? " " : "") + random_word(state);
      if (used.insert(t).second) return t;
    }
  };

  cf::TaxonomySnapshot snap;
  snap.version = 1;
  snap.date = cf::Date::parse("2024-01-01");
  std::vector<std::string> concepts;
  for (std::size_t i = 0; i < num_concepts; ++i) {
    auto t = fresh(2 + rng() % 2);
    snap.nodes[t] = {t, t, cf::Level::level3, false, false, std::nullopt};
    concepts.push_back(t);
  }
  std::size_t made = 0;
  while (made < num_edges) {
    auto inst = fresh(1 + rng() % 3);
    snap.nodes[inst] = {inst, inst, cf::Level::instance, false, false, std::nullopt};
    auto fanout = std::min<std::size_t>(1 + rng() % 3, num_edges - made);
    std::set<std::string> parents;
    while (parents.size() < fanout) parents.insert(concepts[rng() % concepts.size()]);
    for (const auto& p : parents) {
      cf::IsAEdge e;
      e.child = inst;
      e.parent = p;
      e.prior = static_cast<double>(made + 1) / static_cast<double>(num_edges + 1);
      e.sources = {cf::EdgeSource::bootstrap};
      snap.edges[{inst, p}] = e;
      ++made;
    }
  }
  return snap;
}

Membership random_membership(std::size_t num_instances, std::size_t n3, std::size_t n2, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Membership m;
  for (std::size_t i = 0; i < n3; ++i) m.level3.insert("fine " + std::to_string(i));
  for (std::size_t i = 0; i < n2; ++i) m.level2.insert("coarse " + std::to_string(i));
  std::vector<std::string> l3(m.level3.begin(), m.level3.end()), l2(m.level2.begin(), m.level2.end());
  // The last level-3 concept never receives instances.
  l3.pop_back();
  std::bernoulli_distribution coin(0.35);
  for (std::size_t i = 0; i < num_instances; ++i) {
    auto& s = m.of["inst " + std::to_string(i)];
    auto c = l3[rng() % l3.size()];
    s.insert(c);
    // correlated coarse parent so both sides of the threshold appear
    auto idx = std::stoul(c.substr(5)) % l2.size();
    if (rng() % 10 < 7) s.insert(l2[idx]);
    if (coin(rng)) s.insert(l2[rng() % l2.size()]);
    if (coin(rng)) s.insert(l3[rng() % l3.size()]);
  }
  return m;
}

cf::SimScenario three_way_scenario(std::size_t days) {
  cf::SimScenario sc;
  sc.start_date = cf::Date::parse("2024-05-01");
  sc.days = days;
  sc.concepts = {{"fruit", "fruit", "juice", 3, false},
                 {"tech company", "tech company", "stock", 3, false},
                 {"phone brand", "phone brand", "case", 3, true}};
  auto all = std::vector<std::string>{"fruit", "tech company", "phone brand"};
  sc.instances = {
      {"apple", "apple", all, 300, 120, {{"fruit", 0.3}, {"tech company", 0.5}, {"phone brand", 0.2}},
       {{"fruit", 0.2}, {"tech company", 0.4}, {"phone brand", 0.4}}},
      {"blackberry", "blackberry", all, 200, 80, {{"fruit", 0.6}, {"tech company", 0.1}, {"phone brand", 0.3}},
       {{"fruit", 0.5}, {"tech company", 0.1}, {"phone brand", 0.4}}},
      {"orange", "orange", {"fruit", "tech company"}, 150, 0, {{"fruit", 0.8}, {"tech company", 0.2}},
       {{"fruit", 0.9}, {"tech company", 0.1}}},
      {"pixel", "pixel", {"tech company", "phone brand"}, 100, 40, {{"tech company", 0.3}, {"phone brand", 0.7}},
       {{"tech company", 0.2}, {"phone brand", 0.8}}},
  };
  return sc;
}

}  // namespace fixture
