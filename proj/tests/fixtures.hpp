#pragma once

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "agglomer/corpus.hpp"

namespace fixtures {

struct Person {
  std::string occupation;
  int birth_year;
  std::string birth_region;
  std::string death_region;
};

inline agglomer::Corpus make_corpus(const std::vector<Person>& people, std::vector<agglomer::RegionRecord> regions,
                                    std::map<std::string, agglomer::TaxonomyEntry> taxonomy) {
  agglomer::Corpus c;
  c.taxonomy = agglomer::Taxonomy(std::move(taxonomy));
  c.regions = agglomer::RegionRegistry(std::move(regions));
  int id = 0;
  for (const auto& p : people) {
    agglomer::Biography b;
    b.id = "p" + std::to_string(++id);
    b.occupation = p.occupation;
    b.birth_year = p.birth_year;
    if (!p.birth_region.empty()) b.birth_region = p.birth_region;
    if (!p.death_region.empty()) {
      b.death_region = p.death_region;
      b.death_year = p.birth_year + 50;
    }
    c.biographies.push_back(std::move(b));
  }
  return c;
}

// Adds n stayers of one occupation born in `year` in `region`.
inline void stayers(std::vector<Person>& people, const std::string& region, const std::string& occupation, int year, int n) {
  for (int i = 0; i < n; ++i) people.push_back({occupation, year, region, region});
}

inline std::vector<agglomer::RegionRecord> three_regions() {
  return {{"A", "Alpha", "X", 48.0, 2.0}, {"B", "Beta", "X", 50.0, 4.0}, {"C", "Gamma", "Y", 45.0, 9.0}};
}

inline std::map<std::string, agglomer::TaxonomyEntry> three_occupations() {
  return {{"x", {"cx", "b1"}}, {"y", {"cy", "b1"}}, {"z", {"cz", "b2"}}};
}

}  // namespace fixtures
