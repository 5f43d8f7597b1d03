#pragma once

#include <cstdint>
#include <filesystem>

#include "agglomer/corpus.hpp"

namespace agglomer {

// Corpus with a planted entry process: a region that is specialized in
// immigrants of activity k at t-1 enters k at t with log-odds raised by
// entry_slope. Exits and immigrant specialization are independent noise.
struct SyntheticOptions {
  std::uint64_t seed = 1;
  int regions = 100;
  int occupations = 60;
  int categories = 10;
  int broad_categories = 2;
  double entry_slope = 0.3;
  double base_entry = 0.15;
  double base_exit = 0.5;
  double immigrant_share = 0.3;
  double initial_share = 0.3;
};

Corpus generate_synthetic(const SyntheticOptions& options);

// biographies.csv, taxonomy.csv, regions.csv, population.csv.
void write_synthetic(const Corpus& corpus, const std::filesystem::path& dir);

}  // namespace agglomer
