#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "agglomer/corpus.hpp"

namespace agglomer {

// Shannon entropy in bits of the distribution proportional to counts.
// Throws EmptyDistribution if every count is zero.
double entropy(std::span<const std::int64_t> counts);

// Equivalent number of equally common places, 2^H.
double effective_places(double entropy_bits);

struct ConcentrationRow {
  Century century;
  double entropy_births = 0.0;
  double effective_births = 0.0;
  double entropy_deaths = 0.0;
  double effective_deaths = 0.0;
};

// One row per century with at least one birth and one death; computed on
// unfiltered region totals. Centuries lacking either side are skipped.
std::vector<ConcentrationRow> concentration_series(const CountTensor& counts);

}  // namespace agglomer
