#include "agglomer/concentration.hpp"

#include <cmath>

#include "agglomer/error.hpp"

namespace agglomer {

double entropy(std::span<const std::int64_t> counts) {
  std::int64_t total = 0;
  for (auto c : counts) {
    if (c < 0) throw validation_error("NegativeCount", "entropy requires non-negative counts");
    total += c;
  }
  if (total == 0) throw validation_error("EmptyDistribution", "entropy of an all-zero distribution");
  const double n = static_cast<double>(total);
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h < 0.0 ? 0.0 : h;
}

double effective_places(double entropy_bits) {
  if (entropy_bits < 0.0) throw validation_error("OutOfRange", "entropy must be non-negative");
  return std::exp2(entropy_bits);
}

namespace {

std::vector<std::int64_t> region_totals(const CountTensor& counts, Century t, Role role) {
  std::vector<std::int64_t> totals(counts.n_regions(), 0);
  for (std::size_t i = 0; i < counts.n_regions(); ++i) {
    for (std::size_t k = 0; k < counts.n_occupations(); ++k) totals[i] += counts.at(i, k, t, role);
  }
  return totals;
}

bool any_positive(const std::vector<std::int64_t>& v) {
  for (auto x : v) {
    if (x > 0) return true;
  }
  return false;
}

}  // namespace

std::vector<ConcentrationRow> concentration_series(const CountTensor& counts) {
  std::vector<ConcentrationRow> rows;
  for (int c = kFirstCentury; c <= kLastCentury; ++c) {
    const Century t{c};
    const auto births = region_totals(counts, t, Role::Births);
    const auto deaths = region_totals(counts, t, Role::Deaths);
    if (!any_positive(births) || !any_positive(deaths)) continue;
    ConcentrationRow row{t};
    row.entropy_births = entropy(births);
    row.effective_births = effective_places(row.entropy_births);
    row.entropy_deaths = entropy(deaths);
    row.effective_deaths = effective_places(row.entropy_deaths);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace agglomer
