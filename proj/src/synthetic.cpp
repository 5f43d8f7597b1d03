#include "agglomer/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>

#include "agglomer/csv.hpp"
#include "agglomer/error.hpp"
#include "agglomer/specialization.hpp"

namespace agglomer {

namespace {

// Uniform draws built directly on the engine output so the stream does not
// depend on the standard library's distribution implementations.
class Draws {
 public:
  explicit Draws(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return uniform() < p; }
  int integer(int lo, int hi) { return lo + static_cast<int>(uniform() * (hi - lo + 1)); }

 private:
  std::mt19937_64 engine_;
};

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

using IntMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

BinaryMatrix realized(const Eigen::MatrixXd& counts) {
  if (!(counts.sum() > 0.0)) return BinaryMatrix::Zero(counts.rows(), counts.cols());
  return binarize(rca_ratio(counts, expected_naive(counts))).cells;
}

std::string code(const char* prefix, int i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*d", prefix, width, i);
  return buf;
}

}  // namespace

Corpus generate_synthetic(const SyntheticOptions& o) {
  if (o.regions < 3 || o.occupations < 2 || o.categories < 1 || o.broad_categories < 1 || o.categories < o.broad_categories) {
    throw validation_error("InvalidOptions", "synthetic corpus needs at least 3 regions, 2 occupations and one category per broad category");
  }
  Draws rng(o.seed);
  const int nr = o.regions;
  const int nk = o.occupations;

  std::vector<RegionRecord> regions;
  for (int i = 0; i < nr; ++i) {
    regions.push_back({code("R", i + 1, 3), "Region " + std::to_string(i + 1), code("C", i % 8 + 1, 1),
                       36.0 + 24.0 * rng.uniform(), -9.0 + 38.0 * rng.uniform()});
  }
  std::map<std::string, TaxonomyEntry> taxonomy;
  for (int k = 0; k < nk; ++k) {
    const int c = k % o.categories;
    taxonomy.emplace(code("occ", k + 1, 2), TaxonomyEntry{code("cat", c + 1, 2), code("broad", c % o.broad_categories + 1, 1)});
  }

  Corpus corpus;
  corpus.taxonomy = Taxonomy(taxonomy);
  corpus.regions = RegionRegistry(regions);
  const auto& occ = corpus.taxonomy.occupations();
  const auto& reg = corpus.regions.records();

  std::vector<double> base_pop(nr);
  for (int i = 0; i < nr; ++i) base_pop[i] = std::exp(9.0 + 2.0 * rng.uniform());

  BinaryMatrix births_prev, immi_prev;
  int serial = 0;
  const double entry_base = logit(o.base_entry);
  for (int t = kFirstCentury; t <= kLastCentury; ++t) {
    // Target births specialization.
    BinaryMatrix target(nr, nk);
    for (int i = 0; i < nr; ++i) {
      for (int k = 0; k < nk; ++k) {
        if (t == kFirstCentury) {
          target(i, k) = rng.bernoulli(o.initial_share);
        } else if (births_prev(i, k) == 0) {
          target(i, k) = rng.bernoulli(logistic(entry_base + o.entry_slope * immi_prev(i, k)));
        } else {
          target(i, k) = rng.bernoulli(o.base_exit) ? 0 : 1;
        }
      }
    }
    // Target immigrant specialization, independent of everything else.
    BinaryMatrix immi_target(nr, nk);
    for (int i = 0; i < nr; ++i) {
      for (int k = 0; k < nk; ++k) immi_target(i, k) = rng.bernoulli(o.immigrant_share);
    }

    // Immigrant moves (origin, destination, occupation).
    std::vector<std::vector<std::vector<int>>> origins(nr, std::vector<std::vector<int>>(nk));
    auto draw_origin = [&](int dest, int k) {
      std::vector<int> pool;
      for (int j = 0; j < nr; ++j) {
        if (j != dest && target(j, k)) pool.push_back(j);
      }
      if (pool.empty()) {
        int j = rng.integer(0, nr - 2);
        return j >= dest ? j + 1 : j;
      }
      return pool[static_cast<std::size_t>(rng.integer(0, static_cast<int>(pool.size()) - 1))];
    };
    for (int i = 0; i < nr; ++i) {
      for (int k = 0; k < nk; ++k) {
        const int n = immi_target(i, k) ? rng.integer(4, 8) : (rng.bernoulli(0.3) ? 1 : 0);
        for (int m = 0; m < n; ++m) origins[i][k].push_back(draw_origin(i, k));
      }
    }
    auto immi_counts = [&] {
      Eigen::MatrixXd c(nr, nk);
      for (int i = 0; i < nr; ++i) {
        for (int k = 0; k < nk; ++k) c(i, k) = static_cast<double>(origins[i][k].size());
      }
      return c;
    };
    for (int round = 0; round < 100; ++round) {
      const BinaryMatrix m = realized(immi_counts());
      if (m == immi_target) break;
      for (int i = 0; i < nr; ++i) {
        for (int k = 0; k < nk; ++k) {
          if (immi_target(i, k) && !m(i, k)) origins[i][k].push_back(draw_origin(i, k));
          if (!immi_target(i, k) && m(i, k) && !origins[i][k].empty()) origins[i][k].pop_back();
        }
      }
    }
    Eigen::MatrixXd emigrants = Eigen::MatrixXd::Zero(nr, nk);
    for (int i = 0; i < nr; ++i) {
      for (int k = 0; k < nk; ++k) {
        for (int j : origins[i][k]) emigrants(j, k) += 1.0;
      }
    }

    // Stayers, adjusted until births specialization matches the target.
    IntMatrix stayers(nr, nk);
    for (int i = 0; i < nr; ++i) {
      for (int k = 0; k < nk; ++k) stayers(i, k) = target(i, k) ? rng.integer(10, 16) : (rng.bernoulli(0.5) ? 1 : 0);
    }
    for (int round = 0; round < 200; ++round) {
      const BinaryMatrix m = realized(stayers.cast<double>() + emigrants);
      if (m == target) break;
      for (int i = 0; i < nr; ++i) {
        for (int k = 0; k < nk; ++k) {
          if (target(i, k) && !m(i, k)) stayers(i, k) += 2;
          if (!target(i, k) && m(i, k) && stayers(i, k) > 0) stayers(i, k) -= 1;
        }
      }
    }

    const int century_start = (t - 1) * 100;
    auto add = [&](int birth, int death, int k) {
      Biography b;
      b.id = code("p", ++serial, 7);
      b.occupation = occ[static_cast<std::size_t>(k)];
      b.birth_year = century_start + rng.integer(0, 99);
      b.birth_region = reg[static_cast<std::size_t>(birth)].region_code;
      b.death_year = b.birth_year + 60;
      b.death_region = reg[static_cast<std::size_t>(death)].region_code;
      corpus.biographies.push_back(std::move(b));
    };
    for (int i = 0; i < nr; ++i) {
      for (int k = 0; k < nk; ++k) {
        for (int s = 0; s < stayers(i, k); ++s) add(i, i, k);
        for (int j : origins[i][k]) add(j, i, k);
      }
    }
    for (int i = 0; i < nr; ++i) {
      const double growth = std::exp(0.15 * (t - kFirstCentury) + 0.2 * (rng.uniform() - 0.5));
      corpus.population.push_back({reg[static_cast<std::size_t>(i)].region_code, Century{t}, std::round(base_pop[i] * growth)});
    }

    births_prev = realized(stayers.cast<double>() + emigrants);
    immi_prev = realized(immi_counts());
  }
  corpus.report.rows_read = corpus.biographies.size();
  return corpus;
}

void write_synthetic(const Corpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw validation_error("WriteFailed", "cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open("biographies.csv");
    csv::write_row(out, {"id", "occupation", "birth_year", "birth_region", "death_year", "death_region"});
    for (const auto& b : corpus.biographies) {
      csv::write_row(out, {b.id, b.occupation, std::to_string(b.birth_year), b.birth_region.value_or(""),
                           b.death_year ? std::to_string(*b.death_year) : "", b.death_region.value_or("")});
    }
  }
  {
    auto out = open("taxonomy.csv");
    csv::write_row(out, {"occupation", "category", "broad_category"});
    for (const auto& o : corpus.taxonomy.occupations()) {
      const auto& e = corpus.taxonomy.at(o);
      csv::write_row(out, {o, e.category, e.broad_category});
    }
  }
  {
    auto out = open("regions.csv");
    csv::write_row(out, {"region_code", "name", "country", "centroid_lat", "centroid_lon"});
    for (const auto& r : corpus.regions.records()) {
      csv::write_row(out, {r.region_code, r.name, r.country, csv::format_double(r.centroid_lat), csv::format_double(r.centroid_lon)});
    }
  }
  auto out = open("population.csv");
  csv::write_row(out, {"region_code", "century", "population"});
  for (const auto& p : corpus.population) {
    csv::write_row(out, {p.region_code, std::to_string(p.century.value), csv::format_double(p.population)});
  }
}

}  // namespace agglomer
