#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace agglomer {

// Roles an individual can play relative to a region. Locals are the strict
// born-and-died-here subset used only to validate the births proxy.
enum class Role : int { Births = 0, Deaths = 1, Immi = 2, Emi = 3, Locals = 4 };
inline constexpr int kRoleCount = 5;

std::string_view role_name(Role role);
Role parse_role(std::string_view name);

// Century index 11..20 (11th through 20th century), anchored at birth year.
struct Century {
  int value = 0;

  friend auto operator<=>(const Century&, const Century&) = default;
};

inline constexpr int kFirstCentury = 11;
inline constexpr int kLastCentury = 20;
inline constexpr int kCenturyCount = kLastCentury - kFirstCentury + 1;

// Throws OutOfRange for years outside [1000, 1999].
Century assign_century(int birth_year);

struct Biography {
  std::string id;
  std::string occupation;
  int birth_year = 0;
  std::optional<std::string> birth_region;
  std::optional<int> death_year;
  std::optional<std::string> death_region;
};

struct TaxonomyEntry {
  std::string category;
  std::string broad_category;
};

// occupation -> (category, broad category). Occupations are kept in sorted
// order; that order is the occupation index used by every matrix.
class Taxonomy {
 public:
  Taxonomy() = default;
  // Validates totality and that each category sits under one broad category.
  explicit Taxonomy(std::map<std::string, TaxonomyEntry> entries);

  bool contains(std::string_view occupation) const;
  const TaxonomyEntry& at(std::string_view occupation) const;
  const std::vector<std::string>& occupations() const { return occupations_; }
  int index_of(std::string_view occupation) const;  // -1 if absent
  std::size_t size() const { return occupations_.size(); }

 private:
  std::map<std::string, TaxonomyEntry, std::less<>> entries_;
  std::vector<std::string> occupations_;
};

struct RegionRecord {
  std::string region_code;
  std::string name;
  std::string country;
  double centroid_lat = 0.0;
  double centroid_lon = 0.0;
};

// Regions sorted by code; position is the region index.
class RegionRegistry {
 public:
  RegionRegistry() = default;
  explicit RegionRegistry(std::vector<RegionRecord> records);

  const std::vector<RegionRecord>& records() const { return records_; }
  const RegionRecord& at(std::size_t index) const { return records_.at(index); }
  int index_of(std::string_view code) const;  // -1 if absent
  std::size_t size() const { return records_.size(); }

 private:
  std::vector<RegionRecord> records_;
  std::map<std::string, int, std::less<>> index_;
};

struct PopulationRecord {
  std::string region_code;
  Century century;
  double population = 0.0;
};

// Returns the region with minimal great-circle distance to (lat, lon);
// ties go to the lexicographically smallest code.
std::string nearest_centroid_geocode(double lat, double lon, const RegionRegistry& registry);

struct MobilityRecord {
  std::string id;
  Century century;
  std::optional<std::string> birth_region;
  std::optional<std::string> death_region;

  bool is_local_birthplace() const { return birth_region.has_value(); }
  bool is_migrant() const { return birth_region && death_region && *birth_region != *death_region; }
  bool stayed() const { return birth_region && death_region && *birth_region == *death_region; }
};

// Throws MissingRegion if both regions are absent.
MobilityRecord classify_mobility(const Biography& b);

struct IngestReport {
  std::size_t rows_read = 0;
  std::size_t excluded_missing_birth_year = 0;
  std::size_t excluded_out_of_range = 0;
  std::size_t dropped_companion = 0;
  std::size_t geocoded = 0;
  std::vector<std::string> warnings;
};

struct Corpus {
  Taxonomy taxonomy;
  RegionRegistry regions;
  std::vector<PopulationRecord> population;
  std::vector<Biography> biographies;  // validated, in input order
  IngestReport report;

  // Population at the start of a century, if known.
  std::optional<double> population_of(std::string_view region_code, Century century) const;
};

struct IngestOptions {
  bool geocode_nearest = false;
};

struct IngestPaths {
  std::string biographies;
  std::string taxonomy;
  std::string regions;
  std::optional<std::string> population;
};

Taxonomy read_taxonomy(std::istream& in);
RegionRegistry read_regions(std::istream& in);
std::vector<PopulationRecord> read_population(std::istream& in);

// Validates and filters biographies against the taxonomy and registry.
Corpus ingest(std::istream& biographies, Taxonomy taxonomy, RegionRegistry regions,
              std::vector<PopulationRecord> population, const IngestOptions& options = {});
Corpus ingest_files(const IngestPaths& paths, const IngestOptions& options = {});

void save_binary(const Corpus& corpus, std::ostream& out);
Corpus load_binary(std::istream& in);
void save_json(const Corpus& corpus, std::ostream& out);
Corpus load_corpus_file(const std::string& path);

// Integer counts N[i, k, t, role]. Immutable after tabulation.
class CountTensor {
 public:
  CountTensor(std::vector<std::string> regions, std::vector<std::string> occupations);

  std::size_t n_regions() const { return regions_.size(); }
  std::size_t n_occupations() const { return occupations_.size(); }
  const std::vector<std::string>& regions() const { return regions_; }
  const std::vector<std::string>& occupations() const { return occupations_; }

  std::int64_t at(std::size_t region, std::size_t occupation, Century t, Role role) const;
  void add(std::size_t region, std::size_t occupation, Century t, Role role, std::int64_t n = 1);

  // Full region x occupation slice as doubles.
  Eigen::MatrixXd matrix(Century t, Role role) const;
  std::int64_t total(Century t, Role role) const;

 private:
  std::size_t offset(std::size_t region, std::size_t occupation, Century t, Role role) const;

  std::vector<std::string> regions_;
  std::vector<std::string> occupations_;
  std::vector<std::int64_t> counts_;
};

CountTensor tabulate_counts(const Corpus& corpus);

// Rows and columns of one (century, role) slice surviving the sparse-cell
// filter, as indices into the tensor's region/occupation lists.
struct KeptIndex {
  std::vector<int> regions;
  std::vector<int> occupations;
};

// Drop cutoff: margins at or below this value are removed.
int sparse_cutoff(Century t);

// Single pass over margins of the (t, role) slice; occupation "companion" is
// always removed. Throws EmptyAfterFilter when nothing survives.
KeptIndex filter_sparse(const CountTensor& counts, Century t, Role role);

}  // namespace agglomer
