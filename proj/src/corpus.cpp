#include "agglomer/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "agglomer/csv.hpp"
#include "agglomer/error.hpp"
#include "agglomer/spatial.hpp"

namespace agglomer {

namespace {

constexpr std::string_view kRoleNames[kRoleCount] = {"births", "deaths", "immi", "emi", "locals"};

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_companion(std::string_view occupation) { return lower(occupation) == "companion"; }

std::optional<std::string> optional_field(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return s;
}

int parse_int(const std::string& s, const char* what) {
  int value = 0;
  std::size_t used = 0;
  try {
    value = std::stoi(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw validation_error("BadNumber", std::string("cannot parse ") + what + " '" + s + "'");
  return value;
}

}  // namespace

std::string_view role_name(Role role) { return kRoleNames[static_cast<int>(role)]; }

Role parse_role(std::string_view name) {
  for (int r = 0; r < kRoleCount; ++r) {
    if (kRoleNames[r] == name) return static_cast<Role>(r);
  }
  throw validation_error("UnknownRole", "unknown role '" + std::string(name) + "'");
}

Century assign_century(int birth_year) {
  if (birth_year < 1000 || birth_year > 1999) {
    throw validation_error("OutOfRange", "birth year " + std::to_string(birth_year) + " outside [1000, 1999]");
  }
  return Century{birth_year / 100 + 1};
}

// --- Taxonomy ---------------------------------------------------------------

Taxonomy::Taxonomy(std::map<std::string, TaxonomyEntry> entries) {
  std::map<std::string, std::string> broad_of_category;
  for (auto& [occupation, entry] : entries) {
    if (occupation.empty() || entry.category.empty() || entry.broad_category.empty()) {
      throw validation_error("InvalidTaxonomy", "occupation '" + occupation + "' lacks a category or broad category");
    }
    auto [it, inserted] = broad_of_category.emplace(entry.category, entry.broad_category);
    if (!inserted && it->second != entry.broad_category) {
      throw validation_error("InvalidTaxonomy", "category '" + entry.category + "' appears under broad categories '" +
                                                    it->second + "' and '" + entry.broad_category + "'");
    }
    occupations_.push_back(occupation);
    entries_.emplace(occupation, std::move(entry));
  }
}

bool Taxonomy::contains(std::string_view occupation) const { return entries_.find(occupation) != entries_.end(); }

const TaxonomyEntry& Taxonomy::at(std::string_view occupation) const {
  auto it = entries_.find(occupation);
  if (it == entries_.end()) throw validation_error("UnknownOccupation", "occupation '" + std::string(occupation) + "' not in taxonomy");
  return it->second;
}

int Taxonomy::index_of(std::string_view occupation) const {
  auto it = std::lower_bound(occupations_.begin(), occupations_.end(), occupation);
  if (it == occupations_.end() || *it != occupation) return -1;
  return static_cast<int>(it - occupations_.begin());
}

// --- Regions ----------------------------------------------------------------

RegionRegistry::RegionRegistry(std::vector<RegionRecord> records) : records_(std::move(records)) {
  std::sort(records_.begin(), records_.end(),
            [](const RegionRecord& a, const RegionRecord& b) { return a.region_code < b.region_code; });
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (r.region_code.empty()) throw validation_error("InvalidRegion", "empty region code");
    if (!(std::abs(r.centroid_lat) <= 90.0) || !(std::abs(r.centroid_lon) <= 180.0)) {
      throw validation_error("InvalidRegion", "region '" + r.region_code + "' has coordinates out of range");
    }
    if (!index_.emplace(r.region_code, static_cast<int>(i)).second) {
      throw validation_error("DuplicateRegion", "region code '" + r.region_code + "' appears twice");
    }
  }
}

int RegionRegistry::index_of(std::string_view code) const {
  auto it = index_.find(code);
  return it == index_.end() ? -1 : it->second;
}

std::string nearest_centroid_geocode(double lat, double lon, const RegionRegistry& registry) {
  if (registry.size() == 0) throw validation_error("EmptyRegistry", "cannot geocode against an empty registry");
  const RegionRecord probe{"", "", "", lat, lon};
  std::size_t best = 0;
  double best_distance = haversine_km(probe, registry.at(0));
  // Registry is sorted by code, so strict < keeps the smallest code on ties.
  for (std::size_t i = 1; i < registry.size(); ++i) {
    const double d = haversine_km(probe, registry.at(i));
    if (d < best_distance) {
      best_distance = d;
      best = i;
    }
  }
  return registry.at(best).region_code;
}

// --- Mobility ---------------------------------------------------------------

MobilityRecord classify_mobility(const Biography& b) {
  if (!b.birth_region && !b.death_region) {
    throw validation_error("MissingRegion", "biography '" + b.id + "' has neither birth nor death region");
  }
  return MobilityRecord{b.id, assign_century(b.birth_year), b.birth_region, b.death_region};
}

std::optional<double> Corpus::population_of(std::string_view region_code, Century century) const {
  for (const auto& p : population) {
    if (p.century == century && p.region_code == region_code) return p.population;
  }
  return std::nullopt;
}

// --- Readers ----------------------------------------------------------------

Taxonomy read_taxonomy(std::istream& in) {
  const auto table = csv::read(in);
  const auto occ = table.require("occupation");
  const auto cat = table.require("category");
  const auto broad = table.require("broad_category");
  std::map<std::string, TaxonomyEntry> entries;
  for (const auto& row : table.rows) {
    if (!entries.emplace(row[occ], TaxonomyEntry{row[cat], row[broad]}).second) {
      throw validation_error("InvalidTaxonomy", "occupation '" + row[occ] + "' listed twice");
    }
  }
  return Taxonomy(std::move(entries));
}

RegionRegistry read_regions(std::istream& in) {
  const auto table = csv::read(in);
  const auto code = table.require("region_code");
  const auto name = table.require("name");
  const auto country = table.require("country");
  const auto lat = table.require("centroid_lat");
  const auto lon = table.require("centroid_lon");
  std::vector<RegionRecord> records;
  records.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    records.push_back({row[code], row[name], row[country], csv::parse_double(row[lat]), csv::parse_double(row[lon])});
  }
  return RegionRegistry(std::move(records));
}

std::vector<PopulationRecord> read_population(std::istream& in) {
  const auto table = csv::read(in);
  const auto code = table.require("region_code");
  const auto century = table.require("century");
  const auto pop = table.require("population");
  std::vector<PopulationRecord> out;
  for (const auto& row : table.rows) {
    const int t = parse_int(row[century], "century");
    if (t < kFirstCentury || t > kLastCentury) {
      throw validation_error("OutOfRange", "population century " + std::to_string(t) + " outside 11..20");
    }
    const double p = csv::parse_double(row[pop]);
    if (!(p >= 0.0)) throw validation_error("InvalidPopulation", "population must be non-negative for '" + row[code] + "'");
    out.push_back({row[code], Century{t}, p});
  }
  return out;
}

Corpus ingest(std::istream& biographies, Taxonomy taxonomy, RegionRegistry regions,
              std::vector<PopulationRecord> population, const IngestOptions& options) {
  Corpus corpus;
  corpus.taxonomy = std::move(taxonomy);
  corpus.regions = std::move(regions);
  for (const auto& p : population) {
    if (corpus.regions.index_of(p.region_code) < 0) {
      throw validation_error("UnknownRegion", "population row references unknown region '" + p.region_code + "'");
    }
  }
  std::sort(population.begin(), population.end(), [](const PopulationRecord& a, const PopulationRecord& b) {
    return std::tie(a.region_code, a.century) < std::tie(b.region_code, b.century);
  });
  corpus.population = std::move(population);

  const auto table = csv::read(biographies);
  const auto c_id = table.require("id");
  const auto c_occ = table.require("occupation");
  const auto c_by = table.require("birth_year");
  const auto c_br = table.require("birth_region");
  const auto c_dy = table.require("death_year");
  const auto c_dr = table.require("death_region");
  const int c_blat = table.column("birth_lat");
  const int c_blon = table.column("birth_lon");
  const int c_dlat = table.column("death_lat");
  const int c_dlon = table.column("death_lon");

  auto geocode = [&](const std::vector<std::string>& row, int lat_col, int lon_col) -> std::optional<std::string> {
    if (!options.geocode_nearest || lat_col < 0 || lon_col < 0) return std::nullopt;
    const double lat = csv::parse_double(row[lat_col]);
    const double lon = csv::parse_double(row[lon_col]);
    if (std::isnan(lat) || std::isnan(lon)) return std::nullopt;
    ++corpus.report.geocoded;
    return nearest_centroid_geocode(lat, lon, corpus.regions);
  };

  auto& report = corpus.report;
  std::set<std::string> seen_ids;
  for (const auto& row : table.rows) {
    ++report.rows_read;
    Biography b;
    b.id = row[c_id];
    b.occupation = row[c_occ];
    if (b.id.empty()) throw validation_error("InvalidBiography", "row " + std::to_string(report.rows_read) + " has an empty id");
    if (!seen_ids.insert(b.id).second) throw validation_error("DuplicateId", "biography id '" + b.id + "' appears twice");

    if (is_companion(b.occupation)) {
      ++report.dropped_companion;
      continue;
    }
    if (!corpus.taxonomy.contains(b.occupation)) {
      throw validation_error("UnknownOccupation", "biography '" + b.id + "' has occupation '" + b.occupation + "' not in taxonomy");
    }
    if (row[c_by].empty()) {
      ++report.excluded_missing_birth_year;
      continue;
    }
    b.birth_year = parse_int(row[c_by], "birth_year");
    if (b.birth_year < 1000 || b.birth_year > 1999) {
      ++report.excluded_out_of_range;
      continue;
    }
    if (!row[c_dy].empty()) b.death_year = parse_int(row[c_dy], "death_year");
    if (b.death_year && *b.death_year < b.birth_year) {
      throw validation_error("InvalidBiography", "biography '" + b.id + "' dies before birth");
    }
    b.birth_region = optional_field(row[c_br]);
    b.death_region = optional_field(row[c_dr]);
    if (!b.birth_region) b.birth_region = geocode(row, c_blat, c_blon);
    if (!b.death_region) b.death_region = geocode(row, c_dlat, c_dlon);
    for (const auto* region : {&b.birth_region, &b.death_region}) {
      if (*region && corpus.regions.index_of(**region) < 0) {
        throw validation_error("UnknownRegion", "biography '" + b.id + "' references unknown region '" + **region + "'");
      }
    }
    classify_mobility(b);  // enforces at least one region
    corpus.biographies.push_back(std::move(b));
  }

  if (report.dropped_companion > 0) {
    report.warnings.push_back("dropped " + std::to_string(report.dropped_companion) + " biographies with occupation 'companion'");
  }
  if (report.excluded_missing_birth_year > 0) {
    report.warnings.push_back("excluded " + std::to_string(report.excluded_missing_birth_year) +
                              " biographies without a birth year");
  }
  if (report.excluded_out_of_range > 0) {
    report.warnings.push_back("excluded " + std::to_string(report.excluded_out_of_range) +
                              " biographies born outside 1000-1999");
  }
  if (report.geocoded > 0) {
    report.warnings.push_back("assigned " + std::to_string(report.geocoded) + " regions by nearest centroid");
  }
  return corpus;
}

Corpus ingest_files(const IngestPaths& paths, const IngestOptions& options) {
  auto open = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw validation_error("FileNotFound", "cannot open '" + path + "'");
    return in;
  };
  auto tax_in = open(paths.taxonomy);
  auto reg_in = open(paths.regions);
  std::vector<PopulationRecord> population;
  if (paths.population) {
    auto pop_in = open(*paths.population);
    population = read_population(pop_in);
  }
  auto bio_in = open(paths.biographies);
  return ingest(bio_in, read_taxonomy(tax_in), read_regions(reg_in), std::move(population), options);
}

// --- Serialization ----------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'A', 'G', 'G', 'L', 'C', 'O', 'R', 'P'};
constexpr std::uint32_t kFormatVersion = 1;

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void u64(std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    out_.write(reinterpret_cast<const char*>(buf), 8);
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    u64(bits);
  }
  void str(const std::string& s) {
    u64(s.size());
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void opt_str(const std::optional<std::string>& s) {
    u64(s ? 1 : 0);
    if (s) str(*s);
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::uint64_t u64() {
    unsigned char buf[8];
    if (!in_.read(reinterpret_cast<char*>(buf), 8)) throw validation_error("CorruptCorpus", "unexpected end of corpus file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
  }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64() {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }
  std::string str() {
    const auto n = u64();
    if (n > (1u << 30)) throw validation_error("CorruptCorpus", "string length out of range");
    std::string s(n, '\0');
    if (n && !in_.read(s.data(), static_cast<std::streamsize>(n))) throw validation_error("CorruptCorpus", "truncated string");
    return s;
  }
  std::optional<std::string> opt_str() {
    if (u64() == 0) return std::nullopt;
    return str();
  }

 private:
  std::istream& in_;
};

}  // namespace

void save_binary(const Corpus& corpus, std::ostream& out) {
  out.write(kMagic, sizeof kMagic);
  Writer w(out);
  w.u64(kFormatVersion);

  const auto& occs = corpus.taxonomy.occupations();
  w.u64(occs.size());
  for (const auto& o : occs) {
    const auto& e = corpus.taxonomy.at(o);
    w.str(o);
    w.str(e.category);
    w.str(e.broad_category);
  }
  w.u64(corpus.regions.size());
  for (const auto& r : corpus.regions.records()) {
    w.str(r.region_code);
    w.str(r.name);
    w.str(r.country);
    w.f64(r.centroid_lat);
    w.f64(r.centroid_lon);
  }
  w.u64(corpus.population.size());
  for (const auto& p : corpus.population) {
    w.str(p.region_code);
    w.i64(p.century.value);
    w.f64(p.population);
  }
  w.u64(corpus.biographies.size());
  for (const auto& b : corpus.biographies) {
    w.str(b.id);
    w.str(b.occupation);
    w.i64(b.birth_year);
    w.opt_str(b.birth_region);
    w.u64(b.death_year ? 1 : 0);
    if (b.death_year) w.i64(*b.death_year);
    w.opt_str(b.death_region);
  }
  const auto& rep = corpus.report;
  w.u64(rep.rows_read);
  w.u64(rep.excluded_missing_birth_year);
  w.u64(rep.excluded_out_of_range);
  w.u64(rep.dropped_companion);
  w.u64(rep.geocoded);
  w.u64(rep.warnings.size());
  for (const auto& s : rep.warnings) w.str(s);
}

Corpus load_binary(std::istream& in) {
  char magic[sizeof kMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw validation_error("CorruptCorpus", "not an agglomer corpus file");
  }
  Reader r(in);
  if (r.u64() != kFormatVersion) throw validation_error("CorruptCorpus", "unsupported corpus format version");

  Corpus corpus;
  std::map<std::string, TaxonomyEntry> entries;
  for (auto n = r.u64(); n > 0; --n) {
    auto occ = r.str();
    auto cat = r.str();
    auto broad = r.str();
    entries.emplace(std::move(occ), TaxonomyEntry{std::move(cat), std::move(broad)});
  }
  corpus.taxonomy = Taxonomy(std::move(entries));
  std::vector<RegionRecord> regions;
  for (auto n = r.u64(); n > 0; --n) {
    RegionRecord rec;
    rec.region_code = r.str();
    rec.name = r.str();
    rec.country = r.str();
    rec.centroid_lat = r.f64();
    rec.centroid_lon = r.f64();
    regions.push_back(std::move(rec));
  }
  corpus.regions = RegionRegistry(std::move(regions));
  for (auto n = r.u64(); n > 0; --n) {
    PopulationRecord p;
    p.region_code = r.str();
    p.century = Century{static_cast<int>(r.i64())};
    p.population = r.f64();
    corpus.population.push_back(std::move(p));
  }
  for (auto n = r.u64(); n > 0; --n) {
    Biography b;
    b.id = r.str();
    b.occupation = r.str();
    b.birth_year = static_cast<int>(r.i64());
    b.birth_region = r.opt_str();
    if (r.u64()) b.death_year = static_cast<int>(r.i64());
    b.death_region = r.opt_str();
    corpus.biographies.push_back(std::move(b));
  }
  auto& rep = corpus.report;
  rep.rows_read = r.u64();
  rep.excluded_missing_birth_year = r.u64();
  rep.excluded_out_of_range = r.u64();
  rep.dropped_companion = r.u64();
  rep.geocoded = r.u64();
  for (auto n = r.u64(); n > 0; --n) rep.warnings.push_back(r.str());
  return corpus;
}

void save_json(const Corpus& corpus, std::ostream& out) {
  using nlohmann::ordered_json;
  ordered_json j;
  ordered_json tax = ordered_json::array();
  for (const auto& o : corpus.taxonomy.occupations()) {
    const auto& e = corpus.taxonomy.at(o);
    tax.push_back({{"occupation", o}, {"category", e.category}, {"broad_category", e.broad_category}});
  }
  ordered_json regions = ordered_json::array();
  for (const auto& r : corpus.regions.records()) {
    regions.push_back({{"region_code", r.region_code},
                       {"name", r.name},
                       {"country", r.country},
                       {"centroid_lat", r.centroid_lat},
                       {"centroid_lon", r.centroid_lon}});
  }
  ordered_json pop = ordered_json::array();
  for (const auto& p : corpus.population) {
    pop.push_back({{"region_code", p.region_code}, {"century", p.century.value}, {"population", p.population}});
  }
  ordered_json bios = ordered_json::array();
  for (const auto& b : corpus.biographies) {
    ordered_json jb = {{"id", b.id}, {"occupation", b.occupation}, {"birth_year", b.birth_year}};
    jb["birth_region"] = b.birth_region ? ordered_json(*b.birth_region) : ordered_json(nullptr);
    jb["death_year"] = b.death_year ? ordered_json(*b.death_year) : ordered_json(nullptr);
    jb["death_region"] = b.death_region ? ordered_json(*b.death_region) : ordered_json(nullptr);
    jb["century"] = assign_century(b.birth_year).value;
    bios.push_back(std::move(jb));
  }
  const auto& rep = corpus.report;
  j["report"] = {{"rows_read", rep.rows_read},
                 {"individuals", corpus.biographies.size()},
                 {"excluded_missing_birth_year", rep.excluded_missing_birth_year},
                 {"excluded_out_of_range", rep.excluded_out_of_range},
                 {"dropped_companion", rep.dropped_companion},
                 {"geocoded", rep.geocoded},
                 {"warnings", rep.warnings}};
  j["taxonomy"] = std::move(tax);
  j["regions"] = std::move(regions);
  j["population"] = std::move(pop);
  j["biographies"] = std::move(bios);
  out << j.dump(1) << '\n';
}

Corpus load_corpus_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw validation_error("FileNotFound", "cannot open '" + path + "'");
  return load_binary(in);
}

// --- Counts -----------------------------------------------------------------

CountTensor::CountTensor(std::vector<std::string> regions, std::vector<std::string> occupations)
    : regions_(std::move(regions)),
      occupations_(std::move(occupations)),
      counts_(regions_.size() * occupations_.size() * kCenturyCount * kRoleCount, 0) {}

std::size_t CountTensor::offset(std::size_t region, std::size_t occupation, Century t, Role role) const {
  if (region >= regions_.size() || occupation >= occupations_.size() || t.value < kFirstCentury || t.value > kLastCentury) {
    throw validation_error("OutOfRange", "count tensor index out of range");
  }
  const std::size_t slice = static_cast<std::size_t>(t.value - kFirstCentury) * kRoleCount + static_cast<int>(role);
  return (slice * regions_.size() + region) * occupations_.size() + occupation;
}

std::int64_t CountTensor::at(std::size_t region, std::size_t occupation, Century t, Role role) const {
  return counts_[offset(region, occupation, t, role)];
}

void CountTensor::add(std::size_t region, std::size_t occupation, Century t, Role role, std::int64_t n) {
  counts_[offset(region, occupation, t, role)] += n;
}

Eigen::MatrixXd CountTensor::matrix(Century t, Role role) const {
  Eigen::MatrixXd m(regions_.size(), occupations_.size());
  if (regions_.empty() || occupations_.empty()) return m;
  const std::size_t base = offset(0, 0, t, role);
  for (std::size_t i = 0; i < regions_.size(); ++i) {
    for (std::size_t k = 0; k < occupations_.size(); ++k) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          static_cast<double>(counts_[base + i * occupations_.size() + k]);
    }
  }
  return m;
}

std::int64_t CountTensor::total(Century t, Role role) const {
  if (regions_.empty() || occupations_.empty()) return 0;
  const std::size_t base = offset(0, 0, t, role);
  std::int64_t sum = 0;
  for (std::size_t j = 0; j < regions_.size() * occupations_.size(); ++j) sum += counts_[base + j];
  return sum;
}

CountTensor tabulate_counts(const Corpus& corpus) {
  std::vector<std::string> regions;
  for (const auto& r : corpus.regions.records()) regions.push_back(r.region_code);
  CountTensor tensor(std::move(regions), corpus.taxonomy.occupations());
  for (const auto& b : corpus.biographies) {
    const auto m = classify_mobility(b);
    const auto k = static_cast<std::size_t>(corpus.taxonomy.index_of(b.occupation));
    if (m.birth_region) tensor.add(corpus.regions.index_of(*m.birth_region), k, m.century, Role::Births);
    if (m.death_region) tensor.add(corpus.regions.index_of(*m.death_region), k, m.century, Role::Deaths);
    if (m.is_migrant()) {
      tensor.add(corpus.regions.index_of(*m.death_region), k, m.century, Role::Immi);
      tensor.add(corpus.regions.index_of(*m.birth_region), k, m.century, Role::Emi);
    }
    if (m.stayed()) tensor.add(corpus.regions.index_of(*m.birth_region), k, m.century, Role::Locals);
  }
  return tensor;
}

int sparse_cutoff(Century t) { return t.value >= 16 ? 5 : 3; }

KeptIndex filter_sparse(const CountTensor& counts, Century t, Role role) {
  const Eigen::MatrixXd n = counts.matrix(t, role);
  const double cutoff = sparse_cutoff(t);
  KeptIndex kept;
  const Eigen::VectorXd row_sums = n.rowwise().sum();
  const Eigen::VectorXd col_sums = n.colwise().sum().transpose();
  for (Eigen::Index i = 0; i < n.rows(); ++i) {
    if (row_sums(i) > cutoff) kept.regions.push_back(static_cast<int>(i));
  }
  for (Eigen::Index k = 0; k < n.cols(); ++k) {
    if (col_sums(k) > cutoff && !is_companion(counts.occupations()[k])) kept.occupations.push_back(static_cast<int>(k));
  }
  if (kept.regions.empty() || kept.occupations.empty()) {
    throw validation_error("EmptyAfterFilter", "no regions or occupations survive the sparse filter for century " +
                                                   std::to_string(t.value) + ", role " + std::string(role_name(role)));
  }
  return kept;
}

}  // namespace agglomer
