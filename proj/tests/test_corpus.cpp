#include <doctest.h>

#include <sstream>

#include "agglomer/corpus.hpp"
#include "agglomer/error.hpp"
#include "fixtures.hpp"

using namespace agglomer;

namespace {

Taxonomy taxonomy() {
  std::istringstream in("occupation,category,broad_category\nx,cx,b1\ny,cy,b1\nz,cz,b2\n");
  return read_taxonomy(in);
}

RegionRegistry regions() {
  std::istringstream in(
      "region_code,name,country,centroid_lat,centroid_lon\nA,Alpha,X,48,2\nB,Beta,X,50,4\nC,Gamma,Y,45,9\n");
  return read_regions(in);
}

Corpus ingest_text(const std::string& body, const IngestOptions& options = {}) {
  std::istringstream in("id,occupation,birth_year,birth_region,death_year,death_region\n" + body);
  return ingest(in, taxonomy(), regions(), {}, options);
}

std::string error_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

}  // namespace

TEST_CASE("century assignment") {
  CHECK(assign_century(1600).value == 17);
  CHECK(assign_century(1000).value == 11);
  CHECK(assign_century(1099).value == 11);
  CHECK(assign_century(1999).value == 20);
  CHECK(error_code([] { assign_century(999); }) == "OutOfRange");
  CHECK(error_code([] { assign_century(2000); }) == "OutOfRange");
  int width[10] = {};
  for (int y = 1000; y <= 1999; ++y) ++width[assign_century(y).value - 11];
  for (int w : width) CHECK(w == 100);
}

TEST_CASE("mobility classification") {
  Biography b{"1", "x", 1500, "A", 1560, "B"};
  auto m = classify_mobility(b);
  CHECK(m.is_migrant());
  CHECK_FALSE(m.stayed());
  b.death_region = "A";
  CHECK(classify_mobility(b).stayed());
  b.birth_region.reset();
  CHECK_FALSE(classify_mobility(b).is_migrant());
  b.death_region.reset();
  CHECK(error_code([&] { classify_mobility(b); }) == "MissingRegion");
}

TEST_CASE("ingest validation") {
  CHECK(error_code([] { ingest_text("1,w,1500,A,1560,A\n"); }) == "UnknownOccupation");
  CHECK(error_code([] { ingest_text("1,x,1500,Q,1560,A\n"); }) == "UnknownRegion");
  CHECK(error_code([] { ingest_text("1,x,1500,A,1460,A\n"); }) == "InvalidBiography");
  CHECK(error_code([] { ingest_text("1,x,1500,A,1560,A\n1,y,1500,A,1560,A\n"); }) == "DuplicateId");

  const Corpus c = ingest_text("1,companion,1500,A,1560,A\n2,x,,A,1560,A\n3,x,1500,A,1560,B\n4,y,900,A,,\n");
  CHECK(c.biographies.size() == 1);
  CHECK(c.report.rows_read == 4);
  CHECK(c.report.dropped_companion == 1);
  CHECK(c.report.excluded_missing_birth_year == 1);
  CHECK(c.report.excluded_out_of_range == 1);
  CHECK(c.report.warnings.size() == 3);
}

TEST_CASE("nearest centroid geocoding is opt-in") {
  const std::string row = "1,x,1500,,1560,A\n";
  std::istringstream in("id,occupation,birth_year,birth_region,death_year,death_region,birth_lat,birth_lon\n"
                        "1,x,1500,,1560,A,49.9,4.1\n");
  IngestOptions on;
  on.geocode_nearest = true;
  const Corpus c = ingest(in, taxonomy(), regions(), {}, on);
  REQUIRE(c.biographies.size() == 1);
  CHECK(*c.biographies[0].birth_region == "B");
  CHECK(c.report.geocoded == 1);

  const Corpus plain = ingest_text(row);
  CHECK_FALSE(plain.biographies[0].birth_region.has_value());
}

TEST_CASE("geocode ties go to the smallest code") {
  RegionRegistry reg({{"Z", "", "", 0.0, 1.0}, {"M", "", "", 0.0, -1.0}});
  CHECK(nearest_centroid_geocode(0.0, 0.0, reg) == "M");
}

TEST_CASE("tabulation counts each role once") {
  const Corpus c = ingest_text(
      "1,x,1500,A,1560,B\n"   // migrant A -> B
      "2,x,1510,A,1570,A\n"   // local
      "3,y,1520,,1580,C\n"    // death only
      "4,z,1530,C,,\n");      // birth only
  const CountTensor n = tabulate_counts(c);
  const Century t{16};
  const int a = 0, b = 1, cc = 2, x = 0, y = 1, z = 2;
  CHECK(n.at(a, x, t, Role::Births) == 2);
  CHECK(n.at(a, x, t, Role::Emi) == 1);
  CHECK(n.at(b, x, t, Role::Immi) == 1);
  CHECK(n.at(b, x, t, Role::Deaths) == 1);
  CHECK(n.at(a, x, t, Role::Locals) == 1);
  CHECK(n.at(cc, y, t, Role::Deaths) == 1);
  CHECK(n.at(cc, y, t, Role::Births) == 0);
  CHECK(n.at(cc, z, t, Role::Births) == 1);
  CHECK(n.total(t, Role::Births) == 3);
  CHECK(n.total(t, Role::Immi) == n.total(t, Role::Emi));
}

TEST_CASE("sparse filter is a single pass with an inclusive cutoff") {
  CHECK(sparse_cutoff(Century{15}) == 3);
  CHECK(sparse_cutoff(Century{16}) == 5);

  CountTensor n({"A", "B", "C"}, {"x", "y"});
  const Century t{16};
  n.add(0, 0, t, Role::Births, 6);  // A: 6, survives
  n.add(1, 0, t, Role::Births, 5);  // B: 5, dropped at the boundary
  n.add(2, 1, t, Role::Births, 6);  // C: 6 but y's column is 6
  const KeptIndex kept = filter_sparse(n, t, Role::Births);
  CHECK(kept.regions == std::vector<int>{0, 2});
  CHECK(kept.occupations == std::vector<int>{0, 1});

  CountTensor empty({"A"}, {"x"});
  empty.add(0, 0, t, Role::Births, 5);
  CHECK_THROWS_AS(filter_sparse(empty, t, Role::Births), Error);
}

TEST_CASE("companion is always removed by the filter") {
  CountTensor n({"A"}, {"companion", "x"});
  const Century t{12};
  n.add(0, 0, t, Role::Births, 10);
  n.add(0, 1, t, Role::Births, 10);
  const KeptIndex kept = filter_sparse(n, t, Role::Births);
  CHECK(kept.occupations == std::vector<int>{1});
}

TEST_CASE("binary round trip is exact") {
  const Corpus c = ingest_text("1,x,1500,A,1560,B\n2,y,1610,,1650,C\n");
  std::stringstream buf;
  save_binary(c, buf);
  const Corpus back = load_binary(buf);
  REQUIRE(back.biographies.size() == 2);
  CHECK(back.biographies[1].id == "2");
  CHECK_FALSE(back.biographies[1].birth_region.has_value());
  CHECK(*back.biographies[0].death_region == "B");
  CHECK(back.taxonomy.occupations() == c.taxonomy.occupations());
  std::stringstream again;
  save_binary(back, again);
  std::stringstream first;
  save_binary(c, first);
  CHECK(again.str() == first.str());
}
