#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "cokrige/data_model.hpp"
#include "support.hpp"

using namespace cokrige;
using testing::error_of;

namespace {

const char* kThreeWells =
    "well_id,x,y,avg_rate_90d,frac_gradient,tvd,fluid_volume,proppant_volume\n"
    "A,0,0,1000,0.8,10000,5e6,4e6\n"
    "B,100,0,1500,0.85,11000,6e6,5e6\n"
    "C,0,100,800,0.9,12000,7e6,6e6\n";

IngestResult parse(const std::string& text) {
  std::istringstream in(text);
  return parse_wells_csv(in);
}

MultivariateDataset pairs(std::initializer_list<std::pair<double, double>> values) {
  MultivariateDataset d;
  d.colocated = true;
  double x = 0.0;
  for (const auto& [a, b] : values) {
    d.primary.push_back({{x, 0.0}, a});
    d.secondary.push_back({{x, 0.0}, b});
    x += 1.0;
  }
  return d;
}

}  // namespace

TEST_CASE("three complete rows give three records") {
  const auto r = parse(kThreeWells);
  REQUIRE(r.records.size() == 3);
  CHECK(r.warnings.empty());
  CHECK(r.records[1].well_id == "B");
  CHECK(r.records[1].location.x == 100.0);
  CHECK(*r.records[2].tvd == 12000.0);
  CHECK(*r.records[0].fluid_volume == 5e6);
}

TEST_CASE("empty optional field is absent with a warning") {
  const auto r = parse("well_id,x,y,avg_rate_90d,frac_gradient,tvd,fluid_volume,proppant_volume\n"
                       "A,0,0,1000,0.8,10000,,4e6\n");
  REQUIRE(r.records.size() == 1);
  CHECK_FALSE(r.records[0].fluid_volume.has_value());
  CHECK(r.warnings.size() == 1);
}

TEST_CASE("unparseable tvd reports row and column") {
  try {
    parse("well_id,x,y,avg_rate_90d,frac_gradient,tvd,fluid_volume,proppant_volume\n"
          "A,0,0,1000,0.8,10000,1,1\n"
          "B,1,0,1000,0.8,abc,1,1\n");
    FAIL("expected ParseFailure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseFailure);
    CHECK(e.subject() == "tvd");
    CHECK(e.row() == 2);
  }
}

TEST_CASE("ingestion rejects duplicates and missing columns") {
  const std::string header = "well_id,x,y,avg_rate_90d,frac_gradient,tvd,fluid_volume,proppant_volume\n";
  CHECK(error_of([&] { parse(header + "A,0,0,1,1,1,1,1\nA,5,0,1,1,1,1,1\n"); }) == ErrorCode::DuplicateWellId);
  CHECK(error_of([&] { parse(header + "A,0,0,1,1,1,1,1\nB,0,0,1,1,1,1,1\n"); }) == ErrorCode::DuplicateLocation);
  CHECK(error_of([&] { parse("well_id,x\nA,0\n"); }) == ErrorCode::MissingColumn);
  CHECK(error_of([&] { ingest_csv("/nonexistent/wells.csv"); }) == ErrorCode::MissingInput);
}

TEST_CASE("custom schema maps column names") {
  CsvSchema schema;
  schema.well_id = "api";
  schema.x = "easting";
  schema.y = "northing";
  std::istringstream in("api,easting,northing,avg_rate_90d,frac_gradient,tvd,fluid_volume,proppant_volume\n"
                        "X1,10,20,1,1,1,1,1\n");
  const auto r = parse_wells_csv(in, schema);
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].well_id == "X1");
  CHECK(r.records[0].location.y == 20.0);
}

TEST_CASE("ingest then write round-trips numeric fields") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(1e-3, 1e7);
  std::vector<WellRecord> records;
  for (int i = 0; i < 50; ++i) {
    WellRecord w;
    w.well_id = "W" + std::to_string(i);
    w.location = {u(rng), u(rng)};
    w.avg_rate_90d = u(rng);
    w.frac_gradient = u(rng);
    if (i % 3) w.tvd = u(rng);
    w.fluid_volume = u(rng);
    if (i % 4) w.proppant_volume = u(rng);
    records.push_back(w);
  }
  std::stringstream buf;
  write_wells_csv(buf, records);
  const auto back = parse_wells_csv(buf).records;
  REQUIRE(back.size() == records.size());
  auto near = [](const std::optional<double>& a, const std::optional<double>& b) {
    if (a.has_value() != b.has_value()) return false;
    return !a || std::fabs(*a - *b) <= 1e-9 * std::fabs(*a);
  };
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(back[i].well_id == records[i].well_id);
    CHECK(back[i].location == records[i].location);
    CHECK(near(back[i].tvd, records[i].tvd));
    CHECK(near(back[i].proppant_volume, records[i].proppant_volume));
    CHECK(near(back[i].avg_rate_90d, records[i].avg_rate_90d));
  }
}

TEST_CASE("log10 transform") {
  const std::vector<SpatialSample> s{{{0, 0}, 100.0}, {{1, 0}, 1.0}};
  const auto t = log10_transform(s);
  CHECK(t[0].value == 2.0);
  CHECK(t[1].value == 0.0);
  const std::vector<SpatialSample> zero{{{0, 0}, 0.0}};
  CHECK(error_of([&] { log10_transform(zero); }) == ErrorCode::NonPositiveValue);
}

TEST_CASE("log10 inverts the power of ten") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng);
    const std::vector<SpatialSample> s{{{0, 0}, std::pow(10.0, x)}};
    const double back = log10_transform(s)[0].value;
    CHECK(std::fabs(back - x) <= 1e-12 * std::max(1.0, std::fabs(x)));
  }
}

TEST_CASE("colocate") {
  std::vector<SpatialSample> primary, secondary;
  for (int i = 0; i < 5; ++i) primary.push_back({{double(i), 0}, double(i)});
  for (int i = 0; i < 8; ++i) secondary.push_back({{double(i), 0}, 10.0 + i});

  SUBCASE("identical locations keep every pair") {
    const auto r = colocate(primary, std::span(secondary).first(5));
    CHECK(r.dataset.size() == 5);
    CHECK(r.discarded_primary == 0);
    CHECK(r.discarded_secondary == 0);
    CHECK(r.dataset.colocated);
  }
  SUBCASE("five of eight coincide") {
    const auto r = colocate(primary, secondary);
    CHECK(r.dataset.size() == 5);
    CHECK(r.discarded_secondary == 3);
    for (std::size_t i = 0; i < 5; ++i) CHECK(r.dataset.secondary[i].value == 10.0 + double(i));
  }
  SUBCASE("two candidates within tolerance") {
    const std::vector<SpatialSample> p{{{0, 0}, 1.0}};
    const std::vector<SpatialSample> s{{{0.5, 0}, 1.0}, {{-0.5, 0}, 2.0}};
    CHECK(error_of([&] { colocate(p, s, 1.0); }) == ErrorCode::AmbiguousMatch);
  }
  SUBCASE("tolerance snaps the secondary to the primary location") {
    const std::vector<SpatialSample> p{{{0, 0}, 1.0}, {{10, 0}, 2.0}};
    const std::vector<SpatialSample> s{{{0.3, 0.1}, 5.0}};
    const auto r = colocate(p, s, 0.5);
    REQUIRE(r.dataset.size() == 1);
    CHECK(r.dataset.secondary[0].location == Location{0, 0});
    CHECK(r.discarded_primary == 1);
  }
  SUBCASE("idempotent") {
    const auto once = colocate(primary, secondary);
    const auto twice = colocate(once.dataset.primary, once.dataset.secondary);
    REQUIRE(twice.dataset.size() == once.dataset.size());
    CHECK(twice.discarded_primary == 0);
    CHECK(twice.discarded_secondary == 0);
    for (std::size_t i = 0; i < once.dataset.size(); ++i) {
      CHECK(twice.dataset.primary[i].location == once.dataset.primary[i].location);
      CHECK(twice.dataset.primary[i].value == once.dataset.primary[i].value);
      CHECK(twice.dataset.secondary[i].value == once.dataset.secondary[i].value);
    }
  }
}

TEST_CASE("pearson correlation") {
  CHECK(pearson_correlation(pairs({{1, 2}, {2, 4}, {3, 6}})) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(pearson_correlation(pairs({{1, 3}, {2, 1}, {3, -1}})) == doctest::Approx(-1.0).epsilon(1e-15));

  // Hand evaluation: means 1.5 and 0.5, Sxy = 1, Sxx = 5, Syy = 1.
  CHECK(pearson_correlation(pairs({{0, 0}, {1, 1}, {2, 0}, {3, 1}})) ==
        doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-14));

  CHECK(error_of([&] { pearson_correlation(pairs({{1, 1}, {1, 2}, {1, 3}})); }) == ErrorCode::DegenerateVariance);
}

TEST_CASE("pearson correlation is invariant under positive affine maps") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(0.1, 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    auto d = testing::random_dataset(rng, 20);
    const double r0 = pearson_correlation(d);
    const double a = u(rng), b = z(rng) * 5.0;
    for (auto& s : d.secondary) s.value = a * s.value + b;
    CHECK(std::fabs(pearson_correlation(d) - r0) < 1e-12);
  }
}

TEST_CASE("samples csv round trip") {
  std::mt19937_64 rng(9);
  const auto d = testing::random_dataset(rng, 12);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < d.size(); ++i) ids.push_back("W" + std::to_string(i));
  std::stringstream buf;
  write_samples_csv(buf, ids, d);
  const std::string text = buf.str();
  std::istringstream a(text), b(text);
  const auto p = read_samples_csv(a, "primary");
  const auto s = read_samples_csv(b, "secondary");
  REQUIRE(p.size() == d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(p[i].value == d.primary[i].value);
    CHECK(s[i].value == d.secondary[i].value);
    CHECK(p[i].location == d.primary[i].location);
  }
}
