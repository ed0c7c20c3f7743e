#include "support.hpp"

#include "laa/csv.hpp"
#include "laa/error.hpp"
#include "laa/ingest.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <random>

using namespace laa;

namespace {

std::string day_csv(int hours, int skip = -1, double load = 100.0) {
  std::string s = "timestamp,load_mw,solar_mw,wind_mw\n";
  for (int h = 0; h < hours; ++h) {
    if (h == skip) continue;
    char buf[96];
    std::snprintf(buf, sizeof buf, "2020-03-%02d %02d:00,%g,%g,%g\n", 1 + h / 24, h % 24, load + h, 0.1 * h, 2.0);
    s += buf;
  }
  return s;
}

ColumnMapping plain() {
  ColumnMapping m;
  m.solar = "solar_mw";
  m.wind = "wind_mw";
  return m;
}

RtoSeries synthetic(const std::vector<double>& values, std::int64_t start_hour = 0) {
  RtoSeries s;
  for (std::size_t k = 0; k < values.size(); ++k) s.records.push_back({start_hour + static_cast<std::int64_t>(k), values[k], 0, 0});
  return s;
}

}  // namespace

TEST_CASE("a single day loads as 24 records") {
  const auto s = parse_series(day_csv(24), plain());
  CHECK(s.size() == 24);
  CHECK(s.gaps.empty());
  CHECK(s.year == 2020);
  CHECK(s.records[5].solar == doctest::Approx(0.5));
  CHECK(format_utc_hour(s.records[0].utc_hour) == "2020-03-01T00:00Z");
}

TEST_CASE("a missing hour is reported, not filled") {
  const auto s = parse_series(day_csv(24, 7), plain());
  CHECK(s.size() == 23);
  REQUIRE(s.gaps.size() == 1);
  CHECK(format_utc_hour(s.gaps[0]) == "2020-03-01T07:00Z");
}

TEST_CASE("timestamps are normalized to UTC") {
  CHECK(parse_utc_hour("1970-01-01T00:00Z", 0) == 0);
  CHECK(parse_utc_hour("1970-01-02 00:00", 0) == 24);
  CHECK(parse_utc_hour("2020-03-01 00:00", -6) == parse_utc_hour("2020-03-01T06:00Z", 0));
  CHECK(parse_utc_hour("2020-03-01T00:00-06:00", 5) == parse_utc_hour("2020-03-01 06:00", 0));
  CHECK(parse_utc_hour("2020-03-01 00:00:00+0100", 0) == parse_utc_hour("2020-02-29 23:00", 0));
  CHECK(format_utc_hour(parse_utc_hour("2019-12-31 23:00", 0)) == "2019-12-31T23:00Z");
  CHECK_THROWS_AS(parse_utc_hour("2020-03-01 00:30", 0), ParseError);
  CHECK_THROWS_AS(parse_utc_hour("2019-02-29 00:00", 0), ParseError);
  CHECK_THROWS_AS(parse_utc_hour("yesterday", 0), ParseError);
}

TEST_CASE("bad rows are reported with their line number") {
  std::string text = day_csv(3);
  text += "2020-03-01 03:00,oops,0,0\n";
  try {
    parse_series(text, plain(), "feed.csv");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("feed.csv:5") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_series("timestamp,load_mw\n", ColumnMapping{}), ValidationError);
  CHECK_THROWS_AS(parse_series(day_csv(3), ColumnMapping{"ts", "load_mw", {}, {}, 0.0, ""}), ParseError);
  CHECK_THROWS_AS(parse_series("timestamp,load_mw\n2020-03-01 02:00,1\n2020-03-01 01:00,1\n", ColumnMapping{}),
                  ValidationError);
  CHECK_THROWS_AS(parse_series("timestamp,load_mw\n2020-03-01 02:00,-1\n", ColumnMapping{}), ValidationError);
}

TEST_CASE("column mapping files name roles and the input offset") {
  const auto m = parse_mapping(R"({"timestamp":"Time","load":"Demand","wind":"W","utc_offset_hours":-5,"region":"X"})");
  CHECK(m.timestamp == "Time");
  CHECK(m.load == "Demand");
  CHECK_FALSE(m.solar);
  CHECK(*m.wind == "W");
  CHECK(m.input_utc_offset_hours == -5.0);
  CHECK_THROWS_AS(parse_mapping("[1]"), ParseError);
  CHECK_THROWS_AS(parse_mapping(R"({"load": 3})"), ParseError);
}

TEST_CASE("percentile uses linear interpolation between closest ranks") {
  CHECK(percentile({1, 2, 3, 4}, 50) == doctest::Approx(2.5));
  CHECK(percentile({10, 20}, 5) == doctest::Approx(10.5));
  CHECK(percentile({4, 1, 3, 2}, 0) == 1.0);
  CHECK(percentile({4, 1, 3, 2}, 100) == 4.0);
  CHECK(percentile({7}, 95) == 7.0);
  CHECK_THROWS_AS(percentile({}, 50), ValidationError);
  CHECK_THROWS_AS(percentile({1, 2}, 101), ValidationError);
}

TEST_CASE("constant series has a collapsed band") {
  const auto bands = percentile_bands(synthetic(std::vector<double>(72, 42.0)), Quantity::Load);
  REQUIRE(bands.size() == 24);
  for (const auto& b : bands) {
    CHECK(b.low == 42.0);
    CHECK(b.median == 42.0);
    CHECK(b.high == 42.0);
    CHECK(b.count == 3);
  }
}

TEST_CASE("uniform samples recover their quantiles") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(24 * 20000);
  for (auto& x : v) x = u(rng);
  for (const auto& b : percentile_bands(synthetic(v), Quantity::Load)) {
    CHECK(std::abs(b.low - 0.05) <= 0.01);
    CHECK(std::abs(b.median - 0.5) <= 0.03);
    CHECK(std::abs(b.high - 0.95) <= 0.01);
  }
}

TEST_CASE("groups with fewer than two samples are rejected") {
  CHECK_THROWS_AS(percentile_bands(synthetic(std::vector<double>(30, 1.0)), Quantity::Load), ValidationError);
  CHECK_THROWS_AS(percentile_bands(synthetic(std::vector<double>(48, 1.0)), Quantity::Load, 0.0, 60, 95),
                  ValidationError);
}

TEST_CASE("local offset shifts the hour-of-day grouping") {
  std::vector<double> v(48);
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = static_cast<double>(k % 24);
  const auto utc = percentile_bands(synthetic(v), Quantity::Load, 0.0);
  const auto cst = percentile_bands(synthetic(v), Quantity::Load, -6.0);
  CHECK(utc[3].median == 3.0);
  CHECK(cst[3].median == 9.0);
}

TEST_CASE("quantities derive from the record fields") {
  const RtoRecord r{0, 200.0, 30.0, 50.0};
  CHECK(quantity_value(r, Quantity::Renewable) == 80.0);
  CHECK(quantity_value(r, Quantity::Penetration) == 0.4);
  CHECK(parse_quantity("penetration") == Quantity::Penetration);
  CHECK_THROWS_AS(parse_quantity("hydro"), ValidationError);
}

TEST_CASE("year delta of a series with itself is exactly zero") {
  const auto s = parse_series(day_csv(72), plain());
  const auto d = year_delta(s, s, Quantity::Load);
  for (double x : d.delta) CHECK(x == 0.0);
  CHECK(d.mean_delta == 0.0);
}

TEST_CASE("year delta finds the hour of largest change") {
  std::vector<double> a(48, 100.0), b(48, 100.0);
  b[11] = b[35] = 150.0;
  b[3] = b[27] = 80.0;
  const auto d = year_delta(synthetic(a), synthetic(b, 24 * 366), Quantity::Load);
  CHECK(d.argmax_hour == 11);
  CHECK(d.delta[11] == 50.0);
  CHECK(d.delta[3] == -20.0);
  CHECK(d.mean_delta == doctest::Approx(30.0 / 24.0));
  CHECK_THROWS_AS(year_delta(synthetic(a), synthetic(b, 24 * 100), Quantity::Load), ValidationError);
}

TEST_CASE("shipped SPP-like series cover Mar 1 to Jun 30") {
  const auto m = load_mapping(laa::test::data_path("rto/spp_mapping.json"));
  const auto s19 = load_series(laa::test::data_path("rto/spp_2019.csv"), m);
  const auto s20 = load_series(laa::test::data_path("rto/spp_2020.csv"), m);
  CHECK(s19.size() == 2928);
  CHECK(s20.size() == 2928);
  CHECK(s19.gaps.empty());
  CHECK(s20.region == "SPP");
  CHECK(format_utc_hour(s20.records.front().utc_hour) == "2020-03-01T06:00Z");

  const auto bands = percentile_bands(s20, Quantity::Penetration, -6.0);
  for (const auto& b : bands) {
    CHECK(b.low <= b.median);
    CHECK(b.median <= b.high);
  }
  const auto d = year_delta(s19, s20, Quantity::Penetration, -6.0);
  CHECK(d.mean_delta == doctest::Approx(0.08).epsilon(0.1));
  CHECK(parse_csv(bands_to_csv(bands)).rows.size() == 24);
  CHECK(parse_csv(delta_to_csv(d)).rows.size() == 24);
}
