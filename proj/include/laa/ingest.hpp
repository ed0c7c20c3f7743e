#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace laa {

struct RtoRecord {
  std::int64_t utc_hour = 0;  // hours since 1970-01-01T00:00Z
  double load = 0.0;          // MW
  double solar = 0.0;
  double wind = 0.0;
};

struct RtoSeries {
  std::string region;
  int year = 0;
  std::vector<RtoRecord> records;
  std::vector<std::int64_t> gaps;  // missing UTC hours between first and last record

  std::size_t size() const { return records.size(); }
};

/// Column roles for an input CSV. Timestamps are "YYYY-MM-DD HH:MM[:SS]"
/// (a 'T' separator, a trailing 'Z' or a "+HH:MM" offset are accepted);
/// naive timestamps are read as local time at `input_utc_offset_hours`.
struct ColumnMapping {
  std::string timestamp = "timestamp";
  std::string load = "load_mw";
  std::optional<std::string> solar;
  std::optional<std::string> wind;
  double input_utc_offset_hours = 0.0;
  std::string region;
};

ColumnMapping parse_mapping(const std::string& json_text);
ColumnMapping load_mapping(const std::filesystem::path& path);

RtoSeries parse_series(const std::string& csv_text, const ColumnMapping& mapping,
                       const std::string& source = "<input>");
RtoSeries load_series(const std::filesystem::path& path, const ColumnMapping& mapping);

/// Parses a timestamp to UTC hours since the epoch; minutes must be zero.
std::int64_t parse_utc_hour(const std::string& text, double default_offset_hours);
std::string format_utc_hour(std::int64_t utc_hour);

enum class Quantity { Load, Solar, Wind, Renewable, Penetration };
Quantity parse_quantity(const std::string& name);
double quantity_value(const RtoRecord& r, Quantity q);

/// Linear interpolation between closest ranks: rank = p/100 * (n - 1).
double percentile(std::vector<double> values, double p);

struct Band {
  int hour = 0;
  std::size_t count = 0;
  double low = 0.0;
  double median = 0.0;
  double high = 0.0;
};

/// Per local hour-of-day 0..23 (UTC shifted by `local_offset_hours`).
std::vector<Band> percentile_bands(const RtoSeries& s, Quantity q, double local_offset_hours = 0.0,
                                   double p_low = 5.0, double p_high = 95.0);

struct YearDelta {
  std::array<double, 24> delta{};  // mean(b) - mean(a) per hour-of-day
  int argmax_hour = 0;             // hour of largest |delta|
  double mean_delta = 0.0;         // 24-hour average
};

/// Requires the two series' calendar windows (month/day, ignoring year) to overlap.
YearDelta year_delta(const RtoSeries& a, const RtoSeries& b, Quantity q, double local_offset_hours = 0.0);

std::string bands_to_csv(const std::vector<Band>& bands);
std::string delta_to_csv(const YearDelta& d);

}  // namespace laa
