#include "laa/ingest.hpp"

#include "laa/csv.hpp"
#include "laa/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <regex>

namespace laa {

ColumnMapping parse_mapping(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("column mapping: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("column mapping must be a JSON object");
  ColumnMapping m;
  auto str = [&](const char* key) -> std::optional<std::string> {
    if (!j.contains(key)) return std::nullopt;
    if (!j[key].is_string()) throw ParseError(std::string("column mapping: '") + key + "' must be a string");
    return j[key].get<std::string>();
  };
  if (auto v = str("timestamp")) m.timestamp = *v;
  if (auto v = str("load")) m.load = *v;
  m.solar = str("solar");
  m.wind = str("wind");
  if (auto v = str("region")) m.region = *v;
  if (j.contains("utc_offset_hours")) {
    if (!j["utc_offset_hours"].is_number()) throw ParseError("column mapping: 'utc_offset_hours' must be a number");
    m.input_utc_offset_hours = j["utc_offset_hours"].get<double>();
  }
  return m;
}

ColumnMapping load_mapping(const std::filesystem::path& path) {
  try {
    return parse_mapping(read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::int64_t parse_utc_hour(const std::string& text, double default_offset_hours) {
  static const std::regex re(
      R"(^\s*(\d{4})-(\d{2})-(\d{2})[T ](\d{2}):(\d{2})(?::(\d{2}))?\s*(Z|[+-]\d{2}:?\d{2})?\s*$)");
  std::smatch m;
  if (!std::regex_match(text, m, re)) throw ParseError("bad timestamp '" + text + "'");
  using namespace std::chrono;
  const year_month_day ymd{year{std::stoi(m[1])}, month{static_cast<unsigned>(std::stoi(m[2]))},
                           day{static_cast<unsigned>(std::stoi(m[3]))}};
  if (!ymd.ok()) throw ParseError("invalid date in '" + text + "'");
  const int hh = std::stoi(m[4]), mm = std::stoi(m[5]);
  const int ss = m[6].matched ? std::stoi(m[6]) : 0;
  if (hh > 23 || mm > 59 || ss > 59) throw ParseError("invalid time in '" + text + "'");
  if (mm != 0 || ss != 0) throw ParseError("timestamp '" + text + "' is not on the hour");
  double offset_minutes = default_offset_hours * 60.0;
  if (m[7].matched) {
    const std::string z = m[7];
    if (z == "Z") {
      offset_minutes = 0;
    } else {
      const std::string digits = std::regex_replace(z.substr(1), std::regex(":"), "");
      const int oh = std::stoi(digits.substr(0, 2)), om = std::stoi(digits.substr(2, 2));
      offset_minutes = (z[0] == '-' ? -1 : 1) * (oh * 60 + om);
    }
  }
  const auto days = sys_days{ymd}.time_since_epoch().count();
  const double local_minutes = static_cast<double>(days) * 1440.0 + hh * 60.0;
  const double utc_minutes = local_minutes - offset_minutes;
  if (std::fmod(utc_minutes, 60.0) != 0.0) throw ParseError("offset in '" + text + "' is not a whole hour");
  return static_cast<std::int64_t>(std::floor(utc_minutes / 60.0));
}

std::string format_utc_hour(std::int64_t utc_hour) {
  using namespace std::chrono;
  const auto d = static_cast<int>(std::floor(static_cast<double>(utc_hour) / 24.0));
  const int h = static_cast<int>(utc_hour - static_cast<std::int64_t>(d) * 24);
  const year_month_day ymd{sys_days{days{d}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:00Z", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), h);
  return buf;
}

RtoSeries parse_series(const std::string& csv_text, const ColumnMapping& mapping, const std::string& source) {
  CsvTable table;
  try {
    table = parse_csv(csv_text);
  } catch (const ParseError& e) {
    throw ParseError(source + ": " + e.what());
  }
  auto need = [&](const std::string& name) {
    if (auto k = table.column(name)) return *k;
    throw ParseError(source + ": mapped column '" + name + "' not found");
  };
  const auto ct = need(mapping.timestamp);
  const auto cl = need(mapping.load);
  const std::optional<std::size_t> cs = mapping.solar ? std::optional(need(*mapping.solar)) : std::nullopt;
  const std::optional<std::size_t> cw = mapping.wind ? std::optional(need(*mapping.wind)) : std::nullopt;

  RtoSeries s;
  s.region = mapping.region;
  for (std::size_t k = 0; k < table.rows.size(); ++k) {
    const auto& row = table.rows[k];
    const std::string where = source + ":" + std::to_string(table.lines[k]);
    RtoRecord r;
    try {
      r.utc_hour = parse_utc_hour(row[ct], mapping.input_utc_offset_hours);
    } catch (const ParseError& e) {
      throw ParseError(where + ": " + e.what());
    }
    r.load = parse_double(row[cl], where + " load");
    if (cs) r.solar = parse_double(row[*cs], where + " solar");
    if (cw) r.wind = parse_double(row[*cw], where + " wind");
    if (r.load < 0 || r.solar < 0 || r.wind < 0) throw ValidationError(where + ": negative power value");
    if (!std::isfinite(r.load) || !std::isfinite(r.solar) || !std::isfinite(r.wind))
      throw ValidationError(where + ": non-finite power value");
    if (!s.records.empty() && r.utc_hour <= s.records.back().utc_hour)
      throw ValidationError(where + ": timestamps must be strictly increasing");
    if (!s.records.empty())
      for (auto h = s.records.back().utc_hour + 1; h < r.utc_hour; ++h) s.gaps.push_back(h);
    s.records.push_back(r);
  }
  if (s.records.empty()) throw ValidationError(source + ": empty series");
  using namespace std::chrono;
  const year_month_day first{sys_days{days{static_cast<int>(s.records.front().utc_hour / 24)}}};
  s.year = static_cast<int>(first.year());
  return s;
}

RtoSeries load_series(const std::filesystem::path& path, const ColumnMapping& mapping) {
  return parse_series(read_text_file(path), mapping, path.string());
}

Quantity parse_quantity(const std::string& name) {
  if (name == "load") return Quantity::Load;
  if (name == "solar") return Quantity::Solar;
  if (name == "wind") return Quantity::Wind;
  if (name == "renewable") return Quantity::Renewable;
  if (name == "penetration") return Quantity::Penetration;
  throw ValidationError("unknown quantity '" + name + "'");
}

double quantity_value(const RtoRecord& r, Quantity q) {
  switch (q) {
    case Quantity::Load: return r.load;
    case Quantity::Solar: return r.solar;
    case Quantity::Wind: return r.wind;
    case Quantity::Renewable: return r.solar + r.wind;
    case Quantity::Penetration: return r.load > 0 ? (r.solar + r.wind) / r.load : 0.0;
  }
  return 0.0;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw ValidationError("percentile of an empty sample");
  if (!(p >= 0 && p <= 100)) throw ValidationError("percentile must lie in [0, 100]");
  std::sort(values.begin(), values.end());
  const double rank = p / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

namespace {

int local_hour(std::int64_t utc_hour, double offset_hours) {
  const auto h = static_cast<std::int64_t>(std::llround(static_cast<double>(utc_hour) + offset_hours));
  return static_cast<int>(((h % 24) + 24) % 24);
}

std::array<std::vector<double>, 24> group(const RtoSeries& s, Quantity q, double offset) {
  std::array<std::vector<double>, 24> g;
  for (const auto& r : s.records) g[static_cast<std::size_t>(local_hour(r.utc_hour, offset))].push_back(quantity_value(r, q));
  return g;
}

// Day of year on a fixed non-leap calendar, so windows compare across years.
int calendar_day(std::int64_t utc_hour) {
  using namespace std::chrono;
  const year_month_day d{sys_days{days{static_cast<int>(std::floor(static_cast<double>(utc_hour) / 24.0))}}};
  static constexpr int kStart[12] = {0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334};
  return kStart[static_cast<unsigned>(d.month()) - 1] + static_cast<int>(static_cast<unsigned>(d.day()));
}

}  // namespace

std::vector<Band> percentile_bands(const RtoSeries& s, Quantity q, double local_offset_hours, double p_low,
                                   double p_high) {
  if (s.records.empty()) throw ValidationError("empty series");
  if (!(p_low <= 50 && 50 <= p_high)) throw ValidationError("band percentiles must bracket the median");
  const auto g = group(s, q, local_offset_hours);
  std::vector<Band> out;
  for (int h = 0; h < 24; ++h) {
    const auto& v = g[static_cast<std::size_t>(h)];
    if (v.size() < 2)
      throw ValidationError("hour-of-day " + std::to_string(h) + " has " + std::to_string(v.size()) +
                            " samples; at least 2 are needed");
    out.push_back({h, v.size(), percentile(v, p_low), percentile(v, 50.0), percentile(v, p_high)});
  }
  return out;
}

YearDelta year_delta(const RtoSeries& a, const RtoSeries& b, Quantity q, double local_offset_hours) {
  if (a.records.empty() || b.records.empty()) throw ValidationError("empty series");
  const int a0 = calendar_day(a.records.front().utc_hour), a1 = calendar_day(a.records.back().utc_hour);
  const int b0 = calendar_day(b.records.front().utc_hour), b1 = calendar_day(b.records.back().utc_hour);
  const bool wraps = a1 < a0 || b1 < b0;
  if (!wraps && (a1 < b0 || b1 < a0)) throw ValidationError("series cover disjoint calendar windows");
  const auto ga = group(a, q, local_offset_hours);
  const auto gb = group(b, q, local_offset_hours);
  YearDelta d;
  double best = -1.0;
  for (std::size_t h = 0; h < 24; ++h) {
    if (ga[h].empty() || gb[h].empty())
      throw ValidationError("hour-of-day " + std::to_string(h) + " missing from one series");
    double ma = 0.0, mb = 0.0;
    for (double v : ga[h]) ma += v;
    for (double v : gb[h]) mb += v;
    d.delta[h] = mb / static_cast<double>(gb[h].size()) - ma / static_cast<double>(ga[h].size());
    d.mean_delta += d.delta[h] / 24.0;
    if (std::abs(d.delta[h]) > best) {
      best = std::abs(d.delta[h]);
      d.argmax_hour = static_cast<int>(h);
    }
  }
  return d;
}

std::string bands_to_csv(const std::vector<Band>& bands) {
  std::string out = csv_row({"hour", "count", "p_low", "p50", "p_high"});
  for (const auto& b : bands)
    out += csv_row({std::to_string(b.hour), std::to_string(b.count), fmt(b.low), fmt(b.median), fmt(b.high)});
  return out;
}

std::string delta_to_csv(const YearDelta& d) {
  std::string out = csv_row({"hour", "delta"});
  for (std::size_t h = 0; h < 24; ++h) out += csv_row({std::to_string(h), fmt(d.delta[h])});
  return out;
}

}  // namespace laa
