#include "laa/cli.hpp"

#include "laa/csv.hpp"
#include "laa/ingest.hpp"

#include <cmath>
#include <set>

namespace laa::cli {

using Json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

std::string join(const std::string& path, const std::string& key) { return path + "." + key; }
std::string join(const std::string& path, std::size_t k) { return path + "[" + std::to_string(k) + "]"; }

void check_keys(const Json& obj, const std::string& path, const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) fail(join(path, key), "unknown field");
}

const Json* find(const Json& obj, const std::string& key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double number(const Json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(path, "expected a finite number");
  return x;
}

double positive(const Json& v, const std::string& path) {
  const double x = number(v, path);
  if (x <= 0.0) fail(path, "must be positive");
  return x;
}

double nonnegative(const Json& v, const std::string& path) {
  const double x = number(v, path);
  if (x < 0.0) fail(path, "must not be negative");
  return x;
}

long long integer(const Json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<long long>();
}

std::string text(const Json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

// A scalar is accepted where a list is expected.
template <class F>
auto list(const Json& v, const std::string& path, F item) {
  std::vector<decltype(item(v, path))> out;
  if (!v.is_array()) {
    out.push_back(item(v, path));
    return out;
  }
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(item(v[k], join(path, k)));
  return out;
}

std::optional<int> bus_or_all(const Json& v, const std::string& path) {
  if (v.is_string()) {
    if (v.get<std::string>() != "all") fail(path, "expected a bus id or \"all\"");
    return std::nullopt;
  }
  return static_cast<int>(integer(v, path));
}

fs::path existing(const Json& v, const std::string& path) {
  fs::path p = text(v, path);
  if (!fs::exists(p)) fail(path, "no such file: " + p.string());
  return p;
}

bool looks_like_path(const std::string& s) {
  return s.find('/') != std::string::npos || fs::path(s).extension() == ".json";
}

void resolve(Json& v, const fs::path& base) {
  if (!v.is_string()) return;
  const fs::path p = v.get<std::string>();
  if (p.is_relative()) v = (base / p).lexically_normal().string();
}

ProtectionScheme protection(const Json& v, const std::string& path) {
  try {
    if (v.is_object()) return parse_protection(v.dump());
    const std::string s = text(v, path);
    if (looks_like_path(s)) return parse_protection(read_text_file(existing(v, path)));
    return protection_preset(s);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

void parse_simulate(const Json& obj, const std::string& path, SimulateConfig& s) {
  check_keys(obj, path, {"bus", "attack_mw", "start", "duration", "t_end", "mode"});
  if (auto* v = find(obj, "bus"))
    s.buses = list(*v, join(path, "bus"), [](const Json& x, const std::string& p) { return static_cast<int>(integer(x, p)); });
  if (auto* v = find(obj, "attack_mw")) s.attack_mw = number(*v, join(path, "attack_mw"));
  if (auto* v = find(obj, "start")) s.start = nonnegative(*v, join(path, "start"));
  if (auto* v = find(obj, "duration")) s.duration = nonnegative(*v, join(path, "duration"));
  if (auto* v = find(obj, "t_end")) s.t_end = positive(*v, join(path, "t_end"));
  if (auto* v = find(obj, "mode")) {
    const auto m = text(*v, join(path, "mode"));
    if (m == "observe") s.mode = MonitorMode::Observe;
    else if (m == "shed") s.mode = MonitorMode::Shed;
    else fail(join(path, "mode"), "expected \"observe\" or \"shed\"");
  }
  if (s.start >= s.t_end) fail(join(path, "start"), "must be before t_end");
}

void parse_sweep(const Json& obj, const std::string& path, SweepConfig& s) {
  check_keys(obj, path, {"counts", "scales", "start", "duration", "t_end"});
  auto& o = s.options;
  if (auto* v = find(obj, "counts"))
    o.counts = list(*v, join(path, "counts"), [](const Json& x, const std::string& p) {
      const auto n = integer(x, p);
      if (n <= 0) fail(p, "must be positive");
      return static_cast<int>(n);
    });
  if (auto* v = find(obj, "scales")) o.scales = list(*v, join(path, "scales"), positive);
  if (auto* v = find(obj, "start")) o.pulse_start = nonnegative(*v, join(path, "start"));
  if (auto* v = find(obj, "duration")) o.pulse_duration = positive(*v, join(path, "duration"));
  if (auto* v = find(obj, "t_end")) o.t_end = positive(*v, join(path, "t_end"));
  if (o.counts.empty()) fail(join(path, "counts"), "must not be empty");
  if (o.scales.empty()) fail(join(path, "scales"), "must not be empty");
}

void parse_predict(const Json& obj, const std::string& path, PredictConfig& s) {
  check_keys(obj, path, {"generators", "delta_m", "horizon", "step"});
  if (auto* v = find(obj, "generators"))
    s.generators = list(*v, join(path, "generators"), [](const Json& x, const std::string& p) { return static_cast<int>(integer(x, p)); });
  if (auto* v = find(obj, "delta_m"))
    s.relative_dm = list(*v, join(path, "delta_m"), [](const Json& x, const std::string& p) {
      const double d = number(x, p);
      if (d <= -1.0) fail(p, "relative inertia change must be greater than -1");
      return d;
    });
  if (auto* v = find(obj, "horizon")) s.horizon = positive(*v, join(path, "horizon"));
  if (auto* v = find(obj, "step")) s.step = positive(*v, join(path, "step"));
}

void parse_sens(const Json& obj, const std::string& path, SensConfig& s) {
  check_keys(obj, path, {"horizon", "step"});
  if (auto* v = find(obj, "horizon")) s.horizon = positive(*v, join(path, "horizon"));
  if (auto* v = find(obj, "step")) s.step = positive(*v, join(path, "step"));
}

void parse_temporal(const Json& obj, const std::string& path, TemporalConfig& s, bool need_files) {
  check_keys(obj, path, {"profile", "allocation", "scale", "sigma", "runs", "reserve", "policy", "margin", "largest_unit_mw"});
  if (auto* v = find(obj, "profile")) s.profile = need_files ? existing(*v, join(path, "profile")) : fs::path(text(*v, join(path, "profile")));
  else if (need_files) fail(join(path, "profile"), "required");
  if (auto* v = find(obj, "allocation")) {
    const auto p = join(path, "allocation");
    if (!v->is_object()) fail(p, "expected an object of bus id to share");
    for (const auto& [key, share] : v->items()) {
      int bus = 0;
      try {
        std::size_t used = 0;
        bus = std::stoi(key, &used);
        if (used != key.size()) throw std::invalid_argument(key);
      } catch (const std::exception&) {
        fail(join(p, key), "keys must be bus ids");
      }
      s.allocation[bus] = nonnegative(share, join(p, key));
    }
  }
  if (auto* v = find(obj, "scale")) s.scale = positive(*v, join(path, "scale"));
  if (auto* v = find(obj, "sigma")) s.sigma = nonnegative(*v, join(path, "sigma"));
  if (auto* v = find(obj, "runs")) {
    const auto n = integer(*v, join(path, "runs"));
    if (n < 1) fail(join(path, "runs"), "must be at least 1");
    s.runs = static_cast<int>(n);
  }
  if (auto* v = find(obj, "reserve")) {
    try {
      s.schedule.reserve = parse_reserve_preset(text(*v, join(path, "reserve")));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      fail(join(path, "reserve"), e.what());
    }
  }
  if (auto* v = find(obj, "policy")) {
    const auto m = text(*v, join(path, "policy"));
    if (m == "match_forecast") s.schedule.policy = SchedulePolicy::MatchForecast;
    else if (m == "forecast_plus_margin") s.schedule.policy = SchedulePolicy::ForecastPlusMargin;
    else fail(join(path, "policy"), "expected \"match_forecast\" or \"forecast_plus_margin\"");
  }
  if (auto* v = find(obj, "margin")) s.schedule.margin = nonnegative(*v, join(path, "margin"));
  if (auto* v = find(obj, "largest_unit_mw")) s.schedule.largest_unit_mw = nonnegative(*v, join(path, "largest_unit_mw"));
}

void parse_ingest(const Json& obj, const std::string& path, IngestConfig& s, bool need_files) {
  check_keys(obj, path, {"series", "mapping", "quantity", "local_offset_hours", "p_low", "p_high"});
  auto file = [&](const Json& x, const std::string& p) { return need_files ? existing(x, p) : fs::path(text(x, p)); };
  if (auto* v = find(obj, "series")) s.series = list(*v, join(path, "series"), file);
  if (auto* v = find(obj, "mapping")) s.mapping = file(*v, join(path, "mapping"));
  if (auto* v = find(obj, "quantity")) {
    s.quantity = text(*v, join(path, "quantity"));
    try {
      parse_quantity(s.quantity);
    } catch (const Error& e) {
      fail(join(path, "quantity"), e.what());
    }
  }
  if (auto* v = find(obj, "local_offset_hours")) s.local_offset_hours = number(*v, join(path, "local_offset_hours"));
  if (auto* v = find(obj, "p_low")) s.p_low = number(*v, join(path, "p_low"));
  if (auto* v = find(obj, "p_high")) s.p_high = number(*v, join(path, "p_high"));
  if (!(0.0 <= s.p_low && s.p_low <= s.p_high && s.p_high <= 100.0))
    fail(join(path, "p_low"), "percentiles must satisfy 0 <= p_low <= p_high <= 100");
  if (need_files) {
    if (s.series.empty()) fail(join(path, "series"), "required");
    if (s.series.size() > 2) fail(join(path, "series"), "at most two series (a base year and a comparison year)");
  }
}

}  // namespace

Json read_config_document(const fs::path& path) {
  Json doc;
  try {
    doc = Json::parse(read_text_file(path));
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError(path.string() + ": expected a JSON object");
  const fs::path base = path.parent_path();
  if (doc.contains("case")) resolve(doc["case"], base);
  if (doc.contains("protection") && doc["protection"].is_string() && looks_like_path(doc["protection"]))
    resolve(doc["protection"], base);
  if (doc.contains("temporal") && doc["temporal"].is_object() && doc["temporal"].contains("profile"))
    resolve(doc["temporal"]["profile"], base);
  if (doc.contains("ingest") && doc["ingest"].is_object()) {
    auto& in = doc["ingest"];
    if (in.contains("mapping")) resolve(in["mapping"], base);
    if (in.contains("series")) {
      if (in["series"].is_array())
        for (auto& s : in["series"]) resolve(s, base);
      else
        resolve(in["series"], base);
    }
  }
  return doc;
}

RunConfig parse_config(const Json& doc, const std::string& command) {
  const std::string root = "config";
  check_keys(doc, root,
             {"case", "scenarios", "renewable_generators", "scaling", "threshold_hz", "target_generator", "attack_bus",
              "protection", "feasibility", "feasibility_mw", "out", "format", "seed", "threads", "simulate", "sweep",
              "predict", "sens", "temporal", "ingest"});
  RunConfig c;
  const bool needs_case = command != "ingest-stats" && command != "feasibility";
  if (auto* v = find(doc, "case")) c.case_path = needs_case ? existing(*v, join(root, "case")) : fs::path(text(*v, join(root, "case")));
  else if (needs_case) fail(join(root, "case"), "required (pass --case or set it in the config)");

  if (auto* v = find(doc, "scenarios")) {
    c.scenarios = list(*v, join(root, "scenarios"), [](const Json& x, const std::string& p) {
      const double r = number(x, p);
      if (r < 0.0 || r >= 1.0) fail(p, "renewable fraction must lie in [0, 1)");
      return r;
    });
    if (c.scenarios.empty()) c.scenarios = {0.0};
  }
  if (auto* v = find(doc, "renewable_generators"))
    c.renewable_generators = list(*v, join(root, "renewable_generators"),
                                  [](const Json& x, const std::string& p) { return static_cast<int>(integer(x, p)); });
  if (auto* v = find(doc, "scaling")) {
    const auto s = text(*v, join(root, "scaling"));
    if (s == "inertia_and_damping") c.scaling = PenetrationScaling::InertiaAndDamping;
    else if (s == "inertia_only") c.scaling = PenetrationScaling::InertiaOnly;
    else fail(join(root, "scaling"), "expected \"inertia_and_damping\" or \"inertia_only\"");
  }
  if (auto* v = find(doc, "threshold_hz")) c.threshold_hz = positive(*v, join(root, "threshold_hz"));
  if (auto* v = find(doc, "target_generator")) c.target_generator = bus_or_all(*v, join(root, "target_generator"));
  if (auto* v = find(doc, "attack_bus")) c.attack_bus = bus_or_all(*v, join(root, "attack_bus"));
  c.protection = protection_preset("NERC");
  if (auto* v = find(doc, "protection")) c.protection = protection(*v, join(root, "protection"));
  if (auto* v = find(doc, "feasibility")) {
    if (!v->is_boolean()) fail(join(root, "feasibility"), "expected true or false");
    c.feasibility = v->get<bool>();
  }
  if (auto* v = find(doc, "feasibility_mw")) c.feasibility_mw = list(*v, join(root, "feasibility_mw"), positive);
  if (auto* v = find(doc, "out")) c.out = text(*v, join(root, "out"));
  if (auto* v = find(doc, "format")) {
    const auto f = text(*v, join(root, "format"));
    if (f == "csv") c.format = OutputFormat::Csv;
    else if (f == "json") c.format = OutputFormat::Json;
    else fail(join(root, "format"), "expected \"csv\" or \"json\"");
  }
  if (auto* v = find(doc, "seed")) {
    if (!v->is_number_unsigned()) fail(join(root, "seed"), "expected a non-negative integer");
    c.seed = v->get<std::uint64_t>();
  }
  if (auto* v = find(doc, "threads")) {
    const auto n = integer(*v, join(root, "threads"));
    if (n < 0) fail(join(root, "threads"), "must not be negative");
    c.threads = static_cast<std::size_t>(n);
  }

  static const Json empty = Json::object();
  auto section = [&](const char* key) -> const Json& {
    auto* v = find(doc, key);
    return v ? *v : empty;
  };
  parse_simulate(section("simulate"), join(root, "simulate"), c.simulate);
  parse_sweep(section("sweep"), join(root, "sweep"), c.sweep);
  parse_predict(section("predict"), join(root, "predict"), c.predict);
  parse_sens(section("sens"), join(root, "sens"), c.sens);
  parse_temporal(section("temporal"), join(root, "temporal"), c.temporal, command == "temporal");
  parse_ingest(section("ingest"), join(root, "ingest"), c.ingest, command == "ingest-stats");

  if (command == "simulate" && c.simulate.buses.empty()) fail(join(root, "simulate.bus"), "required");
  if (command == "temporal" && !c.attack_bus) fail(join(root, "attack_bus"), "temporal analysis needs a single attack bus");
  if (command == "feasibility" && c.feasibility_mw.empty()) fail(join(root, "feasibility_mw"), "required");
  return c;
}

}  // namespace laa::cli
