#include "laa/cli.hpp"

#include "laa/csv.hpp"
#include "laa/grid_model.hpp"
#include "laa/ingest.hpp"
#include "laa/sensitivity.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>

namespace laa::cli {

using Json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string output_name(const std::string& stem, const RunConfig& c) {
  return stem + (c.format == OutputFormat::Json ? ".json" : ".csv");
}

OutputFile table(const std::string& stem, const std::string& csv, const RunConfig& c) {
  return {output_name(stem, c), c.format == OutputFormat::Json ? csv_to_json(csv) : csv};
}

// Case-dependent parts of the config, checked against the loaded grid.
struct Setup {
  GridCase grid;
  std::vector<std::size_t> renewable;  // generator indices
  TargetGenerator target;
  std::optional<std::size_t> attack_index;

  std::vector<double> fractions(double r) const {
    std::vector<double> f(grid.num_generators(), 0.0);
    for (auto g : renewable) f[g] = r;
    return f;
  }
};

std::size_t generator_index(const GridCase& grid, int bus, const std::string& path) {
  auto g = grid.generator_index(bus);
  if (!g) throw ConfigError(path + ": bus " + std::to_string(bus) + " is not a generator bus of " + grid.name);
  return *g;
}

std::size_t load_index(const GridCase& grid, int bus, const std::string& path) {
  auto i = grid.load_index(bus);
  if (!i) throw ConfigError(path + ": bus " + std::to_string(bus) + " is not a load bus of " + grid.name);
  return *i;
}

Setup setup(const RunConfig& c) {
  Setup s;
  s.grid = parse_case(c.case_path);
  if (c.renewable_generators.empty()) {
    s.renewable.push_back(s.grid.num_generators() - 1);
  } else {
    for (std::size_t k = 0; k < c.renewable_generators.size(); ++k)
      s.renewable.push_back(
          generator_index(s.grid, c.renewable_generators[k], "config.renewable_generators[" + std::to_string(k) + "]"));
  }
  if (c.target_generator) s.target = TargetGenerator::at(generator_index(s.grid, *c.target_generator, "config.target_generator"));
  if (c.attack_bus) s.attack_index = load_index(s.grid, *c.attack_bus, "config.attack_bus");
  return s;
}

ModelOptions model_options(const RunConfig& c) { return {c.threshold_hz, c.scaling}; }

LeastEffortOptions effort_options(const RunConfig& c) {
  LeastEffortOptions o;
  o.max_threads = c.threads;
  return o;
}

std::string scenario_label(double r) { return "r=" + fmt(r); }

std::string number_or_inf(double v) { return std::isfinite(v) ? fmt(v) : "inf"; }

std::vector<OutputFile> cmd_least_effort(const RunConfig& c) {
  const Setup s = setup(c);
  std::vector<AttackAssessment> runs;
  Json detail;
  detail["case"] = s.grid.name;
  detail["threshold_hz"] = c.threshold_hz;
  detail["scenarios"] = Json::array();
  for (double r : c.scenarios) {
    const auto eig = solve_eigen(build_model(s.grid, s.fractions(r), model_options(c)));
    runs.push_back(least_effort(eig, s.target, c.threshold_hz, effort_options(c)));
    for (const auto& w : runs.back().warnings) std::cerr << "warning: " << scenario_label(r) << ": " << w << "\n";
    detail["scenarios"].push_back({{"renewable_fraction", r},
                                   {"assessment", Json::parse(assessment_to_json(runs.back(), s.grid.generator_bus_ids()))}});
  }

  std::vector<std::string> head{"bus"};
  for (double r : c.scenarios) head.push_back("epsilon_mw_" + scenario_label(r));
  if (c.feasibility) {
    for (double r : c.scenarios) head.push_back("units_" + scenario_label(r));
    for (double r : c.scenarios) head.push_back("buildings_" + scenario_label(r));
  }
  std::string csv = csv_row(head);
  for (std::size_t i = 0; i < s.grid.num_loads(); ++i) {
    if (s.attack_index && *s.attack_index != i) continue;
    std::vector<std::string> row{std::to_string(s.grid.loads[i].bus)};
    for (const auto& a : runs) row.push_back(number_or_inf(a.buses[i].epsilon_mw));
    if (c.feasibility) {
      for (const auto& a : runs) row.push_back(a.buses[i].attackable ? std::to_string(a.buses[i].units) : "");
      for (const auto& a : runs) row.push_back(a.buses[i].attackable ? std::to_string(a.buses[i].buildings) : "");
    }
    csv += csv_row(row);
  }
  return {table("least_effort", csv, c), {"least_effort_detail.json", detail.dump(2) + "\n"}};
}

std::vector<OutputFile> cmd_predict(const RunConfig& c) {
  const Setup s = setup(c);
  std::vector<std::size_t> gens = s.renewable;
  if (!c.predict.generators.empty()) {
    gens.clear();
    for (std::size_t k = 0; k < c.predict.generators.size(); ++k)
      gens.push_back(generator_index(s.grid, c.predict.generators[k], "config.predict.generators[" + std::to_string(k) + "]"));
  }
  const auto base = solve_eigen(build_model(s.grid, s.fractions(c.scenarios.front()), model_options(c)));
  const auto ws = build_workspace(base);
  std::vector<double> grid;
  for (double t = 0.0; t <= c.predict.horizon + 1e-12; t += c.predict.step) grid.push_back(t);

  std::string label;
  for (auto g : gens) label += (label.empty() ? "" : ";") + std::to_string(s.grid.generators[g].bus);
  std::string csv = csv_row({"bus", "generator", "delta_m_relative", "epsilon_predicted_mw", "epsilon_exact_mw",
                             "epsilon_rel_error", "kernel_rel_linf"});
  for (double rel : c.predict.relative_dm) {
    Eigen::VectorXd dm = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.grid.num_generators()));
    for (auto g : gens) dm[static_cast<Eigen::Index>(g)] = rel * base.model.inertia[static_cast<Eigen::Index>(g)];
    const auto predicted = predict_least_effort(base, ws, dm, s.target, c.threshold_hz, effort_options(c));
    for (const auto& w : predicted.warnings) std::cerr << "warning: delta_m " << fmt(rel) << ": " << w << "\n";
    DynamicModel shifted = base.model;
    shifted.inertia += dm;
    refresh_pencil(shifted);
    const auto exact_eig = solve_eigen(shifted);
    const auto exact = least_effort(exact_eig, s.target, c.threshold_hz, effort_options(c));
    for (std::size_t i = 0; i < s.grid.num_loads(); ++i) {
      if (s.attack_index && *s.attack_index != i) continue;
      const Eigen::MatrixXd fp = predicted_kernel(base, ws, i, dm).series.sample_at(grid);
      const Eigen::MatrixXd fe = kernel(exact_eig, i).series.sample_at(grid);
      const double scale = fe.cwiseAbs().maxCoeff();
      const double kerr = scale > 0 ? (fp - fe).cwiseAbs().maxCoeff() / scale : 0.0;
      const double ep = predicted.buses[i].epsilon_mw, ee = exact.buses[i].epsilon_mw;
      csv += csv_row({std::to_string(s.grid.loads[i].bus), label, fmt(rel), number_or_inf(ep), number_or_inf(ee),
                      number_or_inf(std::abs(ep - ee) / ee), fmt(kerr)});
    }
  }
  return {table("predict", csv, c)};
}

std::vector<OutputFile> cmd_sens(const RunConfig& c) {
  const Setup s = setup(c);
  const auto eig = solve_eigen(build_model(s.grid, s.fractions(c.scenarios.front()), model_options(c)));
  const auto ws = build_workspace(eig);
  const auto ids = s.grid.generator_bus_ids();
  std::string csv = csv_row({"mode", "lambda_re", "lambda_im", "generator", "dlambda_re", "dlambda_im"});
  for (Eigen::Index j = 0; j < eig.eigenvalues.size(); ++j)
    for (std::size_t g = 0; g < ids.size(); ++g) {
      const Complex d = ws.dlambda(j, static_cast<Eigen::Index>(g));
      csv += csv_row({std::to_string(j), fmt(eig.eigenvalues[j].real()), fmt(eig.eigenvalues[j].imag()),
                      std::to_string(ids[g]), fmt(d.real()), fmt(d.imag())});
    }
  std::vector<OutputFile> out{table("sens_eigen", csv, c)};
  if (s.attack_index) {
    std::vector<double> grid;
    for (double t = 0.0; t <= c.sens.horizon + 1e-12; t += c.sens.step) grid.push_back(t);
    const auto n = ids.size();
    std::vector<std::string> head{"t"};
    std::vector<Eigen::MatrixXd> blocks;
    for (std::size_t h = 0; h < n; ++h) {
      blocks.push_back(kernel_sensitivity(eig, ws, *s.attack_index, h, grid));
      for (std::size_t g = 0; g < n; ++g) head.push_back("domega_" + std::to_string(ids[g]) + "_dM_" + std::to_string(ids[h]));
    }
    std::string k = csv_row(head);
    for (std::size_t r = 0; r < grid.size(); ++r) {
      std::vector<std::string> row{fmt(grid[r])};
      for (const auto& b : blocks)
        for (std::size_t g = 0; g < n; ++g) row.push_back(fmt(b(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(n + g))));
      k += csv_row(row);
    }
    out.push_back(table("sens_kernel", k, c));
  }
  return out;
}

std::vector<OutputFile> cmd_simulate(const RunConfig& c) {
  const Setup s = setup(c);
  const auto& sim = c.simulate;
  const auto nl = static_cast<Eigen::Index>(s.grid.num_loads());
  Eigen::VectorXd u = Eigen::VectorXd::Zero(nl), base = Eigen::VectorXd::Zero(nl);
  for (std::size_t k = 0; k < sim.buses.size(); ++k)
    u[static_cast<Eigen::Index>(load_index(s.grid, sim.buses[k], "config.simulate.bus[" + std::to_string(k) + "]"))] +=
        sim.attack_mw / s.grid.base_mva;
  for (Eigen::Index i = 0; i < nl; ++i) base[i] = s.grid.loads[static_cast<std::size_t>(i)].secure;

  Scenario sc;
  sc.model = build_model(s.grid, s.fractions(c.scenarios.front()), model_options(c));
  sc.forcing = sim.duration > 0 ? Forcing::pulse(u, sim.start, sim.duration) : Forcing::step(u, sim.start);
  sc.base_load = base;
  sc.t_end = sim.t_end;
  const auto result = simulate(sc, c.protection, sim.mode);

  const double f0 = s.grid.nominal_hz;
  std::string summary = csv_row({"generator", "nadir_hz", "zenith_hz", "max_deviation_hz", "breaches_threshold"});
  const auto ids = s.grid.generator_bus_ids();
  for (std::size_t g = 0; g < ids.size(); ++g) {
    const double dev = std::max(f0 - result.nadir_hz[g], result.zenith_hz[g] - f0);
    summary += csv_row({std::to_string(ids[g]), fmt(result.nadir_hz[g]), fmt(result.zenith_hz[g]), fmt(dev),
                        dev > c.threshold_hz ? "1" : "0"});
  }
  return {table("trajectory", trajectory_to_csv(result.trajectory), c), table("events", events_to_csv(result), c),
          table("summary", summary, c)};
}

std::vector<OutputFile> cmd_sweep(const RunConfig& c) {
  const Setup s = setup(c);
  const auto model = build_model(s.grid, s.fractions(c.scenarios.front()), model_options(c));
  SweepOptions o = c.sweep.options;
  o.max_threads = c.threads;
  return {table("sweep", sweep_to_csv(sweep_multibus(s.grid, model, c.protection, o)), c)};
}

std::vector<OutputFile> cmd_temporal(const RunConfig& c) {
  const Setup s = setup(c);
  const auto& tc = c.temporal;
  std::map<int, double> allocation = tc.allocation;
  if (allocation.empty()) allocation[*c.attack_bus] = 1.0;
  for (const auto& [bus, share] : allocation) load_index(s.grid, bus, "config.temporal.allocation." + std::to_string(bus));
  ProfileInputs in = load_profile(tc.profile, allocation, tc.scale);
  in.sigma = tc.sigma;

  TemporalOptions opt;
  opt.renewable_generators.clear();
  for (auto g : s.renewable) opt.renewable_generators.push_back(s.grid.generators[g].bus);
  opt.model = model_options(c);
  opt.max_threads = c.threads;

  const TemporalAnalyzer analyzer(s.grid, *c.attack_bus, s.target, c.threshold_hz, opt);
  std::vector<std::vector<TemporalPoint>> runs;
  for (int r = 0; r < tc.runs; ++r) {
    in.seed = c.seed + static_cast<std::uint64_t>(r);
    runs.push_back(analyzer.evaluate(schedule(in, tc.schedule)));
  }
  std::vector<OutputFile> out{table("temporal", temporal_to_csv(runs.front()), c)};
  if (tc.runs > 1) {
    std::string csv = csv_row({"hour", "runs", "mean_required_laa_mw", "sd_required_laa_mw", "min_required_laa_mw",
                               "max_required_laa_mw"});
    for (std::size_t h = 0; h < runs.front().size(); ++h) {
      double sum = 0.0, sq = 0.0, lo = INFINITY, hi = -INFINITY;
      for (const auto& run : runs) {
        const double v = run[h].required_mw;
        sum += v;
        sq += v * v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      const double n = static_cast<double>(runs.size()), mean = sum / n;
      const double var = std::max(0.0, (sq - n * mean * mean) / (n - 1.0));
      csv += csv_row({std::to_string(runs.front()[h].hour), std::to_string(runs.size()), fmt(mean), fmt(std::sqrt(var)),
                      fmt(lo), fmt(hi)});
    }
    out.push_back(table("temporal_runs", csv, c));
  }
  return out;
}

std::vector<OutputFile> cmd_ingest_stats(const RunConfig& c) {
  const auto& ic = c.ingest;
  const ColumnMapping mapping = ic.mapping.empty() ? ColumnMapping{} : load_mapping(ic.mapping);
  const double offset = ic.local_offset_hours.value_or(mapping.input_utc_offset_hours);
  const Quantity q = parse_quantity(ic.quantity);
  std::vector<RtoSeries> series;
  std::vector<OutputFile> out;
  for (const auto& path : ic.series) {
    series.push_back(load_series(path, mapping));
    for (auto gap : series.back().gaps) std::cerr << "warning: " << path.string() << ": missing hour " << format_utc_hour(gap) << "\n";
    out.push_back(table("bands_" + path.stem().string(), bands_to_csv(percentile_bands(series.back(), q, offset, ic.p_low, ic.p_high)), c));
  }
  if (series.size() == 2) out.push_back(table("delta", delta_to_csv(year_delta(series[0], series[1], q, offset)), c));
  return out;
}

std::vector<OutputFile> cmd_feasibility(const RunConfig& c) {
  std::string csv = csv_row({"attack_mw", "units", "buildings"});
  for (double mw : c.feasibility_mw) {
    const auto f = feasibility(mw);
    csv += csv_row({fmt(mw), std::to_string(f.units), std::to_string(f.buildings)});
  }
  return {table("feasibility", csv, c)};
}

Json scalar_from_text(const std::string& s) {
  if (s == "all") return s;
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  return s;
}

void set_path(Json& doc, const std::vector<std::string>& path, const Json& value) {
  Json* node = &doc;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    if (!node->contains(path[k]) || !(*node)[path[k]].is_object()) (*node)[path[k]] = Json::object();
    node = &(*node)[path[k]];
  }
  (*node)[path.back()] = value;
}

// Flags are recorded as (config path, value) and applied over the config file.
struct Overrides {
  std::vector<std::pair<std::vector<std::string>, Json>> items;

  template <class T>
  void option(CLI::App* app, const std::string& flag, std::vector<std::string> path, const std::string& help) {
    auto* o = app->add_option_function<T>(flag, [this, path](const T& v) { items.emplace_back(path, Json(v)); }, help);
    if constexpr (!std::is_same_v<T, std::string> && !std::is_arithmetic_v<T>) o->delimiter(',');
  }
  void bus(CLI::App* app, const std::string& flag, std::vector<std::string> path, const std::string& help) {
    app->add_option_function<std::string>(flag, [this, path](const std::string& v) { items.emplace_back(path, scalar_from_text(v)); }, help);
  }
  void path_option(CLI::App* app, const std::string& flag, std::vector<std::string> path, const std::string& help) {
    option<std::string>(app, flag, std::move(path), help);
  }
  void apply(Json& doc) const {
    for (const auto& [path, value] : items) set_path(doc, path, value);
  }
};

}  // namespace

std::vector<OutputFile> run_command(const std::string& command, const RunConfig& config) {
  if (command == "least-effort") return cmd_least_effort(config);
  if (command == "predict") return cmd_predict(config);
  if (command == "sens") return cmd_sens(config);
  if (command == "simulate") return cmd_simulate(config);
  if (command == "sweep") return cmd_sweep(config);
  if (command == "temporal") return cmd_temporal(config);
  if (command == "ingest-stats") return cmd_ingest_stats(config);
  if (command == "feasibility") return cmd_feasibility(config);
  throw ConfigError("unknown command " + command);
}

std::string csv_to_json(const std::string& csv_text) {
  const CsvTable t = parse_csv(csv_text);
  Json rows = Json::array();
  for (const auto& r : t.rows) {
    Json obj = Json::object();
    for (std::size_t k = 0; k < t.header.size(); ++k) {
      const std::string& cell = k < r.size() ? r[k] : std::string();
      char* end = nullptr;
      const long long n = std::strtoll(cell.c_str(), &end, 10);
      const bool whole = !cell.empty() && end == cell.c_str() + cell.size();
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty()) obj[t.header[k]] = nullptr;
      else if (whole) obj[t.header[k]] = n;
      else if (end == cell.c_str() + cell.size() && std::isfinite(v)) obj[t.header[k]] = v;
      else obj[t.header[k]] = cell;
    }
    rows.push_back(std::move(obj));
  }
  return rows.dump(1) + "\n";
}

void write_outputs(const fs::path& dir, const std::vector<OutputFile>& files) {
  fs::create_directories(dir);
  std::vector<fs::path> temps;
  try {
    for (const auto& f : files) {
      temps.push_back(dir / (f.name + ".partial"));
      write_text_file(temps.back(), f.text);
    }
  } catch (...) {
    std::error_code ec;
    for (const auto& p : temps) fs::remove(p, ec);
    throw;
  }
  for (std::size_t k = 0; k < files.size(); ++k) fs::rename(temps[k], dir / files[k].name);
}

int run(int argc, char** argv) {
  CLI::App app{"Load-altering attack vulnerability analysis for low-inertia grids", "laa"};
  app.fallthrough();
  app.require_subcommand(1);

  Overrides ov;
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file; flags override its fields")->check(CLI::ExistingFile);
  ov.path_option(&app, "--case", {"case"}, "case file (.json native or .m MATPOWER)");
  ov.option<std::string>(&app, "--out", {"out"}, "output directory");
  ov.option<std::uint64_t>(&app, "--seed", {"seed"}, "seed for forecast-error draws");
  ov.option<std::string>(&app, "--format", {"format"}, "csv or json");
  ov.option<int>(&app, "--threads", {"threads"}, "worker threads (0: all cores)");

  auto model_flags = [&](CLI::App* sub) {
    ov.option<std::vector<double>>(sub, "--scenarios", {"scenarios"}, "renewable fractions, comma separated");
    ov.option<std::vector<int>>(sub, "--renewable", {"renewable_generators"}, "generator buses that follow the renewable fraction");
    ov.option<std::string>(sub, "--scaling", {"scaling"}, "inertia_and_damping or inertia_only");
    ov.option<double>(sub, "--threshold", {"threshold_hz"}, "frequency deviation threshold in Hz");
    ov.bus(sub, "--target", {"target_generator"}, "target generator bus or all");
  };

  auto* le = app.add_subcommand("least-effort", "least-effort attack per load bus and scenario");
  model_flags(le);
  ov.bus(le, "--bus", {"attack_bus"}, "attack bus or all");
  le->add_flag_function("--feasibility", [&](std::int64_t) { ov.items.push_back({{"feasibility"}, true}); },
                        "append AC-unit and building counts");

  auto* pr = app.add_subcommand("predict", "first-order prediction of least effort under inertia changes");
  model_flags(pr);
  ov.bus(pr, "--bus", {"attack_bus"}, "attack bus or all");
  ov.option<std::vector<int>>(pr, "--generators", {"predict", "generators"}, "generator buses whose inertia changes");
  ov.option<std::vector<double>>(pr, "--delta-m", {"predict", "delta_m"}, "relative inertia changes");

  auto* se = app.add_subcommand("sens", "eigenvalue and kernel sensitivities to inertia");
  model_flags(se);
  ov.bus(se, "--bus", {"attack_bus"}, "load bus for kernel sensitivities");
  ov.option<double>(se, "--horizon", {"sens", "horizon"}, "kernel sensitivity horizon in s");
  ov.option<double>(se, "--step", {"sens", "step"}, "kernel sensitivity sample step in s");

  auto* si = app.add_subcommand("simulate", "time-domain simulation of an attack with protection monitoring");
  model_flags(si);
  ov.option<std::vector<int>>(si, "--bus", {"simulate", "bus"}, "attacked load buses");
  ov.option<double>(si, "--mw", {"simulate", "attack_mw"}, "attack per bus in MW");
  ov.option<double>(si, "--start", {"simulate", "start"}, "attack start in s");
  ov.option<double>(si, "--duration", {"simulate", "duration"}, "pulse length in s (0: step)");
  ov.option<double>(si, "--t-end", {"simulate", "t_end"}, "simulation end in s");
  ov.option<std::string>(si, "--mode", {"simulate", "mode"}, "observe or shed");
  ov.option<std::string>(si, "--protection", {"protection"}, "NERC, ERCOT, NYISO or a scheme file");

  auto* sw = app.add_subcommand("sweep", "multi-bus attack sweep");
  model_flags(sw);
  ov.option<std::vector<int>>(sw, "--counts", {"sweep", "counts"}, "attacked bus counts");
  ov.option<std::vector<double>>(sw, "--scales", {"sweep", "scales"}, "load scale factors");
  ov.option<double>(sw, "--duration", {"sweep", "duration"}, "pulse length in s");
  ov.option<double>(sw, "--t-end", {"sweep", "t_end"}, "simulation end in s");
  ov.option<std::string>(sw, "--protection", {"protection"}, "NERC, ERCOT, NYISO or a scheme file");

  auto* te = app.add_subcommand("temporal", "hourly required attack under scheduling and forecast error");
  model_flags(te);
  ov.bus(te, "--bus", {"attack_bus"}, "attack bus");
  ov.path_option(te, "--profile", {"temporal", "profile"}, "hourly profile CSV");
  ov.option<double>(te, "--sigma", {"temporal", "sigma"}, "forecast error standard deviation");
  ov.option<int>(te, "--runs", {"temporal", "runs"}, "number of seeds, starting at --seed");
  ov.option<double>(te, "--scale", {"temporal", "scale"}, "profile MW scale");
  ov.option<std::string>(te, "--reserve", {"temporal", "reserve"}, "reserve preset");

  auto* in = app.add_subcommand("ingest-stats", "hour-of-day percentile bands and year-over-year deltas");
  ov.option<std::vector<std::string>>(in, "--series", {"ingest", "series"}, "one or two RTO CSV files");
  ov.path_option(in, "--mapping", {"ingest", "mapping"}, "column mapping JSON");
  ov.option<std::string>(in, "--quantity", {"ingest", "quantity"}, "load, solar, wind, renewable or penetration");
  ov.option<double>(in, "--local-offset", {"ingest", "local_offset_hours"}, "hour-of-day offset from UTC");

  auto* fe = app.add_subcommand("feasibility", "AC units and buildings needed for an attack size");
  ov.option<std::vector<double>>(fe, "--mw", {"feasibility_mw"}, "attack sizes in MW");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    Json doc = config_path.empty() ? Json::object() : read_config_document(config_path);
    ov.apply(doc);
    const RunConfig config = parse_config(doc, command);
    const auto files = run_command(command, config);
    write_outputs(config.out, files);
    for (const auto& f : files) std::cout << (config.out / f.name).string() << "\n";
    return 0;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace laa::cli
