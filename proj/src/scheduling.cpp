#include "laa/scheduling.hpp"

#include "laa/csv.hpp"
#include "laa/error.hpp"
#include "laa/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <random>

namespace laa {

ReservePreset parse_reserve_preset(const std::string& name) {
  if (name == "none") return ReservePreset::None;
  if (name == "peak-load-3") return ReservePreset::PeakLoad3;
  if (name == "load-3-generation-3") return ReservePreset::Load3Generation3;
  if (name == "largest-unit") return ReservePreset::LargestUnit;
  if (name == "hydro-5-conventional-7") return ReservePreset::Hydro5Conventional7;
  throw ValidationError("unknown reserve preset '" + name + "'");
}

std::string to_string(ReservePreset p) {
  switch (p) {
    case ReservePreset::None: return "none";
    case ReservePreset::PeakLoad3: return "peak-load-3";
    case ReservePreset::Load3Generation3: return "load-3-generation-3";
    case ReservePreset::LargestUnit: return "largest-unit";
    case ReservePreset::Hydro5Conventional7: return "hydro-5-conventional-7";
  }
  return "none";
}

namespace {

double system_reserve(ReservePreset preset, double scheduled, double load, double daily_peak,
                      double largest_unit) {
  switch (preset) {
    case ReservePreset::None: return 0.0;
    case ReservePreset::PeakLoad3: return 0.03 * daily_peak;
    case ReservePreset::Load3Generation3: return (0.03 * load + 0.03 * scheduled) / 1.03;
    case ReservePreset::LargestUnit: return largest_unit;
    case ReservePreset::Hydro5Conventional7: return 0.07 * scheduled / 1.07;
  }
  return 0.0;
}

}  // namespace

TemporalProfile schedule(const ProfileInputs& in, const ScheduleOptions& options) {
  const std::size_t hours = in.hours();
  const auto nb = static_cast<Eigen::Index>(in.buses.size());
  if (hours == 0) throw ValidationError("profile has no hours");
  if (in.residual_load.rows() != static_cast<Eigen::Index>(hours) || in.residual_load.cols() != nb)
    throw ValidationError("residual load matrix must be hours x buses");
  if (!(in.sigma >= 0)) throw ValidationError("sigma must be nonnegative");
  if (options.policy == SchedulePolicy::ForecastPlusMargin && options.margin < -1.0)
    throw ValidationError("margin must be at least -1");
  if (!(options.largest_unit_mw >= 0)) throw ValidationError("largest unit size must be nonnegative");
  for (std::size_t t = 0; t < hours; ++t) {
    const double r = in.renewable_fraction[t];
    if (!(r >= 0 && r < 1)) throw ValidationError("renewable fraction at hour " + std::to_string(t) + " outside [0, 1)");
    for (Eigen::Index b = 0; b < nb; ++b)
      if (!(in.residual_load(static_cast<Eigen::Index>(t), b) >= 0))
        throw ValidationError("negative residual load at hour " + std::to_string(t));
  }

  TemporalProfile p;
  p.buses = in.buses;
  p.residual = in.residual_load;
  p.renewable_fraction = in.renewable_fraction;
  p.sigma = in.sigma;
  p.seed = in.seed;
  p.draws.resize(static_cast<Eigen::Index>(hours), nb);

  std::mt19937_64 rng(in.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index t = 0; t < p.draws.rows(); ++t)
    for (Eigen::Index b = 0; b < nb; ++b) p.draws(t, b) = normal(rng);

  p.forecast = p.residual.cwiseProduct((1.0 + in.sigma * p.draws.array()).matrix());
  const double factor = options.policy == SchedulePolicy::ForecastPlusMargin ? 1.0 + options.margin : 1.0;
  const Eigen::MatrixXd scheduled = (factor * p.forecast).cwiseMax(0.0);

  p.reserve = Eigen::MatrixXd::Zero(scheduled.rows(), nb);
  for (std::size_t t = 0; t < hours; ++t) {
    const auto row = static_cast<Eigen::Index>(t);
    const double total = scheduled.row(row).sum();
    if (total <= 0 || options.reserve == ReservePreset::None) continue;
    const double load = in.total_load.size() == hours ? in.total_load[t] : p.residual.row(row).sum();
    double peak = 0.0;
    const std::size_t day = t / 24;
    for (std::size_t h = day * 24; h < std::min(hours, day * 24 + 24); ++h)
      peak = std::max(peak, in.total_load.size() == hours ? in.total_load[h]
                                                          : p.residual.row(static_cast<Eigen::Index>(h)).sum());
    const double r = std::min(total, system_reserve(options.reserve, total, load, peak, options.largest_unit_mw));
    p.reserve.row(row) = scheduled.row(row) * (r / total);
  }
  p.generation = scheduled - p.reserve;
  return p;
}

Eigen::VectorXd mismatch_mw(const TemporalProfile& p, std::size_t hour) {
  if (hour >= p.hours()) throw ValidationError("hour " + std::to_string(hour) + " out of range");
  const auto t = static_cast<Eigen::Index>(hour);
  return (p.residual.row(t) - p.generation.row(t) - p.reserve.row(t)).cwiseMax(0.0).transpose();
}

Eigen::VectorXd mismatch(const TemporalProfile& p, std::size_t hour, const std::vector<int>& load_ids,
                         double base_mva) {
  const Eigen::VectorXd mw = mismatch_mw(p, hour);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(load_ids.size()));
  for (std::size_t b = 0; b < p.buses.size(); ++b) {
    const auto it = std::find(load_ids.begin(), load_ids.end(), p.buses[b]);
    if (it == load_ids.end()) throw ValidationError("profile bus " + std::to_string(p.buses[b]) + " is not a load bus");
    out(it - load_ids.begin()) += mw(static_cast<Eigen::Index>(b)) / base_mva;
  }
  return out;
}

namespace {

// Smallest eps >= 0 with max_t max_n |eps f + g| >= omega, on sampled data.
double required_with_baseline(const Eigen::MatrixXd& f, const Eigen::MatrixXd& g, double omega) {
  auto h = [&](double eps) { return (eps * f + g).cwiseAbs().maxCoeff(); };
  if (h(0.0) >= omega) return 0.0;
  const double fmax = f.cwiseAbs().maxCoeff();
  double lo = 0.0, hi = (omega + g.cwiseAbs().maxCoeff()) / fmax;
  // h is convex in eps with h(0) < omega, so the crossing is unique.
  for (int it = 0; it < 100 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (h(mid) >= omega ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace

struct TemporalAnalyzer::Impl {
  struct Hour {
    EigenSolution eig;
    ResponseKernel f;
    double eps0 = 0.0;
  };

  GridCase grid;
  std::size_t attack_index = 0;
  int attack_bus = 0;
  std::vector<std::size_t> ren;
  KronReduction reduction;
  std::vector<int> load_ids;
  double omega = 0.0;
  Eigen::Index first = 0, count = 0;
  TemporalOptions options;

  mutable std::mutex mutex;
  mutable std::map<double, std::shared_ptr<const Hour>> cache;

  std::shared_ptr<const Hour> hour(double fraction) const {
    {
      std::lock_guard<std::mutex> lock(mutex);
      if (auto it = cache.find(fraction); it != cache.end()) return it->second;
    }
    std::vector<double> r(grid.num_generators(), 0.0);
    for (auto g : ren) r[g] = fraction;
    auto h = std::make_shared<Hour>();
    h->eig = solve_eigen(assemble_model(grid, reduction, r, options.model));
    h->f = kernel(h->eig, attack_index);
    double fpeak = 0.0;
    for (const auto& pk : find_peaks(h->f.series, first, count, options.peak)) fpeak = std::max(fpeak, pk.magnitude());
    if (!(fpeak > 0)) throw NumericalError("attack bus " + std::to_string(attack_bus) + " cannot move frequency");
    h->eps0 = omega / fpeak;
    std::lock_guard<std::mutex> lock(mutex);
    return cache.emplace(fraction, std::move(h)).first->second;
  }
};

TemporalAnalyzer::TemporalAnalyzer(const GridCase& grid, int attack_bus, TargetGenerator target, double threshold_hz,
                                   const TemporalOptions& options)
    : impl_(std::make_unique<Impl>()) {
  auto& m = *impl_;
  const auto attack_index = grid.load_index(attack_bus);
  if (!attack_index) throw ValidationError("attack bus " + std::to_string(attack_bus) + " is not a load bus");
  if (options.renewable_generators.empty()) throw ValidationError("no renewable generators configured");
  for (int bus : options.renewable_generators) {
    const auto g = grid.generator_index(bus);
    if (!g) throw ValidationError("renewable generator bus " + std::to_string(bus) + " is not a generator bus");
    m.ren.push_back(*g);
  }
  if (!(threshold_hz > 0)) throw ValidationError("threshold must be positive");
  if (target.index && *target.index >= grid.num_generators()) throw ValidationError("target generator out of range");

  m.grid = grid;
  m.attack_index = *attack_index;
  m.attack_bus = attack_bus;
  m.reduction = kron_reduce(build_partition(grid));
  m.load_ids = grid.load_bus_ids();
  m.omega = 2.0 * std::numbers::pi * threshold_hz;
  const auto ng = static_cast<Eigen::Index>(grid.num_generators());
  m.first = ng + (target.index ? static_cast<Eigen::Index>(*target.index) : 0);
  m.count = target.index ? 1 : ng;
  m.options = options;
}

TemporalAnalyzer::~TemporalAnalyzer() = default;

std::vector<TemporalPoint> TemporalAnalyzer::evaluate(const TemporalProfile& profile) const {
  const auto& m = *impl_;
  std::vector<TemporalPoint> out(profile.hours());
  parallel_for(
      profile.hours(),
      [&](std::size_t t) {
        const auto h = m.hour(profile.renewable_fraction[t]);
        const Eigen::VectorXd p = mismatch(profile, t, m.load_ids, m.grid.base_mva);
        const auto ai = static_cast<Eigen::Index>(m.attack_index);

        TemporalPoint& pt = out[t];
        pt.hour = t;
        pt.renewable_fraction = profile.renewable_fraction[t];
        pt.mismatch_mw = p.sum() * m.grid.base_mva;

        Eigen::VectorXd others = p;
        others(ai) = 0.0;
        double eps = 0.0;
        if (others.cwiseAbs().maxCoeff() == 0.0) {
          // Baseline shares the attack channel, so it offsets the attack one for one.
          eps = h->eps0 - p(ai);
        } else {
          const auto& peak = m.options.peak;
          const auto n = static_cast<Eigen::Index>(std::floor(peak.horizon / peak.step + 1e-9)) + 1;
          const Eigen::MatrixXd fs = h->f.series.sample(m.first, m.count, peak.step, n);
          const Eigen::MatrixXd gs = forced_series(h->eig, p).sample(m.first, m.count, peak.step, n);
          eps = required_with_baseline(fs, gs, m.omega);
        }
        if (eps <= 0.0) {
          pt.baseline_exceeds = true;
          eps = 0.0;
        }
        pt.required_mw = eps * m.grid.base_mva;
      },
      m.options.max_threads);
  return out;
}

std::vector<TemporalPoint> temporal_vulnerability(const GridCase& grid, const TemporalProfile& profile,
                                                  int attack_bus, TargetGenerator target, double threshold_hz,
                                                  const TemporalOptions& options) {
  return TemporalAnalyzer(grid, attack_bus, target, threshold_hz, options).evaluate(profile);
}

std::string temporal_to_csv(const std::vector<TemporalPoint>& points) {
  std::string out = csv_row({"hour", "renewable_fraction", "mismatch_mw", "required_laa_mw", "baseline_exceeds"});
  for (const auto& p : points)
    out += csv_row({std::to_string(p.hour), fmt(p.renewable_fraction), fmt(p.mismatch_mw), fmt(p.required_mw),
                    p.baseline_exceeds ? "1" : "0"});
  return out;
}

ProfileInputs load_profile(const std::filesystem::path& path, const std::map<int, double>& allocation,
                           double scale) {
  const CsvTable table = read_csv(path);
  const auto ch = table.require_column("hour");
  const auto cl = table.require_column("load_mw");
  const auto cr = table.require_column("renewable_mw");
  const auto cb = table.column("bus");
  if (table.rows.empty()) throw ParseError(path.string() + ": no rows");
  if (!(scale > 0)) throw ValidationError("profile scale must be positive");

  std::map<int, std::map<int, std::pair<double, double>>> by_hour;  // hour -> bus -> (load, renewable)
  for (std::size_t k = 0; k < table.rows.size(); ++k) {
    const auto& row = table.rows[k];
    const std::string where = path.string() + ":" + std::to_string(table.lines[k]);
    const double hour = parse_double(row[ch], where + " hour");
    if (hour != std::floor(hour)) throw ParseError(where + ": hour must be an integer");
    const double load = parse_double(row[cl], where + " load_mw") * scale;
    const double ren = parse_double(row[cr], where + " renewable_mw") * scale;
    if (load < 0 || ren < 0) throw ValidationError(where + ": negative power");
    if (ren >= load && load > 0) throw ValidationError(where + ": renewable output must be below load");
    const int bus = cb ? static_cast<int>(parse_double(row[*cb], where + " bus")) : 0;
    auto& slot = by_hour[static_cast<int>(hour)][bus];
    if (slot.first != 0 || slot.second != 0) throw ValidationError(where + ": duplicate record");
    slot = {load, ren};
  }

  ProfileInputs in;
  if (cb) {
    for (const auto& [bus, _] : by_hour.begin()->second) in.buses.push_back(bus);
  } else {
    if (allocation.empty()) throw ValidationError("system-wide profile needs a bus allocation");
    double total = 0.0;
    for (const auto& [bus, share] : allocation) {
      if (!(share >= 0)) throw ValidationError("allocation share for bus " + std::to_string(bus) + " is negative");
      in.buses.push_back(bus);
      total += share;
    }
    if (!(total > 0)) throw ValidationError("allocation shares sum to zero");
  }
  const auto nb = static_cast<Eigen::Index>(in.buses.size());
  in.residual_load.resize(static_cast<Eigen::Index>(by_hour.size()), nb);
  Eigen::Index t = 0;
  for (const auto& [hour, recs] : by_hour) {
    double load = 0.0, ren = 0.0;
    if (cb) {
      if (static_cast<Eigen::Index>(recs.size()) != nb)
        throw ValidationError("hour " + std::to_string(hour) + " does not list every bus");
      Eigen::Index b = 0;
      for (const auto& [bus, v] : recs) {
        if (bus != in.buses[static_cast<std::size_t>(b)])
          throw ValidationError("hour " + std::to_string(hour) + " lists a different bus set");
        in.residual_load(t, b++) = v.first - v.second;
        load += v.first;
        ren += v.second;
      }
    } else {
      load = recs.begin()->second.first;
      ren = recs.begin()->second.second;
      double total = 0.0;
      for (const auto& [_, s] : allocation) total += s;
      Eigen::Index b = 0;
      for (const auto& [_, s] : allocation) in.residual_load(t, b++) = (load - ren) * s / total;
    }
    in.total_load.push_back(load);
    in.renewable_fraction.push_back(load > 0 ? ren / load : 0.0);
    ++t;
  }
  return in;
}

}  // namespace laa
