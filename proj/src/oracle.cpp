#include "laa/oracle.hpp"

#include "laa/csv.hpp"
#include "laa/error.hpp"
#include "laa/parallel.hpp"

#include <boost/numeric/odeint.hpp>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

namespace laa {

namespace odeint = boost::numeric::odeint;

Forcing Forcing::step(const Eigen::VectorXd& u, double start) { return Forcing{{{start, u}}}; }

Forcing Forcing::pulse(const Eigen::VectorXd& u, double start, double duration) {
  if (!(duration > 0)) throw ValidationError("pulse duration must be positive");
  return Forcing{{{start, u}, {start + duration, Eigen::VectorXd::Zero(u.size())}}};
}

Eigen::VectorXd Forcing::at(double t, Eigen::Index num_loads) const {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(num_loads);
  for (const auto& s : segments) {
    if (s.start > t) break;
    if (s.u.size() != num_loads) throw ValidationError("forcing segment has the wrong number of loads");
    u = s.u;
  }
  return u;
}

void Forcing::add_from(double t, const Eigen::VectorXd& du) {
  const Eigen::VectorXd current = at(t, du.size());
  std::vector<Segment> next;
  for (const auto& s : segments)
    if (s.start < t) next.push_back(s);
  next.push_back({t, current + du});
  for (const auto& s : segments)
    if (s.start > t) next.push_back({s.start, s.u + du});
  segments = std::move(next);
}

double Trajectory::frequency_hz(std::size_t sample, std::size_t g) const {
  const auto n = static_cast<Eigen::Index>(num_generators());
  return nominal_hz + states(static_cast<Eigen::Index>(sample), n + static_cast<Eigen::Index>(g)) /
                          (2.0 * std::numbers::pi);
}

namespace {

double hermite(const Trajectory& tr, std::size_t k, std::size_t g, double t) {
  const auto n = static_cast<Eigen::Index>(tr.num_generators());
  const auto r0 = static_cast<Eigen::Index>(k), r1 = r0 + 1, c = static_cast<Eigen::Index>(g);
  const double t0 = tr.t[k], h = tr.t[k + 1] - t0;
  const double s = (t - t0) / h;
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * tr.states(r0, n + c) + (s3 - 2 * s2 + s) * h * tr.accel(r0, c) +
         (-2 * s3 + 3 * s2) * tr.states(r1, n + c) + (s3 - s2) * h * tr.accel(r1, c);
}

// Time in (t_k, t_{k+1}] where generator g's frequency reaches `level_hz`.
double bisect_crossing(const Trajectory& tr, std::size_t k, std::size_t g, double level_hz) {
  const double level = (level_hz - tr.nominal_hz) * 2.0 * std::numbers::pi;
  double a = tr.t[k], b = tr.t[k + 1];
  const double fa = hermite(tr, k, g, a) - level;
  for (int it = 0; it < 200 && b - a > 1e-12; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = hermite(tr, k, g, m) - level;
    if ((fm > 0) == (fa > 0))
      a = m;
    else
      b = m;
  }
  return b;
}

struct Rhs {
  const DynamicModel& m;
  Eigen::VectorXd force;  // B^M u, fixed per segment
  Eigen::VectorXd inv_m;

  void operator()(const std::vector<double>& x, std::vector<double>& dx, double) const {
    const auto n = m.inertia.size();
    Eigen::Map<const Eigen::VectorXd> d(x.data(), n), w(x.data() + n, n);
    Eigen::Map<Eigen::VectorXd> dd(dx.data(), n), dw(dx.data() + n, n);
    dd = w;
    dw = inv_m.cwiseProduct(force - m.damping * w - m.stiffness * d);
  }
};

}  // namespace

double Trajectory::omega_at(std::size_t g, double time) const {
  if (t.empty() || time < t.front() || time > t.back()) throw ValidationError("time outside trajectory");
  auto it = std::upper_bound(t.begin(), t.end(), time);
  std::size_t k = it == t.end() ? t.size() - 1 : static_cast<std::size_t>(it - t.begin());
  if (k == 0) k = 1;
  while (k > 1 && t[k] == t[k - 1]) --k;
  if (t[k] == t[k - 1]) return states(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(num_generators() + g));
  return hermite(*this, k - 1, g, time);
}

Trajectory integrate(const DynamicModel& model, const Forcing& forcing, double t_end, const IntegrateOptions& options) {
  return integrate(model, forcing, 0.0, t_end, Eigen::VectorXd(), options);
}

Trajectory integrate(const DynamicModel& model, const Forcing& forcing, double t0, double t_end,
                     const Eigen::VectorXd& x0, const IntegrateOptions& options) {
  const auto n = static_cast<Eigen::Index>(model.num_generators());
  const auto nl = static_cast<Eigen::Index>(model.num_loads());
  if (!(t_end > t0)) throw ValidationError("integration end must follow its start");
  if (!(options.output_step > 0) || !(options.rel_tol > 0) || !(options.abs_tol > 0))
    throw ValidationError("integration tolerances and output step must be positive");
  if (x0.size() != 0 && x0.size() != 2 * n) throw ValidationError("initial state has the wrong size");

  std::vector<double> switches{t0};
  for (const auto& s : forcing.segments)
    if (s.start > t0 && s.start < t_end) switches.push_back(s.start);
  switches.push_back(t_end);

  std::vector<double> grid;
  const auto steps = static_cast<long>(std::floor((t_end - t0) / options.output_step + 1e-9));
  for (long k = 0; k <= steps; ++k) grid.push_back(t0 + static_cast<double>(k) * options.output_step);
  for (double s : switches) grid.push_back(s);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end(), [&](double a, double b) { return b - a < 1e-12; }), grid.end());
  for (double& g : grid)
    for (double s : switches)
      if (std::abs(g - s) < 1e-12) g = s;

  Trajectory tr;
  tr.generator_ids = model.generator_ids;
  tr.nominal_hz = model.nominal_hz;
  std::vector<double> x(static_cast<std::size_t>(2 * n), 0.0);
  if (x0.size()) std::copy(x0.data(), x0.data() + 2 * n, x.begin());
  std::vector<std::vector<double>> rows, accels;

  Rhs rhs{model, Eigen::VectorXd(), model.inertia.cwiseInverse()};
  for (std::size_t s = 0; s + 1 < switches.size(); ++s) {
    const double a = switches[s], b = switches[s + 1];
    rhs.force = model.bm * forcing.at(a, nl);
    std::vector<double> times;
    for (double g : grid)
      if (g >= a && g <= b) times.push_back(g);
    auto observe = [&](const std::vector<double>& state, double t) {
      std::vector<double> dx(state.size());
      rhs(state, dx, t);
      tr.t.push_back(t);
      rows.push_back(state);
      accels.emplace_back(dx.begin() + n, dx.end());
    };
    try {
      auto stepper = odeint::make_controlled(options.abs_tol, options.rel_tol, odeint::runge_kutta_dopri5<std::vector<double>>());
      odeint::integrate_times(stepper, std::ref(rhs), x, times.begin(), times.end(),
                              std::min(options.initial_step, b - a), observe);
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "integration stalled near t = " << (tr.t.empty() ? a : tr.t.back()) << " (" << e.what()
          << "); last state:";
      for (double v : (rows.empty() ? x : rows.back())) msg << ' ' << v;
      throw NumericalError(msg.str());
    }
  }

  tr.states.resize(static_cast<Eigen::Index>(rows.size()), 2 * n);
  tr.accel.resize(static_cast<Eigen::Index>(rows.size()), n);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    tr.states.row(static_cast<Eigen::Index>(k)) = Eigen::Map<const Eigen::RowVectorXd>(rows[k].data(), 2 * n);
    tr.accel.row(static_cast<Eigen::Index>(k)) = Eigen::Map<const Eigen::RowVectorXd>(accels[k].data(), n);
  }
  return tr;
}

void ProtectionScheme::validate(double nominal_hz) const {
  if (!(under_hz < nominal_hz && nominal_hz < over_hz))
    throw ValidationError("scheme " + name + ": limits must bracket the nominal frequency");
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    if (!(ladder[k].shed_fraction > 0 && ladder[k].shed_fraction <= 1))
      throw ValidationError("scheme " + name + ": stage " + std::to_string(k + 1) + " shed fraction outside (0, 1]");
    if (!(ladder[k].threshold_hz < nominal_hz))
      throw ValidationError("scheme " + name + ": stage " + std::to_string(k + 1) + " threshold above nominal");
    if (k && !(ladder[k].threshold_hz < ladder[k - 1].threshold_hz))
      throw ValidationError("scheme " + name + ": ladder thresholds must strictly decrease");
  }
}

ProtectionScheme protection_preset(const std::string& name) {
  std::string up = name;
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
  if (up == "NERC") return {"NERC", 59.5, 62.2, {}};
  if (up == "ERCOT") return {"ERCOT", 59.3, 61.8, {{59.3, 0.05}, {58.9, 0.10}, {58.5, 0.10}}};
  if (up == "NYISO") return {"NYISO", 59.9, 60.1, {{59.5, 0.07}, {59.3, 0.07}, {59.1, 0.07}, {58.9, 0.07}}};
  throw ValidationError("unknown protection scheme '" + name + "'");
}

ProtectionScheme parse_protection(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("protection scheme: ") + e.what());
  }
  ProtectionScheme s;
  try {
    s.name = j.value("name", std::string("custom"));
    s.under_hz = j.at("under_hz").get<double>();
    s.over_hz = j.at("over_hz").get<double>();
    if (j.contains("ladder"))
      for (const auto& st : j.at("ladder")) s.ladder.push_back({st.at("threshold_hz").get<double>(), st.at("shed_fraction").get<double>()});
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("protection scheme: ") + e.what());
  }
  return s;
}

double ScenarioResult::system_nadir() const { return *std::min_element(nadir_hz.begin(), nadir_hz.end()); }
double ScenarioResult::system_zenith() const { return *std::max_element(zenith_hz.begin(), zenith_hz.end()); }

namespace {

// Earliest time any generator falls below `level_hz` at or after index `from`.
std::optional<double> first_drop_below(const Trajectory& tr, double level_hz, std::size_t from = 0) {
  const std::size_t ng = tr.num_generators();
  for (std::size_t k = from; k < tr.t.size(); ++k) {
    bool below = false;
    for (std::size_t g = 0; g < ng; ++g) below = below || tr.frequency_hz(k, g) < level_hz;
    if (!below) continue;
    if (k == from || tr.t[k] == tr.t[k - 1]) return tr.t[k];
    double best = tr.t[k];
    for (std::size_t g = 0; g < ng; ++g)
      if (tr.frequency_hz(k, g) < level_hz) best = std::min(best, bisect_crossing(tr, k - 1, g, level_hz));
    return best;
  }
  return std::nullopt;
}

void fill_extremes(ScenarioResult& r) {
  const std::size_t ng = r.trajectory.num_generators();
  r.nadir_hz.assign(ng, r.trajectory.nominal_hz);
  r.zenith_hz.assign(ng, r.trajectory.nominal_hz);
  for (std::size_t k = 0; k < r.trajectory.t.size(); ++k)
    for (std::size_t g = 0; g < ng; ++g) {
      r.nadir_hz[g] = std::min(r.nadir_hz[g], r.trajectory.frequency_hz(k, g));
      r.zenith_hz[g] = std::max(r.zenith_hz[g], r.trajectory.frequency_hz(k, g));
    }
}

void find_crossings(ScenarioResult& r, const ProtectionScheme& scheme) {
  const auto& tr = r.trajectory;
  for (std::size_t g = 0; g < tr.num_generators(); ++g) {
    for (std::size_t k = 0; k + 1 < tr.t.size(); ++k) {
      if (tr.t[k + 1] == tr.t[k]) continue;
      const double f0 = tr.frequency_hz(k, g), f1 = tr.frequency_hz(k + 1, g);
      if (f0 >= scheme.under_hz && f1 < scheme.under_hz)
        r.events.push_back({bisect_crossing(tr, k, g, scheme.under_hz), tr.generator_ids[g], true, scheme.under_hz});
      if (f0 <= scheme.over_hz && f1 > scheme.over_hz)
        r.events.push_back({bisect_crossing(tr, k, g, scheme.over_hz), tr.generator_ids[g], false, scheme.over_hz});
    }
    if (!tr.t.empty()) {
      if (tr.frequency_hz(0, g) < scheme.under_hz) r.events.push_back({tr.t[0], tr.generator_ids[g], true, scheme.under_hz});
      if (tr.frequency_hz(0, g) > scheme.over_hz) r.events.push_back({tr.t[0], tr.generator_ids[g], false, scheme.over_hz});
    }
  }
  std::sort(r.events.begin(), r.events.end(), [](const CrossingEvent& a, const CrossingEvent& b) {
    if (a.time != b.time) return a.time < b.time;
    return a.generator < b.generator;
  });
}

}  // namespace

ScenarioResult monitor(const Trajectory& trajectory, const ProtectionScheme& scheme, MonitorMode,
                       double total_load_mw) {
  scheme.validate(trajectory.nominal_hz);
  ScenarioResult r;
  r.trajectory = trajectory;
  fill_extremes(r);
  find_crossings(r, scheme);
  for (std::size_t s = 0; s < scheme.ladder.size(); ++s) {
    const auto& st = scheme.ladder[s];
    if (auto tc = first_drop_below(trajectory, st.threshold_hz))
      r.ufls.push_back({*tc, static_cast<int>(s + 1), st.threshold_hz, st.shed_fraction, st.shed_fraction * total_load_mw});
  }
  return r;
}

ScenarioResult simulate(const Scenario& sc, const ProtectionScheme& scheme, MonitorMode mode) {
  const auto& m = sc.model;
  const auto nl = static_cast<Eigen::Index>(m.num_loads());
  scheme.validate(m.nominal_hz);
  Eigen::VectorXd base = sc.base_load.size() ? sc.base_load : Eigen::VectorXd::Zero(nl);
  if (base.size() != nl) throw ValidationError("base load vector has the wrong size");

  if (mode == MonitorMode::Observe) {
    auto tr = integrate(m, sc.forcing, sc.t_end, sc.integrate);
    ScenarioResult r = monitor(tr, scheme, mode);
    for (auto& a : r.ufls) a.shed_mw = a.shed_fraction * (base + sc.forcing.at(a.time, nl)).sum() * m.base_mva;
    return r;
  }

  Forcing f = sc.forcing;
  double t = 0.0;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(2 * static_cast<Eigen::Index>(m.num_generators()));
  Trajectory full;
  std::vector<UflsActivation> ufls;
  std::size_t fired = 0;

  auto append = [&](const Trajectory& part, std::size_t count) {
    if (full.t.empty()) {
      full.generator_ids = part.generator_ids;
      full.nominal_hz = part.nominal_hz;
      full.states.resize(0, part.states.cols());
      full.accel.resize(0, part.accel.cols());
    }
    const auto old = full.states.rows();
    full.states.conservativeResize(old + static_cast<Eigen::Index>(count), Eigen::NoChange);
    full.accel.conservativeResize(old + static_cast<Eigen::Index>(count), Eigen::NoChange);
    full.states.bottomRows(static_cast<Eigen::Index>(count)) = part.states.topRows(static_cast<Eigen::Index>(count));
    full.accel.bottomRows(static_cast<Eigen::Index>(count)) = part.accel.topRows(static_cast<Eigen::Index>(count));
    full.t.insert(full.t.end(), part.t.begin(), part.t.begin() + static_cast<long>(count));
  };

  while (true) {
    const Trajectory part = integrate(m, f, t, sc.t_end, x, sc.integrate);
    std::optional<double> tc;
    if (fired < scheme.ladder.size()) tc = first_drop_below(part, scheme.ladder[fired].threshold_hz);
    if (!tc || *tc >= sc.t_end) {
      append(part, part.t.size());
      break;
    }
    // Keep samples before the crossing, then land exactly on it.
    std::size_t keep = 0;
    while (keep < part.t.size() && part.t[keep] < *tc) ++keep;
    if (keep > 0) {
      append(part, keep);
      if (*tc > part.t[keep - 1]) {
        const Trajectory bridge = integrate(m, f, part.t[keep - 1], *tc, part.states.row(static_cast<Eigen::Index>(keep - 1)).transpose(), sc.integrate);
        append(Trajectory{{bridge.t.back()}, bridge.states.bottomRows(1), bridge.accel.bottomRows(1), bridge.generator_ids, bridge.nominal_hz}, 1);
        x = bridge.states.bottomRows(1).transpose();
      } else {
        x = part.states.row(static_cast<Eigen::Index>(keep - 1)).transpose();
      }
    } else {
      x = part.states.row(0).transpose();
    }
    const auto& st = scheme.ladder[fired];
    const Eigen::VectorXd total = base + f.at(*tc, nl);
    f.add_from(*tc, -st.shed_fraction * total);
    ufls.push_back({*tc, static_cast<int>(fired + 1), st.threshold_hz, st.shed_fraction,
                    st.shed_fraction * total.sum() * m.base_mva});
    ++fired;
    t = *tc;
  }

  ScenarioResult r;
  r.trajectory = std::move(full);
  fill_extremes(r);
  find_crossings(r, scheme);
  r.ufls = std::move(ufls);
  return r;
}

std::vector<int> attack_order(const GridCase& grid) {
  std::vector<LoadParams> loads = grid.loads;
  std::stable_sort(loads.begin(), loads.end(), [](const LoadParams& a, const LoadParams& b) {
    if (a.vulnerable_cap != b.vulnerable_cap) return a.vulnerable_cap > b.vulnerable_cap;
    return a.bus < b.bus;
  });
  std::vector<int> out;
  for (const auto& l : loads) out.push_back(l.bus);
  return out;
}

std::vector<SweepCell> sweep_multibus(const GridCase& grid, const DynamicModel& model, const ProtectionScheme& scheme,
                                      const SweepOptions& options) {
  scheme.validate(model.nominal_hz);
  const auto order = attack_order(grid);
  const auto nl = static_cast<Eigen::Index>(grid.num_loads());
  std::vector<SweepCell> cells;
  for (double scale : options.scales) {
    if (!(scale >= 0)) throw ValidationError("attack scale must be nonnegative");
    for (int count : options.counts) {
      if (count < 0 || static_cast<std::size_t>(count) > order.size())
        throw ValidationError("attacked-bus count " + std::to_string(count) + " exceeds the " +
                              std::to_string(order.size()) + " load buses");
      SweepCell c;
      c.count = count;
      c.scale = scale;
      c.buses.assign(order.begin(), order.begin() + count);
      cells.push_back(std::move(c));
    }
  }
  parallel_for(
      cells.size(),
      [&](std::size_t k) {
        SweepCell& c = cells[k];
        Eigen::VectorXd u = Eigen::VectorXd::Zero(nl);
        for (int bus : c.buses) {
          const auto i = *grid.load_index(bus);
          const auto& l = grid.loads[i];
          u(static_cast<Eigen::Index>(i)) = c.scale * (l.secure + l.vulnerable_cap);
        }
        c.attack_mw = u.sum() * grid.base_mva;
        c.nadir_hz = model.nominal_hz;
        if (c.count == 0 || u.isZero(0.0)) return;
        const auto tr = integrate(model, Forcing::pulse(u, options.pulse_start, options.pulse_duration), options.t_end,
                                  options.integrate);
        for (std::size_t s = 0; s < tr.t.size(); ++s)
          for (std::size_t g = 0; g < tr.num_generators(); ++g) {
            const double f = tr.frequency_hz(s, g);
            if (f < c.nadir_hz) {
              c.nadir_hz = f;
              c.nadir_time = tr.t[s];
              c.nadir_generator = tr.generator_ids[g];
            }
          }
        c.crosses_under = c.nadir_hz < scheme.under_hz;
      },
      options.max_threads);
  return cells;
}

std::string trajectory_to_csv(const Trajectory& tr) {
  const auto ng = static_cast<Eigen::Index>(tr.num_generators());
  std::vector<std::string> head{"t"};
  for (int g : tr.generator_ids) head.push_back("delta_" + std::to_string(g));
  for (int g : tr.generator_ids) head.push_back("omega_" + std::to_string(g));
  for (int g : tr.generator_ids) head.push_back("freq_hz_" + std::to_string(g));
  std::string out = csv_row(head);
  for (std::size_t k = 0; k < tr.t.size(); ++k) {
    std::vector<std::string> row{fmt(tr.t[k])};
    for (Eigen::Index c = 0; c < 2 * ng; ++c) row.push_back(fmt(tr.states(static_cast<Eigen::Index>(k), c)));
    for (Eigen::Index g = 0; g < ng; ++g) row.push_back(fmt(tr.frequency_hz(k, static_cast<std::size_t>(g))));
    out += csv_row(row);
  }
  return out;
}

std::string events_to_csv(const ScenarioResult& r) {
  std::string out = csv_row({"time", "kind", "generator", "limit_hz", "stage", "shed_fraction", "shed_mw"});
  std::vector<std::pair<double, std::string>> rows;
  for (const auto& e : r.events)
    rows.push_back({e.time, csv_row({fmt(e.time), e.under ? "under" : "over", std::to_string(e.generator),
                                     fmt(e.limit_hz), "", "", ""})});
  for (const auto& a : r.ufls)
    rows.push_back({a.time, csv_row({fmt(a.time), "ufls", "", fmt(a.threshold_hz), std::to_string(a.stage),
                                     fmt(a.shed_fraction), fmt(a.shed_mw)})});
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [_, line] : rows) out += line;
  return out;
}

std::string sweep_to_csv(const std::vector<SweepCell>& cells) {
  std::string out = csv_row({"count", "scale", "attack_mw", "nadir_hz", "nadir_time", "nadir_generator", "crosses_under"});
  for (const auto& c : cells)
    out += csv_row({std::to_string(c.count), fmt(c.scale), fmt(c.attack_mw), fmt(c.nadir_hz), fmt(c.nadir_time),
                    std::to_string(c.nadir_generator), c.crosses_under ? "1" : "0"});
  return out;
}

}  // namespace laa
