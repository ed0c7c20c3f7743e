#pragma once

#include "laa/dynamics.hpp"
#include "laa/grid_model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace laa {

/// Piecewise-constant load forcing in p.u., one entry per load bus. Zero
/// before the first segment; each segment holds until the next one starts.
struct Forcing {
  struct Segment {
    double start = 0.0;
    Eigen::VectorXd u;
  };
  std::vector<Segment> segments;

  static Forcing step(const Eigen::VectorXd& u, double start = 0.0);
  static Forcing pulse(const Eigen::VectorXd& u, double start, double duration);

  Eigen::VectorXd at(double t, Eigen::Index num_loads) const;
  /// Adds `du` to the forcing from time t on.
  void add_from(double t, const Eigen::VectorXd& du);
};

struct IntegrateOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double output_step = 1e-3;
  double initial_step = 1e-4;
};

/// Sampled solution. `states` rows hold [delta; omega] per sample, `accel`
/// rows hold d omega / dt, which feeds cubic Hermite interpolation.
struct Trajectory {
  std::vector<double> t;
  Eigen::MatrixXd states;
  Eigen::MatrixXd accel;
  std::vector<int> generator_ids;
  double nominal_hz = 60.0;

  std::size_t num_generators() const { return generator_ids.size(); }
  double frequency_hz(std::size_t sample, std::size_t g) const;
  /// Interpolated omega of generator g at time t.
  double omega_at(std::size_t g, double t) const;
};

/// Adaptive Dormand-Prince 5(4) integration of M d'' + C d' + G d = B^M u(t).
/// Forcing switch times are mesh points. Throws NumericalError if the
/// stepper stalls, naming the last state reached.
Trajectory integrate(const DynamicModel& model, const Forcing& forcing, double t_end,
                     const IntegrateOptions& options = {});
Trajectory integrate(const DynamicModel& model, const Forcing& forcing, double t0, double t_end,
                     const Eigen::VectorXd& x0, const IntegrateOptions& options = {});

struct UflsStage {
  double threshold_hz = 0.0;
  double shed_fraction = 0.0;
};

struct ProtectionScheme {
  std::string name;
  double under_hz = 59.5;
  double over_hz = 62.2;
  std::vector<UflsStage> ladder;  // thresholds strictly decreasing

  void validate(double nominal_hz) const;
};

/// Built-in schemes: "NERC", "ERCOT", "NYISO" (case-insensitive).
ProtectionScheme protection_preset(const std::string& name);
ProtectionScheme parse_protection(const std::string& json_text);

enum class MonitorMode { Observe, Shed };

struct CrossingEvent {
  double time = 0.0;
  int generator = 0;  // bus id
  bool under = true;  // under- or over-frequency limit
  double limit_hz = 0.0;
};

struct UflsActivation {
  double time = 0.0;
  int stage = 0;  // 1-based
  double threshold_hz = 0.0;
  double shed_fraction = 0.0;
  double shed_mw = 0.0;
};

struct ScenarioResult {
  Trajectory trajectory;
  std::vector<CrossingEvent> events;
  std::vector<UflsActivation> ufls;
  std::vector<double> nadir_hz;   // per generator
  std::vector<double> zenith_hz;

  double system_nadir() const;
  double system_zenith() const;
};

/// Annotates limit crossings (per generator, refined by bisection on the
/// Hermite interpolant) and ladder stages. A stage fires the first time any
/// generator drops below its threshold; shed MW is the stage fraction of
/// `total_load_mw`. Only `simulate` feeds shedding back into the dynamics.
ScenarioResult monitor(const Trajectory& trajectory, const ProtectionScheme& scheme,
                       MonitorMode mode = MonitorMode::Observe, double total_load_mw = 0.0);

struct Scenario {
  DynamicModel model;
  Forcing forcing;
  Eigen::VectorXd base_load;  // p.u. per load bus, the load a stage sheds from
  double t_end = 20.0;
  IntegrateOptions integrate;
};

/// Integrates and monitors. In shed mode every stage crossing reduces the
/// load at each bus by the stage fraction of its current total (base load
/// plus forcing) and integration restarts from the crossing instant.
ScenarioResult simulate(const Scenario& scenario, const ProtectionScheme& scheme, MonitorMode mode);

struct SweepOptions {
  std::vector<int> counts{5, 15, 25, 35, 45};
  std::vector<double> scales{0.20, 0.50};
  double pulse_start = 0.0;
  double pulse_duration = 15.0;
  double t_end = 30.0;
  IntegrateOptions integrate{1e-9, 1e-12, 1e-3, 1e-4};
  std::size_t max_threads = 0;
};

struct SweepCell {
  int count = 0;
  double scale = 0.0;
  std::vector<int> buses;
  double attack_mw = 0.0;
  double nadir_hz = 0.0;
  double nadir_time = 0.0;
  int nadir_generator = 0;
  bool crosses_under = false;
};

/// Load buses ordered by descending vulnerable load, ties by bus id.
std::vector<int> attack_order(const GridCase& grid);

/// For every (count, scale) pair: scale the total load of the first `count`
/// buses of attack_order by `scale` for the pulse and record the nadir.
std::vector<SweepCell> sweep_multibus(const GridCase& grid, const DynamicModel& model,
                                      const ProtectionScheme& scheme, const SweepOptions& options = {});

std::string trajectory_to_csv(const Trajectory& t);
std::string events_to_csv(const ScenarioResult& r);
std::string sweep_to_csv(const std::vector<SweepCell>& cells);

}  // namespace laa
