#pragma once

#include "laa/dynamics.hpp"
#include "laa/modal_series.hpp"

#include <optional>
#include <string>
#include <vector>

namespace laa {

/// Unit-step response of the reduced model to a load increase at one load
/// bus. Rows 0..N_G-1 are angle deviations (rad), rows N_G..2N_G-1 frequency
/// deviations (rad/s).
struct ResponseKernel {
  int bus = 0;
  std::size_t index = 0;  // position in the canonical load ordering
  std::size_t num_generators = 0;
  ModalSeries series;

  Eigen::VectorXd eval(double t) const { return series.eval(t); }
  double frequency(std::size_t generator, double t) const {
    return series.component(static_cast<Eigen::Index>(num_generators + generator), t);
  }
};

/// f_i(t) = sum_j phi(lambda_j, t) k_ji z_j.
ResponseKernel kernel(const EigenSolution& eig, std::size_t load_index);
ResponseKernel kernel_for_bus(const EigenSolution& eig, int bus_id);

/// Steady state of a unit step at load bus i: angles G~^-1 b_i, frequencies 0.
Eigen::VectorXd static_response(const DynamicModel& model, std::size_t load_index);

/// Sampled state trajectory. `states` is times x 2N_G.
struct StateSeries {
  std::vector<double> t;
  Eigen::MatrixXd states;
};

struct RespondOptions {
  bool enforce_cap = false;
  Eigen::VectorXd vulnerable_cap;  // p.u., needed when enforce_cap is set
};

/// Superposition sum_i (attack_i + baseline_i) f_i(t); all inputs in p.u.
StateSeries respond(const EigenSolution& eig, const Eigen::VectorXd& attack,
                    const Eigen::VectorXd& baseline, const std::vector<double>& t_grid,
                    const RespondOptions& options = {});

/// The combined forcing series sum_i u_i f_i as a single modal series.
ModalSeries forced_series(const EigenSolution& eig, const Eigen::VectorXd& forcing);

/// Which generator frequencies count toward the peak.
struct TargetGenerator {
  std::optional<std::size_t> index;  // empty: worst case over all generators
  static TargetGenerator all() { return {}; }
  static TargetGenerator at(std::size_t g) { return {g}; }
};

struct BusAssessment {
  int bus = 0;
  bool attackable = true;
  double epsilon_pu = 0.0;
  double epsilon_mw = 0.0;
  double t_star = 0.0;
  std::size_t critical_generator = 0;  // canonical index of the generator that peaks
  double peak = 0.0;                   // max_t |f_{i,n}(t)|, rad/s per p.u.
  long units = 0;
  long buildings = 0;
};

struct AttackAssessment {
  TargetGenerator target;
  double threshold_hz = 0.1;
  double base_mva = 100.0;
  std::vector<BusAssessment> buses;  // ordered by bus id
  std::optional<std::size_t> best;   // index into `buses`
  std::vector<std::string> warnings;

  const BusAssessment& for_bus(int bus_id) const;
};

struct LeastEffortOptions {
  PeakOptions peak;
  std::size_t max_threads = 0;  // 0: hardware concurrency
};

/// epsilon_{i,n} = omega_max / max_t |f_{i,n}(t)| for every load bus.
AttackAssessment least_effort(const EigenSolution& eig, TargetGenerator target, double threshold_hz,
                              const LeastEffortOptions& options = {});

/// Assessment of a given set of kernels (used for predicted kernels too).
AttackAssessment assess_kernels(const std::vector<ResponseKernel>& kernels, TargetGenerator target,
                                double threshold_hz, double base_mva,
                                const LeastEffortOptions& options = {});

struct Feasibility {
  long units = 0;
  long buildings = 0;
};

inline constexpr double kUnitSwingKw = 15.8 - 7.1;
inline constexpr long kUnitsPerBuilding = 50;

/// Air-conditioner units and buildings needed for an attack of `mw`.
Feasibility feasibility(double mw);

std::string assessment_to_json(const AttackAssessment& a, const std::vector<int>& generator_ids);

/// CSV with columns t, delta_1.., omega_1.. (rad/s), freq_hz_1.. (absolute Hz).
std::string states_to_csv(const StateSeries& s, const std::vector<int>& generator_ids,
                          double nominal_hz);

}  // namespace laa
