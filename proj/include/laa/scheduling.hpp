#pragma once

#include "laa/dynamics.hpp"
#include "laa/response.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace laa {

/// Hourly inputs before scheduling. Residual load is per load bus (MW),
/// one row per hour; columns follow `buses`.
struct ProfileInputs {
  std::vector<int> buses;
  Eigen::MatrixXd residual_load;          // hours x buses, MW
  std::vector<double> renewable_fraction; // per hour, system level
  std::vector<double> total_load;         // per hour, MW, used by reserve presets
  double sigma = 0.0;
  std::uint64_t seed = 0;

  std::size_t hours() const { return renewable_fraction.size(); }
};

enum class SchedulePolicy { MatchForecast, ForecastPlusMargin };

/// How scheduled capacity is split between generation and reserve.
enum class ReservePreset {
  None,
  PeakLoad3,           // 3% of daily peak load
  Load3Generation3,    // 3% of load + 3% of generation
  LargestUnit,         // largest online unit
  Hydro5Conventional7, // 5% hydro + 7% conventional (treated as 7% of generation)
};

ReservePreset parse_reserve_preset(const std::string& name);
std::string to_string(ReservePreset p);

struct ScheduleOptions {
  SchedulePolicy policy = SchedulePolicy::MatchForecast;
  double margin = 0.0;
  ReservePreset reserve = ReservePreset::None;
  double largest_unit_mw = 0.0;
};

struct TemporalProfile {
  std::vector<int> buses;
  Eigen::MatrixXd residual;    // X, hours x buses, MW
  Eigen::MatrixXd forecast;    // X^
  Eigen::MatrixXd generation;  // G
  Eigen::MatrixXd reserve;     // R
  Eigen::MatrixXd draws;       // Y
  std::vector<double> renewable_fraction;
  double sigma = 0.0;
  std::uint64_t seed = 0;

  std::size_t hours() const { return renewable_fraction.size(); }
};

/// X^ = X (1 + sigma Y) with per-bus, per-hour standard normal draws from a
/// stream seeded by `inputs.seed`; G + R = X^ (or (1+m) X^).
TemporalProfile schedule(const ProfileInputs& inputs, const ScheduleOptions& options = {});

/// max(X - G - R, 0) at hour t, MW, one entry per profile bus.
Eigen::VectorXd mismatch_mw(const TemporalProfile& profile, std::size_t hour);

/// Mismatch mapped onto the case load ordering, p.u. on `base_mva`.
Eigen::VectorXd mismatch(const TemporalProfile& profile, std::size_t hour, const std::vector<int>& load_ids,
                         double base_mva);

struct TemporalOptions {
  std::vector<int> renewable_generators;  // generator buses whose inertia follows r^t
  ModelOptions model;
  PeakOptions peak;
  std::size_t max_threads = 0;
};

struct TemporalPoint {
  std::size_t hour = 0;
  double renewable_fraction = 0.0;
  double mismatch_mw = 0.0;     // total over buses
  double required_mw = 0.0;
  bool baseline_exceeds = false;  // mismatch alone breaches the threshold
};

/// Required attack at `attack_bus` per hour. The eigensolution, kernel and
/// unconstrained least effort of an hour depend only on its renewable
/// fraction, so they are cached across profiles (seeds, sigma sweeps).
class TemporalAnalyzer {
 public:
  TemporalAnalyzer(const GridCase& grid, int attack_bus, TargetGenerator target, double threshold_hz,
                   const TemporalOptions& options);
  ~TemporalAnalyzer();
  TemporalAnalyzer(const TemporalAnalyzer&) = delete;
  TemporalAnalyzer& operator=(const TemporalAnalyzer&) = delete;

  std::vector<TemporalPoint> evaluate(const TemporalProfile& profile) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Required attack at `attack_bus` per hour for the frequency deviation of
/// the target generator(s) to reach `threshold_hz`, given that hour's
/// inertia and scheduling mismatch.
std::vector<TemporalPoint> temporal_vulnerability(const GridCase& grid, const TemporalProfile& profile,
                                                  int attack_bus, TargetGenerator target, double threshold_hz,
                                                  const TemporalOptions& options);

std::string temporal_to_csv(const std::vector<TemporalPoint>& points);

/// Hourly profile CSV: columns hour, load_mw, renewable_mw, and optionally
/// bus. Without a bus column the residual load is spread over `allocation`
/// (bus -> share); `scale` multiplies all MW values.
ProfileInputs load_profile(const std::filesystem::path& path, const std::map<int, double>& allocation,
                           double scale = 1.0);

}  // namespace laa
