#include "laa/response.hpp"

#include "laa/csv.hpp"
#include "laa/error.hpp"
#include "laa/parallel.hpp"

#include <json.hpp>

#include <cmath>
#include <numbers>

namespace laa {

ResponseKernel kernel(const EigenSolution& eig, std::size_t load_index) {
  if (load_index >= eig.model.num_loads())
    throw ValidationError("load index " + std::to_string(load_index) + " out of range");
  if (!eig.normalized) throw NumericalError("kernel requires a normalized eigensolution");
  ResponseKernel k;
  k.index = load_index;
  k.bus = eig.model.load_ids[load_index];
  k.num_generators = eig.model.num_generators();
  k.series.lambda = eig.eigenvalues;
  k.series.phi_coef = eig.right * eig.coupling.col(static_cast<Eigen::Index>(load_index)).asDiagonal();
  return k;
}

ResponseKernel kernel_for_bus(const EigenSolution& eig, int bus_id) {
  const auto& ids = eig.model.load_ids;
  for (std::size_t k = 0; k < ids.size(); ++k)
    if (ids[k] == bus_id) return kernel(eig, k);
  throw ValidationError("bus " + std::to_string(bus_id) + " is not a load bus");
}

Eigen::VectorXd static_response(const DynamicModel& model, std::size_t load_index) {
  const Eigen::Index n = static_cast<Eigen::Index>(model.num_generators());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(2 * n);
  out.head(n) = model.stiffness.fullPivLu().solve(model.bm.col(static_cast<Eigen::Index>(load_index)));
  return out;
}

ModalSeries forced_series(const EigenSolution& eig, const Eigen::VectorXd& forcing) {
  if (forcing.size() != static_cast<Eigen::Index>(eig.model.num_loads()))
    throw ValidationError("forcing vector has " + std::to_string(forcing.size()) + " entries, expected " +
                          std::to_string(eig.model.num_loads()));
  ModalSeries s;
  s.lambda = eig.eigenvalues;
  const Eigen::VectorXcd w = eig.coupling * forcing.cast<Complex>();
  s.phi_coef = eig.right * w.asDiagonal();
  return s;
}

StateSeries respond(const EigenSolution& eig, const Eigen::VectorXd& attack,
                    const Eigen::VectorXd& baseline, const std::vector<double>& t_grid,
                    const RespondOptions& options) {
  const auto nl = static_cast<Eigen::Index>(eig.model.num_loads());
  if (attack.size() != nl || baseline.size() != nl)
    throw ValidationError("attack and baseline must have one entry per load bus");
  if (options.enforce_cap) {
    if (options.vulnerable_cap.size() != nl) throw ValidationError("vulnerable cap vector has the wrong size");
    for (Eigen::Index i = 0; i < nl; ++i) {
      if (std::abs(attack(i)) > options.vulnerable_cap(i) * (1 + 1e-12))
        throw ValidationError("attack at bus " + std::to_string(eig.model.load_ids[static_cast<std::size_t>(i)]) +
                              " exceeds its vulnerable load cap");
    }
  }
  for (double t : t_grid)
    if (!(t >= 0)) throw ValidationError("time grid must be nonnegative");
  StateSeries out;
  out.t = t_grid;
  out.states = forced_series(eig, attack + baseline).sample_at(t_grid);
  return out;
}

const BusAssessment& AttackAssessment::for_bus(int bus_id) const {
  for (const auto& b : buses)
    if (b.bus == bus_id) return b;
  throw ValidationError("bus " + std::to_string(bus_id) + " not in assessment");
}

Feasibility feasibility(double mw) {
  if (!(mw > 0)) throw ValidationError("attack magnitude must be positive");
  const double x = mw * 1000.0 / kUnitSwingKw;
  // Tolerate representation error so exact multiples do not round up.
  const auto units = static_cast<long>(std::ceil(x - 1e-9 * std::max(1.0, x)));
  return {units, (units + kUnitsPerBuilding - 1) / kUnitsPerBuilding};
}

AttackAssessment assess_kernels(const std::vector<ResponseKernel>& kernels, TargetGenerator target,
                                double threshold_hz, double base_mva, const LeastEffortOptions& options) {
  if (!(threshold_hz > 0)) throw ValidationError("threshold must be positive");
  AttackAssessment a;
  a.target = target;
  a.threshold_hz = threshold_hz;
  a.base_mva = base_mva;
  a.buses.resize(kernels.size());
  const double omega_max = 2.0 * std::numbers::pi * threshold_hz;

  parallel_for(
      kernels.size(),
      [&](std::size_t k) {
        const auto& kern = kernels[k];
        const auto ng = static_cast<Eigen::Index>(kern.num_generators);
        if (target.index && *target.index >= kern.num_generators)
          throw ValidationError("target generator index out of range");
        const Eigen::Index first = ng + (target.index ? static_cast<Eigen::Index>(*target.index) : 0);
        const Eigen::Index count = target.index ? 1 : ng;
        const auto peaks = find_peaks(kern.series, first, count, options.peak);
        std::size_t best = 0;
        for (std::size_t p = 1; p < peaks.size(); ++p)
          if (peaks[p].magnitude() > peaks[best].magnitude()) best = p;
        BusAssessment& b = a.buses[k];
        b.bus = kern.bus;
        b.critical_generator = (target.index ? *target.index : 0) + best;
        b.peak = peaks[best].magnitude();
        b.t_star = peaks[best].time;
        if (!(b.peak > 1e-14)) {
          b.attackable = false;
          return;
        }
        b.epsilon_pu = omega_max / b.peak;
        b.epsilon_mw = b.epsilon_pu * base_mva;
        const auto f = feasibility(b.epsilon_mw);
        b.units = f.units;
        b.buildings = f.buildings;
      },
      options.max_threads);

  for (std::size_t k = 0; k < a.buses.size(); ++k) {
    const auto& b = a.buses[k];
    if (!b.attackable) {
      a.warnings.push_back("unattackable from bus " + std::to_string(b.bus));
      continue;
    }
    if (!a.best || b.epsilon_pu < a.buses[*a.best].epsilon_pu) a.best = k;
  }
  return a;
}

AttackAssessment least_effort(const EigenSolution& eig, TargetGenerator target, double threshold_hz,
                              const LeastEffortOptions& options) {
  std::vector<ResponseKernel> kernels;
  kernels.reserve(eig.model.num_loads());
  for (std::size_t i = 0; i < eig.model.num_loads(); ++i) kernels.push_back(kernel(eig, i));
  return assess_kernels(kernels, target, threshold_hz, eig.model.base_mva, options);
}

std::string assessment_to_json(const AttackAssessment& a, const std::vector<int>& generator_ids) {
  using Json = nlohmann::json;
  Json doc;
  doc["target_generator"] = a.target.index ? Json(generator_ids.at(*a.target.index)) : Json("all");
  doc["threshold_hz"] = a.threshold_hz;
  doc["base_mva"] = a.base_mva;
  doc["buses"] = Json::array();
  for (const auto& b : a.buses) {
    Json e;
    e["bus"] = b.bus;
    e["attackable"] = b.attackable;
    if (b.attackable) {
      e["epsilon_mw"] = b.epsilon_mw;
      e["epsilon_pu"] = b.epsilon_pu;
      e["t_star"] = b.t_star;
      e["critical_generator"] = generator_ids.at(b.critical_generator);
      e["peak_rad_per_s_per_pu"] = b.peak;
      e["ac_units"] = b.units;
      e["buildings"] = b.buildings;
    }
    doc["buses"].push_back(std::move(e));
  }
  doc["least_effort_bus"] = a.best ? Json(a.buses[*a.best].bus) : Json(nullptr);
  doc["warnings"] = a.warnings;
  return doc.dump(2) + "\n";
}

std::string states_to_csv(const StateSeries& s, const std::vector<int>& generator_ids, double nominal_hz) {
  const auto ng = static_cast<Eigen::Index>(generator_ids.size());
  std::vector<std::string> head{"t"};
  for (int g : generator_ids) head.push_back("delta_" + std::to_string(g));
  for (int g : generator_ids) head.push_back("omega_" + std::to_string(g));
  for (int g : generator_ids) head.push_back("freq_hz_" + std::to_string(g));
  std::string out = csv_row(head);
  for (std::size_t k = 0; k < s.t.size(); ++k) {
    const auto r = static_cast<Eigen::Index>(k);
    std::vector<std::string> row{fmt(s.t[k])};
    for (Eigen::Index g = 0; g < 2 * ng; ++g) row.push_back(fmt(s.states(r, g)));
    for (Eigen::Index g = 0; g < ng; ++g)
      row.push_back(fmt(nominal_hz + s.states(r, ng + g) / (2.0 * std::numbers::pi)));
    out += csv_row(row);
  }
  return out;
}

}  // namespace laa
