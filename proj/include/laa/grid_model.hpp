#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace laa {

enum class BusKind { Generator, Load };

struct Bus {
  int id = 0;
  BusKind kind = BusKind::Load;
  bool operator==(const Bus&) const = default;
};

/// Lossless branch; susceptance in p.u. on the system base.
struct Branch {
  int from = 0;
  int to = 0;
  double susceptance = 0.0;
  bool operator==(const Branch&) const = default;
};

/// Per-unit dynamic parameters of the synchronous machine at a generator bus.
struct GeneratorParams {
  int bus = 0;
  double inertia = 0.0;  // M_g, s^2 p.u./rad
  double damping = 0.0;  // D^G_g, p.u./(rad/s)
  double kp = 0.0;       // K^P_g, p.u./(rad/s)
  double ki = 0.0;       // K^I_g, p.u./rad
  bool operator==(const GeneratorParams&) const = default;
};

/// Load partition at a load bus, p.u. on the system base.
struct LoadParams {
  int bus = 0;
  double secure = 0.0;          // p^LS_i
  double vulnerable_cap = 0.0;  // P^LV_i
  bool operator==(const LoadParams&) const = default;
};

/// Static network description. Generators and loads are kept sorted by bus
/// id, which is the canonical ordering used by every matrix in the library.
struct GridCase {
  std::string name;
  double base_mva = 100.0;
  double nominal_hz = 60.0;
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<GeneratorParams> generators;
  std::vector<LoadParams> loads;  // one entry per load bus

  std::size_t num_generators() const { return generators.size(); }
  std::size_t num_loads() const { return loads.size(); }
  std::vector<int> generator_bus_ids() const;
  std::vector<int> load_bus_ids() const;

  /// Position of a load bus in the canonical load ordering.
  std::optional<std::size_t> load_index(int bus_id) const;
  std::optional<std::size_t> generator_index(int bus_id) const;

  bool operator==(const GridCase&) const = default;
};

enum class CaseFormat { NativeJson, Matpower };

/// Picks the format from the file extension (.json -> native, .m -> MATPOWER).
CaseFormat detect_case_format(const std::filesystem::path& path);

GridCase parse_case(const std::filesystem::path& path, CaseFormat format);
GridCase parse_case(const std::filesystem::path& path);
GridCase parse_native_case(const std::string& text);
GridCase parse_matpower_case(const std::string& text);

/// Native JSON document for a case (MW quantities, p.u. susceptances).
std::string serialize_case(const GridCase& grid);

/// Sorts and checks a case in place; throws ValidationError naming the
/// offending record on the first violated invariant.
void validate_case(GridCase& grid);

struct SusceptancePartition {
  Eigen::MatrixXd bus;  // full B_bus, generator buses first
  Eigen::MatrixXd gg;
  Eigen::MatrixXd gl;
  Eigen::MatrixXd lg;
  Eigen::MatrixXd ll;
};

SusceptancePartition build_partition(const GridCase& grid);

struct KronOptions {
  double max_condition = 1e12;
  double symmetry_tol = 1e-10;
};

struct KronReduction {
  Eigen::MatrixXd bm;      // B^M = B^GL (B^LL)^-1, N_G x N_L
  Eigen::MatrixXd gg_eff;  // B^GG - B^M B^LG, N_G x N_G
  double ll_condition = 0.0;
};

KronReduction kron_reduce(const SusceptancePartition& partition,
                          const KronOptions& options = {});

}  // namespace laa
