#pragma once

#include "laa/dynamics.hpp"
#include "laa/grid_model.hpp"

#include <filesystem>
#include <string>

namespace laa::test {

inline std::filesystem::path data_path(const std::string& rel) { return std::filesystem::path(LAA_DATA_DIR) / rel; }

inline GridCase wscc9() { return parse_case(data_path("cases/wscc9.json")); }
inline GridCase ieee118() { return parse_case(data_path("cases/ieee118.m")); }

/// One generator and one load joined by a branch of susceptance b.
inline GridCase two_bus(double b = 10.0, double m = 1.0, double c = 0.5, double ki = 2.0) {
  GridCase g;
  g.name = "two-bus";
  g.buses = {{1, BusKind::Generator}, {2, BusKind::Load}};
  g.branches = {{1, 2, b}};
  g.generators = {{1, m, c, 0.0, ki}};
  g.loads = {{2, 0.5, 0.2}};
  validate_case(g);
  return g;
}

inline double rel_linf(const Eigen::MatrixXd& a, const Eigen::MatrixXd& ref) {
  return (a - ref).cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff();
}

}  // namespace laa::test
