#pragma once

#include "laa/dynamics.hpp"
#include "laa/response.hpp"

#include <string>
#include <vector>

namespace laa {

/// d(pencil)/dM_g: A' = [[0, I_g], [I_g, 0]], B' = [[0, 0], [0, -I_g]].
Eigen::MatrixXd pencil_a_derivative(std::size_t num_generators, std::size_t g);
Eigen::MatrixXd pencil_b_derivative(std::size_t num_generators, std::size_t g);

/// d lambda_j / d M_g = -y_j^T (lambda_j A' + B') z_j for every mode j.
Eigen::VectorXcd eigenvalue_sensitivity(const EigenSolution& eig, std::size_t g);

/// Modal expansion of the eigenvector derivatives for one generator:
///   dz_j = sum_l a(j, l) z_l,   dy_j = sum_l b(j, l) y_l.
struct EigenvectorSensitivity {
  Eigen::MatrixXcd a;   // modes x modes
  Eigen::MatrixXcd b;
  Eigen::MatrixXcd dz;  // column j = dz_j
  Eigen::MatrixXcd dy;
};

EigenvectorSensitivity eigenvector_sensitivity(const EigenSolution& eig, std::size_t g,
                                               double min_gap = 1e-8);

/// Eigen-derivatives for every generator, built once per eigensolution.
struct SensitivityWorkspace {
  Eigen::MatrixXcd dlambda;  // modes x N_G
  std::vector<EigenvectorSensitivity> vectors;  // per generator
};

SensitivityWorkspace build_workspace(const EigenSolution& eig, double min_gap = 1e-8);

/// d f_i / d M_g as a modal series (same rows as the kernel).
ModalSeries kernel_sensitivity_series(const EigenSolution& eig, const SensitivityWorkspace& ws,
                                      std::size_t load_index, std::size_t g);

/// d f_i / d M_g sampled on `t_grid`; rows are times.
Eigen::MatrixXd kernel_sensitivity(const EigenSolution& eig, const SensitivityWorkspace& ws,
                                   std::size_t load_index, std::size_t g, const std::vector<double>& t_grid);

/// f^_i = f0_i + sum_g dM_g d f_i / d M_g.
ResponseKernel predicted_kernel(const EigenSolution& eig, const SensitivityWorkspace& ws,
                                std::size_t load_index, const Eigen::VectorXd& delta_m);

/// Relative inertia change above which the first-order prediction is flagged.
inline constexpr double kPredictionWarnFraction = 0.5;

/// Least-effort assessment on the predicted kernels.
AttackAssessment predict_least_effort(const EigenSolution& eig, const SensitivityWorkspace& ws,
                                      const Eigen::VectorXd& delta_m, TargetGenerator target,
                                      double threshold_hz, const LeastEffortOptions& options = {});

}  // namespace laa
