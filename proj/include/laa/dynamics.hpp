#pragma once

#include "laa/grid_model.hpp"

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <vector>

namespace laa {

using Complex = std::complex<double>;

/// Kron-reduced second-order model
///   M d''(t) + C d'(t) + G d(t) = B^M u(t)
/// and its symmetric linearization  lambda*A*z + B*z = 0  with
///   A = [[C, M], [M, 0]],  B = [[G, 0], [0, -M]].
struct DynamicModel {
  std::vector<int> generator_ids;
  std::vector<int> load_ids;
  double base_mva = 100.0;
  double nominal_hz = 60.0;

  Eigen::VectorXd inertia;          // effective M_g
  Eigen::VectorXd renewable_fraction;
  Eigen::MatrixXd damping;          // C~ = K^P + D^G (diagonal)
  Eigen::MatrixXd stiffness;        // G~ = K^I + B^GG_eff
  Eigen::MatrixXd bm;               // N_G x N_L
  Eigen::MatrixXd pencil_a;         // 2N_G x 2N_G
  Eigen::MatrixXd pencil_b;         // 2N_G x 2N_G
  Eigen::VectorXd omega_max;        // rad/s per generator
  bool stable = true;

  std::size_t num_generators() const { return static_cast<std::size_t>(inertia.size()); }
  std::size_t num_loads() const { return static_cast<std::size_t>(bm.cols()); }

  /// First-order state matrix [[0, I], [-M^-1 G, -M^-1 C]].
  Eigen::MatrixXd state_matrix() const;
};

/// How a renewable fraction r_g derates a synchronous generator.
enum class PenetrationScaling {
  InertiaAndDamping,  // M_g and D^G_g both scaled by (1 - r_g)
  InertiaOnly,
};

struct ModelOptions {
  double threshold_hz = 0.1;
  PenetrationScaling scaling = PenetrationScaling::InertiaAndDamping;
};

/// Builds the reduced model. `renewable_fraction` holds one entry per
/// generator (canonical order); an empty vector means zero everywhere.
DynamicModel assemble_model(const GridCase& grid, const KronReduction& reduction,
                            const std::vector<double>& renewable_fraction = {},
                            const ModelOptions& options = {});

/// Rebuilds the pencil after the caller changed inertia/damping/stiffness.
void refresh_pencil(DynamicModel& model);

/// Convenience: parse-free pipeline from a case to its model.
DynamicModel build_model(const GridCase& grid, const std::vector<double>& renewable_fraction = {},
                         const ModelOptions& options = {});

/// Bi-orthonormal eigensolution of the linearized pencil. Columns of `right`
/// and `left` are z_j and y_j with y_j^T A z_j = 1 (unconjugated). Because the
/// pencil is symmetric, y_j = z_j.
struct EigenSolution {
  DynamicModel model;
  Eigen::VectorXcd eigenvalues;  // 2N_G
  Eigen::MatrixXcd right;        // 2N_G x 2N_G
  Eigen::MatrixXcd left;         // 2N_G x 2N_G
  Eigen::MatrixXcd coupling;     // row j = k_j = (angle block of y_j)^T B^M
  bool normalized = false;

  std::size_t size() const { return static_cast<std::size_t>(eigenvalues.size()); }
};

struct EigenOptions {
  double residual_tol = 1e-8;
  double min_gap = 1e-8;  // relative eigenvalue separation for a simple spectrum
};

/// Solves lambda*A*z + B*z = 0. Throws NumericalError if the pencil is
/// defective (clustered eigenvalues or a vanishing normalization).
EigenSolution solve_eigen(const DynamicModel& model, const EigenOptions& options = {});

struct EigenResiduals {
  double right = 0.0;           // max_j |lambda_j A z_j + B z_j| / (|A||z_j| |lambda_j| + |B||z_j|)
  double left = 0.0;
  double normalization = 0.0;   // max_j |y_j^T A z_j - 1|
  double biorthogonality = 0.0; // max_{j != l} |y_j^T A z_l|
  double structure = 0.0;       // max_j |z_j[N:] - lambda_j z_j[:N]| / |z_j|
};

EigenResiduals check_eigen(const EigenSolution& eig);

/// For each mode of `base`, the index of the matching mode in `other`:
/// nearest eigenvalue in the complex plane, ties broken by the overlap
/// |y_j^T A z'_l|. Used to pair spectra across small parameter changes.
std::vector<Eigen::Index> match_modes(const EigenSolution& base, const EigenSolution& other);

/// Eigen solution as JSON: eigenvalues as [re, im] pairs, vectors as arrays of pairs.
std::string eigen_to_json(const EigenSolution& eig);

}  // namespace laa
