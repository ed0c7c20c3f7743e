#include "laa/sensitivity.hpp"

#include "laa/error.hpp"
#include "laa/parallel.hpp"

#include <cmath>
#include <sstream>

namespace laa {

Eigen::MatrixXd pencil_a_derivative(std::size_t num_generators, std::size_t g) {
  const auto n = static_cast<Eigen::Index>(num_generators);
  const auto k = static_cast<Eigen::Index>(g);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  d(k, n + k) = 1.0;
  d(n + k, k) = 1.0;
  return d;
}

Eigen::MatrixXd pencil_b_derivative(std::size_t num_generators, std::size_t g) {
  const auto n = static_cast<Eigen::Index>(num_generators);
  const auto k = static_cast<Eigen::Index>(g);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  d(n + k, n + k) = -1.0;
  return d;
}

namespace {

void check_inputs(const EigenSolution& eig, std::size_t g) {
  if (!eig.normalized) throw NumericalError("sensitivity requires a normalized eigensolution");
  if (g >= eig.model.num_generators())
    throw ValidationError("generator index " + std::to_string(g) + " out of range");
}

// u^T (lambda A' + B') v, exploiting the sparsity of the derivatives.
Complex form(const Eigen::VectorXcd& u, const Eigen::VectorXcd& v, Complex lambda, Eigen::Index n,
             Eigen::Index g) {
  return lambda * (u(g) * v(n + g) + u(n + g) * v(g)) - u(n + g) * v(n + g);
}

}  // namespace

Eigen::VectorXcd eigenvalue_sensitivity(const EigenSolution& eig, std::size_t g) {
  check_inputs(eig, g);
  const auto n = static_cast<Eigen::Index>(eig.model.num_generators());
  const auto k = static_cast<Eigen::Index>(g);
  Eigen::VectorXcd d(eig.eigenvalues.size());
  for (Eigen::Index j = 0; j < d.size(); ++j)
    d(j) = -form(eig.left.col(j), eig.right.col(j), eig.eigenvalues(j), n, k);
  return d;
}

EigenvectorSensitivity eigenvector_sensitivity(const EigenSolution& eig, std::size_t g, double min_gap) {
  check_inputs(eig, g);
  const auto n = static_cast<Eigen::Index>(eig.model.num_generators());
  const auto k = static_cast<Eigen::Index>(g);
  const Eigen::Index m = eig.eigenvalues.size();
  EigenvectorSensitivity s;
  s.a = Eigen::MatrixXcd::Zero(m, m);
  s.b = Eigen::MatrixXcd::Zero(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const Complex lj = eig.eigenvalues(j);
    for (Eigen::Index l = 0; l < m; ++l) {
      if (l == j) continue;
      const Complex gap = eig.eigenvalues(l) - lj;
      if (std::abs(gap) < min_gap * std::max({std::abs(lj), std::abs(eig.eigenvalues(l)), 1.0})) {
        std::ostringstream msg;
        msg << "eigenvalues " << lj << " and " << eig.eigenvalues(l) << " are clustered below the gap floor";
        throw NumericalError(msg.str());
      }
      s.a(j, l) = form(eig.left.col(l), eig.right.col(j), lj, n, k) / gap;
      s.b(j, l) = form(eig.left.col(j), eig.right.col(l), lj, n, k) / gap;
    }
    // Keeps y_j^T A z_j = 1: a_jj + b_jj = -y_j^T A' z_j, split evenly.
    const Complex yaz = eig.left(k, j) * eig.right(n + k, j) + eig.left(n + k, j) * eig.right(k, j);
    s.a(j, j) = -0.5 * yaz;
    s.b(j, j) = -0.5 * yaz;
  }
  s.dz = eig.right * s.a.transpose();
  s.dy = eig.left * s.b.transpose();
  return s;
}

SensitivityWorkspace build_workspace(const EigenSolution& eig, double min_gap) {
  const std::size_t ng = eig.model.num_generators();
  SensitivityWorkspace ws;
  ws.dlambda.resize(eig.eigenvalues.size(), static_cast<Eigen::Index>(ng));
  ws.vectors.resize(ng);
  for (std::size_t g = 0; g < ng; ++g) {
    ws.dlambda.col(static_cast<Eigen::Index>(g)) = eigenvalue_sensitivity(eig, g);
    ws.vectors[g] = eigenvector_sensitivity(eig, g, min_gap);
  }
  return ws;
}

ModalSeries kernel_sensitivity_series(const EigenSolution& eig, const SensitivityWorkspace& ws,
                                      std::size_t load_index, std::size_t g) {
  check_inputs(eig, g);
  if (load_index >= eig.model.num_loads()) throw ValidationError("load index out of range");
  if (g >= ws.vectors.size()) throw ValidationError("workspace does not cover generator " + std::to_string(g));
  const auto n = static_cast<Eigen::Index>(eig.model.num_generators());
  const auto i = static_cast<Eigen::Index>(load_index);
  const auto& v = ws.vectors[g];
  const Eigen::VectorXcd k = eig.coupling.col(i);
  // (dy_j angle block)^T b_i for every j
  const Eigen::VectorXcd dk = v.dy.topRows(n).transpose() * eig.model.bm.col(i).cast<Complex>();
  const Eigen::VectorXcd dl = ws.dlambda.col(static_cast<Eigen::Index>(g));

  ModalSeries s;
  s.lambda = eig.eigenvalues;
  s.phi_coef = eig.right * dk.asDiagonal();
  s.phi_coef += v.dz * k.asDiagonal();
  s.psi_coef = eig.right * dl.cwiseProduct(k).asDiagonal();
  return s;
}

Eigen::MatrixXd kernel_sensitivity(const EigenSolution& eig, const SensitivityWorkspace& ws,
                                   std::size_t load_index, std::size_t g, const std::vector<double>& t_grid) {
  return kernel_sensitivity_series(eig, ws, load_index, g).sample_at(t_grid);
}

ResponseKernel predicted_kernel(const EigenSolution& eig, const SensitivityWorkspace& ws,
                                std::size_t load_index, const Eigen::VectorXd& delta_m) {
  const std::size_t ng = eig.model.num_generators();
  if (delta_m.size() != static_cast<Eigen::Index>(ng))
    throw ValidationError("inertia shift vector needs one entry per generator");
  ResponseKernel k = kernel(eig, load_index);
  k.series.psi_coef = Eigen::MatrixXcd::Zero(k.series.rows(), k.series.lambda.size());
  for (std::size_t g = 0; g < ng; ++g) {
    const double dm = delta_m(static_cast<Eigen::Index>(g));
    if (dm == 0.0) continue;
    k.series += dm * kernel_sensitivity_series(eig, ws, load_index, g);
  }
  return k;
}

AttackAssessment predict_least_effort(const EigenSolution& eig, const SensitivityWorkspace& ws,
                                      const Eigen::VectorXd& delta_m, TargetGenerator target,
                                      double threshold_hz, const LeastEffortOptions& options) {
  const std::size_t nl = eig.model.num_loads();
  std::vector<ResponseKernel> kernels(nl);
  parallel_for(nl, [&](std::size_t i) { kernels[i] = predicted_kernel(eig, ws, i, delta_m); },
               options.max_threads);
  auto a = assess_kernels(kernels, target, threshold_hz, eig.model.base_mva, options);
  for (Eigen::Index g = 0; g < delta_m.size(); ++g) {
    const double rel = std::abs(delta_m(g)) / eig.model.inertia(g);
    if (rel > kPredictionWarnFraction) {
      std::ostringstream msg;
      msg << "inertia shift at generator bus " << eig.model.generator_ids[static_cast<std::size_t>(g)] << " is "
          << rel * 100.0 << "% of M; first-order prediction may be inaccurate";
      a.warnings.push_back(msg.str());
    }
  }
  return a;
}

}  // namespace laa
