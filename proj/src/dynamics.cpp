#include "laa/dynamics.hpp"

#include "laa/error.hpp"

#include <json.hpp>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace laa {

Eigen::MatrixXd DynamicModel::state_matrix() const {
  const Eigen::Index n = inertia.size();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  const Eigen::VectorXd inv_m = inertia.cwiseInverse();
  s.topRightCorner(n, n).setIdentity();
  s.bottomLeftCorner(n, n) = -(inv_m.asDiagonal() * stiffness);
  s.bottomRightCorner(n, n) = -(inv_m.asDiagonal() * damping);
  return s;
}

void refresh_pencil(DynamicModel& model) {
  const Eigen::Index n = model.inertia.size();
  const Eigen::MatrixXd m = model.inertia.asDiagonal();
  model.pencil_a = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  model.pencil_b = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  model.pencil_a.topLeftCorner(n, n) = model.damping;
  model.pencil_a.topRightCorner(n, n) = m;
  model.pencil_a.bottomLeftCorner(n, n) = m;
  model.pencil_b.topLeftCorner(n, n) = model.stiffness;
  model.pencil_b.bottomRightCorner(n, n) = -m;

  Eigen::EigenSolver<Eigen::MatrixXd> es(model.state_matrix(), false);
  model.stable = es.info() == Eigen::Success && es.eigenvalues().real().maxCoeff() < 0.0;
}

DynamicModel assemble_model(const GridCase& grid, const KronReduction& reduction,
                            const std::vector<double>& renewable_fraction,
                            const ModelOptions& options) {
  const std::size_t ng = grid.num_generators();
  std::vector<double> r = renewable_fraction;
  if (r.empty()) r.assign(ng, 0.0);
  if (r.size() != ng)
    throw ValidationError("renewable fraction vector has " + std::to_string(r.size()) +
                          " entries, expected " + std::to_string(ng));
  for (std::size_t g = 0; g < ng; ++g) {
    if (!(r[g] >= 0.0 && r[g] < 1.0))
      throw ValidationError("renewable fraction for generator at bus " +
                            std::to_string(grid.generators[g].bus) + " must lie in [0, 1)");
  }
  if (!(options.threshold_hz > 0)) throw ValidationError("frequency threshold must be positive");

  DynamicModel model;
  model.generator_ids = grid.generator_bus_ids();
  model.load_ids = grid.load_bus_ids();
  model.base_mva = grid.base_mva;
  model.nominal_hz = grid.nominal_hz;
  model.inertia.resize(static_cast<Eigen::Index>(ng));
  model.renewable_fraction.resize(static_cast<Eigen::Index>(ng));
  Eigen::VectorXd c(static_cast<Eigen::Index>(ng));
  Eigen::VectorXd ki(static_cast<Eigen::Index>(ng));
  for (std::size_t g = 0; g < ng; ++g) {
    const auto& p = grid.generators[g];
    const auto k = static_cast<Eigen::Index>(g);
    const double keep = 1.0 - r[g];
    model.renewable_fraction(k) = r[g];
    model.inertia(k) = p.inertia * keep;
    const double d = options.scaling == PenetrationScaling::InertiaAndDamping ? p.damping * keep
                                                                              : p.damping;
    c(k) = p.kp + d;
    ki(k) = p.ki;
  }
  model.damping = c.asDiagonal();
  model.stiffness = reduction.gg_eff;
  model.stiffness.diagonal() += ki;
  model.bm = reduction.bm;
  model.omega_max =
      Eigen::VectorXd::Constant(static_cast<Eigen::Index>(ng),
                                2.0 * std::numbers::pi * options.threshold_hz);
  refresh_pencil(model);
  return model;
}

DynamicModel build_model(const GridCase& grid, const std::vector<double>& renewable_fraction,
                         const ModelOptions& options) {
  return assemble_model(grid, kron_reduce(build_partition(grid)), renewable_fraction, options);
}

namespace {

// Null vector of Q(lambda) = lambda^2 M + lambda C + G.
Eigen::VectorXcd quadratic_null_vector(const DynamicModel& m, Complex lambda) {
  const Eigen::MatrixXcd q = (lambda * lambda) * m.inertia.cast<Complex>().asDiagonal().toDenseMatrix() +
                             lambda * m.damping.cast<Complex>() + m.stiffness.cast<Complex>();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(q, Eigen::ComputeFullV);
  return svd.matrixV().col(q.cols() - 1);
}

Eigen::VectorXcd lift(const Eigen::VectorXcd& x, Complex lambda) {
  Eigen::VectorXcd z(2 * x.size());
  z << x, lambda * x;
  return z;
}

Complex bilinear(const Eigen::VectorXcd& u, const Eigen::MatrixXd& a, const Eigen::VectorXcd& v) {
  return (u.transpose() * (a.cast<Complex>() * v))(0, 0);
}

// Fixes the +/- ambiguity left by the symmetric normalization.
void fix_sign(Eigen::VectorXcd& z) {
  Eigen::Index k = 0;
  z.cwiseAbs().maxCoeff(&k);
  const Complex c = z(k);
  const bool flip = std::abs(c.real()) > 1e-12 * std::abs(c) ? c.real() < 0 : c.imag() < 0;
  if (flip) z = -z;
}

}  // namespace

EigenSolution solve_eigen(const DynamicModel& model, const EigenOptions& options) {
  const Eigen::Index n2 = model.pencil_a.rows();
  const Eigen::Index n = n2 / 2;

  // lambda*A*z + B*z = 0  <=>  (-B) z = lambda A z
  Eigen::GeneralizedEigenSolver<Eigen::MatrixXd> ges(-model.pencil_b, model.pencil_a, false);
  if (ges.info() != Eigen::Success) throw NumericalError("QZ iteration did not converge");

  std::vector<Complex> lambdas(static_cast<std::size_t>(n2));
  for (Eigen::Index j = 0; j < n2; ++j) {
    const Complex beta = ges.betas()(j);
    if (std::abs(beta) == 0.0) throw NumericalError("pencil has an infinite eigenvalue (singular inertia)");
    lambdas[static_cast<std::size_t>(j)] = ges.alphas()(j) / beta;
  }
  std::sort(lambdas.begin(), lambdas.end(), [](Complex a, Complex b) {
    if (a.imag() != b.imag()) return a.imag() > b.imag();
    return a.real() < b.real();
  });

  const double scale = std::max({model.pencil_a.norm(), model.pencil_b.norm(), 1.0});

  EigenSolution sol;
  sol.model = model;
  sol.eigenvalues.resize(n2);
  sol.right.resize(n2, n2);

  for (Eigen::Index j = 0; j < n2; ++j) {
    Complex lambda = lambdas[static_cast<std::size_t>(j)];
    Eigen::VectorXcd z;
    // Two Rayleigh-quotient sweeps on the symmetric pencil polish the QZ value.
    for (int sweep = 0; sweep < 2; ++sweep) {
      z = lift(quadratic_null_vector(model, lambda), lambda);
      const Complex za = bilinear(z, model.pencil_a, z);
      if (std::abs(za) < 1e-13 * scale * z.squaredNorm()) break;
      lambda = -bilinear(z, model.pencil_b, z) / za;
    }
    if (lambdas[static_cast<std::size_t>(j)].imag() == 0.0) lambda = lambda.real();
    z = lift(quadratic_null_vector(model, lambda), lambda);
    sol.eigenvalues(j) = lambda;
    sol.right.col(j) = z;
  }

  // Exact conjugate pairing.
  std::vector<bool> paired(static_cast<std::size_t>(n2), false);
  for (Eigen::Index j = 0; j < n2; ++j) {
    const Complex lj = sol.eigenvalues(j);
    if (paired[static_cast<std::size_t>(j)] || lj.imag() <= 0.0) continue;
    Eigen::Index best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index l = 0; l < n2; ++l) {
      if (l == j || paired[static_cast<std::size_t>(l)] || sol.eigenvalues(l).imag() >= 0) continue;
      const double d = std::abs(sol.eigenvalues(l) - std::conj(lj));
      if (d < best_d) {
        best_d = d;
        best = l;
      }
    }
    if (best < 0) throw NumericalError("eigenvalue without a conjugate partner");
    paired[static_cast<std::size_t>(j)] = paired[static_cast<std::size_t>(best)] = true;
    sol.eigenvalues(best) = std::conj(lj);
  }

  // Simple-spectrum check; the modal expansion is invalid otherwise.
  for (Eigen::Index j = 0; j < n2; ++j) {
    for (Eigen::Index l = j + 1; l < n2; ++l) {
      const Complex a = sol.eigenvalues(j), b = sol.eigenvalues(l);
      const double ref = std::max({std::abs(a), std::abs(b), 1.0});
      if (std::abs(a - b) < options.min_gap * ref) {
        std::ostringstream msg;
        msg << "pencil is defective or nearly so: eigenvalues " << a << " and " << b
            << " coincide within " << options.min_gap;
        throw NumericalError(msg.str());
      }
    }
  }

  // Symmetric normalization z^T A z = 1, then y = z.
  for (Eigen::Index j = 0; j < n2; ++j) {
    const Complex lambda = sol.eigenvalues(j);
    Eigen::VectorXcd z;
    if (lambda.imag() < 0.0) continue;  // filled from partner
    z = lift(quadratic_null_vector(model, lambda), lambda);
    if (lambda.imag() == 0.0) {
      // Real eigenvalue: rotate to a real vector.
      Eigen::Index k = 0;
      z.cwiseAbs().maxCoeff(&k);
      z *= std::conj(z(k)) / std::abs(z(k));
      z = z.real().cast<Complex>();
    }
    const Complex za = bilinear(z, model.pencil_a, z);
    if (std::abs(za) < 1e-12 * scale * z.squaredNorm()) {
      std::ostringstream msg;
      msg << "pencil is defective at eigenvalue " << lambda << " (z^T A z vanishes)";
      throw NumericalError(msg.str());
    }
    z /= std::sqrt(za);
    fix_sign(z);
    sol.right.col(j) = z;
    if (lambda.imag() > 0) {
      for (Eigen::Index l = 0; l < n2; ++l) {
        if (sol.eigenvalues(l) == std::conj(lambda) && l != j) {
          sol.right.col(l) = z.conjugate();
          break;
        }
      }
    }
  }

  sol.left = sol.right;
  sol.coupling = sol.left.topRows(n).transpose() * model.bm.cast<Complex>();
  sol.normalized = true;

  const auto res = check_eigen(sol);
  if (res.right > options.residual_tol || res.normalization > options.residual_tol)
    throw NumericalError("eigensolution residual " + std::to_string(std::max(res.right, res.normalization)) +
                         " exceeds tolerance");
  return sol;
}

EigenResiduals check_eigen(const EigenSolution& eig) {
  const auto& m = eig.model;
  const Eigen::MatrixXcd a = m.pencil_a.cast<Complex>();
  const Eigen::MatrixXcd b = m.pencil_b.cast<Complex>();
  const double na = m.pencil_a.norm(), nb = m.pencil_b.norm();
  const Eigen::Index n2 = a.rows(), n = n2 / 2;
  EigenResiduals r;
  for (Eigen::Index j = 0; j < n2; ++j) {
    const Complex lambda = eig.eigenvalues(j);
    const Eigen::VectorXcd z = eig.right.col(j);
    const Eigen::VectorXcd y = eig.left.col(j);
    const double denom_z = (std::abs(lambda) * na + nb) * z.norm();
    const double denom_y = (std::abs(lambda) * na + nb) * y.norm();
    r.right = std::max(r.right, (lambda * (a * z) + b * z).norm() / denom_z);
    r.left = std::max(r.left, (lambda * (y.transpose() * a) + y.transpose() * b).norm() / denom_y);
    r.structure = std::max(r.structure, (z.tail(n) - lambda * z.head(n)).norm() / z.norm());
    for (Eigen::Index l = 0; l < n2; ++l) {
      const Complex v = (y.transpose() * a * eig.right.col(l))(0, 0);
      if (l == j)
        r.normalization = std::max(r.normalization, std::abs(v - 1.0));
      else
        r.biorthogonality = std::max(r.biorthogonality, std::abs(v));
    }
  }
  return r;
}

std::vector<Eigen::Index> match_modes(const EigenSolution& base, const EigenSolution& other) {
  const Eigen::Index n2 = base.eigenvalues.size();
  if (other.eigenvalues.size() != n2) throw ValidationError("spectra have different sizes");
  std::vector<Eigen::Index> match(static_cast<std::size_t>(n2), -1);
  std::vector<bool> used(static_cast<std::size_t>(n2), false);
  const Eigen::MatrixXcd a = base.model.pencil_a.cast<Complex>();
  for (Eigen::Index j = 0; j < n2; ++j) {
    Eigen::Index best = -1;
    double best_d = std::numeric_limits<double>::infinity(), best_overlap = -1.0;
    for (Eigen::Index l = 0; l < n2; ++l) {
      if (used[static_cast<std::size_t>(l)]) continue;
      const double d = std::abs(base.eigenvalues(j) - other.eigenvalues(l));
      const double tie = 1e-12 * std::max(std::abs(base.eigenvalues(j)), 1.0);
      const double overlap =
          std::abs((base.left.col(j).transpose() * a * other.right.col(l))(0, 0));
      if (d < best_d - tie || (std::abs(d - best_d) <= tie && overlap > best_overlap)) {
        best = l;
        best_d = d;
        best_overlap = overlap;
      }
    }
    match[static_cast<std::size_t>(j)] = best;
    used[static_cast<std::size_t>(best)] = true;
  }
  return match;
}

std::string eigen_to_json(const EigenSolution& eig) {
  using Json = nlohmann::json;
  auto pair = [](Complex c) { return Json::array({c.real(), c.imag()}); };
  auto vec = [&](const Eigen::VectorXcd& v) {
    Json out = Json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(pair(v(k)));
    return out;
  };
  Json doc;
  doc["generators"] = eig.model.generator_ids;
  doc["loads"] = eig.model.load_ids;
  doc["modes"] = Json::array();
  for (Eigen::Index j = 0; j < eig.eigenvalues.size(); ++j) {
    Json mode;
    mode["eigenvalue"] = pair(eig.eigenvalues(j));
    mode["right"] = vec(eig.right.col(j));
    mode["left"] = vec(eig.left.col(j));
    mode["coupling"] = vec(eig.coupling.row(j).transpose());
    doc["modes"].push_back(std::move(mode));
  }
  doc["normalized"] = eig.normalized;
  return doc.dump(2) + "\n";
}

}  // namespace laa
