#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace laa {

using Complex = std::complex<double>;

/// (e^{lambda t} - 1) / lambda, with the limit t at lambda -> 0.
Complex phi(Complex lambda, double t);

/// d phi / d lambda = (1 + (lambda t - 1) e^{lambda t}) / lambda^2, limit t^2/2.
Complex psi(Complex lambda, double t);

/// Real vector function of time written as a sum over modes
///   f(t) = Re sum_j [ phi(lambda_j, t) a_j + psi(lambda_j, t) b_j ].
/// Response kernels, their inertia derivatives and first-order predictions
/// all share this shape. `psi_coef` may have zero columns.
struct ModalSeries {
  Eigen::VectorXcd lambda;
  Eigen::MatrixXcd phi_coef;  // rows x modes
  Eigen::MatrixXcd psi_coef;  // rows x modes, or empty

  Eigen::Index rows() const { return phi_coef.rows(); }
  bool has_psi() const { return psi_coef.size() > 0; }

  Eigen::VectorXd eval(double t) const;
  /// Complex sum before the real part is taken; used to check cancellation.
  Eigen::VectorXcd eval_complex(double t) const;
  double component(Eigen::Index row, double t) const;

  /// Samples rows [first, first + count) on t_k = k * step, k = 0..n-1.
  /// Result is n x count.
  Eigen::MatrixXd sample(Eigen::Index first, Eigen::Index count, double step, Eigen::Index n) const;
  Eigen::MatrixXd sample_at(const std::vector<double>& times) const;

  ModalSeries& operator+=(const ModalSeries& other);
  ModalSeries& operator*=(double s);
};

ModalSeries operator+(ModalSeries a, const ModalSeries& b);
ModalSeries operator*(double s, ModalSeries a);

struct PeakOptions {
  double horizon = 20.0;   // s
  double step = 1e-3;      // s
  double tolerance = 1e-6; // s, golden-section bracket width
};

struct Peak {
  double time = 0.0;
  double value = 0.0;  // signed value at the peak
  double magnitude() const { return value < 0 ? -value : value; }
};

/// Location of max_t |f_row(t)| on [0, horizon]: dense sampling, then
/// golden-section refinement around the best sample.
Peak find_peak(const ModalSeries& f, Eigen::Index row, const PeakOptions& options = {});

/// Peaks for rows [first, first + count) sharing one dense sampling pass.
std::vector<Peak> find_peaks(const ModalSeries& f, Eigen::Index first, Eigen::Index count,
                             const PeakOptions& options = {});

}  // namespace laa
