#include "laa/modal_series.hpp"

#include "laa/error.hpp"

#include <cmath>

namespace laa {

namespace {

constexpr double kSeriesRadius = 0.1;

// sum_k x^k / (k+1)!   ->  (e^x - 1)/x
Complex phi_unit(Complex x) {
  Complex term = 1.0, sum = 1.0;
  for (int k = 1; k <= 12; ++k) {
    term *= x / static_cast<double>(k + 1);
    sum += term;
  }
  return sum;
}

// sum_k (k+1) x^k / (k+2)!  ->  (1 + (x-1) e^x)/x^2
Complex psi_unit(Complex x) {
  Complex p = 1.0;  // x^k / (k+2)!, starting at 1/2!
  p /= 2.0;
  Complex sum = p;
  for (int k = 1; k <= 12; ++k) {
    p *= x / static_cast<double>(k + 2);
    sum += static_cast<double>(k + 1) * p;
  }
  return sum;
}

}  // namespace

Complex phi(Complex lambda, double t) {
  const Complex x = lambda * t;
  if (std::abs(x) < kSeriesRadius) return t * phi_unit(x);
  return (std::exp(x) - 1.0) / lambda;
}

Complex psi(Complex lambda, double t) {
  const Complex x = lambda * t;
  if (std::abs(x) < kSeriesRadius) return t * t * psi_unit(x);
  return (1.0 + (x - 1.0) * std::exp(x)) / (lambda * lambda);
}

Eigen::VectorXcd ModalSeries::eval_complex(double t) const {
  const Eigen::Index m = lambda.size();
  Eigen::VectorXcd p(m);
  for (Eigen::Index j = 0; j < m; ++j) p(j) = phi(lambda(j), t);
  Eigen::VectorXcd out = phi_coef * p;
  if (has_psi()) {
    for (Eigen::Index j = 0; j < m; ++j) p(j) = psi(lambda(j), t);
    out += psi_coef * p;
  }
  return out;
}

Eigen::VectorXd ModalSeries::eval(double t) const { return eval_complex(t).real(); }

double ModalSeries::component(Eigen::Index row, double t) const {
  Complex acc = 0.0;
  for (Eigen::Index j = 0; j < lambda.size(); ++j) {
    acc += phi(lambda(j), t) * phi_coef(row, j);
    if (has_psi()) acc += psi(lambda(j), t) * psi_coef(row, j);
  }
  return acc.real();
}

Eigen::MatrixXd ModalSeries::sample(Eigen::Index first, Eigen::Index count, double step,
                                    Eigen::Index n) const {
  const Eigen::Index m = lambda.size();
  const Eigen::MatrixXcd a = phi_coef.middleRows(first, count).transpose();
  Eigen::MatrixXcd b;
  if (has_psi()) b = psi_coef.middleRows(first, count).transpose();

  Eigen::VectorXcd w(m), e(m), p(m), q(m);
  for (Eigen::Index j = 0; j < m; ++j) w(j) = std::exp(lambda(j) * step);
  e.setOnes();

  Eigen::MatrixXd out(n, count);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * step;
    if (k % 512 == 0) {
      for (Eigen::Index j = 0; j < m; ++j) e(j) = std::exp(lambda(j) * t);
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      const Complex x = lambda(j) * t;
      if (std::abs(x) < kSeriesRadius) {
        p(j) = t * phi_unit(x);
        q(j) = t * t * psi_unit(x);
      } else {
        p(j) = (e(j) - 1.0) / lambda(j);
        q(j) = (1.0 + (x - 1.0) * e(j)) / (lambda(j) * lambda(j));
      }
    }
    Eigen::RowVectorXcd row = p.transpose() * a;
    if (has_psi()) row += q.transpose() * b;
    out.row(k) = row.real();
    e = e.cwiseProduct(w);
  }
  return out;
}

Eigen::MatrixXd ModalSeries::sample_at(const std::vector<double>& times) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(times.size()), rows());
  for (std::size_t k = 0; k < times.size(); ++k)
    out.row(static_cast<Eigen::Index>(k)) = eval(times[k]).transpose();
  return out;
}

ModalSeries& ModalSeries::operator+=(const ModalSeries& other) {
  if (lambda.size() != other.lambda.size() || rows() != other.rows())
    throw ValidationError("modal series shapes differ");
  phi_coef += other.phi_coef;
  if (other.has_psi()) {
    if (!has_psi()) psi_coef = Eigen::MatrixXcd::Zero(rows(), lambda.size());
    psi_coef += other.psi_coef;
  }
  return *this;
}

ModalSeries& ModalSeries::operator*=(double s) {
  phi_coef *= s;
  if (has_psi()) psi_coef *= s;
  return *this;
}

ModalSeries operator+(ModalSeries a, const ModalSeries& b) { return a += b; }
ModalSeries operator*(double s, ModalSeries a) { return a *= s; }

namespace {

Peak refine(const ModalSeries& f, Eigen::Index row, double lo, double hi, double sample_t,
            double sample_v, double tol) {
  constexpr double kInvPhi = 0.6180339887498949;
  auto g = [&](double t) { return std::abs(f.component(row, t)); };
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
  double fc = g(c), fd = g(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = g(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = g(d);
    }
  }
  const double t = 0.5 * (a + b);
  const double v = f.component(row, t);
  if (std::abs(v) >= std::abs(sample_v)) return {t, v};
  return {sample_t, sample_v};
}

}  // namespace

std::vector<Peak> find_peaks(const ModalSeries& f, Eigen::Index first, Eigen::Index count,
                             const PeakOptions& options) {
  if (!(options.step > 0) || !(options.horizon > 0) || !(options.tolerance > 0))
    throw ValidationError("peak search needs positive horizon, step and tolerance");
  const auto n = static_cast<Eigen::Index>(std::floor(options.horizon / options.step + 1e-9)) + 1;
  const Eigen::MatrixXd s = f.sample(first, count, options.step, n);
  std::vector<Peak> peaks;
  peaks.reserve(static_cast<std::size_t>(count));
  for (Eigen::Index r = 0; r < count; ++r) {
    Eigen::Index k = 0;
    const double best = s.col(r).cwiseAbs().maxCoeff(&k);
    const double tk = static_cast<double>(k) * options.step;
    if (best == 0.0) {
      peaks.push_back({tk, 0.0});
      continue;
    }
    const double lo = std::max(0.0, tk - options.step);
    const double hi = std::min(options.horizon, tk + options.step);
    peaks.push_back(refine(f, first + r, lo, hi, tk, s(k, r), options.tolerance));
  }
  return peaks;
}

Peak find_peak(const ModalSeries& f, Eigen::Index row, const PeakOptions& options) {
  return find_peaks(f, row, 1, options).front();
}

}  // namespace laa
