#include "renewal/quadrature.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/FFT>

#include "renewal/errors.hpp"

namespace renewal {

Eigen::VectorXd gregory_weights(Eigen::Index n) {
  if (n < 1) throw DomainError("quadrature needs at least one interval");
  Eigen::VectorXd w = Eigen::VectorXd::Ones(n + 1);
  if (n >= 7) {
    const double edge[4] = {17.0 / 48.0, 59.0 / 48.0, 43.0 / 48.0, 49.0 / 48.0};
    for (int i = 0; i < 4; ++i) {
      w[i] = edge[i];
      w[n - i] = edge[i];
    }
    return w;
  }
  w.setZero();
  auto simpson = [&w](Eigen::Index a) {
    w[a] += 1.0 / 3.0;
    w[a + 1] += 4.0 / 3.0;
    w[a + 2] += 1.0 / 3.0;
  };
  switch (n) {
    case 1:
      w << 0.5, 0.5;
      break;
    case 3:
      w << 3.0 / 8.0, 9.0 / 8.0, 9.0 / 8.0, 3.0 / 8.0;
      break;
    case 5:
      simpson(0);
      w[2] += 3.0 / 8.0;
      w[3] += 9.0 / 8.0;
      w[4] += 9.0 / 8.0;
      w[5] += 3.0 / 8.0;
      break;
    default:  // 2, 4, 6
      for (Eigen::Index a = 0; a < n; a += 2) simpson(a);
  }
  return w;
}

double integrate_uniform(const Eigen::Ref<const Eigen::VectorXd>& f, double h) {
  if (f.size() < 2) return 0.0;
  return h * gregory_weights(f.size() - 1).dot(f);
}

GaussLegendre::GaussLegendre(int n) {
  if (n < 1) throw DomainError("Gauss-Legendre needs n >= 1");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double b = i / std::sqrt(4.0 * i * i - 1.0);
    jacobi(i, i - 1) = b;
    jacobi(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  nodes = eig.eigenvalues();
  weights = 2.0 * eig.eigenvectors().row(0).array().square().transpose();
}

PeriodicInterpolant::PeriodicInterpolant(double period,
                                         const Eigen::Ref<const Eigen::VectorXd>& samples)
    : period_(period), m_(samples.size()) {
  if (m_ < 1) throw DomainError("periodic interpolant needs samples");
  std::vector<double> in(samples.data(), samples.data() + m_);
  std::vector<std::complex<double>> spectrum;
  Eigen::FFT<double> fft;
  fft.fwd(spectrum, in);
  const double scale = 1.0 / static_cast<double>(m_);
  mean_ = spectrum[0].real() * scale;
  const Eigen::Index half = m_ / 2;
  for (Eigen::Index k = 1; k <= half; ++k) {
    const bool nyquist = (m_ % 2 == 0) && k == half;
    coeffs_.push_back(spectrum[static_cast<std::size_t>(k)] * (nyquist ? scale : 2.0 * scale));
  }
}

double PeriodicInterpolant::operator()(double t) const {
  const double theta = 2.0 * std::numbers::pi * wrap_phase(t, period_) / period_;
  const std::complex<double> z(std::cos(theta), std::sin(theta));
  std::complex<double> zk = z;
  double acc = mean_;
  for (std::size_t k = 0; k < coeffs_.size(); ++k) {
    acc += (coeffs_[k] * zk).real();
    zk *= z;
  }
  return acc;
}

double wrap_phase(double t, double period) {
  double r = std::fmod(t, period);
  if (r < 0.0) r += period;
  if (r >= period) r = 0.0;
  return r;
}

}  // namespace renewal
