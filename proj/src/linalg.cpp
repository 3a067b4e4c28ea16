#include "multiport/linalg.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace multiport {

namespace {
constexpr double kPi = std::numbers::pi;
}

bool is_unitary(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("is_unitary: matrix must be square");
  }
  if (tol <= 0.0) {
    throw std::invalid_argument("is_unitary: tol must be positive");
  }
  const Matrix gram = m.adjoint() * m;
  const Matrix delta = gram - Matrix::Identity(m.rows(), m.cols());
  return delta.cwiseAbs().maxCoeff() <= tol;
}

Unitary::Unitary(Matrix m, double tol) : m_(std::move(m)) {
  if (m_.rows() < 1 || m_.rows() != m_.cols()) {
    throw std::invalid_argument("Unitary: matrix must be square with n >= 1");
  }
  if (!is_unitary(m_, tol)) {
    throw std::invalid_argument("Unitary: U†U deviates from identity beyond tolerance");
  }
}

Unitary Unitary::identity(int n) { return Unitary(Matrix::Identity(n, n)); }

Unitary Unitary::adjoint() const { return Unitary(m_.adjoint()); }

Unitary Unitary::operator*(const Unitary& rhs) const {
  if (dim() != rhs.dim()) {
    throw std::invalid_argument("Unitary product: dimension mismatch");
  }
  return Unitary(m_ * rhs.m_);
}

Unitary haar_random_unitary(int n, std::uint64_t seed) {
  if (n < 1) {
    throw std::invalid_argument("haar_random_unitary: n must be >= 1");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix z(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      z(r, c) = Complex(gauss(rng), gauss(rng));
    }
  }
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix the gauge: without this phase correction the QR output is not Haar.
  for (int c = 0; c < n; ++c) {
    const Complex d = r(c, c);
    const double mag = std::abs(d);
    const Complex phase = mag > 0.0 ? d / mag : Complex(1.0, 0.0);
    q.col(c) *= phase;
  }
  return Unitary(std::move(q));
}

Unitary dft_matrix(int n) {
  if (n < 1) {
    throw std::invalid_argument("dft_matrix: n must be >= 1");
  }
  Matrix f(n, n);
  const double norm = 1.0 / std::sqrt(static_cast<double>(n));
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      const double arg = 2.0 * kPi * static_cast<double>(j) * static_cast<double>(k) /
                         static_cast<double>(n);
      f(j, k) = std::polar(norm, arg);
    }
  }
  return Unitary(std::move(f), 1e-12);
}

StateVector::StateVector(int n_a, int n_b, CVector amplitudes)
    : n_a_(n_a), n_b_(n_b), amps_(std::move(amplitudes)) {
  if (n_a_ < 1 || n_b_ < 1) {
    throw std::invalid_argument("StateVector: dimensions must be >= 1");
  }
  if (amps_.size() != static_cast<Eigen::Index>(n_a_) * n_b_) {
    throw std::invalid_argument("StateVector: amplitude count does not match dims");
  }
  const double norm_sq = amps_.squaredNorm();
  if (std::abs(norm_sq - 1.0) > 1e-10) {
    throw std::invalid_argument("StateVector: amplitudes are not normalized");
  }
}

StateVector StateVector::basis(int n_a, int n_b, int a, int b) {
  if (a < 0 || a >= n_a || b < 0 || b >= n_b) {
    throw std::invalid_argument("StateVector::basis: index out of range");
  }
  CVector v = CVector::Zero(static_cast<Eigen::Index>(n_a) * n_b);
  v(a * n_b + b) = Complex(1.0, 0.0);
  return StateVector(n_a, n_b, std::move(v));
}

Matrix StateVector::as_matrix() const {
  Matrix m(n_a_, n_b_);
  for (int a = 0; a < n_a_; ++a) {
    for (int b = 0; b < n_b_; ++b) {
      m(a, b) = amps_(a * n_b_ + b);
    }
  }
  return m;
}

StateVector apply_local_unitaries(const StateVector& psi, const Unitary& u_a,
                                  const Unitary& u_b) {
  if (u_a.dim() != psi.dim_a() || u_b.dim() != psi.dim_b()) {
    throw std::invalid_argument("apply_local_unitaries: dimension mismatch");
  }
  const Matrix out = u_a.matrix() * psi.as_matrix() * u_b.matrix().transpose();
  CVector v(static_cast<Eigen::Index>(psi.dim_a()) * psi.dim_b());
  for (int a = 0; a < psi.dim_a(); ++a) {
    for (int b = 0; b < psi.dim_b(); ++b) {
      v(a * psi.dim_b() + b) = out(a, b);
    }
  }
  return StateVector(psi.dim_a(), psi.dim_b(), std::move(v));
}

double fidelity(const StateVector& psi, const StateVector& phi) {
  if (psi.dim_a() != phi.dim_a() || psi.dim_b() != phi.dim_b()) {
    throw std::invalid_argument("fidelity: dimension mismatch");
  }
  const Complex overlap = psi.amplitudes().dot(phi.amplitudes());
  return std::norm(overlap);
}

double entanglement_entropy(const StateVector& psi) {
  Eigen::JacobiSVD<Matrix> svd(psi.as_matrix());
  const Eigen::VectorXd sigma = svd.singularValues();
  double entropy = 0.0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    const double p = sigma(i) * sigma(i);
    if (p > 1e-15) {
      entropy -= p * std::log2(p);
    }
  }
  return entropy;
}

double distance_up_to_global_phase(const Matrix& u, const Matrix& v) {
  if (u.rows() != v.rows() || u.cols() != v.cols() || u.rows() != u.cols()) {
    throw std::invalid_argument("distance_up_to_global_phase: dimension mismatch");
  }
  const Matrix overlap = v.adjoint() * u;
  Complex anchor = overlap.trace();
  if (std::abs(anchor) < 1e-12) {
    Eigen::Index r = 0, c = 0;
    overlap.cwiseAbs().maxCoeff(&r, &c);
    anchor = overlap(r, c);
  }
  const double mag = std::abs(anchor);
  const Complex phase = mag > 0.0 ? anchor / mag : Complex(1.0, 0.0);
  return (u - phase * v).cwiseAbs().maxCoeff();
}

double distance_up_to_global_phase(const Unitary& u, const Unitary& v) {
  return distance_up_to_global_phase(u.matrix(), v.matrix());
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 over master + index increments; stable across platforms.
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double wrap_2pi(double angle) {
  const double two_pi = 2.0 * kPi;
  double w = std::fmod(angle, two_pi);
  if (w < 0.0) w += two_pi;
  return w;
}

double wrap_pm_pi(double angle) {
  double w = wrap_2pi(angle);
  if (w > kPi) w -= 2.0 * kPi;
  return w;
}

}  // namespace multiport
