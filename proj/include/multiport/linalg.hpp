// Complex dense matrix and state-vector foundation for the multiport toolkit.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <utility>

namespace multiport {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Default tolerance for unitarity checks at construction.
inline constexpr double kUnitaryTol = 1e-10;
/// Default tolerance for round-trip assertions (compile/forward and friends).
inline constexpr double kRoundTripTol = 1e-9;

/// True iff max-abs entry of M†M − I is at most tol. Throws on non-square input.
bool is_unitary(const Matrix& m, double tol);

/// An n×n complex matrix with verified unitarity (U†U = I within tol, max-abs norm).
class Unitary {
 public:
  /// Throws std::invalid_argument if m is non-square, empty, or fails the check.
  explicit Unitary(Matrix m, double tol = kUnitaryTol);

  static Unitary identity(int n);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }

  Unitary adjoint() const;
  Unitary operator*(const Unitary& rhs) const;

 private:
  Matrix m_;
};

/// Haar-distributed random unitary, deterministic per seed.
///
/// QR of a standard complex Gaussian matrix, with the diagonal of R
/// renormalized to unit modulus so the distribution is exactly Haar.
Unitary haar_random_unitary(int n, std::uint64_t seed);

/// Discrete Fourier transform matrix: entry (j,k) = exp(2πi·j·k/n)/√n.
/// For n modes this is the balanced multiport ("Bellport"); n=2 gives the
/// balanced beam splitter.
Unitary dft_matrix(int n);

/// Normalized amplitude vector over the N_A·N_B bipartite basis |k_A k_B⟩,
/// stored row-major in k_A.
class StateVector {
 public:
  /// Throws if amplitudes.size() != n_a*n_b or the norm deviates from 1 by
  /// more than 1e-10.
  StateVector(int n_a, int n_b, CVector amplitudes);

  /// Basis state |ab⟩.
  static StateVector basis(int n_a, int n_b, int a, int b);

  int dim_a() const { return n_a_; }
  int dim_b() const { return n_b_; }
  const CVector& amplitudes() const { return amps_; }
  Complex amp(int a, int b) const { return amps_(a * n_b_ + b); }

  /// Amplitudes reshaped to an n_a × n_b matrix M with M(a,b) = ⟨ab|ψ⟩.
  Matrix as_matrix() const;

 private:
  int n_a_;
  int n_b_;
  CVector amps_;
};

/// (U_A ⊗ U_B)|ψ⟩ without forming the Kronecker product.
StateVector apply_local_unitaries(const StateVector& psi, const Unitary& u_a,
                                  const Unitary& u_b);

/// |⟨psi|phi⟩|². Symmetric, global-phase invariant. Throws on dim mismatch.
double fidelity(const StateVector& psi, const StateVector& phi);

/// Base-2 von Neumann entropy of the reduced state of subsystem A
/// (the Schmidt-coefficient entropy). 0 for product states, log2(min dim)
/// for maximally entangled ones.
double entanglement_entropy(const StateVector& psi);

/// max-abs entry of U − cV with the global phase c taken from trace(V†U),
/// falling back to the largest-magnitude entry of V†U when |trace| < 1e-12.
/// Zero iff U and V agree up to a global phase.
double distance_up_to_global_phase(const Unitary& u, const Unitary& v);
double distance_up_to_global_phase(const Matrix& u, const Matrix& v);

/// Stable per-item seed derivation (splitmix64). Used by every Monte Carlo
/// kernel so results are independent of execution order and worker count.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Wrap an angle into [0, 2π).
double wrap_2pi(double angle);
/// Wrap an angle into (−π, π].
double wrap_pm_pi(double angle);

}  // namespace multiport
