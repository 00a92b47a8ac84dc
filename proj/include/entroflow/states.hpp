#pragma once

// Density operators, Gibbs states, entropic functionals and the entangled
// thermal pair |Ω⟩ = Z^{-1/2} Σ_i exp(-γ ε_i / 2) |i;A⟩|i;B⟩.
//
// Units: ħ = k_B = 1, natural logarithms (entropies in nats).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "entroflow/error.hpp"
#include "entroflow/qmath.hpp"

namespace entroflow {

inline constexpr double kStateTol = 1e-10;
inline constexpr double kEigenFloor = 1e-12;

/// Energy spectrum, optionally with an eigenbasis (columns of `basis`).
/// Without a basis the Hamiltonian is diagonal in the computational basis.
struct HamiltonianSpec {
  std::vector<double> levels;
  std::optional<ComplexMatrix> basis = std::nullopt;

  std::size_t dim() const noexcept { return levels.size(); }

  void validate() const {
    if (levels.empty()) throw Error(ErrorCode::InvalidSpec, "Hamiltonian has no levels");
    for (std::size_t i = 0; i < levels.size(); ++i) {
      if (!std::isfinite(levels[i])) throw Error(ErrorCode::InvalidSpec, "non-finite energy level");
      if (i > 0 && levels[i] < levels[i - 1]) throw Error(ErrorCode::InvalidSpec, "levels must be ascending");
    }
    if (basis) {
      if (static_cast<std::size_t>(basis->rows()) != levels.size())
        throw Error(ErrorCode::DimensionMismatch, "eigenbasis dimension does not match levels");
      if (unitarity_error(*basis) > kStateTol) throw Error(ErrorCode::InvalidSpec, "eigenbasis is not unitary");
    }
  }

  ComplexMatrix matrix() const {
    const auto n = static_cast<Eigen::Index>(levels.size());
    ComplexMatrix diag = ComplexMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) diag(i, i) = levels[static_cast<std::size_t>(i)];
    if (!basis) return diag;
    ComplexMatrix h = (*basis) * diag * basis->adjoint();
    return 0.5 * (h + h.adjoint());
  }

  HamiltonianSpec scaled(double factor) const {
    HamiltonianSpec out = *this;
    for (auto& e : out.levels) e *= factor;
    return out;
  }
};

/// Hermitian, positive semidefinite, unit-trace matrix plus the subsystem
/// layout it lives on. Only constructed through validating factories.
class DensityOperator {
 public:
  static DensityOperator from_matrix(const ComplexMatrix& m, SubsystemDims dims, double tol = kStateTol) {
    dims.validate();
    if (m.rows() != m.cols() || static_cast<std::size_t>(m.rows()) != dims.total())
      throw Error(ErrorCode::DimensionMismatch, "density matrix does not match subsystem dims");
    if (!m.allFinite()) throw Error(ErrorCode::InvalidState, "non-finite entries");
    if (hermiticity_error(m) > tol) throw Error(ErrorCode::InvalidState, "not Hermitian");
    const double trace = m.trace().real();
    if (std::abs(trace - 1.0) > tol) throw Error(ErrorCode::InvalidState, "trace " + std::to_string(trace));
    ComplexMatrix sym = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::ConvergenceFailure, "eigensolver failed");
    if (solver.eigenvalues()[0] < -tol)
      throw Error(ErrorCode::InvalidState, "negative eigenvalue " + std::to_string(solver.eigenvalues()[0]));
    return DensityOperator(std::move(sym), std::move(dims));
  }

  static DensityOperator from_matrix(const ComplexMatrix& m) {
    return from_matrix(m, SubsystemDims{static_cast<std::size_t>(m.rows())});
  }

  /// |ψ⟩⟨ψ| for a unit vector ψ.
  static DensityOperator pure(const ComplexVector& psi, SubsystemDims dims) {
    if (std::abs(psi.norm() - 1.0) > 1e-12) throw Error(ErrorCode::InvalidState, "state vector is not normalized");
    return from_matrix(psi * psi.adjoint(), std::move(dims));
  }

  static DensityOperator product(const DensityOperator& a, const DensityOperator& b) {
    SubsystemDims dims = a.dims();
    dims.dims.insert(dims.dims.end(), b.dims().dims.begin(), b.dims().dims.end());
    return from_matrix(kron(a.matrix(), b.matrix()), std::move(dims));
  }

  const ComplexMatrix& matrix() const noexcept { return matrix_; }
  const SubsystemDims& dims() const noexcept { return dims_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }

  /// tr(ρ H).
  double expectation(const ComplexMatrix& h) const { return (matrix_ * h).trace().real(); }

  /// U ρ U†, same layout.
  DensityOperator evolved(const ComplexMatrix& u) const { return from_matrix(u * matrix_ * u.adjoint(), dims_); }

 private:
  DensityOperator(ComplexMatrix m, SubsystemDims d) : matrix_(std::move(m)), dims_(std::move(d)) {}

  ComplexMatrix matrix_;
  SubsystemDims dims_;
};

inline double partition_function(const HamiltonianSpec& h, double beta) {
  double z = 0.0;
  for (double e : h.levels) z += std::exp(-beta * e);
  return z;
}

/// exp(-βH)/Z.
inline DensityOperator gibbs_state(const HamiltonianSpec& h, double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw Error(ErrorCode::NonpositiveBeta, "beta must be positive");
  h.validate();
  const double ground = h.levels.front();
  const auto n = static_cast<Eigen::Index>(h.dim());
  RealVector pop(n);
  for (Eigen::Index i = 0; i < n; ++i) pop[i] = std::exp(-beta * (h.levels[static_cast<std::size_t>(i)] - ground));
  pop /= pop.sum();
  ComplexMatrix rho = pop.cast<Complex>().asDiagonal();
  if (h.basis) rho = (*h.basis) * rho * h.basis->adjoint();
  return DensityOperator::from_matrix(rho, SubsystemDims{h.dim()});
}

/// Spectrum of ρ with eigenvalues below kEigenFloor set to zero.
inline RealVector clipped_spectrum(const ComplexMatrix& rho) {
  RealVector w = eig_hermitian(rho).values;
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (w[i] < kEigenFloor) w[i] = 0.0;
  return w;
}

inline double entropy_of_spectrum(const RealVector& w) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (w[i] > 0.0) s -= w[i] * std::log(w[i]);
  // An eigenvalue of 1 + ulp on a pure state would give -1e-16.
  return std::max(s, 0.0);
}

/// -tr(ρ ln ρ) in nats.
inline double von_neumann_entropy(const DensityOperator& rho) { return entropy_of_spectrum(clipped_spectrum(rho.matrix())); }

/// Entropy of the reduced state on the factors in `keep`.
inline double subsystem_entropy(const DensityOperator& rho, const std::vector<std::size_t>& keep) {
  if (keep.size() == rho.dims().factors()) return von_neumann_entropy(rho);
  return entropy_of_spectrum(clipped_spectrum(partial_trace(rho.matrix(), rho.dims(), keep)));
}

/// S(ρ‖σ) = -S(ρ) - tr(ρ ln σ).
inline double relative_entropy(const DensityOperator& rho, const DensityOperator& sigma) {
  if (rho.dim() != sigma.dim()) throw Error(ErrorCode::DimensionMismatch, "relative_entropy dimension mismatch");
  const EigenSystem sig = eig_hermitian(sigma.matrix());
  // Weight of ρ on each eigenvector of σ.
  const ComplexMatrix rotated = sig.vectors.adjoint() * rho.matrix() * sig.vectors;
  double cross = 0.0;  // tr(ρ ln σ)
  for (Eigen::Index j = 0; j < sig.values.size(); ++j) {
    const double weight = rotated(j, j).real();
    if (sig.values[j] <= kEigenFloor * 1e-2) {
      if (weight > kStateTol)
        throw Error(ErrorCode::SupportViolation, "rho has weight " + std::to_string(weight) + " outside supp(sigma)");
      continue;
    }
    cross += weight * std::log(sig.values[j]);
  }
  return -von_neumann_entropy(rho) - cross;
}

/// I(i:j) = S^i + S^j - S^{ij}.
inline double mutual_information(const DensityOperator& rho, std::size_t i, std::size_t j) {
  const std::size_t n = rho.dims().factors();
  if (i == j || i >= n || j >= n) throw Error(ErrorCode::DimensionMismatch, "mutual_information needs distinct factors");
  return subsystem_entropy(rho, {i}) + subsystem_entropy(rho, {j}) - subsystem_entropy(rho, {i, j});
}

/// Reduced state of a single factor.
inline DensityOperator marginal(const DensityOperator& rho, std::size_t which) {
  if (which >= rho.dims().factors()) throw Error(ErrorCode::DimensionMismatch, "no such factor");
  return DensityOperator::from_matrix(partial_trace(rho.matrix(), rho.dims(), {which}),
                                      SubsystemDims{rho.dims()[which]});
}

/// Shared spectrum ε (ε₀ = 0, ascending), γ and the two scale factors μ^A,
/// μ^B with local spectra E^A = ε/μ^A and E^B = ε/μ^B.
struct EntangledThermalSpec {
  std::vector<double> epsilon;
  double gamma = 1.0;
  double mu_a = 1.0;
  double mu_b = 1.0;

  void validate() const {
    if (epsilon.size() < 2) throw Error(ErrorCode::InvalidSpec, "need at least two levels");
    if (epsilon.front() != 0.0) throw Error(ErrorCode::InvalidSpec, "epsilon[0] must be 0");
    for (std::size_t i = 1; i < epsilon.size(); ++i)
      if (!std::isfinite(epsilon[i]) || epsilon[i] < epsilon[i - 1])
        throw Error(ErrorCode::InvalidSpec, "epsilon must be finite and ascending");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw Error(ErrorCode::InvalidSpec, "gamma must be positive");
    if (!(mu_a > 0.0) || !(mu_b > 0.0) || !std::isfinite(mu_a) || !std::isfinite(mu_b))
      throw Error(ErrorCode::InvalidSpec, "mu_a and mu_b must be positive");
  }

  std::size_t dim() const noexcept { return epsilon.size(); }
  HamiltonianSpec hamiltonian_a() const { return HamiltonianSpec{epsilon}.scaled(1.0 / mu_a); }
  HamiltonianSpec hamiltonian_b() const { return HamiltonianSpec{epsilon}.scaled(1.0 / mu_b); }
  double beta_a() const noexcept { return mu_a * gamma; }
  double beta_b() const noexcept { return mu_b * gamma; }
  double partition_function() const {
    double z = 0.0;
    for (double e : epsilon) z += std::exp(-gamma * e);
    return z;
  }
};

/// Full joint state vector on d_A ⊗ d_B.
struct PureJointState {
  ComplexVector amplitudes;
  SubsystemDims dims;

  DensityOperator density() const { return DensityOperator::pure(amplitudes, dims); }
};

inline PureJointState entangled_thermal_state(const EntangledThermalSpec& spec) {
  spec.validate();
  const std::size_t d = spec.dim();
  const double z = spec.partition_function();
  PureJointState out{ComplexVector::Zero(static_cast<Eigen::Index>(d * d)), SubsystemDims{d, d}};
  for (std::size_t i = 0; i < d; ++i)
    out.amplitudes[static_cast<Eigen::Index>(i * d + i)] = std::exp(-0.5 * spec.gamma * spec.epsilon[i]) / std::sqrt(z);
  return out;
}

}  // namespace entroflow
