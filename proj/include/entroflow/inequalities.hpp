#pragma once

// Entropic inequality checks: strong subadditivity, the average
// two-body-correlation bound I_av <= S_av, and the relative-entropy
// identity for evolutions that start from a Gibbs state.

#include <cstddef>
#include <vector>

#include "entroflow/error.hpp"
#include "entroflow/qmath.hpp"
#include "entroflow/states.hpp"

namespace entroflow {

inline constexpr double kInequalityTol = 1e-9;
inline constexpr double kIdentityTol = 1e-9;

struct SlackReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // rhs - lhs
  bool pass = true;
  double tol = kInequalityTol;
};

inline SlackReport make_slack(double lhs, double rhs, double tol = kInequalityTol) {
  const double slack = rhs - lhs;
  return {lhs, rhs, slack, slack >= -tol, tol};
}

/// S^i + S^j <= S^{ik} + S^{jk}.
inline SlackReport check_ssa(const DensityOperator& rho, std::size_t i, std::size_t j, std::size_t k,
                             double tol = kInequalityTol) {
  const std::size_t n = rho.dims().factors();
  if (n < 3) throw Error(ErrorCode::DimensionMismatch, "strong subadditivity needs three factors");
  if (i >= n || j >= n || k >= n || i == j || i == k || j == k)
    throw Error(ErrorCode::DimensionMismatch, "factor indices must be distinct and in range");
  const double lhs = subsystem_entropy(rho, {i}) + subsystem_entropy(rho, {j});
  const double rhs = subsystem_entropy(rho, {i, k}) + subsystem_entropy(rho, {j, k});
  return make_slack(lhs, rhs, tol);
}

/// Average pairwise mutual information against average single-factor
/// entropy, over all N >= 3 factors.
inline SlackReport average_correlation_bound(const DensityOperator& rho, double tol = kInequalityTol) {
  const std::size_t n = rho.dims().factors();
  if (n < 3) throw Error(ErrorCode::TooFewFactors, "average correlation bound needs N >= 3 factors");
  std::vector<double> single(n);
  for (std::size_t i = 0; i < n; ++i) single[i] = subsystem_entropy(rho, {i});
  double mi_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) mi_sum += single[i] + single[j] - subsystem_entropy(rho, {i, j});
  double s_sum = 0.0;
  for (double s : single) s_sum += s;
  const double pairs = static_cast<double>(n * (n - 1) / 2);
  return make_slack(mi_sum / pairs, s_sum / static_cast<double>(n), tol);
}

/// Unitary on system ⊗ ancilla followed by discarding the ancilla.
struct AncillaChannel {
  ComplexMatrix unitary;
  DensityOperator ancilla;

  DensityOperator apply(const DensityOperator& system) const {
    const std::size_t ds = system.dim();
    const std::size_t da = ancilla.dim();
    if (static_cast<std::size_t>(unitary.rows()) != ds * da || unitary.rows() != unitary.cols())
      throw Error(ErrorCode::DimensionMismatch, "channel unitary does not act on system ⊗ ancilla");
    if (unitarity_error(unitary) > kStateTol) throw Error(ErrorCode::NotUnitary, "channel is not unitary");
    const ComplexMatrix joint = unitary * kron(system.matrix(), ancilla.matrix()) * unitary.adjoint();
    return DensityOperator::from_matrix(partial_trace(joint, SubsystemDims{ds, da}, {0}), SubsystemDims{ds});
  }
};

struct GibbsIdentityReport {
  double relative_entropy_lhs = 0.0;  // S(ρ_f ‖ ρ_i)
  double beta_dU = 0.0;
  double dS = 0.0;
  double beta_tr_rhof_dH = 0.0;
  double rhs = 0.0;  // βΔU - ΔS - β tr(ρ_f ΔH)
  double identity_gap = 0.0;
  double nonneg_slack = 0.0;  // equals rhs
  double heat = 0.0;          // tr(ρ_f H_i) - tr(ρ_i H_i)
};

/// Evolves ρ_i = exp(-βH_i)/Z through `channel` and compares the relative
/// entropy S(ρ_f‖ρ_i) with βΔU - ΔS - β tr(ρ_f ΔH), ΔH = H_f - H_i.
inline GibbsIdentityReport gibbs_evolution_identity(const HamiltonianSpec& h_initial, double beta, const AncillaChannel& channel,
                                          const HamiltonianSpec& h_final) {
  if (!(beta > 0.0)) throw Error(ErrorCode::NonpositiveBeta, "beta must be positive");
  h_final.validate();
  if (h_final.dim() != h_initial.dim()) throw Error(ErrorCode::DimensionMismatch, "H_i and H_f differ in dimension");
  const DensityOperator rho_i = gibbs_state(h_initial, beta);
  const DensityOperator rho_f = channel.apply(rho_i);
  const ComplexMatrix hi = h_initial.matrix();
  const ComplexMatrix hf = h_final.matrix();

  GibbsIdentityReport r;
  r.relative_entropy_lhs = relative_entropy(rho_f, rho_i);
  r.beta_dU = beta * (rho_f.expectation(hf) - rho_i.expectation(hi));
  r.dS = von_neumann_entropy(rho_f) - von_neumann_entropy(rho_i);
  r.beta_tr_rhof_dH = beta * rho_f.expectation(hf - hi);
  r.rhs = r.beta_dU - r.dS - r.beta_tr_rhof_dH;
  r.identity_gap = std::abs(r.relative_entropy_lhs - r.rhs);
  r.nonneg_slack = r.rhs;
  r.heat = rho_f.expectation(hi) - rho_i.expectation(hi);
  return r;
}

}  // namespace entroflow
