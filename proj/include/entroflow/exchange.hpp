#pragma once

// Heat exchange between two systems A and B that start either uncorrelated
// (Case S: product of Gibbs states) or in the entangled thermal pair
// (Case V), under energy-conserving unitaries; plus a cyclic runner that
// alternates reservoir contacts and Hamiltonian quenches.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "entroflow/error.hpp"
#include "entroflow/qmath.hpp"
#include "entroflow/rng.hpp"
#include "entroflow/states.hpp"

namespace entroflow {

inline constexpr double kDegeneracyTol = 1e-9;
inline constexpr double kConservationTol = 1e-10;
inline constexpr double kContractTol = 1e-9;

/// Local basis labels (i on A, j on B) of a joint basis state.
struct BasisPair {
  std::size_t a = 0;
  std::size_t b = 0;

  friend auto operator<=>(const BasisPair&, const BasisPair&) = default;
};

using DegeneratePair = std::pair<BasisPair, BasisPair>;

/// E_i^A + E_j^B at joint index i * d_B + j.
inline std::vector<double> total_levels(const HamiltonianSpec& ha, const HamiltonianSpec& hb) {
  std::vector<double> out;
  out.reserve(ha.dim() * hb.dim());
  for (double ea : ha.levels)
    for (double eb : hb.levels) out.push_back(ea + eb);
  return out;
}

/// H_A ⊗ I + I ⊗ H_B.
inline ComplexMatrix bare_hamiltonian(const HamiltonianSpec& ha, const HamiltonianSpec& hb) {
  const auto da = static_cast<Eigen::Index>(ha.dim());
  const auto db = static_cast<Eigen::Index>(hb.dim());
  return kron(ha.matrix(), ComplexMatrix::Identity(db, db)) + kron(ComplexMatrix::Identity(da, da), hb.matrix());
}

/// Every unordered pair of distinct joint basis states with equal total
/// energy (within tol). Each pair is listed once, lexicographically smaller
/// state first.
inline std::vector<DegeneratePair> degenerate_pairs(const HamiltonianSpec& ha, const HamiltonianSpec& hb,
                                                    double tol = kDegeneracyTol) {
  std::vector<DegeneratePair> out;
  const std::size_t da = ha.dim();
  const std::size_t db = hb.dim();
  for (std::size_t u = 0; u < da * db; ++u)
    for (std::size_t v = u + 1; v < da * db; ++v) {
      const BasisPair p{u / db, u % db};
      const BasisPair q{v / db, v % db};
      if (std::abs(ha.levels[p.a] + hb.levels[p.b] - ha.levels[q.a] - hb.levels[q.b]) <= tol) out.emplace_back(p, q);
    }
  return out;
}

/// A real rotation by phi in the plane spanned by joint basis states u, v:
/// |u⟩ → cos φ |u⟩ + sin φ |v⟩, |v⟩ → -sin φ |u⟩ + cos φ |v⟩.
struct Rotation {
  std::size_t u = 0;
  std::size_t v = 0;
  double phi = 0.0;
};

inline std::size_t joint_index(const SubsystemDims& dims, BasisPair p) {
  if (dims.factors() != 2 || p.a >= dims[0] || p.b >= dims[1])
    throw Error(ErrorCode::DimensionMismatch, "basis pair out of range");
  return p.a * dims[1] + p.b;
}

inline Rotation make_rotation(const SubsystemDims& dims, BasisPair first, BasisPair second, double phi) {
  return {joint_index(dims, first), joint_index(dims, second), phi};
}

/// Product of disjoint Givens rotations, each inside a degenerate
/// eigenspace of the bare Hamiltonian whose diagonal is `levels`.
inline ComplexMatrix givens_unitary(const SubsystemDims& dims, const std::vector<Rotation>& rotations,
                                    const std::vector<double>& levels, double tol = kDegeneracyTol) {
  const std::size_t total = dims.total();
  if (levels.size() != total) throw Error(ErrorCode::DimensionMismatch, "levels do not match joint dimension");
  std::vector<bool> used(total, false);
  ComplexMatrix u = ComplexMatrix::Identity(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(total));
  for (const auto& r : rotations) {
    if (r.u >= total || r.v >= total || r.u == r.v)
      throw Error(ErrorCode::DimensionMismatch, "rotation plane indices invalid");
    if (used[r.u] || used[r.v]) throw Error(ErrorCode::OverlappingPlanes, "rotation planes share a basis state");
    if (std::abs(levels[r.u] - levels[r.v]) > tol)
      throw Error(ErrorCode::NotDegenerate, "states " + std::to_string(r.u) + " and " + std::to_string(r.v) +
                                                " differ in energy by " + std::to_string(levels[r.u] - levels[r.v]));
    used[r.u] = used[r.v] = true;
    const auto iu = static_cast<Eigen::Index>(r.u);
    const auto iv = static_cast<Eigen::Index>(r.v);
    const double c = std::cos(r.phi);
    const double s = std::sin(r.phi);
    u(iu, iu) = c;
    u(iv, iu) = s;
    u(iu, iv) = -s;
    u(iv, iv) = c;
  }
  return u;
}

inline ComplexMatrix swap_operator(std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d);
  ComplexMatrix s = ComplexMatrix::Zero(n * n, n * n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) s(b * n + a, a * n + b) = 1.0;
  return s;
}

/// cos φ · I - i sin φ · SWAP on d ⊗ d.
inline ComplexMatrix partial_swap(std::size_t d, double phi) {
  if (d < 2) throw Error(ErrorCode::DimensionMismatch, "partial_swap needs d >= 2");
  const auto n = static_cast<Eigen::Index>(d * d);
  return std::cos(phi) * ComplexMatrix::Identity(n, n) - Complex(0.0, std::sin(phi)) * swap_operator(d);
}

/// Haar-random unitary on each degenerate eigenspace of a diagonal
/// Hamiltonian (levels grouped by chaining neighbours within tol). Draws
/// come from rng.substream(cluster index).
inline ComplexMatrix energy_conserving_unitary(const std::vector<double>& levels, CounterRng& rng,
                                               double tol = kDegeneracyTol) {
  const std::size_t n = levels.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return levels[x] < levels[y]; });
  ComplexMatrix u = ComplexMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::size_t start = 0;
  std::uint64_t cluster = 0;
  while (start < n) {
    std::size_t end = start + 1;
    while (end < n && levels[order[end]] - levels[order[end - 1]] <= tol) ++end;
    CounterRng sub = rng.substream(cluster++);
    const ComplexMatrix block = haar_unitary(end - start, sub);
    for (std::size_t r = start; r < end; ++r)
      for (std::size_t c = start; c < end; ++c)
        u(static_cast<Eigen::Index>(order[r]), static_cast<Eigen::Index>(order[c])) =
            block(static_cast<Eigen::Index>(r - start), static_cast<Eigen::Index>(c - start));
    start = end;
  }
  return u;
}

enum class CaseKind { S, V };

/// Initial condition for an exchange experiment: local Hamiltonians, the
/// local inverse temperatures and the joint state on A ⊗ B.
struct CaseSpec {
  CaseKind kind;
  HamiltonianSpec h_a;
  HamiltonianSpec h_b;
  double beta_a;
  double beta_b;
  DensityOperator initial;
};

/// Pure entangled pair whose marginals are Gibbs at β^A = μ^A γ and
/// β^B = μ^B γ.
inline CaseSpec make_case_v(const EntangledThermalSpec& spec) {
  spec.validate();
  return CaseSpec{CaseKind::V,      spec.hamiltonian_a(), spec.hamiltonian_b(),
                  spec.beta_a(),    spec.beta_b(),        entangled_thermal_state(spec).density()};
}

inline CaseSpec make_case_s(const HamiltonianSpec& ha, double beta_a, const HamiltonianSpec& hb, double beta_b) {
  DensityOperator joint = DensityOperator::product(gibbs_state(ha, beta_a), gibbs_state(hb, beta_b));
  return CaseSpec{CaseKind::S, ha, hb, beta_a, beta_b, std::move(joint)};
}

/// Uncorrelated counterpart of make_case_v: same local Hamiltonians and
/// temperatures, product initial state.
inline CaseSpec make_case_s(const EntangledThermalSpec& spec) {
  spec.validate();
  return make_case_s(spec.hamiltonian_a(), spec.beta_a(), spec.hamiltonian_b(), spec.beta_b());
}

struct ExchangeReport {
  CaseKind kind = CaseKind::S;
  double q_a = 0.0;
  double q_b = 0.0;
  double ds_a = 0.0;
  double ds_b = 0.0;
  double mutual_info_initial = 0.0;
  double mutual_info_final = 0.0;
  double joint_entropy_initial = 0.0;
  double joint_entropy_final = 0.0;
  double work_leak = 0.0;  // Q_A + Q_B
  double slack_a = 0.0;    // β^A Q_A - ΔS_A
  double slack_b = 0.0;    // β^B Q_B - ΔS_B
  double beta_a = 0.0;
  double beta_b = 0.0;
  double commutator_norm = 0.0;  // max-abs of [U, H_A ⊗ I + I ⊗ H_B]
  bool energy_conserving = false;
  bool contracts_checked = false;  // energy conserving and |W| <= 1e-10
  bool contracts_hold = true;
};

/// Case S: ΔS_A + ΔS_B ≥ 0, β^A Q_A + β^B Q_B ≥ 0, (β^A - β^B) Q_A ≥ 0.
/// Case V: ΔS_A = ΔS_B ≤ 0.
inline bool case_contracts_hold(const ExchangeReport& r, double tol = kContractTol) {
  if (r.kind == CaseKind::S)
    return r.ds_a + r.ds_b >= -tol && r.beta_a * r.q_a + r.beta_b * r.q_b >= -tol &&
           (r.beta_a - r.beta_b) * r.q_a >= -tol;
  return std::abs(r.ds_a - r.ds_b) <= tol && r.ds_a <= tol;
}

inline ExchangeReport run_exchange(const CaseSpec& c, const ComplexMatrix& u) {
  const std::size_t total = c.h_a.dim() * c.h_b.dim();
  if (c.initial.dim() != total || u.rows() != u.cols() || static_cast<std::size_t>(u.rows()) != total)
    throw Error(ErrorCode::DimensionMismatch, "unitary does not act on the joint space");
  if (unitarity_error(u) > kConservationTol) throw Error(ErrorCode::NotUnitary, "exchange operator is not unitary");

  const DensityOperator& before = c.initial;
  const DensityOperator after = before.evolved(u);
  const ComplexMatrix ha = c.h_a.matrix();
  const ComplexMatrix hb = c.h_b.matrix();
  const DensityOperator a0 = marginal(before, 0);
  const DensityOperator b0 = marginal(before, 1);
  const DensityOperator a1 = marginal(after, 0);
  const DensityOperator b1 = marginal(after, 1);

  ExchangeReport r;
  r.kind = c.kind;
  r.beta_a = c.beta_a;
  r.beta_b = c.beta_b;
  r.q_a = a1.expectation(ha) - a0.expectation(ha);
  r.q_b = b1.expectation(hb) - b0.expectation(hb);
  const double sa0 = von_neumann_entropy(a0);
  const double sb0 = von_neumann_entropy(b0);
  const double sa1 = von_neumann_entropy(a1);
  const double sb1 = von_neumann_entropy(b1);
  r.ds_a = sa1 - sa0;
  r.ds_b = sb1 - sb0;
  r.joint_entropy_initial = von_neumann_entropy(before);
  r.joint_entropy_final = von_neumann_entropy(after);
  r.mutual_info_initial = sa0 + sb0 - r.joint_entropy_initial;
  r.mutual_info_final = sa1 + sb1 - r.joint_entropy_final;
  r.work_leak = r.q_a + r.q_b;
  r.slack_a = c.beta_a * r.q_a - r.ds_a;
  r.slack_b = c.beta_b * r.q_b - r.ds_b;

  const ComplexMatrix h0 = bare_hamiltonian(c.h_a, c.h_b);
  r.commutator_norm = max_abs(u * h0 - h0 * u);
  r.energy_conserving = r.commutator_norm <= kConservationTol;
  r.contracts_checked = r.energy_conserving && std::abs(r.work_leak) <= kConservationTol;
  r.contracts_hold = case_contracts_hold(r);
  return r;
}

// ---------------------------------------------------------------------------
// Clausius cycle

/// Contact with a fresh reservoir that copies the current system
/// Hamiltonian and is Gibbs at `temperature`; coupled by partial_swap(phi).
struct ContactStroke {
  double temperature = 1.0;
  double phi = std::numbers::pi / 2;
};

/// Instantaneous Hamiltonian replacement; the state is unchanged and the
/// work done on the system is tr(ρ (H_new - H_old)).
struct QuenchStroke {
  HamiltonianSpec hamiltonian;
};

using ClausiusStroke = std::variant<ContactStroke, QuenchStroke>;

struct ContactRecord {
  std::size_t stroke = 0;
  double beta = 0.0;
  double heat = 0.0;            // Q_j^S absorbed by the system
  double entropy_change = 0.0;  // ΔS_j^S
  double reservoir_entropy_change = 0.0;  // ΔS_j^R
  double slack = 0.0;            // β_j Q_j^S - ΔS_j^S, must be <= 0
  double reservoir_slack = 0.0;  // β_j Q_j^S + ΔS_j^R = -S(ρ_R'‖ρ_R), must be <= 0
};

struct QuenchRecord {
  std::size_t stroke = 0;
  double work = 0.0;
};

struct CycleReport {
  double clausius_sum = 0.0;  // Σ_j β_j Q_j^S over the last cycle
  std::vector<ContactRecord> contacts;
  std::vector<QuenchRecord> quenches;
  std::size_t cycles = 0;
  double residual = 0.0;  // trace distance between start and end of the last cycle
  bool converged = false;
  bool clausius_holds = false;  // clausius_sum <= 1e-8
  bool strokes_hold = false;    // every contact slack (both forms) <= 1e-9
  ComplexMatrix final_state;
};

/// Raised when the fixed-point iteration does not settle; carries the
/// report of the last cycle.
class NoConvergenceError : public Error {
 public:
  explicit NoConvergenceError(CycleReport report)
      : Error(ErrorCode::NoConvergence, "residual " + std::to_string(report.residual) + " after " +
                                            std::to_string(report.cycles) + " cycles"),
        report_(std::move(report)) {}
  const CycleReport& report() const noexcept { return report_; }

 private:
  CycleReport report_;
};

inline void validate_cycle(const HamiltonianSpec& system, const std::vector<ClausiusStroke>& strokes) {
  system.validate();
  const ComplexMatrix h0 = system.matrix();
  ComplexMatrix current = h0;
  for (const auto& stroke : strokes) {
    if (const auto* c = std::get_if<ContactStroke>(&stroke)) {
      if (!(c->temperature > 0.0) || !std::isfinite(c->temperature) || !std::isfinite(c->phi))
        throw Error(ErrorCode::InvalidSpec, "contact needs a positive finite temperature");
    } else {
      const auto& q = std::get<QuenchStroke>(stroke);
      q.hamiltonian.validate();
      if (q.hamiltonian.dim() != system.dim()) throw Error(ErrorCode::DimensionMismatch, "quench changes dimension");
      current = q.hamiltonian.matrix();
    }
  }
  if (max_abs(current - h0) > 1e-12) throw Error(ErrorCode::BadCycle, "quenches do not restore the initial Hamiltonian");
}

inline CycleReport clausius_cycle(const HamiltonianSpec& system, const DensityOperator& initial,
                                  const std::vector<ClausiusStroke>& strokes, std::size_t max_cycles, double fp_tol) {
  validate_cycle(system, strokes);
  const std::size_t d = system.dim();
  if (initial.dim() != d) throw Error(ErrorCode::DimensionMismatch, "initial state does not match the system");
  if (d < 2) throw Error(ErrorCode::InvalidSpec, "system needs at least two levels");
  if (max_cycles == 0) throw Error(ErrorCode::InvalidSpec, "max_cycles must be positive");

  ComplexMatrix rho = initial.matrix();
  CycleReport report;
  for (std::size_t cycle = 1; cycle <= max_cycles; ++cycle) {
    const ComplexMatrix start = rho;
    HamiltonianSpec h = system;
    report.contacts.clear();
    report.quenches.clear();
    report.clausius_sum = 0.0;
    for (std::size_t j = 0; j < strokes.size(); ++j) {
      if (const auto* c = std::get_if<ContactStroke>(&strokes[j])) {
        const double beta = 1.0 / c->temperature;
        const DensityOperator reservoir = gibbs_state(h, beta);
        const ComplexMatrix hm = h.matrix();
        const ComplexMatrix u = partial_swap(d, c->phi);
        const ComplexMatrix joint = u * kron(rho, reservoir.matrix()) * u.adjoint();
        const ComplexMatrix next = partial_trace(joint, SubsystemDims{d, d}, {0});
        const auto s_before = DensityOperator::from_matrix(rho);
        const auto s_after = DensityOperator::from_matrix(next);
        const auto r_after = DensityOperator::from_matrix(partial_trace(joint, SubsystemDims{d, d}, {1}));
        ContactRecord rec;
        rec.stroke = j;
        rec.beta = beta;
        rec.heat = s_after.expectation(hm) - s_before.expectation(hm);
        rec.entropy_change = von_neumann_entropy(s_after) - von_neumann_entropy(s_before);
        rec.reservoir_entropy_change = von_neumann_entropy(r_after) - von_neumann_entropy(reservoir);
        rec.slack = beta * rec.heat - rec.entropy_change;
        rec.reservoir_slack = beta * rec.heat + rec.reservoir_entropy_change;
        report.clausius_sum += beta * rec.heat;
        report.contacts.push_back(rec);
        rho = s_after.matrix();
      } else {
        const auto& q = std::get<QuenchStroke>(strokes[j]);
        const ComplexMatrix dh = q.hamiltonian.matrix() - h.matrix();
        report.quenches.push_back({j, (rho * dh).trace().real()});
        h = q.hamiltonian;
      }
    }
    report.cycles = cycle;
    report.residual = trace_distance(start, rho);
    if (report.residual < fp_tol) {
      report.converged = true;
      break;
    }
  }
  report.final_state = rho;
  report.clausius_holds = report.clausius_sum <= 1e-8;
  report.strokes_hold = std::all_of(report.contacts.begin(), report.contacts.end(),
                                    [](const ContactRecord& c) {
                                      return c.slack <= kContractTol && c.reservoir_slack <= kContractTol;
                                    });
  if (!report.converged) throw NoConvergenceError(report);
  return report;
}

}  // namespace entroflow
