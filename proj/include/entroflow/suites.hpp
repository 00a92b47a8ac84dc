#pragma once

// Randomized ensembles for the entropic inequality checks. Trial t draws
// from CounterRng(seed, check stream).substream(t), so any single trial can
// be replayed from (seed, t) and the report does not depend on the number
// of worker threads.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "entroflow/error.hpp"
#include "entroflow/inequalities.hpp"
#include "entroflow/parallel.hpp"
#include "entroflow/qmath.hpp"
#include "entroflow/rng.hpp"
#include "entroflow/states.hpp"

namespace entroflow {

enum class IneqCheck { Ssa, Correlation, GibbsIdentity };

inline std::string to_string(IneqCheck c) {
  switch (c) {
    case IneqCheck::Ssa: return "ssa";
    case IneqCheck::Correlation: return "eq1";
    case IneqCheck::GibbsIdentity: return "eq2";
  }
  return "?";
}

inline IneqCheck parse_ineq_check(const std::string& s) {
  if (s == "ssa") return IneqCheck::Ssa;
  if (s == "eq1") return IneqCheck::Correlation;
  if (s == "eq2") return IneqCheck::GibbsIdentity;
  throw Error(ErrorCode::InvalidSpec, "unknown check '" + s + "' (expected ssa, eq1 or eq2)");
}

/// Lower bound for the relative-entropy side of the Gibbs identity.
inline constexpr double kRhsFloor = 1e-10;

struct TrialOutcome {
  double slack = 0.0;         // worst slack of the trial (rhs for eq2)
  double identity_gap = 0.0;  // eq2 only
  bool pass = true;
};

struct IneqSuiteReport {
  IneqCheck check = IneqCheck::Ssa;
  std::vector<std::size_t> dims;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::size_t passed = 0;
  double worst_slack = std::numeric_limits<double>::infinity();
  std::size_t worst_trial = 0;
  double worst_identity_gap = 0.0;
  std::vector<std::size_t> failing_trials;

  bool all_pass() const noexcept { return passed == trials; }
};

inline std::uint64_t suite_stream(IneqCheck c) {
  switch (c) {
    case IneqCheck::Ssa: return 0x737361;
    case IneqCheck::Correlation: return 0x657131;
    case IneqCheck::GibbsIdentity: return 0x657132;
  }
  return 0;
}

inline void validate_suite(IneqCheck check, const std::vector<std::size_t>& dims) {
  SubsystemDims(dims).validate();
  if (check == IneqCheck::GibbsIdentity) {
    if (dims.size() != 2 || dims[0] < 2 || dims[1] < 1)
      throw Error(ErrorCode::InvalidSpec, "eq2 takes --dims system,ancilla with system >= 2");
  } else if (dims.size() < 3) {
    throw Error(ErrorCode::TooFewFactors, to_string(check) + " needs at least three factors");
  }
}

/// Random state of random rank in [1, total].
inline DensityOperator random_mixed_state(const std::vector<std::size_t>& dims, CounterRng& rng) {
  const SubsystemDims sd(dims);
  const std::size_t total = sd.total();
  const std::size_t rank = 1 + static_cast<std::size_t>(rng.next_u64() % total);
  return DensityOperator::from_matrix(random_density(total, rank, rng), sd);
}

inline std::vector<double> random_levels(std::size_t d, CounterRng& rng) {
  std::vector<double> levels(d);
  for (auto& e : levels) e = rng.uniform();
  std::sort(levels.begin(), levels.end());
  return levels;
}

inline TrialOutcome ssa_trial(const std::vector<std::size_t>& dims, CounterRng& rng) {
  const DensityOperator rho = random_mixed_state(dims, rng);
  const std::size_t n = dims.size();
  TrialOutcome out{std::numeric_limits<double>::infinity(), 0.0, true};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        const SlackReport r = check_ssa(rho, i, j, k);
        out.slack = std::min(out.slack, r.slack);
        out.pass = out.pass && r.pass;
      }
  return out;
}

inline TrialOutcome correlation_trial(const std::vector<std::size_t>& dims, CounterRng& rng) {
  const SlackReport r = average_correlation_bound(random_mixed_state(dims, rng));
  return {r.slack, 0.0, r.pass};
}

/// Gibbs state of random levels in [0, 1] at β log-uniform in [0.1, 10],
/// Haar unitary with a random full-rank ancilla, quench to random levels in
/// a Haar-rotated basis.
inline TrialOutcome gibbs_identity_trial(const std::vector<std::size_t>& dims, CounterRng& rng) {
  const std::size_t ds = dims[0];
  const std::size_t da = dims[1];
  const HamiltonianSpec h_i{random_levels(ds, rng)};
  const double beta = 0.1 * std::pow(100.0, rng.uniform());
  const ComplexMatrix u = haar_unitary(ds * da, rng);
  const DensityOperator ancilla = DensityOperator::from_matrix(random_density(da, da, rng));
  HamiltonianSpec h_f{random_levels(ds, rng)};
  h_f.basis = haar_unitary(ds, rng);
  const GibbsIdentityReport r = gibbs_evolution_identity(h_i, beta, AncillaChannel{u, ancilla}, h_f);
  return {r.rhs, r.identity_gap, r.identity_gap <= kIdentityTol && r.rhs >= -kRhsFloor};
}

inline IneqSuiteReport run_ineq_suite(IneqCheck check, const std::vector<std::size_t>& dims, std::size_t trials,
                                      std::uint64_t seed, unsigned threads = 1) {
  validate_suite(check, dims);
  if (trials == 0) throw Error(ErrorCode::InvalidSpec, "trials must be positive");
  const CounterRng root(seed, suite_stream(check));
  std::vector<TrialOutcome> outcomes(trials);
  parallel_for(trials, threads, [&](std::size_t t) {
    CounterRng rng = root.substream(t);
    switch (check) {
      case IneqCheck::Ssa: outcomes[t] = ssa_trial(dims, rng); break;
      case IneqCheck::Correlation: outcomes[t] = correlation_trial(dims, rng); break;
      case IneqCheck::GibbsIdentity: outcomes[t] = gibbs_identity_trial(dims, rng); break;
    }
  });

  IneqSuiteReport r;
  r.check = check;
  r.dims = dims;
  r.trials = trials;
  r.seed = seed;
  for (std::size_t t = 0; t < trials; ++t) {
    const TrialOutcome& o = outcomes[t];
    if (o.pass)
      ++r.passed;
    else
      r.failing_trials.push_back(t);
    if (o.slack < r.worst_slack) {
      r.worst_slack = o.slack;
      r.worst_trial = t;
    }
    r.worst_identity_gap = std::max(r.worst_identity_gap, o.identity_gap);
  }
  return r;
}

}  // namespace entroflow
