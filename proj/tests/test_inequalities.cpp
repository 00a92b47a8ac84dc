#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "entroflow/inequalities.hpp"

using namespace entroflow;

namespace {

DensityOperator random_state(SubsystemDims dims, std::size_t rank, CounterRng& rng) {
  return DensityOperator::from_matrix(random_density(dims.total(), rank, rng), dims);
}

DensityOperator ghz3() {
  ComplexVector v = ComplexVector::Zero(8);
  v[0] = v[7] = 1.0 / std::numbers::sqrt2;
  return DensityOperator::pure(v, {2, 2, 2});
}

DensityOperator mixed_qubit(double p) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = p;
  m(1, 1) = 1 - p;
  return DensityOperator::from_matrix(m);
}

}  // namespace

TEST(SlackReport, PassMatchesTolerance) {
  EXPECT_TRUE(make_slack(1.0, 1.0 - 5e-10).pass);
  EXPECT_FALSE(make_slack(1.0, 1.0 - 2e-9).pass);
  EXPECT_DOUBLE_EQ(make_slack(1.0, 3.0).slack, 2.0);
}

TEST(Ssa, ProductOfPureQubitsIsTight) {
  ComplexVector v(8);
  for (int i = 0; i < 8; ++i) v[i] = (i == 5) ? 1.0 : 0.0;
  const auto rho = DensityOperator::pure(v, {2, 2, 2});
  for (auto [i, j, k] : {std::tuple{0, 1, 2}, {0, 2, 1}, {1, 2, 0}}) {
    const auto r = check_ssa(rho, static_cast<std::size_t>(i), static_cast<std::size_t>(j), static_cast<std::size_t>(k));
    EXPECT_NEAR(r.slack, 0.0, 1e-10);
    EXPECT_TRUE(r.pass);
  }
}

TEST(Ssa, ProductOfMixedQubitsHasSlackTwiceConditioningEntropy) {
  // S^{ik} + S^{jk} - S^i - S^j = 2 S^k for a product state.
  const double p[3] = {0.2, 0.6, 0.9};
  const auto rho = DensityOperator::product(DensityOperator::product(mixed_qubit(p[0]), mixed_qubit(p[1])), mixed_qubit(p[2]));
  for (auto [i, j, k] : {std::tuple{0, 1, 2}, {0, 2, 1}, {1, 2, 0}}) {
    const double sk = -p[k] * std::log(p[k]) - (1 - p[k]) * std::log(1 - p[k]);
    const auto r = check_ssa(rho, static_cast<std::size_t>(i), static_cast<std::size_t>(j), static_cast<std::size_t>(k));
    EXPECT_NEAR(r.slack, 2 * sk, 1e-10);
  }
}

TEST(Ssa, GhzSaturates) {
  const auto r = check_ssa(ghz3(), 0, 1, 2);
  EXPECT_NEAR(r.lhs, 2 * std::log(2.0), 1e-12);
  EXPECT_NEAR(r.rhs, 2 * std::log(2.0), 1e-12);
  EXPECT_NEAR(r.slack, 0.0, 1e-12);
}

TEST(Ssa, RandomTripartiteStatesPass) {
  const CounterRng root(17);
  for (std::uint64_t t = 0; t < 1000; ++t) {
    CounterRng rng = root.substream(t);
    const auto rho = random_state({2, 2, 2}, 1 + t % 8, rng);
    for (auto [i, j, k] : {std::tuple{0, 1, 2}, {0, 2, 1}, {1, 2, 0}})
      ASSERT_TRUE(check_ssa(rho, static_cast<std::size_t>(i), static_cast<std::size_t>(j), static_cast<std::size_t>(k)).pass)
          << "trial " << t;
  }
}

TEST(Ssa, Errors) {
  CounterRng rng(1);
  EXPECT_THROW(check_ssa(random_state({2, 2}, 2, rng), 0, 1, 0), Error);
  EXPECT_THROW(check_ssa(ghz3(), 0, 0, 1), Error);
  EXPECT_THROW(check_ssa(ghz3(), 0, 1, 3), Error);
}

TEST(AverageCorrelation, ProductOfMixedQubits) {
  auto rho = mixed_qubit(0.3);
  for (int i = 0; i < 3; ++i) rho = DensityOperator::product(rho, mixed_qubit(0.1 + 0.2 * i));
  const auto r = average_correlation_bound(rho);
  EXPECT_NEAR(r.lhs, 0.0, 1e-10);
  EXPECT_GT(r.rhs, 0.0);
  EXPECT_TRUE(r.pass);
}

TEST(AverageCorrelation, GhzSaturates) {
  const auto r = average_correlation_bound(ghz3());
  EXPECT_NEAR(r.lhs, std::log(2.0), 1e-9);
  EXPECT_NEAR(r.rhs, std::log(2.0), 1e-9);
  EXPECT_NEAR(r.slack, 0.0, 1e-9);
}

TEST(AverageCorrelation, RandomFourQubitStates) {
  const CounterRng root(5);
  for (std::uint64_t t = 0; t < 500; ++t) {
    CounterRng rng = root.substream(t);
    ASSERT_TRUE(average_correlation_bound(random_state({2, 2, 2, 2}, 1 + t % 16, rng)).pass) << "trial " << t;
  }
}

TEST(AverageCorrelation, SlackIsAggregatedSsaResidueForThreeFactors) {
  // For N = 3, summing S^i + S^j <= S^{ik} + S^{jk} over the three pairs
  // gives 2(ΣS^{ij} - ΣS^i) >= 0 while the bound's slack is
  // (ΣS^{ij} - ΣS^i)/3, i.e. half the mean SSA slack.
  const CounterRng root(23);
  for (std::uint64_t t = 0; t < 100; ++t) {
    CounterRng rng = root.substream(t);
    const auto rho = random_state({2, 3, 2}, 1 + t % 12, rng);
    const double ssa_sum = check_ssa(rho, 0, 1, 2).slack + check_ssa(rho, 0, 2, 1).slack + check_ssa(rho, 1, 2, 0).slack;
    EXPECT_NEAR(average_correlation_bound(rho).slack, (ssa_sum / 3.0) / 2.0, 1e-9);
  }
}

TEST(AverageCorrelation, NeedsThreeFactors) {
  CounterRng rng(1);
  try {
    average_correlation_bound(random_state({2, 2}, 4, rng));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewFactors);
  }
}

TEST(GibbsIdentity, IdentityChannelSameHamiltonian) {
  const HamiltonianSpec h{{0, 1}};
  const AncillaChannel ch{ComplexMatrix::Identity(4, 4), DensityOperator::from_matrix(0.5 * ComplexMatrix::Identity(2, 2))};
  const auto r = gibbs_evolution_identity(h, 1.0, ch, h);
  EXPECT_NEAR(r.beta_dU, 0.0, 1e-14);
  EXPECT_NEAR(r.dS, 0.0, 1e-14);
  EXPECT_NEAR(r.rhs, 0.0, 1e-14);
  EXPECT_NEAR(r.relative_entropy_lhs, 0.0, 1e-12);
}

TEST(GibbsIdentity, HaarChannelHeatOnlyForm) {
  const HamiltonianSpec h{{0, 1}};
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    CounterRng rng(seed);
    const AncillaChannel ch{haar_unitary(4, rng), DensityOperator::from_matrix(random_density(2, 2, rng))};
    const auto r = gibbs_evolution_identity(h, 1.0, ch, h);
    EXPECT_LT(r.identity_gap, 1e-9);
    EXPECT_GE(r.rhs, -1e-10);
    // With H_f = H_i the right-hand side is βQ - ΔS.
    EXPECT_NEAR(r.rhs, 1.0 * r.heat - r.dS, 1e-12);
    EXPECT_NEAR(r.beta_tr_rhof_dH, 0.0, 1e-14);
  }
}

TEST(GibbsIdentity, PureQuench) {
  const HamiltonianSpec h{{0, 0.5, 1.2}};
  const AncillaChannel ch{ComplexMatrix::Identity(6, 6), DensityOperator::from_matrix(0.5 * ComplexMatrix::Identity(2, 2))};
  const auto r = gibbs_evolution_identity(h, 0.7, ch, h.scaled(2.0));
  // ρ_f = ρ_i, so both sides vanish: βΔU = β tr(ρ_i H_i) = β tr(ρ_f ΔH).
  EXPECT_LT(r.identity_gap, 1e-9);
  EXPECT_NEAR(r.beta_dU, r.beta_tr_rhof_dH, 1e-12);
  EXPECT_NEAR(r.relative_entropy_lhs, 0.0, 1e-12);
}

TEST(GibbsIdentity, RandomDrawsOfBetaChannelAndQuench) {
  const CounterRng root(31);
  for (std::uint64_t t = 0; t < 300; ++t) {
    CounterRng rng = root.substream(t);
    const std::size_t d = 2 + t % 2;
    const double beta = 0.1 + 9.9 * rng.uniform();
    std::vector<double> li(d), lf(d);
    for (auto& x : li) x = rng.uniform();
    for (auto& x : lf) x = rng.uniform();
    std::sort(li.begin(), li.end());
    std::sort(lf.begin(), lf.end());
    const HamiltonianSpec hi{li, haar_unitary(d, rng)};
    const HamiltonianSpec hf{lf, haar_unitary(d, rng)};
    const AncillaChannel ch{haar_unitary(2 * d, rng), DensityOperator::from_matrix(random_density(2, 2, rng))};
    const auto r = gibbs_evolution_identity(hi, beta, ch, hf);
    ASSERT_LT(r.identity_gap, 1e-9) << "trial " << t;
    ASSERT_GE(r.rhs, -1e-10) << "trial " << t;
  }
}

TEST(GibbsIdentity, Errors) {
  const HamiltonianSpec h{{0, 1}};
  const AncillaChannel ch{ComplexMatrix::Identity(4, 4), DensityOperator::from_matrix(0.5 * ComplexMatrix::Identity(2, 2))};
  EXPECT_THROW(gibbs_evolution_identity(h, 0.0, ch, h), Error);
  EXPECT_THROW(gibbs_evolution_identity(h, 1.0, ch, HamiltonianSpec{{0, 1, 2}}), Error);
  const AncillaChannel bad{ComplexMatrix::Identity(6, 6), ch.ancilla};
  EXPECT_THROW(gibbs_evolution_identity(h, 1.0, bad, h), Error);
}
