#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "entroflow/qmath.hpp"

using namespace entroflow;

namespace {

ComplexMatrix diag(std::initializer_list<double> v) {
  ComplexMatrix m = ComplexMatrix::Zero(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) m(i, i) = x, ++i;
  return m;
}

ComplexMatrix random_matrix(Eigen::Index r, Eigen::Index c, CounterRng& rng) {
  ComplexMatrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.complex_normal();
  return m;
}

// Partial trace over factor B of an (dA x dB) system by explicit indices.
ComplexMatrix trace_b_oracle(const ComplexMatrix& m, int da, int db) {
  ComplexMatrix out = ComplexMatrix::Zero(da, da);
  for (int i = 0; i < da; ++i)
    for (int k = 0; k < da; ++k)
      for (int j = 0; j < db; ++j) out(i, k) += m(i * db + j, k * db + j);
  return out;
}

ComplexMatrix trace_a_oracle(const ComplexMatrix& m, int da, int db) {
  ComplexMatrix out = ComplexMatrix::Zero(db, db);
  for (int j = 0; j < db; ++j)
    for (int l = 0; l < db; ++l)
      for (int i = 0; i < da; ++i) out(j, l) += m(i * db + j, i * db + l);
  return out;
}

}  // namespace

TEST(Kron, IdentityTimesIdentity) {
  EXPECT_EQ(kron(ComplexMatrix::Identity(2, 2), ComplexMatrix::Identity(2, 2)), ComplexMatrix::Identity(4, 4));
}

TEST(Kron, DiagonalProduct) { EXPECT_EQ(kron(diag({1, 2}), diag({1, 3})), diag({1, 3, 2, 6})); }

TEST(Kron, TraceFactorizes) {
  CounterRng rng(3);
  const ComplexMatrix a = random_matrix(2, 2, rng), b = random_matrix(2, 2, rng);
  // Oracle: tr(A⊗B) = Σ_ij A_ii B_jj written out.
  Complex oracle = 0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) oracle += a(i, i) * b(j, j);
  EXPECT_NEAR(std::abs(kron(a, b).trace() - oracle), 0.0, 1e-13);
  EXPECT_NEAR(std::abs(oracle - a.trace() * b.trace()), 0.0, 1e-13);
}

TEST(Kron, MixedProductAndAssociativity) {
  CounterRng rng(4);
  const ComplexMatrix a = random_matrix(2, 3, rng), c = random_matrix(3, 2, rng);
  const ComplexMatrix b = random_matrix(2, 2, rng), d = random_matrix(2, 3, rng);
  EXPECT_LT(max_abs(kron(a, b) * kron(c, d) - kron(a * c, b * d)), 1e-12);

  ComplexMatrix x(2, 2), y(2, 2), z(2, 2);
  x << 1, 2, 3, 4;
  y << 0, -1, 5, 2;
  z << 7, 1, 1, -3;
  EXPECT_EQ(kron(kron(x, y), z), kron(x, kron(y, z)));
}

TEST(EigHermitian, DiagonalInput) {
  const EigenSystem es = eig_hermitian(diag({3, 1, 2}));
  EXPECT_NEAR(es.values[0], 1, 1e-14);
  EXPECT_NEAR(es.values[1], 2, 1e-14);
  EXPECT_NEAR(es.values[2], 3, 1e-14);
}

TEST(EigHermitian, PauliX) {
  ComplexMatrix x(2, 2);
  x << 0, 1, 1, 0;
  const EigenSystem es = eig_hermitian(x);
  EXPECT_NEAR(es.values[0], -1, 1e-14);
  EXPECT_NEAR(es.values[1], 1, 1e-14);
}

TEST(EigHermitian, RandomReconstruction) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CounterRng rng(seed);
    const ComplexMatrix h = random_hermitian(8, rng);
    const EigenSystem es = eig_hermitian(h);
    const double scale = max_abs(h);
    EXPECT_LT(max_abs(h * es.vectors - es.vectors * es.values.cast<Complex>().asDiagonal()), 1e-9 * scale);
    EXPECT_LT(unitarity_error(es.vectors), 1e-9);
    EXPECT_LT(max_abs(reconstruct(es) - h), 1e-9 * scale);
    for (Eigen::Index i = 1; i < es.values.size(); ++i) EXPECT_LE(es.values[i - 1], es.values[i]);
  }
}

TEST(EigHermitian, RejectsNonHermitian) {
  ComplexMatrix m(2, 2);
  m << 0, 1, 0, 0;
  try {
    eig_hermitian(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotHermitian);
  }
  ComplexMatrix slight = ComplexMatrix::Identity(2, 2);
  slight(0, 1) = 5e-11;  // within tolerance, symmetrized
  EXPECT_NO_THROW(eig_hermitian(slight));
}

TEST(FuncHermitian, ExpOfZeroIsIdentity) {
  const auto e = func_hermitian(ComplexMatrix::Zero(3, 3), [](double x) { return std::exp(x); });
  EXPECT_LT(max_abs(e - ComplexMatrix::Identity(3, 3)), 1e-15);
}

TEST(FuncHermitian, SquareOfDiagonal) {
  EXPECT_LT(max_abs(func_hermitian(diag({1, 2}), [](double x) { return x * x; }) - diag({1, 4})), 1e-14);
}

TEST(FuncHermitian, IdentityFunctionAndExpLogRoundtrip) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    CounterRng rng(seed);
    const ComplexMatrix g = random_matrix(5, 5, rng);
    const ComplexMatrix h = g * g.adjoint() + 0.1 * ComplexMatrix::Identity(5, 5);
    EXPECT_LT(max_abs(func_hermitian(h, [](double x) { return x; }) - h), 1e-9);
    const ComplexMatrix lg = func_hermitian(h, [](double x) { return std::log(x); });
    const ComplexMatrix back = func_hermitian(lg, [](double x) { return std::exp(x); });
    EXPECT_LT(max_abs(back - h), 1e-8);
  }
}

TEST(FuncHermitian, TraceOfExpIsSumOfExpEigenvalues) {
  CounterRng rng(9);
  const ComplexMatrix h = random_hermitian(6, rng);
  const EigenSystem es = eig_hermitian(h);
  double expected = 0;
  for (Eigen::Index i = 0; i < es.values.size(); ++i) expected += std::exp(es.values[i]);
  EXPECT_NEAR(func_hermitian(h, [](double x) { return std::exp(x); }).trace().real(), expected, 1e-9);
}

TEST(PartialTrace, ProductStateReturnsFactor) {
  CounterRng rng(2);
  const ComplexMatrix a = random_density(2, 2, rng), b = random_density(3, 2, rng);
  const ComplexMatrix ab = kron(a, b);
  EXPECT_LT(max_abs(partial_trace(ab, {2, 3}, {0}) - a), 1e-15);
  EXPECT_LT(max_abs(partial_trace(ab, {2, 3}, {1}) - b), 1e-15);
}

TEST(PartialTrace, BellStateGivesMaximallyMixed) {
  ComplexVector psi = ComplexVector::Zero(4);
  psi[0] = psi[3] = 1.0 / std::numbers::sqrt2;
  const ComplexMatrix rho = psi * psi.adjoint();
  EXPECT_LT(max_abs(partial_trace(rho, {2, 2}, {0}) - 0.5 * ComplexMatrix::Identity(2, 2)), 1e-15);
}

TEST(PartialTrace, MatchesExplicitIndexOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    CounterRng rng(seed);
    const ComplexMatrix rho = random_density(6, 1 + seed % 6, rng);
    const ComplexMatrix ra = partial_trace(rho, {2, 3}, {0});
    const ComplexMatrix rb = partial_trace(rho, {2, 3}, {1});
    EXPECT_LT(max_abs(ra - trace_b_oracle(rho, 2, 3)), 1e-14);
    EXPECT_LT(max_abs(rb - trace_a_oracle(rho, 2, 3)), 1e-14);
    EXPECT_NEAR(ra.trace().real(), 1.0, 1e-12);
    EXPECT_NEAR(rb.trace().real(), 1.0, 1e-12);
  }
}

TEST(PartialTrace, Composes) {
  CounterRng rng(5);
  const SubsystemDims dims{2, 3, 2};
  const ComplexMatrix rho = random_density(12, 5, rng);
  const ComplexMatrix at_once = partial_trace(rho, dims, {0});
  const ComplexMatrix drop2 = partial_trace(rho, dims, {0, 1});
  const ComplexMatrix then1 = partial_trace(drop2, {2, 3}, {0});
  EXPECT_LT(max_abs(at_once - then1), 1e-12);
  // Middle factor kept.
  const ComplexMatrix mid = partial_trace(rho, dims, {1});
  EXPECT_LT(max_abs(mid - partial_trace(partial_trace(rho, dims, {1, 2}), {3, 2}, {0})), 1e-12);
}

TEST(PartialTrace, Errors) {
  const ComplexMatrix m = ComplexMatrix::Identity(4, 4);
  EXPECT_THROW(partial_trace(m, {2, 3}, {0}), Error);
  EXPECT_THROW(partial_trace(m, {2, 2}, {}), Error);
  EXPECT_THROW(partial_trace(m, {2, 2}, {2}), Error);
}

TEST(HaarUnitary, ScalarCase) {
  CounterRng rng(1);
  const ComplexMatrix u = haar_unitary(1, rng);
  EXPECT_NEAR(std::abs(u(0, 0)), 1.0, 1e-15);
}

TEST(HaarUnitary, IsUnitary) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    CounterRng rng(seed);
    EXPECT_LT(unitarity_error(haar_unitary(4, rng)), 1e-10);
  }
}

TEST(HaarUnitary, DeterministicInSeed) {
  CounterRng a(77), b(77);
  EXPECT_EQ(haar_unitary(5, a), haar_unitary(5, b));
  EXPECT_EQ(a.position(), 50u);  // d*d complex normals, two values each
}

TEST(HaarUnitary, SecondMomentOfEntry) {
  // E|U00|^2 = 1/d; Var = 1/(d(d+1)) - 1/d^2 for Haar (d=2: 1/12).
  const CounterRng root(2024);
  const int n = 10000;
  double sum = 0;
  for (int i = 0; i < n; ++i) {
    CounterRng rng = root.substream(static_cast<std::uint64_t>(i));
    sum += std::norm(haar_unitary(2, rng)(0, 0));
  }
  EXPECT_NEAR(sum / n, 0.5, 3 * std::sqrt(1.0 / 12.0 / n));
}

TEST(HaarUnitary, LeftInvariance) {
  // For fixed unitary W, E|(W U)_00|^2 must also be 1/d.
  CounterRng wr(5);
  const ComplexMatrix w = haar_unitary(3, wr);
  const CounterRng root(99);
  const int n = 10000;
  double sum = 0;
  for (int i = 0; i < n; ++i) {
    CounterRng rng = root.substream(static_cast<std::uint64_t>(i));
    sum += std::norm((w * haar_unitary(3, rng))(0, 0));
  }
  // Var |U00|^2 at d=3: E|U00|^4 - 1/9 = 2/(d(d+1)) - 1/d^2 = 1/6 - 1/9 = 1/18.
  EXPECT_NEAR(sum / n, 1.0 / 3.0, 3 * std::sqrt(1.0 / 18.0 / n));
}

TEST(RandomDensity, PureWhenRankOne) {
  CounterRng rng(3);
  const ComplexMatrix rho = random_density(2, 1, rng);
  const EigenSystem es = eig_hermitian(rho);
  EXPECT_NEAR(es.values[0], 0.0, 1e-10);
  EXPECT_NEAR(es.values[1], 1.0, 1e-10);
}

TEST(RandomDensity, FullRankUnitTrace) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CounterRng rng(seed);
    const ComplexMatrix rho = random_density(4, 4, rng);
    EXPECT_NEAR(rho.trace().real(), 1.0, 1e-12);
    EXPECT_LT(hermiticity_error(rho), 1e-15);
    EXPECT_GT(eig_hermitian(rho).values[0], 1e-10);
  }
}

TEST(RandomDensity, RankMatchesRequest) {
  for (std::size_t r = 1; r <= 5; ++r) {
    CounterRng rng(r);
    const EigenSystem es = eig_hermitian(random_density(5, r, rng));
    std::size_t nonzero = 0;
    for (Eigen::Index i = 0; i < es.values.size(); ++i) {
      EXPECT_GE(es.values[i], -1e-12);
      if (es.values[i] > 1e-10) ++nonzero;
    }
    EXPECT_EQ(nonzero, r);
  }
}

TEST(RandomDensity, EnsembleMeanIsMaximallyMixed) {
  const CounterRng root(8);
  const int n = 10000;
  ComplexMatrix sum = ComplexMatrix::Zero(2, 2);
  double sq00 = 0, sq01 = 0;
  for (int i = 0; i < n; ++i) {
    CounterRng rng = root.substream(static_cast<std::uint64_t>(i));
    const ComplexMatrix rho = random_density(2, 2, rng);
    sum += rho;
    sq00 += std::norm(rho(0, 0));
    sq01 += std::norm(rho(0, 1));
  }
  const ComplexMatrix mean = sum / n;
  const double se00 = std::sqrt(sq00 / n - std::norm(mean(0, 0))) / std::sqrt(n);
  const double se01 = std::sqrt(sq01 / n) / std::sqrt(n);
  EXPECT_NEAR(mean(0, 0).real(), 0.5, 3 * se00);
  EXPECT_NEAR(mean(1, 1).real(), 0.5, 3 * se00);
  EXPECT_LT(std::abs(mean(0, 1)), 3 * se01);
}

TEST(RandomDensity, RejectsBadRank) {
  CounterRng rng(1);
  EXPECT_THROW(random_density(2, 3, rng), Error);
  EXPECT_THROW(random_density(2, 0, rng), Error);
}

TEST(TraceDistance, OrthogonalPureStates) {
  EXPECT_NEAR(trace_distance(diag({1, 0}), diag({0, 1})), 1.0, 1e-15);
  EXPECT_NEAR(trace_distance(diag({0.5, 0.5}), diag({0.5, 0.5})), 0.0, 1e-15);
}
