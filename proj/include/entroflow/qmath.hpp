#pragma once

// Dense complex linear algebra used by every other module: Hermitian
// eigendecomposition, spectral matrix functions, Kronecker products,
// partial traces and random unitaries / density matrices.
//
// Conventions: eigenvalues ascending; factor 0 of a SubsystemDims is the
// leftmost Kronecker factor (subsystem A).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "entroflow/error.hpp"
#include "entroflow/rng.hpp"

namespace entroflow {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kHermitianTol = 1e-10;

/// Local Hilbert-space dimensions of a composite system.
struct SubsystemDims {
  std::vector<std::size_t> dims;

  SubsystemDims() = default;
  SubsystemDims(std::initializer_list<std::size_t> d) : dims(d) {}
  explicit SubsystemDims(std::vector<std::size_t> d) : dims(std::move(d)) {}

  std::size_t factors() const noexcept { return dims.size(); }
  std::size_t operator[](std::size_t i) const { return dims.at(i); }

  std::size_t total() const {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>{});
  }

  void validate() const {
    if (dims.empty()) throw Error(ErrorCode::DimensionMismatch, "empty subsystem list");
    for (auto d : dims)
      if (d == 0) throw Error(ErrorCode::DimensionMismatch, "zero local dimension");
  }

  friend bool operator==(const SubsystemDims&, const SubsystemDims&) = default;
};

inline double max_abs(const ComplexMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline bool all_finite(const ComplexMatrix& m) { return m.allFinite(); }

inline double hermiticity_error(const ComplexMatrix& h) {
  if (h.rows() != h.cols()) return std::numeric_limits<double>::infinity();
  return max_abs(h - h.adjoint());
}

inline double unitarity_error(const ComplexMatrix& u) {
  if (u.rows() != u.cols()) return std::numeric_limits<double>::infinity();
  return max_abs(u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols()));
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

struct EigenSystem {
  RealVector values;     // ascending
  ComplexMatrix vectors;  // columns are eigenvectors
};

/// Eigendecomposition of a Hermitian matrix. The input is symmetrized
/// before solving; a max-abs deviation from Hermiticity above `tol` is an
/// error.
inline EigenSystem eig_hermitian(const ComplexMatrix& h, double tol = kHermitianTol) {
  if (h.rows() != h.cols()) throw Error(ErrorCode::DimensionMismatch, "eig_hermitian needs a square matrix");
  if (!all_finite(h)) throw Error(ErrorCode::NotHermitian, "matrix has non-finite entries");
  const double dev = hermiticity_error(h);
  if (dev > tol) throw Error(ErrorCode::NotHermitian, "deviation " + std::to_string(dev));
  const ComplexMatrix sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::ConvergenceFailure, "Hermitian eigensolver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

inline ComplexMatrix reconstruct(const EigenSystem& es) {
  return es.vectors * es.values.cast<Complex>().asDiagonal() * es.vectors.adjoint();
}

/// V f(Λ) V† for Hermitian H.
template <class F>
ComplexMatrix func_hermitian(const ComplexMatrix& h, F&& f, double tol = kHermitianTol) {
  EigenSystem es = eig_hermitian(h, tol);
  for (Eigen::Index i = 0; i < es.values.size(); ++i) es.values[i] = f(es.values[i]);
  return reconstruct(es);
}

/// Trace out every factor not listed in `keep`. The kept factors appear in
/// the result in their original (ascending) order.
inline ComplexMatrix partial_trace(const ComplexMatrix& m, const SubsystemDims& dims, std::vector<std::size_t> keep) {
  dims.validate();
  const std::size_t total = dims.total();
  if (m.rows() != m.cols() || static_cast<std::size_t>(m.rows()) != total)
    throw Error(ErrorCode::DimensionMismatch, "matrix dimension does not match subsystem dims");
  if (keep.empty()) throw Error(ErrorCode::DimensionMismatch, "keep set is empty");
  std::sort(keep.begin(), keep.end());
  if (std::adjacent_find(keep.begin(), keep.end()) != keep.end() || keep.back() >= dims.factors())
    throw Error(ErrorCode::DimensionMismatch, "invalid keep set");

  const std::size_t n = dims.factors();
  std::vector<std::size_t> stride(n, 1);
  for (std::size_t f = n - 1; f-- > 0;) stride[f] = stride[f + 1] * dims[f + 1];

  std::vector<bool> kept(n, false);
  for (auto f : keep) kept[f] = true;

  // Joint-index offsets contributed by each multi-index over the kept
  // factors and over the traced factors; joint = kept_off[r] + traced_off[t].
  auto offsets = [&](bool want_kept) {
    std::vector<std::size_t> off{0};
    for (std::size_t f = 0; f < n; ++f) {
      if (kept[f] != want_kept) continue;
      std::vector<std::size_t> next;
      next.reserve(off.size() * dims[f]);
      for (auto base : off)
        for (std::size_t x = 0; x < dims[f]; ++x) next.push_back(base + x * stride[f]);
      off = std::move(next);
    }
    return off;
  };
  const auto kept_off = offsets(true);
  const auto traced_off = offsets(false);

  const auto dk = static_cast<Eigen::Index>(kept_off.size());
  ComplexMatrix out = ComplexMatrix::Zero(dk, dk);
  for (Eigen::Index r = 0; r < dk; ++r)
    for (Eigen::Index c = 0; c < dk; ++c) {
      Complex acc{0.0, 0.0};
      for (auto t : traced_off)
        acc += m(static_cast<Eigen::Index>(kept_off[r] + t), static_cast<Eigen::Index>(kept_off[c] + t));
      out(r, c) = acc;
    }
  return out;
}

/// Dimensions of the factors that survive a partial trace over `keep`.
inline SubsystemDims kept_dims(const SubsystemDims& dims, std::vector<std::size_t> keep) {
  std::sort(keep.begin(), keep.end());
  SubsystemDims out;
  for (auto f : keep) out.dims.push_back(dims[f]);
  return out;
}

/// d x d Ginibre draw (d*d complex normals, row-major) followed by QR with
/// the phases of diag(R) absorbed into Q, which makes Q Haar distributed.
inline ComplexMatrix haar_unitary(std::size_t d, CounterRng& rng) {
  if (d == 0) throw Error(ErrorCode::DimensionMismatch, "haar_unitary needs d >= 1");
  const auto n = static_cast<Eigen::Index>(d);
  ComplexMatrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = rng.complex_normal();
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(n, n);
  const ComplexMatrix& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < n; ++j) {
    const Complex diag = r(j, j);
    const double mag = std::abs(diag);
    q.col(j) *= mag > 0.0 ? diag / mag : Complex{1.0, 0.0};
  }
  return q;
}

/// G G† / tr(G G†) with G a d x rank matrix of complex normals
/// (d*rank draws, row-major).
inline ComplexMatrix random_density(std::size_t d, std::size_t rank, CounterRng& rng) {
  if (d == 0 || rank == 0 || rank > d) throw Error(ErrorCode::DimensionMismatch, "random_density needs 1 <= rank <= d");
  const auto n = static_cast<Eigen::Index>(d);
  const auto r = static_cast<Eigen::Index>(rank);
  ComplexMatrix g(n, r);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < r; ++j) g(i, j) = rng.complex_normal();
  ComplexMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return 0.5 * (rho + rho.adjoint());
}

/// Hermitian matrix with i.i.d. complex-normal upper triangle (GUE shape).
inline ComplexMatrix random_hermitian(std::size_t d, CounterRng& rng) {
  const auto n = static_cast<Eigen::Index>(d);
  ComplexMatrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = rng.complex_normal();
  return 0.5 * (g + g.adjoint());
}

/// ½‖A − B‖₁ for Hermitian A, B.
inline double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  const EigenSystem es = eig_hermitian(a - b, 1e-8);
  return 0.5 * es.values.cwiseAbs().sum();
}

}  // namespace entroflow
