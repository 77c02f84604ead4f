#pragma once

// Dense complex linear algebra kernel shared by every other module:
// tolerances, Hermitian spectral decompositions, PSD verdicts, spectral
// square roots and pseudo-inverses, block assembly, corner compressions,
// block Krylov bases and the numerical radius.
//
// The base space H is always the first d coordinates of any dilation space.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "opdil/error.hpp"

namespace opdil {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline Index idx(std::size_t n) { return static_cast<Index>(n); }

/// Effective tolerance for a matrix M is `abs + rel * ||M||_2`.
struct Tolerance {
  double abs = 1e-10;
  double rel = 1e-12;

  double tau(double norm) const { return abs + rel * norm; }
};

inline ComplexMatrix identity(std::size_t d) { return ComplexMatrix::Identity(idx(d), idx(d)); }
inline ComplexMatrix zeros(std::size_t r, std::size_t c) { return ComplexMatrix::Zero(idx(r), idx(c)); }
inline ComplexMatrix scalar_matrix(Complex v) { return ComplexMatrix::Constant(1, 1, v); }

inline bool all_finite(const ComplexMatrix& m) {
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
  return true;
}

inline void require_square(const ComplexMatrix& m, const char* what) {
  if (m.rows() != m.cols())
    fail(ErrorCode::NotSquare, std::string(what) + " is " + std::to_string(m.rows()) + "x" +
                                   std::to_string(m.cols()));
}

/// Largest singular value, via the smaller of the Gram matrices M*M or MM*.
inline double spectral_norm(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  ComplexMatrix gram = m.rows() >= m.cols() ? ComplexMatrix(m.adjoint() * m) : ComplexMatrix(m * m.adjoint());
  gram = (gram + gram.adjoint()).eval() * 0.5;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues()(es.eigenvalues().size() - 1)));
}

inline double tau(const Tolerance& tol, const ComplexMatrix& m) { return tol.tau(spectral_norm(m)); }

inline double hermiticity_defect(const ComplexMatrix& m) { return spectral_norm(m - m.adjoint()); }

inline ComplexMatrix hermitian_part(const ComplexMatrix& m) { return (m + m.adjoint()) * 0.5; }

// ---------------------------------------------------------------------------
// Spectral decomposition and PSD verdicts
// ---------------------------------------------------------------------------

struct HermitianEig {
  RealVector eigenvalues;     // ascending
  ComplexMatrix eigenvectors;  // unitary, columns match eigenvalues
};

inline HermitianEig hermitian_eig(const ComplexMatrix& m, const Tolerance& tol = {}) {
  require_square(m, "hermitian_eig input");
  const double t = tau(tol, m);
  const double defect = hermiticity_defect(m);
  if (defect > t)
    fail(ErrorCode::NotHermitian, "hermiticity defect " + std::to_string(defect) + " exceeds " + std::to_string(t));
  if (m.size() == 0) return {RealVector(0), ComplexMatrix(0, 0)};
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(m));
  return {es.eigenvalues(), es.eigenvectors()};
}

enum class PsdVerdict { Psd, NotPsd, Borderline };

inline std::string to_string(PsdVerdict v) {
  switch (v) {
    case PsdVerdict::Psd: return "PSD";
    case PsdVerdict::NotPsd: return "NOT_PSD";
    case PsdVerdict::Borderline: return "BORDERLINE";
  }
  return "?";
}

struct PsdReport {
  PsdVerdict verdict = PsdVerdict::Psd;
  double min_eigenvalue = 0.0;
  double hermiticity_defect = 0.0;
  double tau = 0.0;
  /// Unit eigenvector of the smallest eigenvalue; always filled for nonempty input.
  std::optional<ComplexVector> witness;

  bool psd() const { return verdict == PsdVerdict::Psd; }
  bool not_psd() const { return verdict == PsdVerdict::NotPsd; }
};

/// PSD iff lambda_min >= -tau, NOT_PSD iff lambda_min < -10 tau, BORDERLINE in between.
inline PsdReport psd_check(const ComplexMatrix& m, const Tolerance& tol = {}) {
  require_square(m, "psd_check input");
  PsdReport report;
  report.tau = tau(tol, m);
  report.hermiticity_defect = hermiticity_defect(m);
  if (report.hermiticity_defect > report.tau)
    fail(ErrorCode::NotHermitian, "hermiticity defect " + std::to_string(report.hermiticity_defect) + " exceeds " +
                                      std::to_string(report.tau));
  if (m.size() == 0) return report;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(m));
  report.min_eigenvalue = es.eigenvalues()(0);
  report.witness = es.eigenvectors().col(0);
  if (report.min_eigenvalue >= -report.tau)
    report.verdict = PsdVerdict::Psd;
  else if (report.min_eigenvalue < -10.0 * report.tau)
    report.verdict = PsdVerdict::NotPsd;
  else
    report.verdict = PsdVerdict::Borderline;
  return report;
}

/// Principal square root; eigenvalues in the tolerance band below zero are clamped.
inline ComplexMatrix sqrt_psd(const ComplexMatrix& m, const Tolerance& tol = {}) {
  const PsdReport report = psd_check(m, tol);
  if (report.not_psd())
    fail(ErrorCode::NotPsd, "minimum eigenvalue " + std::to_string(report.min_eigenvalue));
  if (m.size() == 0) return m;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(m));
  RealVector roots = es.eigenvalues().unaryExpr([](double x) { return std::sqrt(std::max(0.0, x)); });
  const ComplexMatrix& v = es.eigenvectors();
  ComplexMatrix s = v * roots.cast<Complex>().asDiagonal() * v.adjoint();
  return hermitian_part(s);
}

struct PseudoInverse {
  ComplexMatrix pinv;
  std::size_t rank = 0;
  bool is_invertible = false;
};

/// Moore-Penrose inverse of a PSD matrix: eigenvalues above tau are inverted, the rest dropped.
inline PseudoInverse pinv_psd(const ComplexMatrix& m, const Tolerance& rank_tol = {}) {
  const PsdReport report = psd_check(m, rank_tol);
  if (report.not_psd())
    fail(ErrorCode::NotPsd, "minimum eigenvalue " + std::to_string(report.min_eigenvalue));
  PseudoInverse out;
  if (m.size() == 0) {
    out.pinv = m;
    out.is_invertible = true;
    return out;
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(m));
  RealVector inv(es.eigenvalues().size());
  for (Index i = 0; i < inv.size(); ++i) {
    const double lambda = es.eigenvalues()(i);
    if (lambda > report.tau) {
      inv(i) = 1.0 / lambda;
      ++out.rank;
    } else {
      inv(i) = 0.0;
    }
  }
  const ComplexMatrix& v = es.eigenvectors();
  out.pinv = hermitian_part(v * inv.cast<Complex>().asDiagonal() * v.adjoint());
  out.is_invertible = out.rank == static_cast<std::size_t>(m.rows());
  return out;
}

/// Pseudo-inverse of an arbitrary matrix X through (X*X)^+ X*.
inline ComplexMatrix pinv_general(const ComplexMatrix& x, const Tolerance& tol = {}) {
  const ComplexMatrix gram = x.adjoint() * x;
  return pinv_psd(gram, tol).pinv * x.adjoint();
}

/// (M)^{-1/2} for a positive definite M; NotInvertible when rank is deficient.
inline ComplexMatrix inv_sqrt_pd(const ComplexMatrix& m, const Tolerance& tol = {}) {
  const PseudoInverse p = pinv_psd(m, tol);
  if (!p.is_invertible)
    fail(ErrorCode::NotInvertible,
         "rank " + std::to_string(p.rank) + " of " + std::to_string(m.rows()) + " (minimum eigenvalue within tolerance)");
  return sqrt_psd(p.pinv, tol);
}

// ---------------------------------------------------------------------------
// Numerical radius
// ---------------------------------------------------------------------------

/// max over a uniform theta grid of lambda_max((e^{i theta} T + e^{-i theta} T*) / 2).
/// This is a lower bound of w(T) with grid error at most pi ||T|| / grid_points.
inline double numerical_radius(const ComplexMatrix& t, std::size_t grid_points = 1024) {
  require_square(t, "numerical_radius input");
  if (grid_points < 4) fail(ErrorCode::InvalidArgument, "numerical_radius needs at least 4 grid points");
  if (t.size() == 0) return 0.0;
  double best = -std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es;
  for (std::size_t k = 0; k < grid_points; ++k) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(grid_points);
    const Complex phase = std::polar(1.0, theta);
    const ComplexMatrix re = (phase * t + std::conj(phase) * t.adjoint()) * 0.5;
    es.compute(re, Eigen::EigenvaluesOnly);
    best = std::max(best, es.eigenvalues()(es.eigenvalues().size() - 1));
  }
  return std::max(best, 0.0);
}

// ---------------------------------------------------------------------------
// Block matrices
// ---------------------------------------------------------------------------

inline std::vector<std::size_t> offsets_of(std::span<const std::size_t> dims) {
  std::vector<std::size_t> off(dims.size() + 1, 0);
  for (std::size_t i = 0; i < dims.size(); ++i) off[i + 1] = off[i] + dims[i];
  return off;
}

/// Grid of optional blocks; a missing block is zero.
class BlockMatrix {
 public:
  BlockMatrix(std::vector<std::size_t> row_dims, std::vector<std::size_t> col_dims)
      : row_dims_(std::move(row_dims)), col_dims_(std::move(col_dims)), blocks_(row_dims_.size() * col_dims_.size()) {}

  static BlockMatrix uniform(std::size_t count, std::size_t dim) {
    return BlockMatrix(std::vector<std::size_t>(count, dim), std::vector<std::size_t>(count, dim));
  }

  std::size_t block_rows() const { return row_dims_.size(); }
  std::size_t block_cols() const { return col_dims_.size(); }
  const std::vector<std::size_t>& row_dims() const { return row_dims_; }
  const std::vector<std::size_t>& col_dims() const { return col_dims_; }

  void set(std::size_t i, std::size_t j, ComplexMatrix block) {
    if (i >= block_rows() || j >= block_cols())
      fail(ErrorCode::ShapeMismatch, "block index (" + std::to_string(i) + "," + std::to_string(j) + ") out of grid");
    blocks_[i * block_cols() + j] = std::move(block);
  }

  const std::optional<ComplexMatrix>& get(std::size_t i, std::size_t j) const {
    return blocks_.at(i * block_cols() + j);
  }

 private:
  std::vector<std::size_t> row_dims_;
  std::vector<std::size_t> col_dims_;
  std::vector<std::optional<ComplexMatrix>> blocks_;
};

inline ComplexMatrix block_assemble(const BlockMatrix& b) {
  const auto roff = offsets_of(b.row_dims());
  const auto coff = offsets_of(b.col_dims());
  ComplexMatrix out = zeros(roff.back(), coff.back());
  for (std::size_t i = 0; i < b.block_rows(); ++i) {
    for (std::size_t j = 0; j < b.block_cols(); ++j) {
      const auto& blk = b.get(i, j);
      if (!blk) continue;
      if (blk->rows() != idx(b.row_dims()[i]) || blk->cols() != idx(b.col_dims()[j]))
        fail(ErrorCode::ShapeMismatch, "block (" + std::to_string(i) + "," + std::to_string(j) + ") is " +
                                           std::to_string(blk->rows()) + "x" + std::to_string(blk->cols()) +
                                           ", expected " + std::to_string(b.row_dims()[i]) + "x" +
                                           std::to_string(b.col_dims()[j]));
      out.block(idx(roff[i]), idx(coff[j]), blk->rows(), blk->cols()) = *blk;
    }
  }
  return out;
}

/// Block (i, j) of a flat matrix partitioned by `row_dims` x `col_dims`.
inline ComplexMatrix block_of(const ComplexMatrix& m, std::span<const std::size_t> row_dims,
                              std::span<const std::size_t> col_dims, std::size_t i, std::size_t j) {
  const auto roff = offsets_of(row_dims);
  const auto coff = offsets_of(col_dims);
  return m.block(idx(roff[i]), idx(coff[j]), idx(row_dims[i]), idx(col_dims[j]));
}

/// Largest norm among blocks (i, j) with j < i - lower or j > i + upper.
/// lower = upper = 1 tests block tridiagonality, lower = 1 with a huge upper
/// tests upper block Hessenberg form.
inline double block_band_defect(const ComplexMatrix& m, std::span<const std::size_t> dims, std::size_t lower,
                                std::size_t upper) {
  double worst = 0.0;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    for (std::size_t j = 0; j < dims.size(); ++j) {
      const bool below = i > j && i - j > lower;
      const bool above = j > i && j - i > upper;
      if (!below && !above) continue;
      if (dims[i] == 0 || dims[j] == 0) continue;
      worst = std::max(worst, spectral_norm(block_of(m, dims, dims, i, j)));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Compressions and Krylov bases
// ---------------------------------------------------------------------------

/// Leading d x d block of B^n.
inline ComplexMatrix corner_compress(const ComplexMatrix& b, std::size_t d, std::size_t n) {
  require_square(b, "corner_compress operator");
  if (idx(d) > b.rows())
    fail(ErrorCode::ShapeMismatch, "base dimension " + std::to_string(d) + " exceeds " + std::to_string(b.rows()));
  if (n == 0) return identity(d);
  ComplexMatrix x = b.leftCols(idx(d));
  for (std::size_t k = 1; k < n; ++k) x = b * x;
  return x.topRows(idx(d));
}

/// Orthonormal basis of range(M) by pivoted Gram-Schmidt; columns with
/// residual norm <= threshold are discarded.
inline ComplexMatrix orthonormal_range(const ComplexMatrix& m, double threshold, const ComplexMatrix* against = nullptr) {
  ComplexMatrix work = m;
  auto project_out = [&](const ComplexMatrix& q) {
    if (q.cols() == 0) return;
    for (int pass = 0; pass < 2; ++pass) work -= q * (q.adjoint() * work);
  };
  if (against) project_out(*against);
  std::vector<ComplexVector> found;
  std::vector<bool> used(static_cast<std::size_t>(work.cols()), false);
  for (Index step = 0; step < work.cols(); ++step) {
    Index best = -1;
    double best_norm = threshold;
    for (Index j = 0; j < work.cols(); ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      const double nrm = work.col(j).norm();
      if (nrm > best_norm) {
        best_norm = nrm;
        best = j;
      }
    }
    if (best < 0) break;
    used[static_cast<std::size_t>(best)] = true;
    ComplexVector q = work.col(best) / best_norm;
    // one refinement against everything accepted so far
    for (const auto& prev : found) q -= prev * prev.dot(q);
    if (against && against->cols() > 0) q -= *against * (against->adjoint() * q);
    q.normalize();
    found.push_back(q);
    for (Index j = 0; j < work.cols(); ++j)
      if (!used[static_cast<std::size_t>(j)]) work.col(j) -= q * q.dot(work.col(j));
  }
  ComplexMatrix out(m.rows(), idx(found.size()));
  for (std::size_t k = 0; k < found.size(); ++k) out.col(idx(k)) = found[k];
  return out;
}

struct KrylovBasis {
  ComplexMatrix basis;                  // orthonormal columns, grouped by level
  std::vector<std::size_t> level_dims;  // dim of H_k = H_{k]} minus H_{(k-1)]}
};

/// Block Gram-Schmidt over {B^m e_i : m < depth, i < d}. Level 0 is exactly
/// the first d unit vectors; level k orthonormalizes B applied to level k-1
/// against everything found so far.
inline KrylovBasis krylov_orthonormalize(const ComplexMatrix& b, std::size_t d, std::size_t depth,
                                         const Tolerance& tol = {}) {
  require_square(b, "krylov_orthonormalize operator");
  if (idx(d) > b.rows())
    fail(ErrorCode::ShapeMismatch, "base dimension " + std::to_string(d) + " exceeds " + std::to_string(b.rows()));
  KrylovBasis out;
  out.basis = ComplexMatrix::Identity(b.rows(), idx(d));
  if (depth == 0) {
    out.basis.resize(b.rows(), 0);
    return out;
  }
  out.level_dims.push_back(d);
  const double threshold = tau(tol, b);
  ComplexMatrix last = out.basis;
  for (std::size_t level = 1; level < depth; ++level) {
    ComplexMatrix next;
    if (last.cols() > 0) {
      const ComplexMatrix candidates = b * last;
      next = orthonormal_range(candidates, threshold, &out.basis);
    } else {
      next = ComplexMatrix(b.rows(), 0);
    }
    out.level_dims.push_back(static_cast<std::size_t>(next.cols()));
    if (next.cols() > 0) {
      ComplexMatrix grown(b.rows(), out.basis.cols() + next.cols());
      grown << out.basis, next;
      out.basis = std::move(grown);
    }
    last = std::move(next);
  }
  return out;
}

/// ||P_1 - P_2||_2 for the orthogonal projections onto the column spans of
/// two orthonormal bases: the sine of the largest principal angle, or 1 when
/// the dimensions differ.
inline double subspace_gap(const ComplexMatrix& q1, const ComplexMatrix& q2) {
  if (q1.cols() != q2.cols()) return 1.0;
  if (q1.cols() == 0) return 0.0;
  return spectral_norm(q1 * q1.adjoint() - q2 * q2.adjoint());
}

}  // namespace opdil
