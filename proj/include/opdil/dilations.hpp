#pragma once

// Self-adjoint, positive, isometric and unitary dilations of moment
// sequences, with an independent verifier.
//
// A dilation B of A_0..A_N acts on a space whose first d coordinates are the
// base space H, and satisfies A_n = (B^n)_00 for every certified n. Infinite
// dilations are represented by finite truncations. Corner powers only see
// blocks within distance n of H, so each truncation carries an exact
// certificate for a window of orders. Truncated shifts cannot be exactly
// isometric; the coordinates where that fails are declared as edges and
// excluded from the structure defect (and reported separately).

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "opdil/core.hpp"
#include "opdil/moments.hpp"

namespace opdil {

enum class DilationKind { SelfAdjoint, Positive, Isometric, Unitary, Partial };

inline std::string to_string(DilationKind k) {
  switch (k) {
    case DilationKind::SelfAdjoint: return "SELF_ADJOINT";
    case DilationKind::Positive: return "POSITIVE";
    case DilationKind::Isometric: return "ISOMETRIC";
    case DilationKind::Unitary: return "UNITARY";
    case DilationKind::Partial: return "PARTIAL";
  }
  return "?";
}

/// Coordinates excluded from the structure defect.
struct EdgeSpec {
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;
};

struct DilationResult {
  DilationKind kind = DilationKind::SelfAdjoint;
  ComplexMatrix matrix;
  std::size_t ambient_dim = 0;
  std::size_t base_dim = 0;
  std::size_t guaranteed_orders = 0;
  std::vector<double> residuals;  // ||(B^n)_00 - A_n||_2, n = 0..
  double structure_defect = 0.0;  // measured away from the edges
  double edge_defect = 0.0;       // same quantity over the whole matrix
  EdgeSpec edges;
  std::map<std::string, double> certificates;
  bool verified = false;

  double max_residual() const {
    return residuals.empty() ? 0.0 : *std::max_element(residuals.begin(), residuals.end());
  }
};

/// 100 tau at the scale max(1, ||B||)^n, the roundoff budget of an n-fold product.
inline double residual_bound(const Tolerance& tol, double norm_b, std::size_t n) {
  return 100.0 * tol.tau(std::pow(std::max(1.0, norm_b), static_cast<double>(n)));
}

namespace detail {

inline std::vector<std::size_t> complement(std::size_t n, const std::vector<std::size_t>& excluded) {
  std::vector<bool> drop(n, false);
  for (std::size_t i : excluded)
    if (i < n) drop[i] = true;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < n; ++i)
    if (!drop[i]) keep.push_back(i);
  return keep;
}

inline ComplexMatrix principal_submatrix(const ComplexMatrix& m, const std::vector<std::size_t>& keep) {
  ComplexMatrix out(idx(keep.size()), idx(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i)
    for (std::size_t j = 0; j < keep.size(); ++j) out(idx(i), idx(j)) = m(idx(keep[i]), idx(keep[j]));
  return out;
}

inline double masked_norm(const ComplexMatrix& m, const std::vector<std::size_t>& excluded) {
  return spectral_norm(principal_submatrix(m, complement(static_cast<std::size_t>(m.rows()), excluded)));
}

inline std::vector<std::size_t> block_coordinates(std::size_t first_block, std::size_t count, std::size_t d) {
  std::vector<std::size_t> out;
  for (std::size_t b = first_block; b < first_block + count; ++b)
    for (std::size_t i = 0; i < d; ++i) out.push_back(b * d + i);
  return out;
}

}  // namespace detail

/// Recomputes corner residuals for n <= min(n_max, N) and the structure
/// defect of `kind`, independently of how B was built.
inline DilationResult verify_dilation(const ComplexMatrix& b, const MomentSequence& seq, std::size_t n_max,
                                      DilationKind kind, const EdgeSpec& edges = {}) {
  require_square(b, "dilation");
  const std::size_t d = seq.dim();
  if (static_cast<std::size_t>(b.rows()) < d)
    fail(ErrorCode::ShapeMismatch, "ambient dimension " + std::to_string(b.rows()) + " is below base dimension " +
                                       std::to_string(d));
  const Tolerance& tol = seq.tolerance();
  DilationResult out;
  out.kind = kind;
  out.matrix = b;
  out.ambient_dim = static_cast<std::size_t>(b.rows());
  out.base_dim = d;
  out.edges = edges;

  const double norm_b = spectral_norm(b);
  const std::size_t top = std::min(n_max, seq.order());
  bool contiguous = true;
  ComplexMatrix power_cols = b.leftCols(idx(d));  // B^n restricted to H, n >= 1
  for (std::size_t n = 0; n <= top; ++n) {
    ComplexMatrix corner = n == 0 ? identity(d) : ComplexMatrix(power_cols.topRows(idx(d)));
    if (n >= 1) power_cols = b * power_cols;
    const double r = spectral_norm(corner - seq[n]);
    out.residuals.push_back(r);
    if (contiguous && r <= residual_bound(tol, norm_b, n))
      out.guaranteed_orders = n;
    else
      contiguous = false;
  }

  const ComplexMatrix id = ComplexMatrix::Identity(b.rows(), b.cols());
  switch (kind) {
    case DilationKind::SelfAdjoint:
    case DilationKind::Positive: {
      out.structure_defect = hermiticity_defect(b);
      out.edge_defect = out.structure_defect;
      if (b.size() > 0) {
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(b), Eigen::EigenvaluesOnly);
        out.certificates["min_eigenvalue"] = es.eigenvalues()(0);
        out.certificates["norm"] = norm_b;
      }
      break;
    }
    case DilationKind::Isometric: {
      const ComplexMatrix g = b.adjoint() * b - id;
      out.structure_defect = detail::masked_norm(g, edges.cols);
      out.edge_defect = spectral_norm(g);
      break;
    }
    case DilationKind::Unitary: {
      const ComplexMatrix g = b.adjoint() * b - id;
      const ComplexMatrix h = b * b.adjoint() - id;
      out.structure_defect = detail::masked_norm(g, edges.cols) + detail::masked_norm(h, edges.rows);
      out.edge_defect = spectral_norm(g) + spectral_norm(h);
      break;
    }
    case DilationKind::Partial: {
      const ComplexMatrix p = b.adjoint() * b;
      out.structure_defect = spectral_norm(p * p - p);
      out.edge_defect = out.structure_defect;
      break;
    }
  }
  const double structure_bound = residual_bound(tol, norm_b, 2);
  out.certificates["structure_bound"] = structure_bound;
  out.verified = contiguous && out.structure_defect <= structure_bound;
  if (kind == DilationKind::Positive)
    out.verified = out.verified && out.certificates.at("min_eigenvalue") >= -100.0 * tol.tau(norm_b);
  return out;
}

// ---------------------------------------------------------------------------
// GNS construction
// ---------------------------------------------------------------------------

namespace detail {

// Gram-Schmidt of the unit coordinate vectors in the inner product <x, G y>,
// taken in index order so the first d (already orthonormal, since the
// leading block of G is A_0 = I) come first. Returns coefficient columns W
// with W* G W = I.
inline ComplexMatrix gram_orthonormalize(const ComplexMatrix& g, double threshold) {
  const Index n = g.rows();
  std::vector<ComplexVector> basis;
  for (Index j = 0; j < n; ++j) {
    ComplexVector v = ComplexVector::Unit(n, j);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& w : basis) v -= w * w.dot(g * v);
    const double norm2 = v.dot(g * v).real();
    if (norm2 <= threshold) continue;
    basis.push_back(v / std::sqrt(norm2));
  }
  ComplexMatrix w(n, idx(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k) w.col(idx(k)) = basis[k];
  return w;
}

}  // namespace detail

/// Kernel construction on polynomials of degree <= levels: G has block
/// (m, n) = A_{m+n}, and the shift lambda(m, g) -> lambda(m+1, g) compressed
/// to the G-orthonormalized range has Gram data A_{m+n+1}. Certified for
/// n <= 2 levels + 1.
inline DilationResult gns_selfadjoint(const MomentSequence& seq, std::size_t levels) {
  detail::require_hermitian(seq, "gns_selfadjoint");
  if (2 * levels + 1 > seq.order())
    fail(ErrorCode::InsufficientData, std::to_string(levels) + " levels need A_" + std::to_string(2 * levels + 1));
  if (hamburger_check(seq).no()) fail(ErrorCode::CriterionFailed, "block Hankel matrices are not positive");
  if (seq.contractive() && selfadjoint_contraction_check(seq).no())
    fail(ErrorCode::CriterionFailed, "H_n - H_n^(2) is not positive");

  const ComplexMatrix g = hankel(seq, levels, 0);
  const ComplexMatrix g1 = hankel(seq, levels, 1);
  const ComplexMatrix w = detail::gram_orthonormalize(g, tau(seq.tolerance(), g));
  const ComplexMatrix b = hermitian_part(w.adjoint() * g1 * w);

  const std::size_t certified = 2 * levels + 1;
  DilationResult out = verify_dilation(b, seq, certified, DilationKind::SelfAdjoint);
  if (out.guaranteed_orders < certified)
    fail(ErrorCode::CriterionFailed, "Gram construction reproduces moments only up to order " +
                                         std::to_string(out.guaranteed_orders));
  return out;
}

/// GNS construction for completely monotone data; the result is a positive contraction.
inline DilationResult gns_positive(const MomentSequence& seq, std::size_t levels) {
  if (completely_monotone_check(seq).no()) fail(ErrorCode::CriterionFailed, "sequence is not completely monotone");
  DilationResult out = gns_selfadjoint(seq, levels);
  out = verify_dilation(out.matrix, seq, out.guaranteed_orders, DilationKind::Positive);
  return out;
}

// ---------------------------------------------------------------------------
// Block tridiagonal recursion
// ---------------------------------------------------------------------------

struct TridiagonalBlocks {
  std::vector<ComplexMatrix> diag;  // B_00 .. B_LL
  std::vector<ComplexMatrix> sub;   // B_10 .. B_L(L-1)

  ComplexMatrix assemble() const {
    const std::size_t levels = diag.size();
    if (levels == 0) return ComplexMatrix(0, 0);
    const std::size_t d = static_cast<std::size_t>(diag.front().rows());
    BlockMatrix grid = BlockMatrix::uniform(levels, d);
    for (std::size_t i = 0; i < levels; ++i) grid.set(i, i, diag[i]);
    for (std::size_t i = 0; i < sub.size(); ++i) {
      grid.set(i + 1, i, sub[i]);
      grid.set(i, i + 1, sub[i].adjoint());
    }
    return block_assemble(grid);
  }
};

namespace detail {

// P (P*P)^+ X (P*P)^+ P*, the solution Y of P* Y P = X when P is invertible.
inline ComplexMatrix congruence_solve(const ComplexMatrix& p, const ComplexMatrix& x, const Tolerance& tol) {
  const ComplexMatrix g = pinv_psd(hermitian_part(p.adjoint() * p), tol).pinv;
  return p * g * x * g * p.adjoint();
}

}  // namespace detail

/// Solves one unknown block per step: B_nn from (B^{2n+1})_00 = A_{2n+1} and
/// B_{(n+1)n} from (B^{2n+2})_00 = A_{2n+2}. At each step the known part R of
/// the corner power is computed with the unknown set to zero, so the
/// equation reduces to P* X P = A - R with P = B_{n(n-1)} ... B_10.
inline std::pair<TridiagonalBlocks, DilationResult> tridiagonal_recursive(const MomentSequence& seq,
                                                                           std::size_t levels) {
  detail::require_hermitian(seq, "tridiagonal_recursive");
  if (2 * levels > seq.order())
    fail(ErrorCode::InsufficientData, std::to_string(levels) + " levels need A_" + std::to_string(2 * levels));
  if (seq.order() >= 2 && psd_check(seq[2] - seq[1] * seq[1], seq.tolerance()).not_psd())
    fail(ErrorCode::CriterionFailed, "A_2 - A_1^2 is not positive");

  const Tolerance& tol = seq.tolerance();
  const std::size_t d = seq.dim();
  TridiagonalBlocks blocks;
  blocks.diag.push_back(seq[1]);
  ComplexMatrix path = identity(d);  // B_{n(n-1)} ... B_10
  bool closed = false;

  auto check_step = [&](const ComplexMatrix& b, std::size_t power, std::size_t level) {
    const double r = spectral_norm(corner_compress(b, d, power) - seq[power]);
    if (r > residual_bound(tol, spectral_norm(b), power))
      fail(ErrorCode::RecursionBreakdown,
           "no consistent block at level " + std::to_string(level) + " (residual " + std::to_string(r) +
               " for A_" + std::to_string(power) + ")",
           level);
  };

  for (std::size_t n = 0; n < levels; ++n) {
    // subdiagonal B_{(n+1)n}
    blocks.diag.push_back(zeros(d, d));
    blocks.sub.push_back(zeros(d, d));
    const std::size_t even = 2 * n + 2;
    const ComplexMatrix known = corner_compress(blocks.assemble(), d, even);
    const ComplexMatrix rhs = hermitian_part(seq[even] - known);
    if (spectral_norm(rhs) <= tau(tol, seq[even])) {
      blocks.diag.pop_back();
      blocks.sub.pop_back();
      closed = true;
      break;
    }
    const ComplexMatrix gram = detail::congruence_solve(path, rhs, tol);
    const PsdReport psd = psd_check(hermitian_part(gram), tol);
    if (psd.not_psd())
      fail(ErrorCode::CriterionFailed, "level " + std::to_string(n + 1) + " needs a positive block, got minimum eigenvalue " +
                                           std::to_string(psd.min_eigenvalue),
           n + 1);
    blocks.sub.back() = sqrt_psd(hermitian_part(gram), tol);
    check_step(blocks.assemble(), even, n + 1);
    path = blocks.sub.back() * path;

    // diagonal B_{(n+1)(n+1)}
    const std::size_t odd = 2 * n + 3;
    if (odd > seq.order()) break;
    const ComplexMatrix known_odd = corner_compress(blocks.assemble(), d, odd);
    blocks.diag.back() = hermitian_part(detail::congruence_solve(path, hermitian_part(seq[odd] - known_odd), tol));
    check_step(blocks.assemble(), odd, n + 1);
  }

  const ComplexMatrix b = blocks.assemble();
  const std::size_t window = std::min(seq.order(), 2 * (blocks.diag.size() - 1) + 1);
  const std::size_t target = closed ? seq.order() : window;
  DilationResult out = verify_dilation(b, seq, target, DilationKind::SelfAdjoint);
  if (out.guaranteed_orders < target)
    fail(ErrorCode::RecursionBreakdown,
         "assembled blocks fail at order " + std::to_string(out.guaranteed_orders + 1), blocks.diag.size() - 1);
  if (closed) out.certificates["rank_terminated"] = 1.0;
  out.certificates["band_defect"] = block_band_defect(b, std::vector<std::size_t>(blocks.diag.size(), d), 1, 1);
  return {std::move(blocks), std::move(out)};
}

// ---------------------------------------------------------------------------
// Upper Hessenberg isometric recursion
// ---------------------------------------------------------------------------

/// Column-by-column construction of an upper Hessenberg isometry V:
/// V_0n matches (V^{n+1})_00 = A_{n+1}, V_kn (1 <= k <= n) makes column n
/// orthogonal to column k-1, and V_{(n+1)n} normalizes column n. Certified
/// for n <= levels + 1. The last block column is the truncation edge.
inline DilationResult isometric_recursive(const MomentSequence& seq, std::size_t levels) {
  if (!seq.contractive()) fail(ErrorCode::CriterionFailed, "an isometric dilation needs contractive terms");
  if (levels + 1 > seq.order())
    fail(ErrorCode::InsufficientData, std::to_string(levels) + " levels need A_" + std::to_string(levels + 1));
  if (toeplitz_positivity_check(seq).no()) fail(ErrorCode::CriterionFailed, "Toeplitz positivity fails");

  const Tolerance& tol = seq.tolerance();
  const std::size_t d = seq.dim();
  // cols[n][i] = V_in for i <= n + 1
  std::vector<std::vector<ComplexMatrix>> cols;
  ComplexMatrix path = identity(d);  // V_{n(n-1)} ... V_10
  bool closed = false;

  auto assemble = [&](std::size_t block_count) {
    BlockMatrix grid = BlockMatrix::uniform(block_count, d);
    for (std::size_t n = 0; n < cols.size(); ++n)
      for (std::size_t i = 0; i < cols[n].size() && i < block_count; ++i) grid.set(i, n, cols[n][i]);
    return block_assemble(grid);
  };

  for (std::size_t n = 0; n <= levels; ++n) {
    std::vector<ComplexMatrix> col(n + 2, zeros(d, d));
    cols.push_back(col);
    const ComplexMatrix known = corner_compress(assemble(n + 2), d, n + 1);
    cols[n][0] = (seq[n + 1] - known) * pinv_general(path, tol);
    for (std::size_t k = 1; k <= n; ++k) {
      ComplexMatrix acc = zeros(d, d);
      for (std::size_t i = 0; i < k; ++i) acc += cols[k - 1][i].adjoint() * cols[n][i];
      cols[n][k] = -pinv_general(cols[k - 1][k].adjoint(), tol) * acc;
    }

    ComplexMatrix gram = zeros(d, d);
    for (std::size_t i = 0; i <= n; ++i) gram += cols[n][i].adjoint() * cols[n][i];
    const ComplexMatrix defect = hermitian_part(identity(d) - gram);
    if (psd_check(defect, tol).not_psd())
      fail(ErrorCode::RecursionBreakdown, "column " + std::to_string(n) + " has norm above one", n);

    // step checks: the moment equation and orthogonality to earlier columns
    const ComplexMatrix v = assemble(n + 2);
    const double r = spectral_norm(corner_compress(v, d, n + 1) - seq[n + 1]);
    if (r > residual_bound(tol, 1.0, n + 1))
      fail(ErrorCode::RecursionBreakdown,
           "no consistent V_0" + std::to_string(n) + " (residual " + std::to_string(r) + ")", n);
    for (std::size_t k = 0; k < n; ++k) {
      ComplexMatrix ip = zeros(d, d);
      for (std::size_t i = 0; i <= k + 1; ++i) ip += cols[k][i].adjoint() * cols[n][i];
      if (spectral_norm(ip) > 100.0 * tol.tau(1.0))
        fail(ErrorCode::RecursionBreakdown,
             "column " + std::to_string(n) + " cannot be made orthogonal to column " + std::to_string(k), n);
    }

    if (spectral_norm(defect) <= tol.tau(1.0)) {
      cols[n].pop_back();
      closed = true;
      break;
    }
    cols[n][n + 1] = sqrt_psd(defect, tol);
    path = cols[n][n + 1] * path;
  }

  const std::size_t blocks = closed ? cols.size() : cols.size() + 1;
  const ComplexMatrix v = assemble(blocks);
  EdgeSpec edges;
  if (!closed) edges.cols = detail::block_coordinates(blocks - 1, 1, d);
  const std::size_t window = levels + 1;
  const std::size_t target = closed ? seq.order() : window;
  DilationResult out = verify_dilation(v, seq, target, DilationKind::Isometric, edges);
  if (out.guaranteed_orders < target)
    fail(ErrorCode::RecursionBreakdown,
         "assembled isometry fails at order " + std::to_string(out.guaranteed_orders + 1), cols.size() - 1);
  if (!out.verified) fail(ErrorCode::RecursionBreakdown, "assembled columns are not orthonormal", cols.size() - 1);
  if (closed) out.certificates["rank_terminated"] = 1.0;
  out.certificates["hessenberg_defect"] =
      block_band_defect(v, std::vector<std::size_t>(blocks, d), 1, std::numeric_limits<std::size_t>::max());
  return out;
}

// ---------------------------------------------------------------------------
// Schaffer matrices
// ---------------------------------------------------------------------------

/// D_T = (I - T*T)^{1/2}; NotContraction when ||T|| > 1 + tau.
inline ComplexMatrix defect_operator(const ComplexMatrix& t, const Tolerance& tol = {}) {
  require_square(t, "T");
  const double nrm = spectral_norm(t);
  if (nrm > 1.0 + tol.tau(1.0)) fail(ErrorCode::NotContraction, "||T|| = " + std::to_string(nrm));
  return sqrt_psd(hermitian_part(identity(static_cast<std::size_t>(t.rows())) - t.adjoint() * t), tol);
}

/// H (+) D_T^copies with first column (T, D_T, 0, ...) and identity shifts below.
inline DilationResult schaffer_isometry(const ComplexMatrix& t, std::size_t copies, const Tolerance& tol = {}) {
  if (copies == 0) fail(ErrorCode::InvalidArgument, "need at least one defect copy");
  const ComplexMatrix dt = defect_operator(t, tol);
  const std::size_t d = static_cast<std::size_t>(t.rows());
  BlockMatrix grid = BlockMatrix::uniform(copies + 1, d);
  grid.set(0, 0, t);
  grid.set(1, 0, dt);
  for (std::size_t j = 1; j < copies; ++j) grid.set(j + 1, j, identity(d));
  EdgeSpec edges;
  edges.cols = detail::block_coordinates(copies, 1, d);
  return verify_dilation(block_assemble(grid), power_sequence(t, copies, tol), copies, DilationKind::Isometric, edges);
}

/// Bilateral matrix on D_T*^back (+) H (+) D_T^fwd. In natural order the
/// unitary 2x2 block [[D_T*, T], [-T*, D_T]] occupies rows (H, fwd_1) and
/// columns (back_1, H); the result is reordered as H, fwd_1..fwd_f,
/// back_1..back_b so H is leading. Edges: the first block row and the last
/// block column of the natural order.
inline DilationResult schaffer_unitary(const ComplexMatrix& t, std::size_t back, std::size_t fwd,
                                       const Tolerance& tol = {}) {
  if (fwd == 0) fail(ErrorCode::InvalidArgument, "need at least one forward copy");
  const ComplexMatrix dt = defect_operator(t, tol);
  const ComplexMatrix dts = defect_operator(t.adjoint(), tol);
  const std::size_t d = static_cast<std::size_t>(t.rows());

  // reordered block indices
  const std::size_t h = 0;
  auto f = [](std::size_t j) { return j; };              // fwd_j, j >= 1
  auto bk = [fwd](std::size_t j) { return fwd + j; };  // back_j, j >= 1
  const std::size_t count = 1 + fwd + back;

  BlockMatrix grid = BlockMatrix::uniform(count, d);
  grid.set(h, h, t);
  grid.set(f(1), h, dt);
  if (back >= 1) {
    grid.set(h, bk(1), dts);
    grid.set(f(1), bk(1), -t.adjoint());
  }
  for (std::size_t j = 1; j < fwd; ++j) grid.set(f(j + 1), f(j), identity(d));
  for (std::size_t j = 2; j <= back; ++j) grid.set(bk(j - 1), bk(j), identity(d));

  EdgeSpec edges;
  edges.rows = detail::block_coordinates(back >= 1 ? bk(back) : h, 1, d);
  edges.cols = detail::block_coordinates(f(fwd), 1, d);
  const ComplexMatrix u = block_assemble(grid);
  DilationResult out = verify_dilation(u, power_sequence(t, fwd, tol), fwd, DilationKind::Unitary, edges);

  double adjoint_residual = 0.0;
  ComplexMatrix t_star_n = identity(d);
  for (std::size_t n = 1; n <= back; ++n) {
    t_star_n = t_star_n * t.adjoint();
    adjoint_residual = std::max(adjoint_residual, spectral_norm(corner_compress(u.adjoint(), d, n) - t_star_n));
  }
  out.certificates["adjoint_residual"] = adjoint_residual;
  out.certificates["adjoint_orders"] = static_cast<double>(back);
  return out;
}

// ---------------------------------------------------------------------------
// Minimality and moment equivalence
// ---------------------------------------------------------------------------

struct MinimalReduction {
  ComplexMatrix matrix;
  std::vector<std::size_t> level_dims;
  ComplexMatrix basis;
  double corner_defect = 0.0;  // max_{n < depth} ||(B_min^n)_00 - (B^n)_00||
  std::optional<double> band_defect;  // block tridiagonal defect, self-adjoint input only
};

/// Compression of B to span{B^m H : m < depth}.
inline MinimalReduction minimal_reduce(const ComplexMatrix& b, std::size_t d, std::size_t depth,
                                       const Tolerance& tol = {}) {
  KrylovBasis kb = krylov_orthonormalize(b, d, depth, tol);
  MinimalReduction out;
  out.matrix = kb.basis.adjoint() * b * kb.basis;
  out.level_dims = kb.level_dims;
  out.basis = std::move(kb.basis);
  for (std::size_t n = 0; n < depth; ++n)
    out.corner_defect =
        std::max(out.corner_defect, spectral_norm(corner_compress(out.matrix, d, n) - corner_compress(b, d, n)));
  if (hermiticity_defect(b) <= tau(tol, b)) {
    std::vector<std::size_t> dims;
    for (std::size_t k : out.level_dims)
      if (k > 0) dims.push_back(k);
    out.band_defect = block_band_defect(out.matrix, dims, 1, 1);
  }
  return out;
}

/// max_{n <= n_max} ||(B1^n)_00 - (B2^n)_00||, also over adjoint powers when two-sided.
inline double equivalence_by_moments(const ComplexMatrix& b1, const ComplexMatrix& b2, std::size_t d,
                                     std::size_t n_max, bool two_sided = false) {
  double worst = 0.0;
  for (std::size_t n = 0; n <= n_max; ++n) {
    worst = std::max(worst, spectral_norm(corner_compress(b1, d, n) - corner_compress(b2, d, n)));
    if (two_sided)
      worst = std::max(worst, spectral_norm(corner_compress(b1.adjoint(), d, n) - corner_compress(b2.adjoint(), d, n)));
  }
  return worst;
}

}  // namespace opdil
