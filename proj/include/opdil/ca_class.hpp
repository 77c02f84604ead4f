#pragma once

// The C_A class for a positive invertible A: operators T for which
// T_n = A^{-1/2} T^n A^{-1/2} (with T_0 = I) admits a unitary dilation.
//
// For a contraction C commuting with A, put
//   B   = (I + A(A-2I)C*C)^{-1/2},   D   = (I - C*C)^{1/2},
//   B_* = (I + A(A-2I)CC*)^{-1/2},   D_* = (I - CC*)^{1/2},
// and T = ABDC. Then T_n = A^{n-1}(BDC)^n, and this header builds the
// partial isometry R, the isometric dilation V and the unitary dilation U
// of that sequence in closed block form, together with the membership
// criteria and the scalar special cases (A = rho I).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "opdil/core.hpp"
#include "opdil/dilations.hpp"
#include "opdil/moments.hpp"

namespace opdil {

struct CaInstance {
  ComplexMatrix A;
  ComplexMatrix C;
  ComplexMatrix B;
  ComplexMatrix D;
  ComplexMatrix D_star;
  ComplexMatrix B_star;
  ComplexMatrix T;
  Tolerance tol;
  /// Norms of the algebraic identities that commutation implies, keyed by name.
  std::map<std::string, double> identity_defects;

  std::size_t dim() const { return static_cast<std::size_t>(A.rows()); }
  ComplexMatrix bdc() const { return B * D * C; }
};

namespace detail {

inline double identity_budget(const Tolerance& tol, double scale) { return 100.0 * tol.tau(std::max(1.0, scale)); }

}  // namespace detail

inline CaInstance ca_build(const ComplexMatrix& a, const ComplexMatrix& c, const Tolerance& tol = {}) {
  require_square(a, "A");
  require_square(c, "C");
  if (a.rows() != c.rows()) fail(ErrorCode::ShapeMismatch, "A and C act on spaces of different dimension");
  const std::size_t d = static_cast<std::size_t>(a.rows());
  const ComplexMatrix id = identity(d);

  const PsdReport a_psd = psd_check(a, tol);
  if (a_psd.not_psd()) fail(ErrorCode::NotPsd, "A has eigenvalue " + std::to_string(a_psd.min_eigenvalue));
  if (a_psd.min_eigenvalue <= a_psd.tau)
    fail(ErrorCode::NotInvertible, "A has eigenvalue " + std::to_string(a_psd.min_eigenvalue));
  const double c_norm = spectral_norm(c);
  if (c_norm > 1.0 + tol.tau(1.0)) fail(ErrorCode::NotContraction, "||C|| = " + std::to_string(c_norm));
  const double a_norm = spectral_norm(a);
  const double commutator = spectral_norm(a * c - c * a);
  if (commutator > tol.tau(a_norm * std::max(1.0, c_norm)))
    fail(ErrorCode::NotCommuting, "||AC - CA|| = " + std::to_string(commutator));

  CaInstance inst;
  inst.tol = tol;
  inst.A = hermitian_part(a);
  inst.C = c;
  const ComplexMatrix a_shift = inst.A * (inst.A - 2.0 * id);
  auto inverse_root = [&](const ComplexMatrix& k, const char* name) {
    const PsdReport psd = psd_check(hermitian_part(k), tol);
    if (psd.min_eigenvalue <= psd.tau)
      fail(ErrorCode::NotInvertible, std::string(name) + " has eigenvalue " + std::to_string(psd.min_eigenvalue));
    return inv_sqrt_pd(hermitian_part(k), tol);
  };
  inst.B = inverse_root(id + a_shift * c.adjoint() * c, "I + A(A-2I)C*C");
  inst.B_star = inverse_root(id + a_shift * c * c.adjoint(), "I + A(A-2I)CC*");
  inst.D = sqrt_psd(hermitian_part(id - c.adjoint() * c), tol);
  inst.D_star = sqrt_psd(hermitian_part(id - c * c.adjoint()), tol);
  inst.T = inst.A * inst.B * inst.D * c;

  const ComplexMatrix& A = inst.A;
  const ComplexMatrix& B = inst.B;
  const ComplexMatrix& D = inst.D;
  const ComplexMatrix am1 = A - id;
  const ComplexMatrix bd = B * D;
  auto& defects = inst.identity_defects;
  defects["AB=BA"] = spectral_norm(A * B - B * A);
  defects["AD=DA"] = spectral_norm(A * D - D * A);
  defects["D*C=CD"] = spectral_norm(inst.D_star * c - c * D);
  defects["BD=DB"] = spectral_norm(B * D - D * B);
  defects["(BD)^2"] = spectral_norm(bd * bd - (id - B * B * am1 * am1 * c.adjoint() * c));

  const double scale = std::max({a_norm * a_norm, spectral_norm(B) * spectral_norm(B) * a_norm * a_norm, 1.0});
  for (const auto& [name, value] : defects)
    if (value > detail::identity_budget(tol, scale))
      fail(ErrorCode::CrossCheckFailed, "identity " + name + " fails by " + std::to_string(value));
  return inst;
}

struct CaMomentForms {
  std::vector<ComplexMatrix> congruence;  // A^{-1/2} T^n A^{-1/2}, index 0 is I
  std::vector<ComplexMatrix> product;     // A^{n-1} (BDC)^n, index 0 is I
  double cross_residual = 0.0;
};

inline CaMomentForms ca_moment_forms(const CaInstance& inst, std::size_t n_max) {
  const std::size_t d = inst.dim();
  const ComplexMatrix a_inv_half = inv_sqrt_pd(inst.A, inst.tol);
  const ComplexMatrix a_inv = a_inv_half * a_inv_half;
  const ComplexMatrix bdc = inst.bdc();
  CaMomentForms out;
  out.congruence.push_back(identity(d));
  out.product.push_back(identity(d));
  ComplexMatrix t_pow = identity(d);
  ComplexMatrix a_pow = a_inv;  // A^{n-1}
  ComplexMatrix bdc_pow = identity(d);
  for (std::size_t n = 1; n <= n_max; ++n) {
    t_pow = t_pow * inst.T;
    bdc_pow = bdc_pow * bdc;
    a_pow = a_pow * inst.A;
    out.congruence.push_back(a_inv_half * t_pow * a_inv_half);
    out.product.push_back(a_pow * bdc_pow);
    out.cross_residual = std::max(out.cross_residual, spectral_norm(out.congruence.back() - out.product.back()));
  }
  return out;
}

/// T_0 = I, T_n = A^{-1/2} T^n A^{-1/2}, cross-checked against A^{n-1}(BDC)^n.
inline MomentSequence ca_moments(const CaInstance& inst, std::size_t n_max) {
  if (n_max < 1) fail(ErrorCode::InvalidArgument, "need n_max >= 1");
  CaMomentForms forms = ca_moment_forms(inst, n_max);
  double scale = 1.0;
  for (const auto& m : forms.congruence) scale = std::max(scale, spectral_norm(m));
  if (forms.cross_residual > detail::identity_budget(inst.tol, scale))
    fail(ErrorCode::CrossCheckFailed, "the two moment forms differ by " + std::to_string(forms.cross_residual));
  return MomentSequence(std::move(forms.congruence), inst.tol);
}

// ---------------------------------------------------------------------------
// Membership criteria
// ---------------------------------------------------------------------------

/// Toeplitz positivity of zeta_A(n) = A^{-1/2} T^n A^{-1/2}, zeta_A(0) = I.
inline CriterionReport zeta_check(const ComplexMatrix& a, const ComplexMatrix& t, std::size_t n, std::size_t trials = 200,
                                  std::uint64_t rng_seed = 20240601, const Tolerance& tol = {}) {
  require_square(t, "T");
  if (a.rows() != t.rows()) fail(ErrorCode::ShapeMismatch, "A and T act on spaces of different dimension");
  const ComplexMatrix a_inv_half = inv_sqrt_pd(a, tol);
  std::vector<ComplexMatrix> terms{identity(static_cast<std::size_t>(t.rows()))};
  ComplexMatrix t_pow = terms.front();
  for (std::size_t k = 1; k <= n; ++k) {
    t_pow = t_pow * t;
    terms.push_back(a_inv_half * t_pow * a_inv_half);
  }
  CriterionReport report = toeplitz_positivity_check(MomentSequence(std::move(terms), tol), trials, rng_seed);
  report.criterion = "zeta";
  return report;
}

/// W(z) = (I - zT)*(A - 2I)(I - zT) + (I - zT) + (I - zT)*.
inline ComplexMatrix kernel_operator(const ComplexMatrix& a, const ComplexMatrix& t, Complex z) {
  const ComplexMatrix id = ComplexMatrix::Identity(t.rows(), t.cols());
  const ComplexMatrix x = id - z * t;
  return hermitian_part(x.adjoint() * (a - 2.0 * id) * x + x + x.adjoint());
}

struct KernelGrid {
  std::vector<double> radii{0.3, 0.6, 0.9, 0.99};
  std::size_t angles = 64;

  template <typename F>
  void for_each(F&& f) const {
    for (double r : radii) {
      if (!(r >= 0.0 && r < 1.0)) fail(ErrorCode::DiskViolation, "radius " + std::to_string(r) + " is outside [0, 1)");
      for (std::size_t j = 0; j < angles; ++j)
        f(std::polar(r, 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(angles)));
    }
  }
};

/// PSD of W(z) at every grid point; verdicts hold at the grid points only.
inline CriterionReport kernel_check(const ComplexMatrix& a, const ComplexMatrix& t, const KernelGrid& grid = {},
                                    const Tolerance& tol = {}) {
  require_square(a, "A");
  require_square(t, "T");
  if (a.rows() != t.rows()) fail(ErrorCode::ShapeMismatch, "A and T act on spaces of different dimension");
  const double defect = hermiticity_defect(a);
  if (defect > tau(tol, a)) fail(ErrorCode::NotHermitian, "A has hermiticity defect " + std::to_string(defect));
  CriterionReport report("kernel");
  report.certificate = "grid";
  grid.for_each([&](Complex z) {
    Witness w = Witness::at(0);
    w.point = z;
    detail::absorb(report, psd_check(kernel_operator(a, t, z), tol), std::move(w));
  });
  return report;
}

// ---------------------------------------------------------------------------
// Explicit dilations
// ---------------------------------------------------------------------------

/// R = [[BDC, BDD_*], [(A-I)CBC, (A-I)CBD_*]] on H (+) H.
inline ComplexMatrix partial_isometry_matrix(const CaInstance& inst) {
  const ComplexMatrix am1 = inst.A - identity(inst.dim());
  BlockMatrix grid = BlockMatrix::uniform(2, inst.dim());
  grid.set(0, 0, inst.B * inst.D * inst.C);
  grid.set(0, 1, inst.B * inst.D * inst.D_star);
  grid.set(1, 0, am1 * inst.C * inst.B * inst.C);
  grid.set(1, 1, am1 * inst.C * inst.B * inst.D_star);
  return block_assemble(grid);
}

inline DilationResult partial_isometry_R(const CaInstance& inst, std::size_t n_max = 6) {
  const ComplexMatrix r = partial_isometry_matrix(inst);
  const ComplexMatrix& c = inst.C;
  const ComplexMatrix& ds = inst.D_star;
  BlockMatrix gram(std::vector<std::size_t>(2, inst.dim()), std::vector<std::size_t>(2, inst.dim()));
  gram.set(0, 0, c.adjoint() * c);
  gram.set(0, 1, c.adjoint() * ds);
  gram.set(1, 0, ds * c);
  gram.set(1, 1, ds * ds);
  BlockMatrix defect(gram.row_dims(), gram.col_dims());
  defect.set(0, 0, inst.D * inst.D);
  defect.set(0, 1, -c.adjoint() * ds);
  defect.set(1, 0, -ds * c);
  defect.set(1, 1, c * c.adjoint());

  const ComplexMatrix rr = r.adjoint() * r;
  DilationResult out = verify_dilation(r, ca_moments(inst, n_max), n_max, DilationKind::Partial);
  out.certificates["gram_identity"] = spectral_norm(rr - block_assemble(gram));
  out.certificates["defect_identity"] = spectral_norm(identity(2 * inst.dim()) - rr - block_assemble(defect));
  out.certificates["partial_isometry"] = spectral_norm(r * rr - r);
  return out;
}

/// Truncation of V on H^3 (+) H^levels: columns 0 and 1 carry
/// (BDC, (A-I)CBC, D) and (BDD_*, (A-I)CBD_*, -C*), column k >= 2 maps
/// by I into block k + 1, and the last block column is the edge.
inline DilationResult ca_isometric_V(const CaInstance& inst, std::size_t levels) {
  if (levels < 1) fail(ErrorCode::InvalidArgument, "need levels >= 1");
  const std::size_t d = inst.dim();
  const ComplexMatrix r = partial_isometry_matrix(inst);
  const std::size_t count = 3 + levels;
  BlockMatrix grid = BlockMatrix::uniform(count, d);
  grid.set(0, 0, block_of(r, std::vector<std::size_t>{d, d}, std::vector<std::size_t>{d, d}, 0, 0));
  grid.set(0, 1, block_of(r, std::vector<std::size_t>{d, d}, std::vector<std::size_t>{d, d}, 0, 1));
  grid.set(1, 0, block_of(r, std::vector<std::size_t>{d, d}, std::vector<std::size_t>{d, d}, 1, 0));
  grid.set(1, 1, block_of(r, std::vector<std::size_t>{d, d}, std::vector<std::size_t>{d, d}, 1, 1));
  grid.set(2, 0, inst.D);
  grid.set(2, 1, -inst.C.adjoint());
  for (std::size_t k = 2; k + 1 < count; ++k) grid.set(k + 1, k, identity(d));
  EdgeSpec edges;
  edges.cols = detail::block_coordinates(count - 1, 1, d);
  const std::size_t window = levels + 1;
  return verify_dilation(block_assemble(grid), ca_moments(inst, window), window, DilationKind::Isometric, edges);
}

/// 4 x 4 core of U on blocks (m0, m1, m2, m3); m1 carries H.
inline ComplexMatrix ca_core_M(const CaInstance& inst) {
  const std::size_t d = inst.dim();
  const ComplexMatrix am1 = inst.A - identity(d);
  BlockMatrix grid = BlockMatrix::uniform(4, d);
  grid.set(1, 0, -am1 * inst.B * inst.C.adjoint());
  grid.set(1, 1, inst.B * inst.D * inst.C);
  grid.set(1, 2, inst.B * inst.D * inst.D_star);
  grid.set(2, 0, inst.B_star * inst.D_star);
  grid.set(2, 1, am1 * inst.C * inst.B * inst.C);
  grid.set(2, 2, am1 * inst.C * inst.B * inst.D_star);
  grid.set(3, 1, inst.D);
  grid.set(3, 2, -inst.C.adjoint());
  return block_assemble(grid);
}

struct CoreIdentities {
  double gram_defect = 0.0;     // ||M*M - diag(I, I, I, 0)||
  double cogram_defect = 0.0;   // ||MM* - diag(0, I, I, I)||
};

inline CoreIdentities core_identities(const ComplexMatrix& m, std::size_t d) {
  ComplexMatrix left = ComplexMatrix::Identity(m.rows(), m.cols());
  ComplexMatrix right = left;
  left.bottomRightCorner(idx(d), idx(d)).setZero();
  right.topLeftCorner(idx(d), idx(d)).setZero();
  return {spectral_norm(m.adjoint() * m - left), spectral_norm(m * m.adjoint() - right)};
}

/// Bilateral truncation: back_b, ..., back_1, m0, m1, m2, m3, fwd_1, ..., fwd_f
/// in natural order, with back_1 -> m0 and m3 -> fwd_1 by I. The result is
/// rotated to start at m1 (which carries H); the first natural block row and
/// the last natural block column are the edges.
inline DilationResult ca_unitary_U(const CaInstance& inst, std::size_t back, std::size_t fwd) {
  const std::size_t d = inst.dim();
  const ComplexMatrix m = ca_core_M(inst);
  const CoreIdentities core = core_identities(m, d);
  const double budget = detail::identity_budget(inst.tol, std::pow(spectral_norm(m), 2));
  if (core.gram_defect > budget || core.cogram_defect > budget)
    fail(ErrorCode::CoreIdentityFailed, "M*M defect " + std::to_string(core.gram_defect) + ", MM* defect " +
                                            std::to_string(core.cogram_defect));

  const std::size_t count = back + 4 + fwd;
  const std::size_t m0 = back;
  // natural index -> position after rotating m1 to the front
  auto pos = [&](std::size_t natural) { return (natural + count - (m0 + 1)) % count; };

  BlockMatrix grid = BlockMatrix::uniform(count, d);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      ComplexMatrix blk = block_of(m, std::vector<std::size_t>(4, d), std::vector<std::size_t>(4, d), i, j);
      if (blk.norm() > 0.0) grid.set(pos(m0 + i), pos(m0 + j), std::move(blk));
    }
  for (std::size_t k = 0; k < back; ++k) grid.set(pos(k + 1), pos(k), identity(d));  // back_j -> back_{j-1}, back_1 -> m0
  for (std::size_t k = m0 + 3; k + 1 < count; ++k) grid.set(pos(k + 1), pos(k), identity(d));  // m3 -> fwd_1 -> ...

  EdgeSpec edges;
  edges.rows = detail::block_coordinates(pos(0), 1, d);
  edges.cols = detail::block_coordinates(pos(count - 1), 1, d);
  const std::size_t window = std::max<std::size_t>(fwd, 1);
  const ComplexMatrix u = block_assemble(grid);
  DilationResult out = verify_dilation(u, ca_moments(inst, window), window, DilationKind::Unitary, edges);
  out.certificates["core_gram_defect"] = core.gram_defect;
  out.certificates["core_cogram_defect"] = core.cogram_defect;

  const MomentSequence seq = ca_moments(inst, std::max<std::size_t>(back, 1));
  double adjoint_residual = 0.0;
  for (std::size_t n = 1; n <= back; ++n)
    adjoint_residual =
        std::max(adjoint_residual, spectral_norm(corner_compress(u.adjoint(), d, n) - seq[n].adjoint()));
  out.certificates["adjoint_residual"] = adjoint_residual;
  out.certificates["adjoint_orders"] = static_cast<double>(back);
  return out;
}

// ---------------------------------------------------------------------------
// Minimal dilation space of V
// ---------------------------------------------------------------------------

struct MinimalSubspaceReport {
  std::vector<double> gaps;  // gaps[n - 1] compares the stated H_n with the Krylov level n
  double max_gap = 0.0;
  std::size_t kernel_rank = 0;  // rank of P, the projection onto ker (I - A)BDC
  bool borderline_rank = false;
};

/// Compares, for 1 <= n <= n_max, the Krylov levels V^n H minus the earlier
/// span with the closed forms
///   H_1 = {(0, (A-I)CBCh, Dh, 0, ...)},
///   H_n = {(0, ..., 0, (I-A)BCPh, Dh, 0, ...)} with (I-A)BCPh in block n,
/// and returns the principal-angle gaps.
inline MinimalSubspaceReport minimal_subspace_check(const CaInstance& inst, std::size_t n_max) {
  if (n_max < 1) fail(ErrorCode::InvalidArgument, "need n_max >= 1");
  const std::size_t d = inst.dim();
  const Tolerance& tol = inst.tol;
  const DilationResult v = ca_isometric_V(inst, n_max + 1);
  const std::size_t ambient = v.ambient_dim;
  const ComplexMatrix id = identity(d);
  const ComplexMatrix am1 = inst.A - id;

  MinimalSubspaceReport out;
  const ComplexMatrix k = (id - inst.A) * inst.bdc();
  const ComplexMatrix kk = hermitian_part(k.adjoint() * k);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(kk);
  const double t = tau(tol, kk);
  ComplexMatrix p = zeros(d, d);
  for (Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double lambda = es.eigenvalues()(i);
    if (lambda <= t) {
      p += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
      ++out.kernel_rank;
    } else if (lambda <= 10.0 * t) {
      out.borderline_rank = true;
    }
  }

  const KrylovBasis kb = krylov_orthonormalize(v.matrix, d, n_max + 1, tol);
  std::size_t offset = kb.level_dims.front();
  const double threshold = tau(tol, v.matrix);
  for (std::size_t n = 1; n <= n_max; ++n) {
    const std::size_t width = n < kb.level_dims.size() ? kb.level_dims[n] : 0;
    const ComplexMatrix krylov = kb.basis.middleCols(idx(offset), idx(width));
    offset += width;

    ComplexMatrix stated = ComplexMatrix::Zero(idx(ambient), idx(d));
    if (n == 1) {
      stated.middleRows(idx(d), idx(d)) = am1 * inst.C * inst.B * inst.C;
      stated.middleRows(idx(2 * d), idx(d)) = inst.D;
    } else {
      stated.middleRows(idx(n * d), idx(d)) = (id - inst.A) * inst.B * inst.C * p;
      stated.middleRows(idx((n + 1) * d), idx(d)) = inst.D;
    }
    out.gaps.push_back(subspace_gap(orthonormal_range(stated, threshold), krylov));
    out.max_gap = std::max(out.max_gap, out.gaps.back());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scalar weights and numerical radius
// ---------------------------------------------------------------------------

/// A = rho I; also certifies T = rho (I + rho(rho-2)C*C)^{-1/2} D C and T_n = T^n / rho.
inline CaInstance c_rho_build(double rho, const ComplexMatrix& c, const Tolerance& tol = {},
                              std::size_t moment_orders = 8) {
  if (!(rho > 0.0)) fail(ErrorCode::InvalidArgument, "rho must be positive");
  require_square(c, "C");
  const std::size_t d = static_cast<std::size_t>(c.rows());
  CaInstance inst = ca_build(rho * identity(d), c, tol);

  const ComplexMatrix durszt =
      rho * inv_sqrt_pd(hermitian_part(identity(d) + rho * (rho - 2.0) * c.adjoint() * c), tol) * inst.D * c;
  inst.identity_defects["durszt_form"] = spectral_norm(inst.T - durszt);
  const MomentSequence seq = ca_moments(inst, moment_orders);
  ComplexMatrix t_pow = identity(d);
  double worst = 0.0;
  for (std::size_t n = 1; n <= moment_orders; ++n) {
    t_pow = t_pow * inst.T;
    worst = std::max(worst, spectral_norm(seq[n] - t_pow / rho));
  }
  inst.identity_defects["T_n=T^n/rho"] = worst;
  const double budget = detail::identity_budget(tol, std::pow(std::max(1.0, spectral_norm(inst.T)), moment_orders));
  if (inst.identity_defects["durszt_form"] > budget || worst > budget)
    fail(ErrorCode::CrossCheckFailed, "scalar-weight identities fail by " + std::to_string(worst));
  return inst;
}

struct BergerStampfliReport {
  double w = 0.0;
  bool in_c2 = false;
  bool criterion_agrees = false;
  CriterionReport kernel;
};

/// w(T) <= 1 exactly when T lies in C_2; compares that with the kernel criterion for A = 2I.
inline BergerStampfliReport berger_stampfli_check(const ComplexMatrix& t, std::size_t grid_points = 1024,
                                                  const Tolerance& tol = {}, const KernelGrid& grid = {}) {
  BergerStampfliReport out;
  out.w = numerical_radius(t, grid_points);
  out.in_c2 = out.w <= 1.0 + tol.tau(1.0);
  out.kernel = kernel_check(2.0 * identity(static_cast<std::size_t>(t.rows())), t, grid, tol);
  out.criterion_agrees = out.in_c2 == (out.kernel.satisfied != Verdict::No);
  return out;
}

struct MonotonicityReport {
  bool holds = true;
  std::size_t grid_points = 0;
  std::size_t violations = 0;        // grid points with A1 YES and A2 NO
  std::size_t congruence_failures = 0;  // sampled z where W_A2(z) - W_A1(z) is NOT_PSD
  double worst_congruence_margin = std::numeric_limits<double>::infinity();
};

/// For A1 <= A2, membership for A1 implies membership for A2. Checked on the
/// grid, plus W_A2(z) - W_A1(z) = (I - zT)*(A2 - A1)(I - zT) >= 0 at random z.
inline MonotonicityReport istratescu_monotonicity_test(const ComplexMatrix& a1, const ComplexMatrix& a2,
                                                       const ComplexMatrix& t, const KernelGrid& grid = {},
                                                       std::size_t samples = 100, std::uint64_t rng_seed = 20240601,
                                                       const Tolerance& tol = {}) {
  for (const ComplexMatrix* a : {&a1, &a2}) {
    const PsdReport psd = psd_check(*a, tol);
    if (psd.min_eigenvalue <= psd.tau) fail(ErrorCode::NotInvertible, "weights must be positive invertible");
  }
  const PsdReport order = psd_check(a2 - a1, tol);
  if (order.not_psd()) fail(ErrorCode::OrderViolation, "A2 - A1 has eigenvalue " + std::to_string(order.min_eigenvalue));

  MonotonicityReport out;
  grid.for_each([&](Complex z) {
    ++out.grid_points;
    const bool low_yes = psd_check(kernel_operator(a1, t, z), tol).psd();
    const bool high_no = psd_check(kernel_operator(a2, t, z), tol).not_psd();
    if (low_yes && high_no) ++out.violations;
  });

  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t s = 0; s < samples; ++s) {
    const Complex z = std::polar(std::sqrt(unit(rng)) * 0.999, 2.0 * std::numbers::pi * unit(rng));
    const PsdReport diff = psd_check(kernel_operator(a2, t, z) - kernel_operator(a1, t, z), tol);
    out.worst_congruence_margin = std::min(out.worst_congruence_margin, diff.min_eigenvalue);
    if (diff.not_psd()) ++out.congruence_failures;
  }
  out.holds = out.violations == 0 && out.congruence_failures == 0;
  return out;
}

}  // namespace opdil
