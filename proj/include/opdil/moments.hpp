#pragma once

// Operator moment sequences A_0 = I, A_1, ..., A_N and the finite-order
// existence criteria for self-adjoint, positive and unitary dilations.
// Every verdict is "up to the order the data allows".

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "opdil/core.hpp"

namespace opdil {

class MomentSequence {
 public:
  /// Term 0 must equal the identity within tolerance; it is then stored as exactly I.
  explicit MomentSequence(std::vector<ComplexMatrix> terms, const Tolerance& tol = {}) : terms_(std::move(terms)), tol_(tol) {
    if (terms_.empty()) fail(ErrorCode::InsufficientData, "a moment sequence needs at least A_0");
    require_square(terms_.front(), "A_0");
    const Index d = terms_.front().rows();
    for (std::size_t n = 0; n < terms_.size(); ++n) {
      const auto& a = terms_[n];
      if (a.rows() != d || a.cols() != d)
        fail(ErrorCode::ShapeMismatch, "A_" + std::to_string(n) + " is " + std::to_string(a.rows()) + "x" +
                                           std::to_string(a.cols()) + ", expected " + std::to_string(d) + "x" +
                                           std::to_string(d));
      if (!all_finite(a)) fail(ErrorCode::InvalidArgument, "A_" + std::to_string(n) + " has non-finite entries");
    }
    const ComplexMatrix id = ComplexMatrix::Identity(d, d);
    const double gap = spectral_norm(terms_.front() - id);
    if (gap > tol.tau(1.0)) fail(ErrorCode::InvalidArgument, "A_0 differs from the identity by " + std::to_string(gap));
    terms_.front() = id;

    hermitian_ = true;
    contractive_ = true;
    for (const auto& a : terms_) {
      const double nrm = spectral_norm(a);
      if (hermiticity_defect(a) > tol.tau(nrm)) hermitian_ = false;
      if (nrm > 1.0 + tol.tau(1.0)) contractive_ = false;
    }
  }

  static MomentSequence scalar(const std::vector<Complex>& m, const Tolerance& tol = {}) {
    std::vector<ComplexMatrix> terms;
    terms.reserve(m.size());
    for (Complex v : m) terms.push_back(scalar_matrix(v));
    return MomentSequence(std::move(terms), tol);
  }

  static MomentSequence scalar(const std::vector<double>& m, const Tolerance& tol = {}) {
    return scalar(std::vector<Complex>(m.begin(), m.end()), tol);
  }

  std::size_t dim() const { return static_cast<std::size_t>(terms_.front().rows()); }
  /// N, the index of the last available term.
  std::size_t order() const { return terms_.size() - 1; }
  const std::vector<ComplexMatrix>& terms() const { return terms_; }
  const ComplexMatrix& operator[](std::size_t n) const { return terms_.at(n); }
  bool hermitian() const { return hermitian_; }
  bool contractive() const { return contractive_; }
  const Tolerance& tolerance() const { return tol_; }

  /// A_n for n >= 0 and A_{|n|}* for n < 0.
  ComplexMatrix signed_term(long n) const {
    if (n >= 0) return terms_.at(static_cast<std::size_t>(n));
    return terms_.at(static_cast<std::size_t>(-n)).adjoint();
  }

  /// Leading subsequence A_0..A_n.
  MomentSequence truncated(std::size_t n) const {
    if (n > order()) fail(ErrorCode::InsufficientData, "cannot truncate to order " + std::to_string(n));
    return MomentSequence(std::vector<ComplexMatrix>(terms_.begin(), terms_.begin() + static_cast<long>(n) + 1), tol_);
  }

 private:
  std::vector<ComplexMatrix> terms_;
  Tolerance tol_;
  bool hermitian_ = false;
  bool contractive_ = false;
};

/// A_n = T^n for n = 0..N.
inline MomentSequence power_sequence(const ComplexMatrix& t, std::size_t n_max, const Tolerance& tol = {}) {
  require_square(t, "T");
  std::vector<ComplexMatrix> terms;
  terms.reserve(n_max + 1);
  terms.push_back(ComplexMatrix::Identity(t.rows(), t.cols()));
  for (std::size_t n = 1; n <= n_max; ++n) terms.push_back(terms.back() * t);
  return MomentSequence(std::move(terms), tol);
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

enum class Verdict { Yes, No, Borderline };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Yes: return "YES";
    case Verdict::No: return "NO";
    case Verdict::Borderline: return "BORDERLINE";
  }
  return "?";
}

inline Verdict verdict_of(PsdVerdict v) {
  switch (v) {
    case PsdVerdict::Psd: return Verdict::Yes;
    case PsdVerdict::NotPsd: return Verdict::No;
    case PsdVerdict::Borderline: return Verdict::Borderline;
  }
  return Verdict::Borderline;
}

/// NO dominates BORDERLINE, which dominates YES.
inline Verdict combine(Verdict a, Verdict b) {
  if (a == Verdict::No || b == Verdict::No) return Verdict::No;
  if (a == Verdict::Borderline || b == Verdict::Borderline) return Verdict::Borderline;
  return Verdict::Yes;
}

/// Data that reproduces a margin when re-evaluated. Which fields are filled
/// depends on the criterion: Hankel-type checks give `vector` against the
/// matrix at `order`, difference checks add `k`, Toeplitz sampling gives
/// `coefficients` and `vector`, kernel checks give `point` and `vector`.
struct Witness {
  static Witness at(std::size_t order, std::optional<std::size_t> k = std::nullopt) {
    Witness w;
    w.order = order;
    w.k = k;
    return w;
  }

  std::size_t order = 0;
  std::optional<std::size_t> k;
  ComplexVector vector;
  ComplexVector coefficients;
  std::optional<Complex> point;
  double value = 0.0;
};

struct CriterionReport {
  CriterionReport() = default;
  explicit CriterionReport(std::string name, std::size_t order = 0)
      : criterion(std::move(name)), max_order_checked(order) {}

  std::string criterion;
  Verdict satisfied = Verdict::Yes;
  std::size_t max_order_checked = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  std::optional<Witness> witness;
  std::string certificate;

  bool yes() const { return satisfied == Verdict::Yes; }
  bool no() const { return satisfied == Verdict::No; }
};

namespace detail {

// Folds one PSD test into a running report. The first NO (or, failing
// that, the first BORDERLINE) keeps its witness.
inline void absorb(CriterionReport& report, const PsdReport& psd, Witness w) {
  report.worst_margin = std::min(report.worst_margin, psd.min_eigenvalue);
  const Verdict v = verdict_of(psd.verdict);
  const bool keep = (v == Verdict::No && report.satisfied != Verdict::No) ||
                    (v == Verdict::Borderline && report.satisfied == Verdict::Yes);
  if (keep && psd.witness) {
    w.vector = *psd.witness;
    w.value = psd.min_eigenvalue;
    report.witness = std::move(w);
  }
  report.satisfied = combine(report.satisfied, v);
}

inline void require_hermitian(const MomentSequence& seq, const char* who) {
  if (!seq.hermitian()) fail(ErrorCode::NotHermitian, std::string(who) + " needs a Hermitian moment sequence");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Growth and Hankel criteria
// ---------------------------------------------------------------------------

struct GrowthReport {
  double bound = 0.0;                   // M = max_{1<=n<=N} ||A_n||^{1/n}
  bool ok = false;                      // M finite
  std::optional<bool> within_contractive;  // M <= 1 + tol, reported for contractive sequences
};

inline GrowthReport validate_growth(const MomentSequence& seq) {
  if (seq.order() < 1) fail(ErrorCode::InsufficientData, "growth bound needs at least A_1");
  GrowthReport out;
  for (std::size_t n = 1; n <= seq.order(); ++n)
    out.bound = std::max(out.bound, std::pow(spectral_norm(seq[n]), 1.0 / static_cast<double>(n)));
  out.ok = std::isfinite(out.bound);
  if (seq.contractive()) out.within_contractive = out.bound <= 1.0 + seq.tolerance().tau(1.0);
  return out;
}

/// (n+1)d square block Hankel matrix with block (i, j) = A_{i+j+shift}.
inline ComplexMatrix hankel(const MomentSequence& seq, std::size_t n, std::size_t shift) {
  if (shift > 2) fail(ErrorCode::InvalidArgument, "Hankel shift must be 0, 1 or 2");
  if (2 * n + shift > seq.order())
    fail(ErrorCode::InsufficientData, "Hankel level " + std::to_string(n) + " with shift " + std::to_string(shift) +
                                          " needs A_" + std::to_string(2 * n + shift));
  const Index d = idx(seq.dim());
  ComplexMatrix h(idx(n + 1) * d, idx(n + 1) * d);
  for (std::size_t i = 0; i <= n; ++i)
    for (std::size_t j = 0; j <= n; ++j) h.block(idx(i) * d, idx(j) * d, d, d) = seq[i + j + shift];
  return h;
}

inline CriterionReport hamburger_check(const MomentSequence& seq) {
  detail::require_hermitian(seq, "hamburger_check");
  CriterionReport report("hankel");
  const std::size_t top = seq.order() / 2;
  for (std::size_t n = 0; n <= top; ++n)
    detail::absorb(report, psd_check(hankel(seq, n, 0), seq.tolerance()), Witness::at(n));
  report.max_order_checked = 2 * top;
  return report;
}

/// H_n >= 0 for 2n <= N, and H_n - H_n^(2) >= 0 for 2n + 2 <= N.
inline CriterionReport selfadjoint_contraction_check(const MomentSequence& seq) {
  detail::require_hermitian(seq, "selfadjoint_contraction_check");
  CriterionReport report("selfadjoint");
  const std::size_t top = seq.order() / 2;
  for (std::size_t n = 0; n <= top; ++n) {
    const ComplexMatrix h = hankel(seq, n, 0);
    detail::absorb(report, psd_check(h, seq.tolerance()), Witness::at(n, 0));
    if (2 * n + 2 <= seq.order()) {
      const ComplexMatrix gap = h - hankel(seq, n, 2);
      detail::absorb(report, psd_check(gap, seq.tolerance()), Witness::at(n, 2));
    }
  }
  report.max_order_checked = seq.order();
  return report;
}

/// Exact C(k, i) for k <= 60.
inline std::uint64_t binomial(std::size_t k, std::size_t i) {
  if (k > 60) fail(ErrorCode::Overflow, "binomial coefficients are exact only up to k = 60");
  if (i > k) return 0;
  i = std::min(i, k - i);
  std::uint64_t c = 1;
  for (std::size_t j = 0; j < i; ++j) c = c * (k - j) / (j + 1);
  return c;
}

/// (-1)^k (Delta^k A)_n = sum_i C(k,i) (-1)^i A_{n+i}.
inline ComplexMatrix signed_difference(const MomentSequence& seq, std::size_t k, std::size_t n) {
  if (n + k > seq.order()) fail(ErrorCode::InsufficientData, "difference needs A_" + std::to_string(n + k));
  ComplexMatrix acc = zeros(seq.dim(), seq.dim());
  for (std::size_t i = 0; i <= k; ++i) {
    const double c = static_cast<double>(binomial(k, i));
    acc += (i % 2 == 0 ? c : -c) * seq[n + i];
  }
  return acc;
}

/// Checks every (n, k) with n + k <= N, or with k <= max_k when given.
inline CriterionReport completely_monotone_check(const MomentSequence& seq,
                                                 std::optional<std::size_t> max_k = std::nullopt) {
  detail::require_hermitian(seq, "completely_monotone_check");
  const std::size_t k_top = max_k.value_or(seq.order());
  if (k_top > 60) fail(ErrorCode::Overflow, "difference order " + std::to_string(k_top) + " exceeds 60");
  CriterionReport report("cm");
  for (std::size_t k = 0; k <= std::min(k_top, seq.order()); ++k)
    for (std::size_t n = 0; n + k <= seq.order(); ++n)
      detail::absorb(report, psd_check(signed_difference(seq, k, n), seq.tolerance()), Witness::at(n, k));
  report.max_order_checked = seq.order();
  return report;
}

// ---------------------------------------------------------------------------
// Toeplitz positivity
// ---------------------------------------------------------------------------

/// (N+1)d square block Toeplitz matrix with block (l, k) = A_{k-l}, where A_{-n} = A_n*.
inline ComplexMatrix block_toeplitz(const MomentSequence& seq) {
  const Index d = idx(seq.dim());
  const std::size_t m = seq.order() + 1;
  ComplexMatrix t(idx(m) * d, idx(m) * d);
  for (std::size_t l = 0; l < m; ++l)
    for (std::size_t k = 0; k < m; ++k)
      t.block(idx(l) * d, idx(k) * d, d, d) = seq.signed_term(static_cast<long>(k) - static_cast<long>(l));
  return t;
}

/// sum_{l,k} conj(c_l) c_k <h, A_{k-l} h>.
inline double toeplitz_form(const MomentSequence& seq, const ComplexVector& c, const ComplexVector& h) {
  Complex acc = 0.0;
  for (Index l = 0; l < c.size(); ++l)
    for (Index k = 0; k < c.size(); ++k)
      acc += std::conj(c(l)) * c(k) * h.dot(seq.signed_term(static_cast<long>(k - l)) * h);
  return acc.real();
}

namespace detail {

inline ComplexVector random_unit(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  ComplexVector v(n);
  for (Index i = 0; i < n; ++i) v(i) = Complex(g(rng), g(rng));
  return v.normalized();
}

// Alternating minimization of the Toeplitz form over unit product vectors c (x) h.
inline std::pair<ComplexVector, ComplexVector> refine_product(const MomentSequence& seq, ComplexVector c,
                                                              ComplexVector h, int sweeps = 25) {
  const Index m = c.size();
  const Index d = h.size();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es;
  for (int s = 0; s < sweeps; ++s) {
    ComplexMatrix mc(m, m);
    for (Index l = 0; l < m; ++l)
      for (Index k = 0; k < m; ++k) mc(l, k) = h.dot(seq.signed_term(static_cast<long>(k - l)) * h);
    es.compute(hermitian_part(mc));
    c = es.eigenvectors().col(0);
    ComplexMatrix mh = ComplexMatrix::Zero(d, d);
    for (Index l = 0; l < m; ++l)
      for (Index k = 0; k < m; ++k) mh += std::conj(c(l)) * c(k) * seq.signed_term(static_cast<long>(k - l));
    es.compute(hermitian_part(mh));
    h = es.eigenvectors().col(0);
  }
  return {c, h};
}

}  // namespace detail

/// Tier 1 certifies YES through block-Toeplitz PSD. Otherwise Tier 2 samples
/// unit product vectors c (x) h; a form value below -10 tau gives NO with the
/// pair as witness, anything else stays BORDERLINE.
inline CriterionReport toeplitz_positivity_check(const MomentSequence& seq, std::size_t trials = 200,
                                                 std::uint64_t rng_seed = 20240601) {
  CriterionReport report("toeplitz", seq.order());
  const ComplexMatrix t = block_toeplitz(seq);
  const PsdReport tier1 = psd_check(t, seq.tolerance());
  if (tier1.psd()) {
    report.satisfied = Verdict::Yes;
    report.worst_margin = tier1.min_eigenvalue;
    report.certificate = "block-Toeplitz";
    return report;
  }

  const Index m = idx(seq.order() + 1);
  const Index d = idx(seq.dim());
  std::mt19937_64 rng(rng_seed);
  std::vector<std::pair<ComplexVector, ComplexVector>> starts;
  if (tier1.witness) {
    // best rank-one approximation of the Tier-1 witness reshaped to m x d
    ComplexMatrix w(m, d);
    for (Index l = 0; l < m; ++l)
      for (Index i = 0; i < d; ++i) w(l, i) = (*tier1.witness)(l * d + i);
    Eigen::JacobiSVD<ComplexMatrix> svd(w, Eigen::ComputeThinU | Eigen::ComputeThinV);
    starts.emplace_back(svd.matrixU().col(0), svd.matrixV().col(0).conjugate());
  }
  for (std::size_t trial = 0; trial < trials; ++trial) {
    ComplexVector c = detail::random_unit(m, rng);
    ComplexVector h = detail::random_unit(d, rng);
    starts.emplace_back(std::move(c), std::move(h));
  }

  double best = std::numeric_limits<double>::infinity();
  ComplexVector best_c;
  ComplexVector best_h;
  auto consider = [&](const ComplexVector& c, const ComplexVector& h) {
    const double v = toeplitz_form(seq, c, h);
    if (v < best) {
      best = v;
      best_c = c;
      best_h = h;
    }
  };
  for (std::size_t s = 0; s < starts.size(); ++s) {
    consider(starts[s].first, starts[s].second);
    // refinement is the expensive part; only the structured start and a handful of random ones get it
    if (s < 8) {
      auto [c, h] = detail::refine_product(seq, starts[s].first, starts[s].second);
      consider(c, h);
    }
  }

  report.worst_margin = best;
  report.certificate = "product-sampling";
  Witness w = Witness::at(seq.order());
  w.vector = best_h;
  w.coefficients = best_c;
  w.value = best;
  report.witness = std::move(w);
  report.satisfied = best < -10.0 * tier1.tau ? Verdict::No : Verdict::Borderline;
  return report;
}

// ---------------------------------------------------------------------------
// Szego and Poisson kernels
// ---------------------------------------------------------------------------

/// sum_{n=0}^{K} z^n A_n*.
inline ComplexMatrix szego_partial_sum(const MomentSequence& seq, Complex z, std::size_t k) {
  if (std::abs(z) >= 1.0) fail(ErrorCode::DiskViolation, "|z| = " + std::to_string(std::abs(z)) + " is not < 1");
  if (k > seq.order()) fail(ErrorCode::InsufficientData, "partial sum to " + std::to_string(k) + " needs more terms");
  ComplexMatrix acc = zeros(seq.dim(), seq.dim());
  Complex zn = 1.0;
  for (std::size_t n = 0; n <= k; ++n) {
    acc += zn * seq[n].adjoint();
    zn *= z;
  }
  return acc;
}

inline ComplexMatrix poisson_partial(const MomentSequence& seq, Complex z) {
  const ComplexMatrix s = szego_partial_sum(seq, z, seq.order());
  return s + s.adjoint() - identity(seq.dim());
}

/// Certified kernel positivity on the grid z = r e^{i theta}. With
/// t = r^{N+1} / (1 - r) bounding the truncated tail, a point is YES when
/// lambda_min >= 2t - tau and NO when lambda_min < -2t - 10 tau.
inline CriterionReport poisson_check(const MomentSequence& seq, const std::vector<double>& radii,
                                     std::size_t angles_per_radius) {
  if (!seq.contractive())
    fail(ErrorCode::TailBoundUnavailable, "the Poisson tail bound needs ||A_n|| <= 1 for every term");
  if (angles_per_radius == 0) fail(ErrorCode::InvalidArgument, "need at least one angle per radius");
  CriterionReport report("poisson", seq.order());
  report.certificate = "tail-bound";
  for (double r : radii) {
    if (!(r >= 0.0 && r < 1.0)) fail(ErrorCode::DiskViolation, "radius " + std::to_string(r) + " is outside [0, 1)");
    const double tail = std::pow(r, static_cast<double>(seq.order() + 1)) / (1.0 - r);
    for (std::size_t j = 0; j < angles_per_radius; ++j) {
      const double theta = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(angles_per_radius);
      const Complex z = std::polar(r, theta);
      const ComplexMatrix p = poisson_partial(seq, z);
      const double t = tau(seq.tolerance(), p);
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(p));
      const double lmin = es.eigenvalues()(0);
      Verdict v = Verdict::Borderline;
      if (lmin >= 2.0 * tail - t)
        v = Verdict::Yes;
      else if (lmin < -2.0 * tail - 10.0 * t)
        v = Verdict::No;
      const double margin = v == Verdict::No ? lmin + 2.0 * tail : lmin - 2.0 * tail;
      report.worst_margin = std::min(report.worst_margin, margin);
      const bool keep = (v == Verdict::No && report.satisfied != Verdict::No) ||
                        (v == Verdict::Borderline && report.satisfied == Verdict::Yes);
      if (keep) {
        Witness w = Witness::at(seq.order());
        w.vector = es.eigenvectors().col(0);
        w.point = z;
        w.value = lmin;
        report.witness = std::move(w);
      }
      report.satisfied = combine(report.satisfied, v);
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Jacobi parameters
// ---------------------------------------------------------------------------

struct JacobiParameters {
  std::vector<double> a;
  std::vector<double> b;
  /// Set when the Gram matrix lost rank before `levels`: the measure has a.size() atoms.
  bool rank_terminated = false;
};

/// Cholesky factorization R^T R of the Gram matrix <x^i, x^j> = m_{i+j};
/// a_j = r_{j,j+1}/r_{jj} - r_{j-1,j}/r_{j-1,j-1} and b_j = r_{j+1,j+1}/r_{jj}.
inline JacobiParameters jacobi_parameters(const MomentSequence& seq, std::size_t levels) {
  if (seq.dim() != 1) fail(ErrorCode::NotScalar, "Jacobi parameters need a scalar sequence");
  detail::require_hermitian(seq, "jacobi_parameters");
  if (levels == 0) fail(ErrorCode::InvalidArgument, "levels must be positive");
  if (2 * levels > seq.order())
    fail(ErrorCode::InsufficientData, std::to_string(levels) + " levels need moments up to m_" + std::to_string(2 * levels));

  const std::size_t cols = levels + 1;
  Eigen::MatrixXd g(idx(cols), idx(cols));
  for (std::size_t i = 0; i < cols; ++i)
    for (std::size_t j = 0; j < cols; ++j) g(idx(i), idx(j)) = seq[i + j](0, 0).real();
  const double t = seq.tolerance().tau(g.norm());

  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(idx(levels), idx(cols));
  std::size_t rows = 0;
  bool terminated = false;
  for (std::size_t j = 0; j < levels; ++j) {
    const Index jj = idx(j);
    double pivot2 = g(jj, jj);
    for (Index k = 0; k < jj; ++k) pivot2 -= r(k, jj) * r(k, jj);
    if (pivot2 < -10.0 * t)
      fail(ErrorCode::IndefiniteHankel, "Gram pivot " + std::to_string(j) + " is " + std::to_string(pivot2), j);
    if (pivot2 <= t) {
      terminated = true;
      break;
    }
    r(jj, jj) = std::sqrt(pivot2);
    for (Index c = jj + 1; c < idx(cols); ++c) {
      double v = g(jj, c);
      for (Index k = 0; k < jj; ++k) v -= r(k, jj) * r(k, c);
      r(jj, c) = v / r(jj, jj);
    }
    ++rows;
  }

  JacobiParameters out;
  out.rank_terminated = terminated;
  for (std::size_t j = 0; j < rows; ++j) {
    const Index jj = idx(j);
    double a = r(jj, jj + 1) / r(jj, jj);
    if (j > 0) a -= r(jj - 1, jj) / r(jj - 1, jj - 1);
    out.a.push_back(a);
    if (j + 1 < rows) out.b.push_back(r(jj + 1, jj + 1) / r(jj, jj));
  }
  return out;
}

inline ComplexMatrix jacobi_matrix(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.size() + 1 != a.size())
    fail(ErrorCode::ShapeMismatch, "need len(b) = len(a) - 1, got " + std::to_string(a.size()) + " and " +
                                       std::to_string(b.size()));
  for (double x : b)
    if (x < 0.0) fail(ErrorCode::InvalidArgument, "off-diagonal Jacobi entries must be nonnegative");
  const Index n = idx(a.size());
  ComplexMatrix j = ComplexMatrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) j(i, i) = a[static_cast<std::size_t>(i)];
  for (Index i = 0; i + 1 < n; ++i) j(i, i + 1) = j(i + 1, i) = b[static_cast<std::size_t>(i)];
  return j;
}

}  // namespace opdil
