// Acceptance run: one PASS/FAIL line per criterion, supporting detail
// indented underneath. Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "opdil/opdil.hpp"
#include "support/oracles.hpp"

using namespace opdil;

namespace {

struct Result {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    notes.push_back(std::string(ok ? "ok    " : "FAILED") + "  " + what);
  }
  void info(const std::string& what) { notes.push_back("info    " + what); }
};

std::string fmt(const char* format, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

MomentSequence from_powers(const ComplexMatrix& t, std::size_t n) {
  const auto p = oracle::powers(t, n);
  return MomentSequence(std::vector<ComplexMatrix>(p.begin(), p.end()));
}

ComplexMatrix path_dilation(const ComplexMatrix& t) {
  const Index d = t.rows();
  ComplexMatrix v = ComplexMatrix::Zero(3 * d, 3 * d);
  v.block(0, d, d, d) = t.adjoint();
  v.block(d, 0, d, d) = t;
  v.block(d, 2 * d, d, d) = t.adjoint();
  v.block(2 * d, d, d, d) = t;
  return v;
}

// A_n = 2^{(n-2)/2} T*^{n/2} T^{n/2} for even n >= 2, zero for odd n.
MomentSequence even_odd_sequence(const ComplexMatrix& t, std::size_t n_max) {
  const Index d = t.rows();
  std::vector<ComplexMatrix> terms{ComplexMatrix::Identity(d, d)};
  for (std::size_t n = 1; n <= n_max; ++n) {
    if (n % 2 == 1) {
      terms.push_back(ComplexMatrix::Zero(d, d));
      continue;
    }
    ComplexMatrix tp = ComplexMatrix::Identity(d, d);
    for (std::size_t k = 0; k < n / 2; ++k) tp = tp * t;
    terms.push_back(std::pow(2.0, (static_cast<double>(n) - 2.0) / 2.0) * tp.adjoint() * tp);
  }
  return MomentSequence(std::move(terms));
}

std::vector<oracle::CommutingPair> instances(std::size_t count, std::uint64_t seed) {
  oracle::Rng rng(seed);
  std::vector<oracle::CommutingPair> out;
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(oracle::commuting_pair(1 + static_cast<Index>(i % 4), rng, i % 3 == 0));
  return out;
}

// ---------------------------------------------------------------------------

Result path_example() {
  Result r;
  const ComplexMatrix one = scalar_matrix(1.0);
  const auto seq = even_odd_sequence(one, 4);
  Stopwatch sw;
  const auto res = verify_dilation(path_dilation(one), seq, 4, DilationKind::SelfAdjoint);
  const double elapsed = sw.seconds();
  r.require(res.max_residual() == 0.0, "T = [1]: residuals exactly 0 for n <= 4");
  r.require(elapsed < 1e-3, fmt("T = [1]: runtime %.2e s < 1 ms", elapsed));

  ComplexMatrix nil = zeros(2, 2);
  nil(0, 1) = 1.0;
  const auto q = verify_dilation(path_dilation(nil), even_odd_sequence(nil, 4), 4, DilationKind::SelfAdjoint);
  std::string row;
  for (double x : q.residuals) row += fmt(" %.3g", x);
  r.require(q.max_residual() < 1e-12, "T = [[0,1],[0,0]]: residuals < 1e-12 (got" + row + ")");

  ComplexMatrix normal = zeros(2, 2);
  normal(0, 0) = 1.0;
  normal(1, 1) = -1.0;
  const auto n = verify_dilation(path_dilation(normal), even_odd_sequence(normal, 4), 4, DilationKind::SelfAdjoint);
  r.info(fmt("normal T = diag(1, -1): max residual %.3g", n.max_residual()));
  return r;
}

Result core_identities_check() {
  Result r;
  Stopwatch sw;
  double worst_gram = 0.0;
  double worst_cogram = 0.0;
  for (const auto& pair : instances(50, 1001)) {
    const auto inst = ca_build(pair.a, pair.c);
    const auto core = core_identities(ca_core_M(inst), inst.dim());
    worst_gram = std::max(worst_gram, core.gram_defect);
    worst_cogram = std::max(worst_cogram, core.cogram_defect);
  }
  r.require(worst_gram < 1e-9, fmt("50 instances: max ||M*M - diag(I,I,I,0)|| = %.3g", worst_gram));
  r.require(worst_cogram < 1e-9, fmt("50 instances: max ||MM* - diag(0,I,I,I)|| = %.3g", worst_cogram));

  const ComplexMatrix m = ca_core_M(ca_build(scalar_matrix(2.0), scalar_matrix(1.0 / std::sqrt(2.0))));
  const double s = 1.0 / std::sqrt(2.0);
  const double h = 0.5;
  const double expected[4][4] = {{0, 0, 0, 0}, {-s, h, h, 0}, {s, h, h, 0}, {0, s, -s, 0}};
  double entry_gap = 0.0;
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 4; ++j) entry_gap = std::max(entry_gap, std::abs(m(i, j) - expected[i][j]));
  r.require(entry_gap < 1e-12, fmt("scalar instance A = 2, C = 1/sqrt2: entry error %.3g", entry_gap));
  const double elapsed = sw.seconds();
  r.require(elapsed < 1.0, fmt("runtime %.3f s < 1 s", elapsed));
  return r;
}

Result moment_chain() {
  Result r;
  double worst[3] = {0.0, 0.0, 0.0};
  for (const auto& pair : instances(50, 1001)) {
    const auto inst = ca_build(pair.a, pair.c);
    const Index d = static_cast<Index>(inst.dim());
    const auto seq = ca_moments(inst, 6);
    const ComplexMatrix ops[3] = {partial_isometry_R(inst, 6).matrix, ca_isometric_V(inst, 6).matrix,
                                  ca_unitary_U(inst, 6, 6).matrix};
    for (int k = 0; k < 3; ++k)
      for (std::size_t n = 0; n <= 6; ++n)
        worst[k] = std::max(worst[k], oracle::norm2(oracle::corner_power(ops[k], d, n) - seq[n]));
  }
  r.require(worst[0] < 1e-8, fmt("R: max corner residual %.3g for n <= 6", worst[0]));
  r.require(worst[1] < 1e-8, fmt("V (levels 6): max corner residual %.3g", worst[1]));
  r.require(worst[2] < 1e-8, fmt("U (fwd 6): max corner residual %.3g", worst[2]));
  return r;
}

Result cross_constructor() {
  Result r;
  oracle::Rng rng(1004);
  double worst = 0.0;
  double worst_jacobi = 0.0;
  std::size_t min_order = 1000;
  for (int trial = 0; trial < 25; ++trial) {
    const auto mu = oracle::discrete_measure(rng, 1 + static_cast<std::size_t>(trial % 4), -1.0, 1.0);
    const auto seq = MomentSequence::scalar(mu.moments(9));
    const auto gns = gns_selfadjoint(seq, 4);
    const auto tri = tridiagonal_recursive(seq, 4).second;
    const std::size_t top = std::min(gns.guaranteed_orders, tri.guaranteed_orders);
    min_order = std::min(min_order, top);
    worst = std::max(worst, equivalence_by_moments(gns.matrix, tri.matrix, 1, top));

    const auto p = jacobi_parameters(seq, 4);
    const ComplexMatrix j = jacobi_matrix(p.a, p.b);
    const std::size_t jtop = p.rank_terminated ? seq.order() : 2 * p.a.size() - 1;
    for (std::size_t n = 0; n <= jtop; ++n)
      worst_jacobi = std::max(worst_jacobi, std::abs(oracle::corner_power(j, 1, n)(0, 0) - seq[n](0, 0)));
  }
  r.require(worst < 1e-8, fmt("tridiagonal vs gns: max moment gap %.3g", worst) +
                              " (certified orders >= " + std::to_string(min_order) + ")");
  r.require(worst_jacobi < 1e-8, fmt("Jacobi round trip: max moment error %.3g", worst_jacobi));
  return r;
}

Result criterion_equivalences() {
  Result r;
  oracle::Rng rng(1005);
  std::size_t toeplitz_yes = 0;
  std::size_t poisson_yes = 0;
  double worst_iso = 0.0;
  for (int trial = 0; trial < 25; ++trial) {
    const Index d = 1 + trial % 4;
    const ComplexMatrix t = oracle::contraction(d, rng, 0.9);
    const auto seq = from_powers(t, 80);
    const auto toe = toeplitz_positivity_check(seq);
    if (toe.yes() && toe.certificate == "block-Toeplitz") ++toeplitz_yes;
    if (poisson_check(seq, {0.3, 0.6, 0.9}, 64).yes()) ++poisson_yes;
    const auto iso = isometric_recursive(from_powers(t, 8), 7);
    const auto sch = schaffer_isometry(t, 8);
    worst_iso = std::max(worst_iso, equivalence_by_moments(iso.matrix, sch.matrix, static_cast<std::size_t>(d), 8));
  }
  r.require(toeplitz_yes == 25, "block Toeplitz YES on " + std::to_string(toeplitz_yes) + "/25 contractions");
  r.require(poisson_yes == 25, "Poisson YES on " + std::to_string(poisson_yes) + "/25 contractions");
  r.require(worst_iso < 1e-8, fmt("isometric recursion vs Schaffer: max gap %.3g", worst_iso));

  std::size_t refuted = 0;
  std::size_t reproduced = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const Index d = 1 + trial % 4;
    const ComplexMatrix t = oracle::contraction(d, rng, oracle::uniform(rng, 1.1, 2.0));
    const auto seq = from_powers(t, 12);
    const auto toe = toeplitz_positivity_check(seq);
    if (!toe.no() || !toe.witness) continue;
    ++refuted;
    const auto& w = *toe.witness;
    const auto p = oracle::powers(t, w.order);
    const double value = oracle::toeplitz_value(p, w.coefficients, w.vector);
    if (value < 0.0 && std::abs(value - w.value) <= 1e-8 * std::max(1.0, std::abs(w.value))) ++reproduced;
  }
  r.require(refuted == 10 && reproduced == 10, "||T|| > 1: " + std::to_string(refuted) + "/10 refuted, " +
                                                   std::to_string(reproduced) + " witnesses reproduced");
  return r;
}

Result berger_stampfli() {
  Result r;
  Stopwatch sw;
  ComplexMatrix t2 = zeros(2, 2);
  t2(0, 1) = 2.0;
  const auto in = berger_stampfli_check(t2, 1024);
  r.require(std::abs(in.w - 1.0) <= 1e-4, fmt("[[0,2],[0,0]]: w = %.6f", in.w));
  r.require(in.in_c2 && in.kernel.yes(), "[[0,2],[0,0]]: kernel criterion YES at every grid point");

  ComplexMatrix t3 = zeros(2, 2);
  t3(0, 1) = 3.0;
  const auto out = berger_stampfli_check(t3, 1024);
  r.require(std::abs(out.w - 1.5) <= 1e-4, fmt("[[0,3],[0,0]]: w = %.6f", out.w));
  bool witnessed = false;
  if (out.kernel.no() && out.kernel.witness && out.kernel.witness->point) {
    const ComplexVector& h = out.kernel.witness->vector;
    const ComplexMatrix w = kernel_operator(2.0 * identity(2), t3, *out.kernel.witness->point);
    witnessed = h.dot(w * h).real() < 0.0;
  }
  r.require(!out.in_c2 && witnessed, "[[0,3],[0,0]]: kernel criterion NO with a negative witness");
  const double elapsed = sw.seconds();
  r.require(elapsed < 1.0, fmt("runtime %.3f s < 1 s", elapsed));
  return r;
}

Result monotonicity() {
  Result r;
  oracle::Rng rng(1007);
  std::size_t violations = 0;
  std::size_t congruence = 0;
  for (int trial = 0; trial < 25; ++trial) {
    const Index d = 1 + trial % 3;
    const ComplexMatrix a1 = oracle::positive(d, rng, 0.2);
    const ComplexMatrix a2 = a1 + oracle::positive(d, rng, 0.0);
    const ComplexMatrix t = oracle::contraction(d, rng, oracle::uniform(rng, 0.3, 1.5));
    const auto m = istratescu_monotonicity_test(a1, a2, t, KernelGrid{}, 100, 1007 + static_cast<std::uint64_t>(trial));
    violations += m.violations;
    congruence += m.congruence_failures;
  }
  r.require(violations == 0, std::to_string(violations) + " grid points with A1 YES and A2 NO");
  r.require(congruence == 0, std::to_string(congruence) + " sampled z with W_A2 - W_A1 not PSD");
  return r;
}

Result structure_invariants() {
  Result r;
  const Tolerance tol;
  oracle::Rng rng(1008);
  double band = 0.0;
  double herm = 0.0;
  double orth = 0.0;
  double krylov = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Index d = 1 + trial % 3;
    ComplexMatrix h = oracle::hermitian(4 * d, rng);
    h /= oracle::norm2(h);
    const ComplexMatrix w = oracle::unitary(4 * d, rng).leftCols(d);
    std::vector<ComplexMatrix> terms{ComplexMatrix::Identity(d, d)};
    ComplexMatrix p = h;
    for (int n = 1; n <= 6; ++n, p = p * h) terms.push_back(w.adjoint() * p * w);
    const auto [blocks, tri] = tridiagonal_recursive(MomentSequence(std::move(terms)), 3);
    const std::vector<std::size_t> dims(blocks.diag.size(), static_cast<std::size_t>(d));
    band = std::max(band, block_band_defect(tri.matrix, dims, 1, 1));
    herm = std::max(herm, hermiticity_defect(tri.matrix) / tau(tol, tri.matrix));
    krylov = std::max(krylov, minimal_reduce(tri.matrix, static_cast<std::size_t>(d), 4).band_defect.value_or(1.0));

    const auto mu = oracle::discrete_measure(rng, 4, -1.0, 1.0);
    const auto gns = gns_selfadjoint(MomentSequence::scalar(mu.moments(9)), 4);
    krylov = std::max(krylov, minimal_reduce(gns.matrix, 1, 5).band_defect.value_or(1.0));

    const auto iso = isometric_recursive(from_powers(oracle::contraction(d, rng, 0.85), 7), 6);
    const ComplexMatrix g = iso.matrix.adjoint() * iso.matrix;
    const Index interior = iso.matrix.cols() - d;
    orth = std::max(orth, oracle::norm2(g.topLeftCorner(interior, interior) - ComplexMatrix::Identity(interior, interior)));
  }
  r.require(band == 0.0, fmt("tridiagonal: entries outside |i - j| <= 1 blocks, max %.3g", band));
  r.require(herm <= 100.0, fmt("tridiagonal: Hermiticity defect %.3g tau", herm));
  r.require(orth < 100.0 * tol.tau(1.0), fmt("isometric: interior column orthonormality defect %.3g", orth));
  r.require(krylov < 1e-9, fmt("Krylov compression of self-adjoint dilations: band defect %.3g", krylov));
  return r;
}

Result minimal_subspace() {
  Result r;
  oracle::Rng rng(1009);
  std::size_t zero_p = 0;
  std::size_t nonzero_p = 0;
  double worst_h1 = 0.0;
  double worst_h2_zero = 0.0;
  double worst_h2_nonzero = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto pair = oracle::commuting_pair(1 + trial % 3, rng, trial % 2 == 0);
    const auto report = minimal_subspace_check(ca_build(pair.a, pair.c), 2);
    worst_h1 = std::max(worst_h1, report.gaps[0]);
    if (report.kernel_rank == 0) {
      ++zero_p;
      worst_h2_zero = std::max(worst_h2_zero, report.gaps[1]);
    } else {
      ++nonzero_p;
      worst_h2_nonzero = std::max(worst_h2_nonzero, report.gaps[1]);
    }
  }
  r.info("instances with P = 0: " + std::to_string(zero_p) + ", with P != 0: " + std::to_string(nonzero_p));
  r.require(zero_p > 0 && nonzero_p > 0, "both regimes covered");
  r.require(worst_h1 < 1e-8, fmt("H_1: max principal-angle gap %.3g", worst_h1));
  r.require(worst_h2_nonzero < 1e-8, fmt("H_2, P != 0: max gap %.3g", worst_h2_nonzero));
  r.require(worst_h2_zero < 1e-8, fmt("H_2, P = 0: max gap %.3g", worst_h2_zero));
  return r;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Result()>>> criteria = {
      {"1 path-operator example", path_example},
      {"2 core unitary identities", core_identities_check},
      {"3 moment consistency chain", moment_chain},
      {"4 cross-constructor oracle", cross_constructor},
      {"5 criterion equivalences", criterion_equivalences},
      {"6 Berger-Stampfli consistency", berger_stampfli},
      {"7 Istratescu monotonicity", monotonicity},
      {"8 structure invariants", structure_invariants},
      {"9 minimal subspace characterization", minimal_subspace},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Result res;
    try {
      res = run();
    } catch (const std::exception& e) {
      res.require(false, std::string("exception: ") + e.what());
    }
    std::printf("%s  criterion %s\n", res.pass ? "PASS" : "FAIL", name.c_str());
    for (const auto& note : res.notes) std::printf("        %s\n", note.c_str());
    if (!res.pass) ++failures;
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
