#include <gtest/gtest.h>

#include <cmath>

#include "opdil/ca_class.hpp"
#include "support/oracles.hpp"

using namespace opdil;

namespace {

const double kRootHalf = 1.0 / std::sqrt(2.0);

CaInstance scalar_instance() { return ca_build(scalar_matrix(2.0), scalar_matrix(kRootHalf)); }

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no exception";
  return ErrorCode::ParseError;
}

double re(const ComplexMatrix& m, Index i = 0, Index j = 0) { return m(i, j).real(); }

ComplexMatrix w_oracle(const ComplexMatrix& a, const ComplexMatrix& t, Complex z) {
  const ComplexMatrix id = ComplexMatrix::Identity(t.rows(), t.cols());
  const ComplexMatrix x = id - z * t;
  return x.adjoint() * (a - 2.0 * id) * x + x + x.adjoint();
}

std::vector<oracle::CommutingPair> random_pairs(std::size_t count, std::uint64_t seed) {
  oracle::Rng rng(seed);
  std::vector<oracle::CommutingPair> out;
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(oracle::commuting_pair(1 + static_cast<Index>(i % 4), rng, i % 2 == 0));
  return out;
}

}  // namespace

TEST(CaBuild, ScalarInstance) {
  const auto inst = scalar_instance();
  EXPECT_NEAR(re(inst.B), 1.0, 1e-14);
  EXPECT_NEAR(re(inst.B_star), 1.0, 1e-14);
  EXPECT_NEAR(re(inst.D), kRootHalf, 1e-14);
  EXPECT_NEAR(re(inst.D_star), kRootHalf, 1e-14);
  EXPECT_NEAR(re(inst.T), 1.0, 1e-14);
}

TEST(CaBuild, UnitWeightGivesBackC) {
  oracle::Rng rng(51);
  const ComplexMatrix c = oracle::contraction(3, rng, 0.8);
  const auto inst = ca_build(identity(3), c);
  EXPECT_LT(oracle::norm2(inst.T - c), 1e-12);
}

TEST(CaBuild, UnitaryCDegenerates) {
  const auto inst = ca_build(2.0 * identity(2), identity(2));
  EXPECT_LT(oracle::norm2(inst.D), 1e-7);
  EXPECT_LT(oracle::norm2(inst.T), 1e-7);
}

TEST(CaBuild, Errors) {
  ComplexMatrix a = zeros(2, 2);
  a(0, 0) = 1.0;
  a(1, 1) = 2.0;
  ComplexMatrix nil = zeros(2, 2);
  nil(0, 1) = 0.5;
  EXPECT_EQ(code_of([&] { ca_build(a, nil); }), ErrorCode::NotCommuting);
  ComplexMatrix singular = zeros(2, 2);
  singular(0, 0) = 1.0;
  EXPECT_EQ(code_of([&] { ca_build(singular, 0.5 * identity(2)); }), ErrorCode::NotInvertible);
  EXPECT_EQ(code_of([] { ca_build(scalar_matrix(1.0), scalar_matrix(1.5)); }), ErrorCode::NotContraction);
  // 1 + a(a - 2)c^2 = 0 for a = 1, c = 1: B does not exist
  EXPECT_EQ(code_of([] { ca_build(scalar_matrix(1.0), scalar_matrix(1.0)); }), ErrorCode::NotInvertible);
  EXPECT_EQ(code_of([] { ca_build(identity(2), scalar_matrix(0.5)); }), ErrorCode::ShapeMismatch);
}

TEST(CaBuild, IdentitiesOnRandomPairs) {
  const Tolerance tol;
  for (const auto& pair : random_pairs(20, 52)) {
    const auto inst = ca_build(pair.a, pair.c);
    for (const auto& [name, value] : inst.identity_defects) {
      const double scale = std::max(1.0, std::pow(oracle::norm2(pair.a), 2) * std::pow(oracle::norm2(inst.B), 2));
      EXPECT_LT(value, 100.0 * tol.tau(scale)) << name;
    }
  }
}

TEST(CaMoments, Examples) {
  const auto seq = ca_moments(scalar_instance(), 6);
  EXPECT_EQ(re(seq[0]), 1.0);
  for (std::size_t n = 1; n <= 6; ++n) EXPECT_NEAR(re(seq[n]), 0.5, 1e-14);

  oracle::Rng rng(53);
  const ComplexMatrix c = oracle::contraction(2, rng, 0.7);
  const auto plain = ca_moments(ca_build(identity(2), c), 5);
  const auto p = oracle::powers(c, 5);
  for (std::size_t n = 0; n <= 5; ++n) EXPECT_LT(oracle::norm2(plain[n] - p[n]), 1e-12);

  const auto zero = ca_moments(ca_build(3.0 * identity(2), zeros(2, 2)), 4);
  for (std::size_t n = 1; n <= 4; ++n) EXPECT_EQ(oracle::norm2(zero[n]), 0.0);

  EXPECT_EQ(code_of([] { ca_moments(scalar_instance(), 0); }), ErrorCode::InvalidArgument);
}

TEST(CaMoments, BothFormsAgree) {
  for (const auto& pair : random_pairs(20, 54)) {
    const auto inst = ca_build(pair.a, pair.c);
    const auto forms = ca_moment_forms(inst, 6);
    EXPECT_LT(forms.cross_residual, 1e-10);
  }
}

TEST(Zeta, Examples) {
  const auto inst = scalar_instance();
  const auto r = zeta_check(inst.A, inst.T, 3);
  EXPECT_TRUE(r.yes());
  EXPECT_EQ(r.certificate, "block-Toeplitz");
  EXPECT_TRUE(zeta_check(scalar_matrix(1.0), scalar_matrix(0.5), 3).yes());

  const auto bad = zeta_check(scalar_matrix(1.0), scalar_matrix(1.5), 1);
  ASSERT_TRUE(bad.no());
  ASSERT_TRUE(bad.witness.has_value());
  const auto& c = bad.witness->coefficients;
  ASSERT_EQ(c.size(), 2);
  EXPECT_LT(std::abs(c(0) + c(1)), 1e-12 * std::abs(c(0)) + 1e-12);
  EXPECT_NEAR(bad.witness->value, -0.5, 1e-12);
}

TEST(Kernel, Examples) {
  EXPECT_TRUE(kernel_check(scalar_matrix(2.0), scalar_matrix(1.0)).yes());
  EXPECT_TRUE(kernel_check(identity(1), scalar_matrix(0.5)).yes());

  ComplexMatrix t = zeros(2, 2);
  t(0, 1) = 3.0;
  const auto r = kernel_check(2.0 * identity(2), t);
  ASSERT_TRUE(r.no());
  ASSERT_TRUE(r.witness.has_value() && r.witness->point.has_value());
  const ComplexVector& h = r.witness->vector;
  const double value = h.dot(w_oracle(2.0 * identity(2), t, *r.witness->point) * h).real();
  EXPECT_LT(value, -1e-6);
}

TEST(Kernel, UnitWeightReducesToDefect) {
  oracle::Rng rng(55);
  const ComplexMatrix t = oracle::contraction(3, rng, 0.5);
  for (Complex z : {Complex(0.3, 0.1), Complex(-0.5, 0.6), Complex(0.0, -0.9)}) {
    const ComplexMatrix expected = identity(3) - std::norm(z) * t.adjoint() * t;
    EXPECT_LT(oracle::norm2(kernel_operator(identity(3), t, z) - expected), 1e-13);
  }
}

TEST(Kernel, Errors) {
  ComplexMatrix a = identity(2);
  a(0, 1) = 1.0;
  EXPECT_EQ(code_of([&] { kernel_check(a, identity(2)); }), ErrorCode::NotHermitian);
  KernelGrid grid;
  grid.radii = {0.5, 1.0};
  EXPECT_EQ(code_of([&] { kernel_check(identity(1), scalar_matrix(0.5), grid); }), ErrorCode::DiskViolation);
}

TEST(PartialIsometry, ScalarInstance) {
  const auto r = partial_isometry_R(scalar_instance());
  ASSERT_EQ(r.matrix.rows(), 2);
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j) EXPECT_NEAR(std::abs(r.matrix(i, j) - 0.5), 0.0, 1e-14);
  const ComplexMatrix rr = r.matrix.adjoint() * r.matrix;
  EXPECT_LT(oracle::norm2(rr - r.matrix), 1e-14);
  EXPECT_NEAR(re(oracle::corner_power(r.matrix, 1, 2)), 0.5, 1e-14);
  EXPECT_TRUE(r.verified);
}

TEST(PartialIsometry, ZeroC) {
  // B = D = D_* = I, so R = [[0, I], [0, 0]]: nilpotent, with vanishing corner moments
  const auto r = partial_isometry_R(ca_build(2.0 * identity(2), zeros(2, 2)));
  ComplexMatrix expected = zeros(4, 4);
  expected.topRightCorner(2, 2) = identity(2);
  EXPECT_EQ(oracle::norm2(r.matrix - expected), 0.0);
  for (std::size_t n = 1; n <= 4; ++n) EXPECT_EQ(oracle::norm2(oracle::corner_power(r.matrix, 2, n)), 0.0);
  EXPECT_EQ(r.certificates.at("partial_isometry"), 0.0);
  EXPECT_TRUE(r.verified);
}

TEST(PartialIsometry, CertificatesOnRandomPairs) {
  for (const auto& pair : random_pairs(20, 56)) {
    const auto r = partial_isometry_R(ca_build(pair.a, pair.c));
    EXPECT_LT(r.certificates.at("gram_identity"), 1e-10);
    EXPECT_LT(r.certificates.at("defect_identity"), 1e-10);
    EXPECT_LT(r.certificates.at("partial_isometry"), 1e-10);
    const ComplexMatrix rr = r.matrix.adjoint() * r.matrix;
    EXPECT_LT(oracle::norm2(rr * rr - rr), 1e-10);
  }
}

TEST(IsometricV, ScalarInstance) {
  const auto v = ca_isometric_V(scalar_instance(), 4);
  EXPECT_NEAR(re(v.matrix, 0, 0), 0.5, 1e-14);
  EXPECT_NEAR(re(v.matrix, 1, 0), 0.5, 1e-14);
  EXPECT_NEAR(re(v.matrix, 2, 0), kRootHalf, 1e-14);
  for (Index i = 3; i < v.matrix.rows(); ++i) EXPECT_EQ(std::abs(v.matrix(i, 0)), 0.0);
  EXPECT_NEAR(v.matrix.col(0).squaredNorm(), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(v.matrix.col(0).dot(v.matrix.col(1))), 0.0, 1e-14);
  EXPECT_TRUE(v.verified);
}

TEST(IsometricV, ZeroCAndUnitWeight) {
  const auto zero = ca_isometric_V(ca_build(2.0 * identity(1), zeros(1, 1)), 4);
  for (std::size_t n = 1; n <= 5; ++n) EXPECT_EQ(std::abs(oracle::corner_power(zero.matrix, 1, n)(0, 0)), 0.0);

  oracle::Rng rng(57);
  const ComplexMatrix c = oracle::contraction(2, rng, 0.8);
  const auto v = ca_isometric_V(ca_build(identity(2), c), 6);
  const auto s = schaffer_isometry(c, 7);
  EXPECT_LT(equivalence_by_moments(v.matrix, s.matrix, 2, 7), 1e-8);
}

TEST(UnitaryU, CoreRowsOfScalarInstance) {
  const ComplexMatrix m = ca_core_M(scalar_instance());
  const double h = 0.5;
  const double s = kRootHalf;
  const double expected[4][4] = {{0, 0, 0, 0}, {-s, h, h, 0}, {s, h, h, 0}, {0, s, -s, 0}};
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 4; ++j) EXPECT_NEAR(std::abs(m(i, j) - expected[i][j]), 0.0, 1e-12) << i << "," << j;
  const auto core = core_identities(m, 1);
  EXPECT_LT(core.gram_defect, 1e-14);
  EXPECT_LT(core.cogram_defect, 1e-14);
}

TEST(UnitaryU, ZeroCCore) {
  const ComplexMatrix m = ca_core_M(ca_build(2.0 * identity(1), zeros(1, 1)));
  ComplexMatrix expected = zeros(4, 4);
  expected(1, 2) = 1.0;
  expected(2, 0) = 1.0;
  expected(3, 1) = 1.0;
  EXPECT_EQ(oracle::norm2(m - expected), 0.0);
  const auto core = core_identities(m, 1);
  EXPECT_EQ(core.gram_defect, 0.0);
  EXPECT_EQ(core.cogram_defect, 0.0);
}

TEST(UnitaryU, UnitWeightReproducesPowers) {
  oracle::Rng rng(58);
  const ComplexMatrix c = oracle::contraction(2, rng, 0.8);
  const auto u = ca_unitary_U(ca_build(identity(2), c), 5, 5);
  const auto p = oracle::powers(c, 5);
  for (std::size_t n = 0; n <= 5; ++n) {
    EXPECT_LT(oracle::norm2(oracle::corner_power(u.matrix, 2, n) - p[n]), 1e-12) << n;
    EXPECT_LT(oracle::norm2(oracle::corner_power(u.matrix.adjoint(), 2, n) - p[n].adjoint()), 1e-12) << n;
  }
  EXPECT_TRUE(u.verified);
  EXPECT_LT(u.certificates.at("adjoint_residual"), 1e-12);
}

TEST(MinimalSubspace, ScalarInstance) {
  const auto r = minimal_subspace_check(scalar_instance(), 3);
  EXPECT_EQ(r.kernel_rank, 0u);
  ASSERT_EQ(r.gaps.size(), 3u);
  EXPECT_LT(r.gaps[0], 1e-8);
  // the closed form for H_2 misses the Krylov level when P = 0
  EXPECT_NEAR(r.gaps[1], 0.5, 1e-10);
}

TEST(MinimalSubspace, UnitWeightAndZeroC) {
  oracle::Rng rng(59);
  for (int trial = 0; trial < 5; ++trial) {
    const auto r = minimal_subspace_check(ca_build(identity(2), oracle::contraction(2, rng, 0.8)), 3);
    EXPECT_EQ(r.kernel_rank, 2u);
    EXPECT_LT(r.max_gap, 1e-8) << trial;
  }
  const auto zero = minimal_subspace_check(ca_build(2.0 * identity(2), zeros(2, 2)), 3);
  EXPECT_LT(zero.max_gap, 1e-12);
}

TEST(CRho, Examples) {
  const auto one = c_rho_build(1.0, scalar_matrix(0.5));
  EXPECT_NEAR(re(one.T), 0.5, 1e-14);
  const auto seq = ca_moments(one, 5);
  for (std::size_t n = 1; n <= 5; ++n) EXPECT_NEAR(re(seq[n]), std::pow(0.5, n), 1e-14);

  const auto two = c_rho_build(2.0, scalar_matrix(kRootHalf));
  EXPECT_NEAR(re(two.T), 1.0, 1e-14);
  EXPECT_NEAR(re(ca_moments(two, 3)[3]), 0.5, 1e-14);

  EXPECT_EQ(oracle::norm2(c_rho_build(2.0, zeros(1, 1)).T), 0.0);
  EXPECT_EQ(code_of([] { c_rho_build(0.0, scalar_matrix(0.5)); }), ErrorCode::InvalidArgument);
}

TEST(CRho, DursztFormOnMatrices) {
  oracle::Rng rng(60);
  for (double rho : {0.5, 1.5, 3.0}) {
    const auto inst = c_rho_build(rho, oracle::contraction(3, rng, 0.6));
    EXPECT_LT(inst.identity_defects.at("durszt_form"), 1e-12);
    EXPECT_LT(inst.identity_defects.at("T_n=T^n/rho"), 1e-10);
  }
}

TEST(BergerStampfli, Examples) {
  ComplexMatrix edge = zeros(2, 2);
  edge(0, 1) = 2.0;
  const auto inside = berger_stampfli_check(edge);
  EXPECT_NEAR(inside.w, 1.0, 1e-4);
  EXPECT_TRUE(inside.in_c2);
  EXPECT_TRUE(inside.kernel.yes());
  EXPECT_TRUE(inside.criterion_agrees);

  const auto id = berger_stampfli_check(identity(2));
  EXPECT_NEAR(id.w, 1.0, 1e-12);
  EXPECT_TRUE(id.in_c2);

  ComplexMatrix big = zeros(2, 2);
  big(0, 1) = 3.0;
  const auto outside = berger_stampfli_check(big);
  EXPECT_NEAR(outside.w, 1.5, 1e-4);
  EXPECT_FALSE(outside.in_c2);
  EXPECT_TRUE(outside.kernel.no());
  EXPECT_TRUE(outside.criterion_agrees);
}

TEST(Istratescu, Examples) {
  EXPECT_TRUE(istratescu_monotonicity_test(identity(1), 2.0 * identity(1), scalar_matrix(0.5)).holds);
  oracle::Rng rng(61);
  const ComplexMatrix t = oracle::contraction(2, rng);
  const ComplexMatrix a = oracle::positive(2, rng);
  EXPECT_TRUE(istratescu_monotonicity_test(a, a, t).holds);
  const auto r = istratescu_monotonicity_test(identity(2), 3.0 * identity(2), oracle::contraction(2, rng));
  EXPECT_TRUE(r.holds);
  EXPECT_EQ(r.congruence_failures, 0u);
  EXPECT_EQ(code_of([] { istratescu_monotonicity_test(2.0 * identity(1), identity(1), scalar_matrix(0.5)); }),
            ErrorCode::OrderViolation);
}

TEST(Istratescu, RandomOrderedWeights) {
  oracle::Rng rng(62);
  for (int trial = 0; trial < 10; ++trial) {
    const ComplexMatrix a1 = oracle::positive(2, rng);
    const ComplexMatrix a2 = a1 + oracle::positive(2, rng, 0.0);
    const ComplexMatrix t = oracle::gaussian(2, 2, rng) * 0.7;
    const auto r = istratescu_monotonicity_test(a1, a2, t);
    EXPECT_TRUE(r.holds) << trial;
    EXPECT_GE(r.worst_congruence_margin, -1e-9);
  }
}

TEST(CaProperties, MomentChainAndMembership) {
  for (const auto& pair : random_pairs(20, 63)) {
    const auto inst = ca_build(pair.a, pair.c);
    const std::size_t d = inst.dim();
    const auto seq = ca_moments(inst, 6);
    const auto r = partial_isometry_R(inst, 6);
    const auto v = ca_isometric_V(inst, 6);
    const auto u = ca_unitary_U(inst, 6, 6);
    for (std::size_t n = 0; n <= 6; ++n) {
      EXPECT_LT(oracle::norm2(oracle::corner_power(r.matrix, idx(d), n) - seq[n]), 1e-8);
      EXPECT_LT(oracle::norm2(oracle::corner_power(v.matrix, idx(d), n) - seq[n]), 1e-8);
      EXPECT_LT(oracle::norm2(oracle::corner_power(u.matrix, idx(d), n) - seq[n]), 1e-8);
    }
    EXPECT_TRUE(zeta_check(inst.A, inst.T, 6).yes());
    EXPECT_TRUE(kernel_check(inst.A, inst.T).yes());
  }
}
