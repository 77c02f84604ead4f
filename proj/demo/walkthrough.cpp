// Tour of the library on small inputs: criteria, constructions and the
// C_A machinery. Run without arguments; everything is printed to stdout.

#include <cmath>
#include <iomanip>
#include <iostream>

#include "opdil/opdil.hpp"

namespace {

void show(const opdil::CriterionReport& r) {
  std::cout << "  " << std::setw(12) << std::left << r.criterion << opdil::to_string(r.satisfied);
  if (r.witness) std::cout << "  (witness value " << r.witness->value << " at order " << r.witness->order << ")";
  std::cout << "\n";
}

void show(const char* label, const opdil::DilationResult& d) {
  std::cout << "  " << label << ": " << opdil::to_string(d.kind) << " on C^" << d.ambient_dim
            << ", reproduces A_0..A_" << d.guaranteed_orders << ", max residual " << d.max_residual()
            << ", structure defect " << d.structure_defect << (d.verified ? ", verified" : ", NOT verified") << "\n";
}

}  // namespace

int main() {
  using namespace opdil;
  std::cout << std::setprecision(6);

  std::cout << "Moments of the path graph adjacency, (1, 0, 1, 0, 2)\n";
  const auto path = MomentSequence::scalar(std::vector<double>{1, 0, 1, 0, 2});
  show(hamburger_check(path));
  const auto [blocks, tri] = tridiagonal_recursive(path, 2);
  show("tridiagonal", tri);
  std::cout << "  operator:\n" << tri.matrix.real() << "\n\n";

  std::cout << "Powers of a 2x2 contraction T\n";
  ComplexMatrix t(2, 2);
  t << 0.5, 0.3, 0.0, 0.4;
  const auto powers = power_sequence(t, 60);
  show(toeplitz_positivity_check(powers));
  show(poisson_check(powers, {0.3, 0.6, 0.9}, 32));
  show("Schaffer unitary", schaffer_unitary(t, 2, 3));
  show("isometric recursion", isometric_recursive(powers, 4));
  std::cout << "\n";

  std::cout << "Hausdorff moments on [0, 1]: (1, 0.9, 0.5) against (1, 0.9, 0.9)\n";
  show(completely_monotone_check(MomentSequence::scalar(std::vector<double>{1, 0.9, 0.5})));
  show(completely_monotone_check(MomentSequence::scalar(std::vector<double>{1, 0.9, 0.9})));
  std::cout << "\n";

  std::cout << "Jacobi parameters of Lebesgue measure on [0, 1]\n";
  const auto lebesgue = MomentSequence::scalar(std::vector<double>{1, 1.0 / 2, 1.0 / 3, 1.0 / 4, 1.0 / 5});
  const auto jp = jacobi_parameters(lebesgue, 2);
  std::cout << "  a = (" << jp.a[0] << ", " << jp.a[1] << "), b = (" << jp.b[0] << ")\n\n";

  std::cout << "C_A instance with A = 2, C = 1/sqrt(2)\n";
  const auto inst = ca_build(scalar_matrix(2.0), scalar_matrix(1.0 / std::sqrt(2.0)));
  std::cout << "  T = " << inst.T(0, 0).real() << "\n";
  show(zeta_check(inst.A, inst.T, 3));
  show(kernel_check(inst.A, inst.T));
  show("R", partial_isometry_R(inst));
  show("V", ca_isometric_V(inst, 3));
  show("U", ca_unitary_U(inst, 2, 2));
  std::cout << "\n";

  std::cout << "Numerical radius and the C_2 class\n";
  for (double s : {2.0, 3.0}) {
    ComplexMatrix n = ComplexMatrix::Zero(2, 2);
    n(0, 1) = s;
    const auto bs = berger_stampfli_check(n);
    std::cout << "  [[0, " << s << "], [0, 0]]: w = " << bs.w << ", in C_2: " << (bs.in_c2 ? "yes" : "no") << "\n";
  }
  return 0;
}
