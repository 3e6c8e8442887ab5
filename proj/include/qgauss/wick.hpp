#pragma once

// Wick products Psi(xi): the unique element of the field algebra with
// Psi(xi) Omega = xi, in normal-ordered, recursive, q-binomial and q-Hermite
// form, plus the second quantization Gamma_q(T) acting on Wick images.

#include <span>
#include <vector>

#include "qgauss/fock.hpp"

namespace qgauss {

/// Partition of {0..n-1} into creation positions I1 and annihilation
/// positions I2 (both increasing), with exponent #{(p, r) in I1 x I2 : p > r}.
struct Splitting {
  std::vector<int> creation;
  std::vector<int> annihilation;
  int exponent = 0;
};

/// All 2^n splittings, indexed by the bitmask of creation positions.
std::vector<Splitting> splittings(int n);

/// Normal-ordered expansion: sum over splittings of
/// q^{i(I1,I2)} a*(f_{i(1)})...a*(f_{i(k)}) a(f_{j(1)})...a(f_{j(l)}).
FockOperator wick_from_splittings(std::span<const Vector> word, const FockBasis& basis, QParam q);

/// Psi(f (x) f_1...f_n) = omega(f) Psi(f_1...f_n) - sum_i q^{i-1} <f,f_i> Psi(..f_i deleted..).
/// Evaluated on a basis extended by n degrees and compressed back, so the
/// result is the exact compression of Psi onto degrees <= N.
FockOperator wick_recursive(std::span<const Vector> word, const FockBasis& basis, QParam q);

/// Psi(f^{(x)n}) = sum_k [n k]_q a*(f)^k a(f)^{n-k}.
FockOperator wick_power(const Vector& f, int n, const FockBasis& basis, QParam q);

/// Psi of an arbitrary Fock vector (linear extension of the recursion).
FockOperator wick(const FockVector& xi, QParam q);

/// q-Hermite polynomial H_n evaluated at the operator omega(f).
FockOperator hermite_of_omega(const Vector& f, int n, const FockBasis& basis, QParam q);

/// q-norm of Psi(f^{(x)n}) - H_n(omega(f)) on degrees <= N - n. Requires
/// ||f|| = 1 to within 1e-12.
double hermite_identity_residual(const Vector& f, int n, const FockBasis& basis, QParam q);

/// Gamma_q(T) Psi(xi) = Psi(F(T) xi). `out` is the Fock basis of the target
/// one-particle space and must share xi's truncation degree.
FockOperator second_quantization(const Matrix& t, const FockVector& xi, const FockBasis& out, QParam q);

}  // namespace qgauss
