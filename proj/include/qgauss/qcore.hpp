#pragma once

// q-combinatorics: q-integers, q-factorials, q-binomials, q-Pochhammer
// symbols and permutation inversions.

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "qgauss/error.hpp"

namespace qgauss {

/// Deformation parameter q, validated to lie in the open interval (-1, 1).
class QParam {
public:
  explicit QParam(double q);

  double value() const noexcept { return q_; }
  operator double() const noexcept { return q_; }

private:
  double q_;
};

/// [n]_q = 1 + q + ... + q^{n-1}; [0]_q = 0.
double q_int(unsigned n, QParam q);

/// [n]_q! = [1]_q ... [n]_q; [0]_q! = 1.
double q_factorial(unsigned n, QParam q);

/// Gaussian binomial [n k]_q. Throws DomainError for k > n.
double q_binomial(unsigned n, unsigned k, QParam q);

/// Finite q-Pochhammer symbol (a;q)_n = prod_{j<n} (1 - a q^j).
double pochhammer(double a, QParam q, unsigned n);

struct PochhammerResult {
  double value = 1.0;
  std::size_t factors = 0;  ///< number of factors multiplied
  /// First-order bound on the relative truncation error:
  /// |a q^J| / (1 - |q|) where J is the first omitted index.
  double error_bound = 0.0;
};

/// Infinite q-Pochhammer symbol (a;q)_inf, truncated once |a q^j| < tol.
PochhammerResult pochhammer_infinite(double a, QParam q, double tol = 1e-17);

/// Permutation of {1..n} in one-line notation.
class Permutation {
public:
  Permutation() = default;
  /// Throws DomainError unless `images` is a bijection on {1..n}.
  explicit Permutation(std::vector<int> images);

  static Permutation identity(std::size_t n);

  std::size_t size() const noexcept { return images_.size(); }
  int operator()(std::size_t i) const { return images_.at(i - 1); }  // 1-based
  std::span<const int> images() const noexcept { return images_; }

private:
  std::vector<int> images_;
};

/// #{(i,j) : i < j, p(i) > p(j)}.
std::size_t inversions(const Permutation& p);

inline constexpr unsigned kPermutationCap = 8;

/// Calls `visit` once for every element of S_n, in lexicographic order.
/// Throws CapacityError for n > cap.
void for_each_permutation(unsigned n, const std::function<void(const Permutation&)>& visit,
                          unsigned cap = kPermutationCap);

/// Dense univariate polynomial, coefficients in increasing degree.
struct Polynomial {
  std::vector<double> coeffs;

  static Polynomial monomial(unsigned k);
  std::size_t degree() const noexcept { return coeffs.empty() ? 0 : coeffs.size() - 1; }
  double operator()(double x) const noexcept;
  double derivative(double x) const noexcept;
  double second_derivative(double x) const noexcept;
};

}  // namespace qgauss
