#pragma once

// Truncated q-Fock space over R^d.
//
// Basis words are letter sequences over {0..d-1} of length 0..N, ordered by
// length and then lexicographically (first letter most significant). The
// empty word is the vacuum and has index 0. Matrices are expressed in this
// word basis, which is orthonormal for the undeformed (q = 0) inner product;
// q-inner products go through the Gram matrix.
//
// Truncation: a*(f) sends words of length N to zero, so every operator built
// here is the compression P X P of its infinite-dimensional counterpart onto
// degrees <= N.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "qgauss/qcore.hpp"

namespace qgauss {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

class FockBasis {
public:
  static constexpr std::size_t kMaxSize = 2'000'000;

  /// Throws DomainError for dim < 1 or max_degree < 0 and CapacityError when
  /// the basis would exceed kMaxSize words.
  FockBasis(int dim, int max_degree);

  int dim() const noexcept { return dim_; }
  int max_degree() const noexcept { return max_degree_; }
  std::size_t size() const noexcept { return offsets_.back(); }

  /// Index of the first word of length `degree` (degree may be max_degree+1,
  /// which yields size()).
  std::size_t offset(int degree) const { return offsets_.at(degree); }
  /// d^degree
  std::size_t count(int degree) const { return offsets_.at(degree + 1) - offsets_.at(degree); }
  int degree_of(std::size_t index) const;

  std::vector<int> word(std::size_t index) const;
  std::size_t index_of(std::span<const int> letters) const;

  /// Same alphabet, larger truncation degree. Indices of words of length
  /// <= max_degree() coincide in both bases.
  FockBasis extended(int extra_degrees) const { return FockBasis(dim_, max_degree_ + extra_degrees); }

  bool operator==(const FockBasis& other) const noexcept {
    return dim_ == other.dim_ && max_degree_ == other.max_degree_;
  }

private:
  int dim_;
  int max_degree_;
  std::vector<std::size_t> offsets_;
};

/// Element of the truncated Fock space, coefficients in the word basis.
struct FockVector {
  FockBasis basis;
  Vector coeffs;

  static FockVector zero(const FockBasis& basis);
  static FockVector vacuum(const FockBasis& basis);
  static FockVector word(const FockBasis& basis, std::span<const int> letters);
  /// f_1 (x) ... (x) f_n for one-particle vectors of length basis.dim().
  static FockVector tensor(const FockBasis& basis, std::span<const Vector> factors);

  /// Largest length carrying a nonzero coefficient (-1 for the zero vector).
  int degree() const;
};

/// Linear map between truncated Fock spaces (usually the same space).
class FockOperator {
public:
  FockOperator(FockBasis basis, QParam q, SparseMatrix matrix);
  FockOperator(FockBasis range, FockBasis domain, QParam q, SparseMatrix matrix);

  static FockOperator identity(const FockBasis& basis, QParam q);
  static FockOperator zero(const FockBasis& basis, QParam q);

  const FockBasis& basis() const noexcept { return range_; }
  const FockBasis& range() const noexcept { return range_; }
  const FockBasis& domain() const noexcept { return domain_; }
  QParam q() const noexcept { return q_; }
  const SparseMatrix& matrix() const noexcept { return matrix_; }
  Matrix dense() const { return Matrix(matrix_); }

  Vector apply(const Vector& v) const { return matrix_ * v; }
  FockVector apply(const FockVector& v) const;

  FockOperator operator*(const FockOperator& rhs) const;
  FockOperator operator+(const FockOperator& rhs) const;
  FockOperator operator-(const FockOperator& rhs) const;
  FockOperator operator*(double scalar) const;

  /// Compression onto words of length <= max_degree (both sides).
  FockOperator compressed(int max_degree) const;

  /// Debug dump: header comment, then one row per range word (label, values
  /// per domain word).
  void write_csv(std::ostream& out) const;

private:
  FockBasis range_;
  FockBasis domain_;
  QParam q_;
  SparseMatrix matrix_;
};

inline FockOperator operator*(double scalar, const FockOperator& op) { return op * scalar; }

/// Matrix of <., .>_q in the word basis (block diagonal, symmetric, positive
/// definite). Built by the recursive expansion over the first tensor factor.
FockOperator gram(const FockBasis& basis, QParam q);

/// Dense degree-n block of the Gram matrix.
Matrix gram_block(const FockBasis& basis, QParam q, int degree);

FockOperator creation(const Vector& f, const FockBasis& basis, QParam q);
FockOperator annihilation(const Vector& f, const FockBasis& basis, QParam q);
/// a(f) + a*(f)
FockOperator omega(const Vector& f, const FockBasis& basis, QParam q);

/// Matrix-free actions on coefficient vectors.
Vector apply_creation(const Vector& f, const Vector& v, const FockBasis& basis);
Vector apply_annihilation(const Vector& f, const Vector& v, const FockBasis& basis, QParam q);
Vector apply_omega(const Vector& f, const Vector& v, const FockBasis& basis, QParam q);

/// q-adjoint G_domain^{-1} X^T G_range.
FockOperator q_adjoint(const FockOperator& x);

/// Operator norm with respect to <., .>_q on both sides, restricted to
/// domain words of length <= max_domain_degree (-1 = no restriction).
/// Dense; throws CapacityError above 6000 domain words.
double q_norm(const FockOperator& x, int max_domain_degree = -1);

/// Same with the undeformed inner product (plain spectral norm).
double zero_norm(const FockOperator& x, int max_domain_degree = -1);

/// Eigenvalues (ascending) of an operator that is self-adjoint for <., .>_q.
Vector q_spectrum(const FockOperator& x);

/// q-operator norm of a(f) a*(g) - q a*(g) a(f) - <f,g> 1, restricted to
/// degrees <= N-1 unless `restrict_degrees` is false.
double q_relation_residual(const Vector& f, const Vector& g, const FockBasis& basis, QParam q,
                           bool restrict_degrees = true);

struct NormBoundReport {
  double truncated_norm = 0.0;  ///< q-norm of a(f) at this truncation
  double bound = 0.0;           ///< ||f||/sqrt(1-q) for q >= 0, ||f|| for q <= 0
  bool within_bound = false;
};

NormBoundReport operator_norm_bound_check(const Vector& f, const FockBasis& basis, QParam q);

/// <Omega, X Omega>_q
double vacuum_expectation(const FockOperator& x);

/// <Omega, omega(f_1) ... omega(f_n) Omega>_q. Exact for n <= N; throws
/// CapacityError otherwise.
double moment(std::span<const Vector> fs, const FockBasis& basis, QParam q);

/// F(T) = T^{(x)n} on each degree, for T of shape out.dim() x in.dim().
/// Throws DomainError when ||T|| > 1 + 1e-12 or the degrees differ.
FockOperator fock_map(const Matrix& t, const FockBasis& in, const FockBasis& out, QParam q);

/// Spectral norm of a one-particle matrix.
double spectral_norm(const Matrix& t);

}  // namespace qgauss
