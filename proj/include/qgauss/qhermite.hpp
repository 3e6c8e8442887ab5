#pragma once

// q-Hermite polynomials, their orthogonality measure nu_q, Gauss quadrature
// for nu_q, and the Mehler kernel p_r(x, y) = sum_n r^n/[n]_q! H_n(x) H_n(y).

#include <functional>
#include <vector>

#include "qgauss/qcore.hpp"

namespace qgauss {

/// Right endpoint 2/sqrt(1-q) of the support of nu_q.
double support_edge(QParam q);

/// H_n(x) by the three-term recurrence x H_n = H_{n+1} + [n]_q H_{n-1}.
double hermite(unsigned n, QParam q, double x);

/// H_0(x), ..., H_{n_max}(x).
std::vector<double> hermite_all(unsigned n_max, QParam q, double x);

/// Lebesgue density of nu_q at x. Zero at the endpoints; DomainError outside
/// the closed support.
double nu_density(QParam q, double x);

/// Density of nu_q with respect to d(theta) for x = 2 cos(theta)/sqrt(1-q),
/// theta in [0, pi]: (2/pi) sin^2(theta) prod_n (1-q^n)(1 - 2 q^n cos 2theta + q^{2n}).
double nu_angle_density(QParam q, double theta);

/// Gauss rule for nu_q: nodes ascending, positive weights summing to 1.
struct QuadratureRule {
  double q = 0.0;
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }
  /// Polynomials of degree <= 2 size() - 1 are integrated exactly.
  unsigned exact_degree() const noexcept { return static_cast<unsigned>(2 * nodes.size()) - 1; }
  double integrate(const std::function<double(double)>& fn) const;
};

/// Golub-Welsch: eigen-decomposition of the Jacobi matrix with zero diagonal
/// and off-diagonal sqrt([n]_q), n = 1..m-1.
QuadratureRule gauss_quadrature(QParam q, unsigned m);

/// |int H_n H_m d nu_q - delta_{nm} [n]_q!| using `rule`. DomainError when
/// 2 max(n, m) exceeds the rule's exact degree.
double orthogonality_residual(unsigned n, unsigned m, QParam q, const QuadratureRule& rule);

/// Partial sum over n < terms of r^n/[n]_q! H_n(x) H_n(y). DomainError for |r| >= 1.
double mehler_series(QParam q, double r, double x, double y, unsigned terms);

/// Number of series terms whose geometric tail bound falls below `tol`
/// uniformly on the support square.
unsigned mehler_series_terms(QParam q, double r, double tol);

/// Product form (r^2;q)_inf / |(r e^{i(phi+psi)};q)_inf (r e^{i(phi-psi)};q)_inf|^2.
double mehler_product(QParam q, double r, double x, double y, double tol = 1e-17);

struct MehlerEval {
  double r = 0.0;
  double series = 0.0;
  double product = 0.0;
  unsigned terms = 0;
};

MehlerEval mehler_eval(QParam q, double r, double x, double y, double tol = 1e-14);

/// Mehler kernel for fixed (q, r) with the product factors precomputed;
/// evaluates in angle coordinates x = 2 cos(phi)/sqrt(1-q).
class MehlerKernel {
public:
  MehlerKernel(QParam q, double r, double tol = 1e-17);

  double q() const noexcept { return q_; }
  double r() const noexcept { return r_; }
  double operator()(double x, double y) const;
  double from_cosines(double cos_sum, double cos_diff) const noexcept;
  double from_angles(double phi, double psi) const noexcept;

private:
  double q_;
  double r_;
  double numerator_;
  std::vector<double> two_rqj_;
  std::vector<double> r2q2j_;
};

/// Angle theta in [0, pi] with x = 2 cos(theta)/sqrt(1-q); the cosine
/// argument is clamped to [-1, 1].
double support_angle(QParam q, double x);

}  // namespace qgauss
