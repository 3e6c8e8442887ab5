#include "qgauss/qhermite.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

namespace qgauss {

namespace {

constexpr double kSupportSlack = 1e-12;
constexpr double kDensityProductTol = 1e-16;

void require_r(double r, const char* what) {
  if (!(std::abs(r) < 1.0)) throw DomainError(std::string(what) + ": |r| must be < 1");
}

// prod_{n>=1} (1-q^n)(1 - 2 q^n c + q^{2n}) with c = cos(2 theta)
double theta_product(double q, double cos2theta) {
  double product = 1.0;
  double qn = q;
  while (std::abs(qn) >= kDensityProductTol) {
    product *= (1.0 - qn) * (1.0 - 2.0 * qn * cos2theta + qn * qn);
    qn *= q;
  }
  return product;
}

}  // namespace

double support_edge(QParam q) { return 2.0 / std::sqrt(1.0 - q.value()); }

double support_angle(QParam q, double x) {
  const double c = std::clamp(x * std::sqrt(1.0 - q.value()) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

double hermite(unsigned n, QParam q, double x) {
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (unsigned k = 1; k < n; ++k) {
    const double next = x * cur - q_int(k, q) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

std::vector<double> hermite_all(unsigned n_max, QParam q, double x) {
  std::vector<double> h(n_max + 1);
  h[0] = 1.0;
  if (n_max >= 1) h[1] = x;
  double qk = 1.0;   // q^k
  double int_k = 0;  // [k]_q
  for (unsigned k = 1; k < n_max; ++k) {
    int_k += qk;
    qk *= q.value();
    h[k + 1] = x * h[k] - int_k * h[k - 1];
  }
  return h;
}

double nu_angle_density(QParam q, double theta) {
  const double s = std::sin(theta);
  return 2.0 / std::numbers::pi * s * s * theta_product(q.value(), std::cos(2.0 * theta));
}

double nu_density(QParam q, double x) {
  const double edge = support_edge(q);
  if (std::abs(x) > edge * (1.0 + kSupportSlack)) {
    throw DomainError("nu_density: x = " + std::to_string(x) + " lies outside the support");
  }
  if (std::abs(x) >= edge) return 0.0;
  const double theta = support_angle(q, x);
  return std::sqrt(1.0 - q.value()) / std::numbers::pi * std::sin(theta) *
         theta_product(q.value(), std::cos(2.0 * theta));
}

double QuadratureRule::integrate(const std::function<double(double)>& fn) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * fn(nodes[i]);
  return sum;
}

QuadratureRule gauss_quadrature(QParam q, unsigned m) {
  if (m == 0) throw DomainError("gauss_quadrature: at least one node required");
  QuadratureRule rule;
  rule.q = q.value();
  if (m == 1) {
    rule.nodes = {0.0};
    rule.weights = {1.0};
    return rule;
  }
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd sub(m - 1);
  for (unsigned n = 1; n < m; ++n) sub[n - 1] = std::sqrt(q_int(n, q));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw Error("gauss_quadrature: eigen-solver failed");
  const auto& values = solver.eigenvalues();
  const auto& vectors = solver.eigenvectors();
  rule.nodes.resize(m);
  rule.weights.resize(m);
  for (unsigned i = 0; i < m; ++i) {
    rule.nodes[i] = values[i];
    rule.weights[i] = vectors(0, i) * vectors(0, i);
  }
  // nu_q is symmetric; remove the rounding asymmetry.
  for (unsigned i = 0; i < m / 2; ++i) {
    const unsigned j = m - 1 - i;
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    rule.weights[i] = rule.weights[j] = w;
  }
  if (m % 2 == 1) rule.nodes[m / 2] = 0.0;
  return rule;
}

double orthogonality_residual(unsigned n, unsigned m, QParam q, const QuadratureRule& rule) {
  if (2 * std::max(n, m) > rule.exact_degree()) {
    throw DomainError("orthogonality_residual: rule with " + std::to_string(rule.size()) +
                      " nodes cannot integrate degree " + std::to_string(2 * std::max(n, m)));
  }
  const double integral = rule.integrate([&](double x) { return hermite(n, q, x) * hermite(m, q, x); });
  const double expected = n == m ? q_factorial(n, q) : 0.0;
  return std::abs(integral - expected);
}

double mehler_series(QParam q, double r, double x, double y, unsigned terms) {
  require_r(r, "mehler_series");
  if (terms == 0) return 0.0;
  const auto hx = hermite_all(terms - 1, q, x);
  const auto hy = hermite_all(terms - 1, q, y);
  double sum = 0.0;
  double coeff = 1.0;  // r^n / [n]_q!
  for (unsigned n = 0; n < terms; ++n) {
    if (n > 0) coeff *= r / q_int(n, q);
    sum += coeff * hx[n] * hy[n];
  }
  return sum;
}

unsigned mehler_series_terms(QParam q, double r, double tol) {
  require_r(r, "mehler_series_terms");
  if (r == 0.0) return 1;
  // Term n is bounded on the support square by |r|^n B_n^2 / [n]_q!, where
  // B_n = (1-q)^{-n/2} sum_k |[n k]_q| bounds |H_n|. Stop once the bound is
  // below tol (1 - |r|) and decreasing.
  std::vector<double> row{1.0};  // q-binomials [n k]_q, k = 0..n
  double prev_bound = 1.0;
  double coeff = 1.0;
  const double scale = 1.0 / std::sqrt(1.0 - q.value());
  double scale_n = 1.0;
  for (unsigned n = 1; n < 100000; ++n) {
    std::vector<double> next(n + 1);
    next[0] = next[n] = 1.0;
    double qk = q.value();  // q^{k}, k starting at 1
    for (unsigned k = 1; k < n; ++k) {
      // [n k] = [n-1 k-1] + q^k [n-1 k]
      next[k] = row[k - 1] + qk * row[k];
      qk *= q.value();
    }
    row = std::move(next);
    coeff *= std::abs(r) / q_int(n, q);
    scale_n *= scale;
    double abs_sum = 0.0;
    for (double b : row) abs_sum += std::abs(b);
    const double b_n = scale_n * abs_sum;
    const double bound = coeff * b_n * b_n;
    if (bound < tol * (1.0 - std::abs(r)) && bound < prev_bound) return n + 1;
    prev_bound = bound;
  }
  throw Error("mehler_series_terms: series did not converge");
}

MehlerKernel::MehlerKernel(QParam q, double r, double tol) : q_(q.value()), r_(r) {
  require_r(r, "MehlerKernel");
  numerator_ = 1.0;
  if (r == 0.0) return;
  numerator_ = pochhammer_infinite(r * r, q, tol).value;
  double rqj = r;
  while (std::abs(rqj) >= tol) {
    two_rqj_.push_back(2.0 * rqj);
    r2q2j_.push_back(rqj * rqj);
    rqj *= q_;
  }
}

double MehlerKernel::from_cosines(double cos_sum, double cos_diff) const noexcept {
  double denom = 1.0;
  for (std::size_t j = 0; j < two_rqj_.size(); ++j) {
    denom *= (1.0 - two_rqj_[j] * cos_sum + r2q2j_[j]) * (1.0 - two_rqj_[j] * cos_diff + r2q2j_[j]);
  }
  return numerator_ / denom;
}

double MehlerKernel::from_angles(double phi, double psi) const noexcept {
  return from_cosines(std::cos(phi + psi), std::cos(phi - psi));
}

double MehlerKernel::operator()(double x, double y) const {
  const QParam q(q_);
  return from_angles(support_angle(q, x), support_angle(q, y));
}

double mehler_product(QParam q, double r, double x, double y, double tol) {
  require_r(r, "mehler_product");
  return MehlerKernel(q, r, tol)(x, y);
}

MehlerEval mehler_eval(QParam q, double r, double x, double y, double tol) {
  MehlerEval e;
  e.r = r;
  e.terms = mehler_series_terms(q, r, tol);
  e.series = mehler_series(q, r, x, y, e.terms);
  e.product = mehler_product(q, r, x, y);
  return e;
}

}  // namespace qgauss
