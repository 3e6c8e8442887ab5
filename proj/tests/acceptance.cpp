// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "qgauss/error.hpp"
#include "qgauss/fock.hpp"
#include "qgauss/kernels.hpp"
#include "qgauss/processes.hpp"
#include "qgauss/qcore.hpp"
#include "qgauss/qhermite.hpp"
#include "qgauss/sampler.hpp"
#include "qgauss/wick.hpp"

using namespace qgauss;

namespace {

const double kQGrid[] = {-0.9, -0.5, 0.0, 0.5, 0.9};
const CovarianceKind kBuiltins[] = {CovarianceKind::bm, CovarianceKind::bridge, CovarianceKind::ou};

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

double max_abs(const FockOperator& x) {
  const SparseMatrix& m = x.matrix();
  double worst = 0.0;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  return worst;
}

// Interior times (increasing) of a builtin drawn from the generator.
std::vector<double> random_times(oracle::Gen& gen, CovarianceKind kind, int n) {
  switch (kind) {
    case CovarianceKind::bm: return gen.grid(n, 0.05, 5.0);
    case CovarianceKind::bridge: return gen.grid(n, 0.05, 0.95);
    default: return gen.grid(n, -2.0, 2.0);
  }
}

std::vector<double> fixed_times(CovarianceKind kind) {
  switch (kind) {
    case CovarianceKind::bm: return {0.5, 1.0, 2.0, 4.0};
    case CovarianceKind::bridge: return {0.2, 0.4, 0.6, 0.8};
    default: return {-0.5, 0.1, 0.6, 1.5};
  }
}

Covariance fractional() {
  return Covariance::custom(
      "fractional",
      [](double s, double t) { return 0.5 * (std::pow(s, 1.5) + std::pow(t, 1.5) - std::pow(std::abs(t - s), 1.5)); },
      0.0, 10.0);
}

double fock_moment(const Covariance& c, const std::vector<double>& times, const std::vector<unsigned>& exps, QParam q) {
  const std::vector<Vector> fs = embed(c, times);
  std::vector<Vector> word;
  for (std::size_t j = 0; j < times.size(); ++j)
    for (unsigned k = 0; k < exps[j]; ++k) word.push_back(fs[j]);
  if (word.empty()) return 1.0;
  return moment(word, FockBasis(static_cast<int>(fs.front().size()), static_cast<int>(word.size())), q);
}

Outcome gram_positivity() {
  double smallest = std::numeric_limits<double>::infinity();
  for (double qv : kQGrid)
    for (int d = 1; d <= 3; ++d)
      for (int n_max = 1; n_max <= 5; ++n_max) {
        const FockBasis basis(d, n_max);
        for (int n = 0; n <= n_max; ++n) {
          Eigen::SelfAdjointEigenSolver<Matrix> solver(gram_block(basis, QParam(qv), n), Eigen::EigenvaluesOnly);
          smallest = std::min(smallest, solver.eigenvalues().minCoeff());
        }
      }
  return {smallest > 0.0, "min eigenvalue " + sci(smallest)};
}

Outcome q_relations() {
  oracle::Gen gen(101);
  double worst = 0.0;
  for (double qv : kQGrid)
    for (auto [d, n_max] : {std::pair{1, 6}, std::pair{2, 4}, std::pair{3, 3}}) {
      const FockBasis basis(d, n_max);
      for (int trial = 0; trial < 4; ++trial)
        worst = std::max(worst, q_relation_residual(gen.vector(d), gen.vector(d), basis, QParam(qv)));
    }
  return {worst <= 1e-12, "max residual " + sci(worst)};
}

Outcome moments_vs_measure() {
  const FockBasis basis(1, 10);
  const Vector e1 = Vector::Ones(1);
  double worst = 0.0, fourth = 0.0;
  for (double qv : kQGrid) {
    const QParam q(qv);
    for (int n = 1; n <= 10; ++n) {
      const std::vector<Vector> word(n, e1);
      const double fock = moment(word, basis, q);
      const double measure = oracle::integrate_nu(qv, [n](double x) { return std::pow(x, n); });
      worst = std::max(worst, std::abs(fock - measure));
      if (n == 4) {
        fourth = std::max({fourth, std::abs(fock - (2.0 + qv)), std::abs(measure - (2.0 + qv))});
      }
    }
  }
  return {worst <= 1e-8 && fourth <= 1e-8, "max |fock - measure| " + sci(worst) + ", fourth moment " + sci(fourth)};
}

// [n]_q! as the product of (1 - q^k)/(1 - q); the inversion sum cancels
// badly for q near -1.
double q_factorial_product(int n, double q) {
  long double prod = 1.0L, qk = 1.0L;
  for (int k = 1; k <= n; ++k) {
    qk *= q;
    prod *= (1.0L - qk) / (1.0L - q);
  }
  return static_cast<double>(prod);
}

// Residuals are taken relative to sqrt([n]_q! [m]_q!), the natural scale of
// the integrand (the norms themselves reach 4e5 at q = 0.9, n = 10).
Outcome orthogonality() {
  double worst = 0.0, oracle_worst = 0.0;
  const int points = 4000;
  for (double qv : kQGrid) {
    const QParam q(qv);
    const QuadratureRule rule = gauss_quadrature(q, 32);
    // angle nodes and weights of the independent trapezoid integration
    std::vector<double> xs, ws;
    const double edge = 2.0 / std::sqrt(1.0 - qv), h = std::numbers::pi / points;
    for (int k = 1; k < points; ++k) {
      xs.push_back(edge * std::cos(k * h));
      ws.push_back(h * oracle::angle_density(qv, k * h));
    }
    std::vector<std::vector<double>> hs;
    for (int n = 0; n <= 10; ++n) {
      std::vector<double> values;
      for (double x : xs) values.push_back(static_cast<double>(oracle::hermite_value(n, qv, x)));
      hs.push_back(values);
    }
    for (unsigned n = 0; n <= 10; ++n)
      for (unsigned m = 0; m <= 10; ++m) {
        const double scale = std::sqrt(q_factorial_product(static_cast<int>(n), qv) *
                                       q_factorial_product(static_cast<int>(m), qv));
        worst = std::max(worst, orthogonality_residual(n, m, q, rule) / scale);
        double integral = 0.0;
        for (std::size_t k = 0; k < xs.size(); ++k) integral += ws[k] * hs[n][k] * hs[m][k];
        const double expected = n == m ? q_factorial_product(static_cast<int>(n), qv) : 0.0;
        oracle_worst = std::max(oracle_worst, std::abs(integral - expected) / scale);
      }
  }
  return {worst <= 1e-8 && oracle_worst <= 1e-8,
          "relative residual: quadrature " + sci(worst) + ", independent integration " + sci(oracle_worst)};
}

// The series difference is measured against sum_n |r^n H_n(x) H_n(y)| / [n]_q!,
// the magnitude that floating summation of the series can resolve: for q near
// 1 and |r| near 1 the terms reach 1e11 at the corners while the kernel value
// there is 1e-15.
Outcome mehler_dual() {
  double worst = 0.0, plain = 0.0, free_worst = 0.0;
  for (double qv : kQGrid) {
    const QParam q(qv);
    const double edge = support_edge(q);
    for (double r : {-0.8, -0.4, 0.2, 0.5, 0.8})
      for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j) {
          const double x = edge * (-0.95 + 0.1 * i), y = edge * (-0.95 + 0.1 * j);
          const MehlerEval e = mehler_eval(q, r, x, y);
          const auto hx = hermite_all(e.terms, q, x), hy = hermite_all(e.terms, q, y);
          double magnitude = 0.0, coeff = 1.0;
          for (unsigned n = 0; n < e.terms; ++n) {
            if (n > 0) coeff *= std::abs(r) / q_int(n, q);
            magnitude += coeff * std::abs(hx[n] * hy[n]);
          }
          const double diff = std::abs(e.series - e.product);
          worst = std::max(worst, diff / std::max(1.0, magnitude));
          plain = std::max(plain, diff / std::max(1.0, std::abs(e.product)));
          if (qv == 0.0) {
            const double closed = oracle::free_mehler(r, x, y);
            free_worst = std::max(free_worst, std::abs(e.product - closed) / std::max(1.0, std::abs(closed)));
          }
        }
  }
  return {worst <= 1e-10 && free_worst <= 1e-12, "series vs product " + sci(worst) + " (relative to the value " +
                                                      sci(plain) + "), q = 0 closed form " + sci(free_worst)};
}

Outcome wick_consistency() {
  oracle::Gen gen(106);
  double worst = 0.0;
  for (double qv : kQGrid) {
    const QParam q(qv);
    for (int d = 1; d <= 2; ++d) {
      const FockBasis basis(d, 5);
      for (int n = 1; n <= 5; ++n) {
        std::vector<Vector> word;
        for (int i = 0; i < n; ++i) word.push_back(gen.vector(d));
        worst = std::max(worst, max_abs(wick_from_splittings(word, basis, q) - wick_recursive(word, basis, q)));
        const Vector f = gen.unit(d);
        const std::vector<Vector> power(n, f);
        const FockOperator by_power = wick_power(f, n, basis, q);
        worst = std::max(worst, max_abs(by_power - wick_recursive(power, basis, q)));
        worst = std::max(worst, max_abs(by_power - wick_from_splittings(power, basis, q)));
        // H_n(omega(f)) needs n spare degrees to be exact after compression
        worst = std::max(worst, max_abs(by_power - hermite_of_omega(f, n, basis.extended(n), q).compressed(5)));
      }
    }
  }
  return {worst <= 1e-10, "max entry difference " + sci(worst)};
}

Outcome conditional_expectation() {
  double worst = 0.0;
  for (double qv : kQGrid) {
    const QParam q(qv);
    for (auto kind : kBuiltins) {
      const Covariance c = Covariance::builtin(kind);
      std::vector<double> times = fixed_times(kind);
      times.pop_back();
      const std::vector<Vector> fs = embed(c, times);
      const FockBasis basis(static_cast<int>(fs.front().size()), 4);
      for (std::size_t k = 0; k + 1 < times.size(); ++k) {
        // projection onto the span of f_{t_0}, ..., f_{t_k}
        Matrix past(fs.front().size(), k + 1);
        for (std::size_t i = 0; i <= k; ++i) past.col(static_cast<Eigen::Index>(i)) = fs[i];
        const Eigen::HouseholderQR<Matrix> qr(past);
        const Matrix qm = qr.householderQ() * Matrix::Identity(past.rows(), past.cols());
        const Matrix p = qm * qm.transpose();
        const Vector& fs_ = fs[k];
        const Vector& ft = fs[k + 1];
        const double mu = c(times[k], times[k + 1]) / c(times[k], times[k]);
        for (int n = 1; n <= 4; ++n) {
          const std::vector<Vector> power(n, ft);
          const FockOperator lhs = second_quantization(p, FockVector::tensor(basis, power), basis, q);
          const FockOperator rhs = std::pow(mu, n) * wick_power(fs_, n, basis, q);
          worst = std::max(worst, max_abs(lhs - rhs));
        }
      }
    }
  }
  return {worst <= 1e-10, "max entry difference " + sci(worst)};
}

Outcome markov_criterion() {
  oracle::Gen gen(108);
  bool builtins_ok = true;
  double builtin_worst = 0.0;
  for (int trial = 0; trial < 50; ++trial)
    for (auto kind : kBuiltins) {
      const MarkovReport r = is_markov(Covariance::builtin(kind), random_times(gen, kind, 6));
      builtins_ok = builtins_ok && r.markov;
      builtin_worst = std::max(builtin_worst, r.max_violation);
    }
  const MarkovReport frac = is_markov(fractional(), std::vector<double>{1.0, 2.0, 3.0, 4.0, 5.0, 6.0});
  return {builtins_ok && !frac.markov && frac.max_violation > 1e-2,
          "builtins max violation " + sci(builtin_worst) + ", fractional violation " + sci(frac.max_violation)};
}

Outcome kernel_identities() {
  double norm_worst = 0.0, eig_worst = 0.0;
  for (double qv : kQGrid) {
    const QParam q(qv);
    for (auto kind : kBuiltins) {
      const auto ts = fixed_times(kind);
      const TransitionKernel k = TransitionKernel::from_covariance(q, Covariance::builtin(kind), ts[0], ts[2]);
      const LambdaTriple& l = k.lambdas();
      for (double u : {-0.97, -0.5, 0.0, 0.3, 0.9}) {
        const double x = u * k.source_edge();
        norm_worst = std::max(norm_worst, std::abs(k.apply([](double) { return 1.0; }, x) - 1.0));
        for (unsigned n = 1; n <= 6; ++n) {
          const double lhs = k.apply([&](double y) { return hermite(n, q, y / l.lambda_t); }, x);
          eig_worst = std::max(eig_worst, std::abs(lhs - std::pow(l.lambda_st, n) * hermite(n, q, x / l.lambda_s)));
        }
      }
    }
  }
  return {norm_worst <= 1e-9 && eig_worst <= 1e-7,
          "normalization " + sci(norm_worst) + ", eigen-identity " + sci(eig_worst)};
}

// int f(y) nu-like dy over [-e, e] by the trapezoid rule in the angle.
double integrate_interval(double edge, const std::function<double(double)>& f) {
  const int n = 4000;
  const double h = std::numbers::pi / n;
  double sum = 0.0;
  for (int k = 1; k < n; ++k) sum += f(edge * std::cos(k * h)) * edge * std::sin(k * h);
  return sum * h;
}

Outcome free_closed_forms() {
  const QParam q(0.0);
  const Covariance bm = Covariance::builtin(CovarianceKind::bm);
  const Covariance bridge = Covariance::builtin(CovarianceKind::bridge);
  const Covariance ou = Covariance::builtin(CovarianceKind::ou);
  double bm_worst = 0.0, bridge_worst = 0.0, ratio_lo = 1e300, ratio_hi = -1e300, norm_worst = 0.0;
  for (auto [s, t] : {std::pair{0.5, 1.0}, std::pair{1.0, 3.0}}) {
    const double ex = 2.0 * std::sqrt(s), ey = 2.0 * std::sqrt(t);
    for (int i = 0; i < 20; ++i)
      for (int j = 0; j < 20; ++j) {
        const double x = ex * (-0.95 + 0.1 * i), y = ey * (-0.95 + 0.1 * j);
        bm_worst = std::max(bm_worst, std::abs(free_bm_kernel(s, t, x, y) - kernel_density(q, bm, s, t, x, y)));
      }
  }
  for (auto [s, t] : {std::pair{0.2, 0.5}, std::pair{0.4, 0.9}}) {
    const double ex = 2.0 * std::sqrt(s * (1 - s)), ey = 2.0 * std::sqrt(t * (1 - t));
    for (int i = 0; i < 20; ++i)
      for (int j = 0; j < 20; ++j) {
        const double x = ex * (-0.95 + 0.1 * i), y = ey * (-0.95 + 0.1 * j);
        bridge_worst =
            std::max(bridge_worst, std::abs(free_bridge_kernel(s, t, x, y) - kernel_density(q, bridge, s, t, x, y)));
      }
  }
  for (double t : {0.1, 0.7, 2.0}) {
    for (int i = 0; i < 20; ++i)
      for (int j = 0; j < 20; ++j) {
        const double x = 2.0 * (-0.95 + 0.1 * i), y = 2.0 * (-0.95 + 0.1 * j);
        const double ratio = free_ou_kernel(t, x, y) / kernel_density(q, ou, 0.0, t, x, y);
        ratio_lo = std::min(ratio_lo, ratio);
        ratio_hi = std::max(ratio_hi, ratio);
      }
    for (double x : {-1.9, -0.6, 0.0, 1.2})
      norm_worst = std::max(norm_worst,
                            std::abs(integrate_interval(2.0, [&](double y) { return free_ou_kernel(t, x, y); }) - 1.0));
  }
  const bool ok = bm_worst <= 1e-10 && bridge_worst <= 1e-10 && norm_worst <= 1e-9 && ratio_hi - ratio_lo <= 1e-10;
  return {ok, "bm " + sci(bm_worst) + ", bridge " + sci(bridge_worst) + ", ou ratio in [" + sci(ratio_lo) + ", " +
                  sci(ratio_hi) + "], ou normalization " + sci(norm_worst)};
}

Outcome free_ou_generator_check() {
  double worst = 0.0;
  for (unsigned n = 0; n <= 4; ++n) {
    const auto c = oracle::hermite_coeffs(static_cast<int>(n), 0.0);
    const Polynomial h{c};
    for (int i = 1; i <= 50; ++i) {
      const double x = -2.0 + 4.0 * i / 51.0;
      worst = std::max(worst, std::abs(free_ou_generator(h, x) - n * oracle::eval(c, x)));
    }
  }
  return {worst <= 1e-6, "max |N H_n - n H_n| " + sci(worst)};
}

Outcome chapman_kolmogorov() {
  double worst = 0.0, slowest = 0.0;
  for (auto kind : kBuiltins) {
    const auto start = std::chrono::steady_clock::now();
    const Covariance c = Covariance::builtin(kind);
    const auto ts = fixed_times(kind);
    for (double qv : kQGrid)
      for (double u : {-0.8, 0.0, 0.5}) {
        const double x = u * marginal_edge(QParam(qv), std::sqrt(c(ts[0], ts[0])));
        worst = std::max(worst, chapman_kolmogorov_residual(QParam(qv), c, ts[0], ts[1], ts[3], x, 200));
      }
    slowest = std::max(slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  return {worst <= 1e-6 && slowest < 60.0, "max residual " + sci(worst) + ", slowest builtin " + sci(slowest) + " s"};
}

Outcome three_way_moments() {
  const auto start = std::chrono::steady_clock::now();
  oracle::Gen gen(113);
  double quad_worst = 0.0;
  for (double qv : kQGrid) {
    const QParam q(qv);
    for (auto kind : kBuiltins) {
      const Covariance c = Covariance::builtin(kind);
      for (int trial = 0; trial < 3; ++trial) {
        const int n_times = gen.integer(1, 4);
        const auto ts = random_times(gen, kind, n_times);
        std::vector<unsigned> exps(n_times);
        unsigned total = 0;
        for (auto& e : exps) {
          e = static_cast<unsigned>(gen.integer(0, 3));
          if (total + e > 6) e = 6 - total;
          total += e;
        }
        std::vector<Polynomial> hs;
        for (unsigned e : exps) hs.push_back(Polynomial::monomial(e));
        const double fock = fock_moment(c, ts, exps, q);
        quad_worst = std::max(quad_worst, std::abs(moment_via_kernels(q, c, ts, hs) - fock));
      }
      // the full four-time, degree-six configuration
      const auto ts = fixed_times(kind);
      const std::vector<unsigned> exps{1, 2, 1, 2};
      std::vector<Polynomial> hs;
      for (unsigned e : exps) hs.push_back(Polynomial::monomial(e));
      quad_worst = std::max(quad_worst, std::abs(moment_via_kernels(q, c, ts, hs) - fock_moment(c, ts, exps, q)));
    }
  }
  double z_worst = 0.0;
  std::uint64_t seed = 1300;
  for (double qv : {-0.5, 0.5})
    for (auto kind : kBuiltins) {
      const auto four = fixed_times(kind);
      const std::vector<double> ts(four.begin(), four.begin() + 3);
      for (const std::vector<unsigned>& exps : {std::vector<unsigned>{1, 2, 1}, std::vector<unsigned>{2, 0, 2}}) {
        const ClassicalVersionReport r =
            classical_version_report(Covariance::builtin(kind), QParam(qv), ts, exps, 100000, ++seed);
        quad_worst = std::max(quad_worst, r.quadrature_error());
        z_worst = std::max(z_worst, r.mc_z());
      }
    }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {quad_worst <= 1e-6 && z_worst <= 4.0 && elapsed < 300.0,
          "|fock - quadrature| " + sci(quad_worst) + ", max MC z " + sci(z_worst) + ", " + sci(elapsed) + " s"};
}

Outcome fermionic_tables() {
  bool exact = true;
  double worst = 0.0;
  auto check = [&](const FermionicKernel& k, double x_state, double y_state, double p_same) {
    exact = exact && k.source_state == x_state && k.target_state == y_state;
    const double expected[2][2] = {{p_same, 1.0 - p_same}, {1.0 - p_same, p_same}};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) worst = std::max(worst, std::abs(k.transition(i, j) - expected[i][j]));
  };
  for (auto [s, t] : {std::pair{0.5, 2.0}, std::pair{1.0, 1.5}})
    check(fermionic_kernel(CovarianceKind::bm, s, t), std::sqrt(s), std::sqrt(t), 0.5 * (1.0 + std::sqrt(s / t)));
  for (auto [s, t] : {std::pair{0.0, 1.0}, std::pair{-0.4, 0.3}})
    check(fermionic_kernel(CovarianceKind::ou, s, t), 1.0, 1.0, 0.5 * (1.0 + std::exp(-(t - s))));
  for (auto [s, t] : {std::pair{0.3, 0.6}, std::pair{0.1, 0.9}})
    check(fermionic_kernel(CovarianceKind::bridge, s, t), std::sqrt(s * (1 - s)), std::sqrt(t * (1 - t)),
          0.5 * (1.0 + std::sqrt(s * (1 - t) / (t * (1 - s)))));
  oracle::Gen gen(114);
  double composition = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const double a = gen.uniform(-2.0, 2.0), b = gen.uniform(0.0, 2.0), c = gen.uniform(0.0, 2.0);
    const Eigen::Matrix2d two = fermionic_kernel(CovarianceKind::ou, a, a + b).transition *
                                fermionic_kernel(CovarianceKind::ou, a + b, a + b + c).transition;
    composition = std::max(composition,
                           (two - fermionic_kernel(CovarianceKind::ou, a, a + b + c).transition).cwiseAbs().maxCoeff());
  }
  // "exact" up to rounding of the closed forms
  const bool ok = exact && worst <= 4.0 * std::numeric_limits<double>::epsilon() &&
                  composition <= 4.0 * std::numeric_limits<double>::epsilon();
  return {ok, "table entries " + sci(worst) + ", OU composition " + sci(composition)};
}

Outcome martingale_families() {
  double worst = 0.0;
  for (double qv : kQGrid) {
    const QParam q(qv);
    const QuadratureRule rule = gauss_quadrature(q, 200);
    for (auto kind : kBuiltins) {
      const auto ts = fixed_times(kind);
      for (unsigned n = 0; n <= 4; ++n) worst = std::max(worst, martingale_family_residual(kind, q, n, ts[0], ts[2], rule));
    }
  }
  return {worst <= 1e-7, "max residual " + sci(worst)};
}

// Least-squares slope of log alpha^{1/2} against log t on nine log-spaced
// points of [t_lo, t_hi].
double alpha_slope(QParam q, double t_lo, double t_hi) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const int points = 9;
  for (int k = 0; k < points; ++k) {
    const double t = t_lo * std::pow(t_hi / t_lo, k / (points - 1.0));
    const double x = std::log(t), y = 0.5 * std::log(alpha(t, q));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (points * sxy - sx * sy) / (points * sxx - sx * sx);
}

// The window slope is checked for q < 0.9; at q = 0.9 the window
// [1e-3, 1e-1] lies before the t^{-3/2} regime, so for every grid q the
// small-t exponent is checked on [1e-5, 1e-4] instead.
Outcome ultracontractivity() {
  bool finite = true;
  double slope_lo = 1e300, slope_hi = -1e300, small_lo = 1e300, small_hi = -1e300;
  std::string outer;
  for (double qv : kQGrid) {
    const QParam q(qv);
    for (int k = 0; k <= 16; ++k) {
      const double a = alpha(std::pow(10.0, -3.0 + 0.25 * k), q);
      finite = finite && std::isfinite(a) && a >= 1.0;
    }
    const double window = alpha_slope(q, 1e-3, 1e-1);
    if (qv < 0.9) {
      slope_lo = std::min(slope_lo, window);
      slope_hi = std::max(slope_hi, window);
    } else {
      outer += ", q = " + std::to_string(qv).substr(0, 4) + ": " + sci(window);
    }
    const double small = alpha_slope(q, 1e-5, 1e-4);
    small_lo = std::min(small_lo, small);
    small_hi = std::max(small_hi, small);
  }
  oracle::Gen gen(116);
  double excess = -1e300;
  for (int trial = 0; trial < 20; ++trial) {
    const QParam q(kQGrid[trial % 5]);
    const double t = gen.uniform(0.2, 3.0);
    const TransitionKernel k(q, LambdaTriple{1.0, 1.0, std::exp(-t)}, 200);
    Polynomial h{std::vector<double>(static_cast<std::size_t>(gen.integer(1, 7)))};
    for (double& c : h.coeffs) c = gen.uniform(-1.0, 1.0);
    const double norm = std::sqrt(k.rule().integrate([&](double y) { return h(y) * h(y); }));
    double sup = 0.0;
    for (int i = 0; i <= 400; ++i)
      sup = std::max(sup, std::abs(k.apply(h, k.source_edge() * (-1.0 + i / 200.0))));
    excess = std::max(excess, sup - std::sqrt(alpha(t, q)) * norm);
  }
  const bool ok = finite && slope_lo >= -1.7 && slope_hi <= -1.3 && small_lo >= -1.7 && small_hi <= -1.3 &&
                  excess <= 1e-8;
  return {ok, std::string(finite ? "alpha finite" : "alpha NOT finite") + ", window slopes in [" + sci(slope_lo) +
                  ", " + sci(slope_hi) + "]" + outer + ", small-t slopes in [" + sci(small_lo) + ", " + sci(small_hi) +
                  "], max sup - bound " + sci(excess)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"Gram positivity", gram_positivity},
      {"q-commutation relations", q_relations},
      {"field moments equal measure moments", moments_vs_measure},
      {"q-Hermite orthogonality", orthogonality},
      {"Mehler series and product", mehler_dual},
      {"Wick product consistency", wick_consistency},
      {"conditional expectation", conditional_expectation},
      {"Markov criterion", markov_criterion},
      {"kernel normalization and eigen-identity", kernel_identities},
      {"free closed forms", free_closed_forms},
      {"free OU generator", free_ou_generator_check},
      {"Chapman-Kolmogorov", chapman_kolmogorov},
      {"three-way moment agreement", three_way_moments},
      {"fermionic tables", fermionic_tables},
      {"martingale families", martingale_families},
      {"ultracontractivity", ultracontractivity},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("error: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!outcome.passed) ++failures;
    std::printf("%s %2zu %s: %s (%.1f s)\n", outcome.passed ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                outcome.detail.c_str(), seconds);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
